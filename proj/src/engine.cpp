#include "aqt/engine.hpp"

#include <algorithm>

#include "aqt/error.hpp"

namespace aqt {

Configuration::Configuration(int vertex_count)
: nodes_(vertex_count)
{}

void Configuration::push(NodeId v, PseudoBufferKey key, StoredPacket p)
{
	auto& node = nodes_[v];
	auto it = std::lower_bound(node.begin(), node.end(), key,
	                           [](const PseudoBuffer& b, const PseudoBufferKey& k) { return b.key < k; });
	if (it == node.end() || it->key != key)
		it = node.insert(it, PseudoBuffer{key, {}});
	it->items.push_back(p);
	++total_;
}

std::optional<StoredPacket> Configuration::pop(NodeId v, PseudoBufferKey key)
{
	auto& node = nodes_[v];
	auto it = std::lower_bound(node.begin(), node.end(), key,
	                           [](const PseudoBuffer& b, const PseudoBufferKey& k) { return b.key < k; });
	if (it == node.end() || it->key != key)
		return std::nullopt;
	StoredPacket p = it->items.back();
	it->items.pop_back();
	if (it->items.empty())
		node.erase(it);
	--total_;
	return p;
}

const PseudoBuffer* Configuration::find(NodeId v, PseudoBufferKey key) const
{
	const auto& node = nodes_[v];
	auto it = std::lower_bound(node.begin(), node.end(), key,
	                           [](const PseudoBuffer& b, const PseudoBufferKey& k) { return b.key < k; });
	if (it == node.end() || it->key != key)
		return nullptr;
	return &*it;
}

std::size_t Configuration::size(NodeId v, PseudoBufferKey key) const
{
	const auto* b = find(v, key);
	return b ? b->items.size() : 0;
}

int Configuration::load(NodeId v) const
{
	int n = 0;
	for (const auto& b : nodes_[v])
		n += static_cast<int>(b.items.size());
	return n;
}

std::vector<int> Configuration::loads() const
{
	std::vector<int> out(nodes_.size());
	for (std::size_t v = 0; v < nodes_.size(); ++v)
		out[v] = load(static_cast<NodeId>(v));
	return out;
}

bool check_feasible(const ActivationSet& act)
{
	std::vector<NodeId> nodes;
	nodes.reserve(act.size());
	for (const auto& a : act)
		nodes.push_back(a.node);
	std::sort(nodes.begin(), nodes.end());
	return std::adjacent_find(nodes.begin(), nodes.end()) == nodes.end();
}

void normalize(ActivationSet& act) { std::sort(act.begin(), act.end()); }

ActivationSet drain_activation(const Configuration& config)
{
	ActivationSet out;
	for (NodeId v = 0; v < config.vertex_count(); ++v)
		if (!config.at(v).empty())
			out.push_back({v, config.at(v).back().key});
	return out;
}

ActivationSet Scheduler::select(const Configuration& config, Round t, bool& drained)
{
	ActivationSet act = activate(config, t);
	drained = false;
	if (act.empty() && drain_) {
		act = drain_activation(config);
		drained = !act.empty();
	}
	normalize(act);
	return act;
}

Round effective_horizon(const InjectionPattern& pattern, int batch, Round horizon)
{
	Round last = pattern.last_round();
	Round need = (last + batch - 1) / batch * batch;
	return std::max(horizon, need);
}

std::pair<Round, Round> accepted_window(Round t, int batch)
{
	if (t % batch != 0)
		return {1, 0};
	return {t - batch + 1, t};
}

Simulation::Simulation(const Topology& topo, const InjectionPattern& pattern, Scheduler& scheduler)
: topo_(topo)
, pattern_(pattern)
, scheduler_(scheduler)
, config_(topo.vertex_count())
{
	check_packets(pattern, topo);
}

RoundRecord Simulation::step(Round t, std::span<const Packet> accepted)
{
	RoundRecord rec;
	rec.round = t;

	for (const auto& p : accepted) {
		config_.push(p.source, scheduler_.route(p.source, p.dest), {p.id, p.dest});
		rec.injected.push_back(p.id);
	}
	injected_ += static_cast<std::int64_t>(accepted.size());
	rec.load_before = config_.loads();

	StepView view{topo_, scheduler_, config_, t, accepted, rec, nullptr, injected_, delivered_};
	for (auto* c : checkers_)
		c->after_injection(view);

	rec.activation = scheduler_.select(config_, t, rec.drained);
	if (!check_feasible(rec.activation))
		throw Error(ErrorCode::InfeasibleActivation,
		            "round " + std::to_string(t) + ": two pseudo-buffers active at one node");
	for (const auto& a : rec.activation)
		if (!topo_.is_buffer(a.node))
			throw Error(ErrorCode::InfeasibleActivation,
			            "round " + std::to_string(t) + ": node " + std::to_string(a.node) +
			                " cannot forward");

	// collect every send before applying any receive
	struct Move
	{
		NodeId from;
		StoredPacket packet;
	};
	std::vector<Move> moves;
	for (const auto& a : rec.activation)
		if (auto p = config_.pop(a.node, a.key))
			moves.push_back({a.node, *p});

	std::vector<char> edge_used(topo_.vertex_count(), 0);
	for (const auto& mv : moves) {
		if (edge_used[mv.from]++)
			throw Error(ErrorCode::CapacityViolation,
			            "round " + std::to_string(t) + ": edge out of " + std::to_string(mv.from) +
			                " used twice");
		rec.sent.emplace_back(mv.from, mv.packet.id);
	}
	for (const auto& mv : moves) {
		NodeId to = topo_.next_hop(mv.from);
		if (to == mv.packet.dest) {
			rec.delivered.push_back(mv.packet.id);
			++delivered_;
		} else {
			config_.push(to, scheduler_.route(to, mv.packet.dest), mv.packet);
		}
	}
	rec.load_after = config_.loads();

	StepView after{topo_, scheduler_, config_, t, accepted, rec, &rec.activation, injected_, delivered_};
	for (auto* c : checkers_)
		c->after_forwarding(after);
	return rec;
}

Trace Simulation::run(Round horizon)
{
	Trace trace;
	run(horizon, trace);
	return trace;
}

void Simulation::run(Round horizon, Trace& trace)
{
	const int batch = scheduler_.batch_length();
	trace.horizon = effective_horizon(pattern_, batch, horizon);
	trace.rounds.reserve(trace.horizon);
	for (Round t = 1; t <= trace.horizon; ++t) {
		auto [from, to] = accepted_window(t, batch);
		trace.rounds.push_back(step(t, pattern_.between(from, to)));
		const auto& rec = trace.rounds.back();
		for (int x : rec.load_before)
			trace.max_load = std::max(trace.max_load, x);
		for (int x : rec.load_after)
			trace.max_load = std::max(trace.max_load, x);
		trace.injected = injected_;
		trace.delivered = delivered_;
	}
}

} // namespace aqt
