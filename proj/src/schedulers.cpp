#include "aqt/schedulers.hpp"

#include <algorithm>

#include "aqt/error.hpp"

namespace aqt {

std::string to_string(SchedulerKind k)
{
	switch (k) {
		case SchedulerKind::Pts: return "pts";
		case SchedulerKind::Ppts: return "ppts";
		case SchedulerKind::Hpts: return "hpts";
		case SchedulerKind::TreePts: return "tree-pts";
		case SchedulerKind::TreePpts: return "tree-ppts";
		case SchedulerKind::Greedy: return "greedy";
		case SchedulerKind::Optimal: return "optimal";
	}
	return "?";
}

SchedulerKind parse_scheduler_kind(const std::string& s)
{
	for (auto k : {SchedulerKind::Pts, SchedulerKind::Ppts, SchedulerKind::Hpts, SchedulerKind::TreePts,
	               SchedulerKind::TreePpts, SchedulerKind::Greedy, SchedulerKind::Optimal})
		if (to_string(k) == s)
			return k;
	throw Error(ErrorCode::InvalidParams, "unknown scheduler '" + s + "'");
}

std::unique_ptr<Scheduler> make_scheduler(const SchedulerSpec& spec, const Topology& topo)
{
	std::unique_ptr<Scheduler> out;
	auto dests = spec.dests;
	switch (spec.kind) {
		case SchedulerKind::Pts:
		case SchedulerKind::TreePts:
			if (dests.empty())
				dests = {topo.root()};
			if (dests.size() != 1)
				throw Error(ErrorCode::InvalidParams, "pts takes a single destination");
			if (spec.kind == SchedulerKind::TreePts && dests[0] != topo.root())
				throw Error(ErrorCode::InvalidParams, "tree-pts forwards to the root only");
			out = std::make_unique<PathScheduler>(topo, dests, spec.kind == SchedulerKind::TreePts,
			                                      to_string(spec.kind));
			break;
		case SchedulerKind::Ppts:
		case SchedulerKind::TreePpts:
			if (dests.empty())
				dests = {topo.root()};
			out = std::make_unique<PathScheduler>(topo, dests, spec.kind == SchedulerKind::TreePpts,
			                                      to_string(spec.kind));
			break;
		case SchedulerKind::Hpts:
			out = std::make_unique<HptsScheduler>(topo, spec.m, spec.ell, spec.order);
			break;
		case SchedulerKind::Greedy:
			out = std::make_unique<GreedyScheduler>();
			break;
		case SchedulerKind::Optimal:
			throw Error(ErrorCode::InvalidParams, "the optimal scheduler is a search, not a round rule");
	}
	out->set_drain(spec.drain);
	return out;
}

//
// PTS / PPTS and their tree forms
//

PathScheduler::PathScheduler(const Topology& topo, std::vector<NodeId> dests, bool tree_rule,
                             std::string name)
: topo_(topo)
, dests_(std::move(dests))
, is_dest_(topo.vertex_count(), 0)
, tree_rule_(tree_rule)
, name_(std::move(name))
{
	if (!tree_rule_ && topo.kind() != TopologyKind::Line)
		throw Error(ErrorCode::InvalidParams, name_ + " needs a line; use the tree variant");
	for (NodeId w : dests_) {
		if (!topo.is_vertex(w))
			throw Error(ErrorCode::InvalidParams, "destination " + std::to_string(w) + " out of range");
		is_dest_[w] = 1;
	}
	std::sort(dests_.begin(), dests_.end());
	dests_.erase(std::unique(dests_.begin(), dests_.end()), dests_.end());
	// deeper first, so w_i below w_j gets the smaller index
	std::stable_sort(dests_.begin(), dests_.end(),
	                 [&](NodeId a, NodeId b) { return topo.depth_of(a) > topo.depth_of(b); });
}

PseudoBufferKey PathScheduler::route(NodeId, NodeId dest) const
{
	if (dest < 0 || dest >= static_cast<NodeId>(is_dest_.size()) || !is_dest_[dest])
		throw Error(ErrorCode::InvalidPacket,
		            name_ + " does not serve destination " + std::to_string(dest));
	return {0, dest};
}

ActivationSet PathScheduler::activate(const Configuration& config, Round)
{
	return tree_rule_ ? activate_tree(config) : activate_line(config);
}

ActivationSet PathScheduler::activate_line(const Configuration& config) const
{
	const int d = static_cast<int>(dests_.size());
	std::vector<NodeId> index(topo_.vertex_count(), -1);
	for (int k = 0; k < d; ++k)
		index[dests_[k]] = k;

	std::vector<NodeId> leftmost(d, kNoNode);
	for (NodeId i = 0; i < topo_.node_count(); ++i)
		for (const auto& b : config.at(i))
			if (b.items.size() >= 2) {
				int k = index[b.key.target];
				if (leftmost[k] == kNoNode)
					leftmost[k] = i;
			}

	ActivationSet act;
	NodeId sentinel = dests_[d - 1];
	for (int k = d - 1; k >= 0; --k) {
		NodeId ik = leftmost[k];
		if (ik == kNoNode || ik >= sentinel)
			continue;
		NodeId last = std::min(sentinel - 1, dests_[k] - 1);
		for (NodeId i = ik; i <= last; ++i)
			act.push_back({i, {0, dests_[k]}});
		sentinel = ik;
	}
	return act;
}

ActivationSet PathScheduler::activate_tree(const Configuration& config) const
{
	const int d = static_cast<int>(dests_.size());
	std::vector<NodeId> index(topo_.vertex_count(), -1);
	for (int k = 0; k < d; ++k)
		index[dests_[k]] = k;

	std::vector<std::vector<NodeId>> bad(d);
	for (NodeId v = 0; v < topo_.vertex_count(); ++v)
		for (const auto& b : config.at(v))
			if (b.items.size() >= 2)
				bad[index[b.key.target]].push_back(v);

	ActivationSet act;
	std::vector<char> active(topo_.vertex_count(), 0);
	for (int k = d - 1; k >= 0; --k) {
		if (bad[k].empty())
			continue;
		for (NodeId u : min_antichain(topo_, bad[k]))
			for (NodeId v = u; v != dests_[k]; v = topo_.next_hop(v))
				if (!active[v]) {
					active[v] = 1;
					act.push_back({v, {0, dests_[k]}});
				}
	}
	return act;
}

ActivationSet GreedyScheduler::activate(const Configuration& config, Round)
{
	ActivationSet act;
	for (NodeId v = 0; v < config.vertex_count(); ++v)
		if (!config.at(v).empty())
			act.push_back({v, {0, kAnyTarget}});
	return act;
}

} // namespace aqt
