#include "aqt/adversary.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "aqt/error.hpp"
#include "aqt/rng.hpp"

namespace aqt {

InjectionPattern::InjectionPattern(std::vector<Packet> packets, std::optional<RateBound> bound)
: packets_(std::move(packets))
, bound_(bound)
{
	std::stable_sort(packets_.begin(), packets_.end(),
	                 [](const Packet& a, const Packet& b) { return a.round < b.round; });
}

InjectionPattern InjectionPattern::numbered(std::vector<Packet> packets,
                                            std::optional<RateBound> bound)
{
	InjectionPattern out(std::move(packets), bound);
	PacketId next = 0;
	for (auto& p : out.packets_)
		p.id = next++;
	return out;
}

std::span<const Packet> InjectionPattern::between(Round from, Round to) const
{
	auto lo = std::lower_bound(packets_.begin(), packets_.end(), from,
	                           [](const Packet& p, Round t) { return p.round < t; });
	auto hi = std::upper_bound(lo, packets_.end(), to,
	                           [](Round t, const Packet& p) { return t < p.round; });
	return {packets_.data() + (lo - packets_.begin()), static_cast<std::size_t>(hi - lo)};
}

void check_packets(const InjectionPattern& pattern, const Topology& topo)
{
	for (const auto& p : pattern.packets()) {
		if (p.round < 1)
			throw Error(ErrorCode::InvalidPacket,
			            "packet " + std::to_string(p.id) + " injected before round 1");
		if (!topo.is_buffer(p.source) || !topo.is_vertex(p.dest) || !topo.precedes(p.source, p.dest))
			throw Error(ErrorCode::InvalidPacket,
			            "packet " + std::to_string(p.id) + ": source " + std::to_string(p.source) +
			                " does not precede destination " + std::to_string(p.dest));
	}
}

std::int64_t count_crossing(const InjectionPattern& pattern, const Topology& topo, NodeId v,
                            Round s, Round t)
{
	if (s > t)
		return 0;
	std::int64_t count = 0;
	for (const auto& p : pattern.between(s, t))
		count += crosses(topo, p, v) ? 1 : 0;
	return count;
}

namespace {

struct Event
{
	Round round;
	std::int64_t count;
};

// Per-vertex list of (round, N_{round}(v)), rounds increasing.
std::vector<std::vector<Event>> crossing_events(const InjectionPattern& pattern,
                                                const Topology& topo)
{
	std::vector<std::vector<Event>> events(topo.vertex_count());
	for (const auto& p : pattern.packets()) {
		for (NodeId v = p.source; v != p.dest && v != kNoNode; v = topo.next_hop(v)) {
			auto& ev = events[v];
			if (!ev.empty() && ev.back().round == p.round)
				++ev.back().count;
			else
				ev.push_back({p.round, 1});
		}
	}
	return events;
}

// Kadane over N_t(v) - rho with gaps of empty rounds folded in closed form.
// Returns the best interval ending at some event round.
BoundViolation best_interval(NodeId v, const std::vector<Event>& ev, const Rational& rho)
{
	// everything scaled by rho's denominator
	const std::int64_t den = rho.denominator();
	const std::int64_t r = rho.numerator();
	BoundViolation best;
	best.node = v;
	bool have_best = false;
	std::int64_t best_scaled = 0;
	std::int64_t cur = 0;
	Round start = 0;
	std::int64_t cur_count = 0;
	Round last = 0;
	bool have_last = false;
	for (const auto& e : ev) {
		std::int64_t prev = have_last ? cur - r * (e.round - last - 1) : 0;
		if (have_last && prev > 0) {
			cur = prev + e.count * den - r;
			cur_count += e.count;
		} else {
			start = e.round;
			cur = e.count * den - r;
			cur_count = e.count;
		}
		last = e.round;
		have_last = true;
		if (!have_best || cur > best_scaled) {
			best_scaled = cur;
			best.start = start;
			best.end = e.round;
			best.count = cur_count;
			have_best = true;
		}
	}
	best.excess = Rational(best_scaled, den);
	return best;
}

} // namespace

std::optional<BoundViolation> validate_bounded(const InjectionPattern& pattern,
                                               const Topology& topo, Rational rho,
                                               std::int64_t sigma)
{
	auto events = crossing_events(pattern, topo);
	std::optional<BoundViolation> worst;
	for (NodeId v = 0; v < topo.vertex_count(); ++v) {
		if (events[v].empty())
			continue;
		auto b = best_interval(v, events[v], rho);
		if (b.excess > Rational(sigma) && (!worst || b.excess > worst->excess))
			worst = b;
	}
	return worst;
}

Rational max_excess(const InjectionPattern& pattern, const Topology& topo, Rational rho)
{
	auto events = crossing_events(pattern, topo);
	Rational best = 0;
	for (NodeId v = 0; v < topo.vertex_count(); ++v)
		if (!events[v].empty())
			best = std::max(best, best_interval(v, events[v], rho).excess);
	return best;
}

ExcessTrace excess_trace(const InjectionPattern& pattern, const Topology& topo, NodeId v,
                         Rational rho, Round horizon)
{
	if (horizon < 1)
		throw Error(ErrorCode::OutOfRange, "excess trace needs horizon >= 1");
	std::vector<std::int64_t> per_round(horizon + 1, 0);
	for (const auto& p : pattern.between(1, horizon))
		if (crosses(topo, p, v))
			++per_round[p.round];

	ExcessTrace out{v, std::vector<Rational>(horizon + 1, Rational(0))};
	for (Round t = 1; t <= horizon; ++t)
		out.values[t] = std::max(out.values[t - 1] + Rational(per_round[t]) - rho, Rational(0));
	return out;
}

InjectionPattern ell_reduction(const InjectionPattern& pattern, int ell)
{
	if (ell < 1)
		throw Error(ErrorCode::InvalidEll, "ell must be >= 1, got " + std::to_string(ell));
	std::vector<Packet> out = pattern.packets();
	for (auto& p : out)
		p.round = (p.round - 1) / ell + 1;
	std::optional<RateBound> bound;
	if (pattern.bound())
		bound = RateBound{pattern.bound()->rho * Rational(ell), pattern.bound()->sigma};
	return InjectionPattern(std::move(out), bound);
}

InjectionPattern random_bounded(std::uint64_t seed, const Topology& topo, Rational rho,
                                std::int64_t sigma, Round horizon, std::span<const NodeId> dests)
{
	if (rho > Rational(1) || rho < Rational(0))
		throw Error(ErrorCode::InvalidParams, "generator needs 0 <= rho <= 1");
	if (dests.empty())
		throw Error(ErrorCode::InvalidParams, "generator needs at least one destination");

	// candidate sources per destination
	std::vector<std::pair<NodeId, std::vector<NodeId>>> routes;
	for (NodeId w : dests) {
		if (!topo.is_vertex(w))
			throw Error(ErrorCode::InvalidParams, "destination " + std::to_string(w) + " out of range");
		std::vector<NodeId> sources;
		for (NodeId u = 0; u < topo.vertex_count(); ++u)
			if (topo.precedes(u, w))
				sources.push_back(u);
		if (!sources.empty())
			routes.emplace_back(w, std::move(sources));
	}

	// token counts scaled by rho's denominator
	const std::int64_t den = rho.denominator();
	const std::int64_t refill = rho.numerator();
	const std::int64_t capacity = sigma * den + refill;
	std::vector<std::int64_t> tokens(topo.vertex_count(), capacity);
	CounterRng rng(seed, 0x7a11);
	std::vector<Packet> packets;
	if (routes.empty())
		return InjectionPattern::numbered({}, RateBound{rho, sigma});

	for (Round t = 1; t <= horizon; ++t) {
		for (auto& b : tokens)
			b = std::min(b + refill, capacity);
		// mostly light traffic with occasional bursts that drain the buckets
		std::int64_t attempts = rng.between(0, 3);
		if (rng.chance(1, 12))
			attempts += rng.between(1, 2 * sigma + 4);
		for (std::int64_t a = 0; a < attempts; ++a) {
			const auto& [w, sources] = routes[rng.below(routes.size())];
			NodeId src = sources[rng.below(sources.size())];
			bool ok = true;
			for (NodeId v = src; v != w; v = topo.next_hop(v))
				if (tokens[v] < den) {
					ok = false;
					break;
				}
			if (!ok)
				continue;
			for (NodeId v = src; v != w; v = topo.next_hop(v))
				tokens[v] -= den;
			packets.push_back({0, t, src, w, 0});
		}
	}
	return InjectionPattern::numbered(std::move(packets), RateBound{rho, sigma});
}

void write_pattern_csv(std::ostream& out, const InjectionPattern& pattern)
{
	out << "round,source,dest,type\n";
	for (const auto& p : pattern.packets()) {
		out << p.round << ',' << p.source << ',' << p.dest << ',';
		if (p.type != 0)
			out << p.type;
		out << '\n';
	}
}

InjectionPattern read_pattern_csv(std::istream& in)
{
	std::string line;
	if (!std::getline(in, line))
		return {};
	if (line.rfind("round,source,dest", 0) != 0)
		throw Error(ErrorCode::ParseError, "pattern CSV must start with header round,source,dest,type");
	std::vector<Packet> packets;
	int lineno = 1;
	while (std::getline(in, line)) {
		++lineno;
		if (!line.empty() && line.back() == '\r')
			line.pop_back();
		if (line.empty())
			continue;
		std::vector<std::string> cells;
		std::stringstream ss(line);
		std::string cell;
		while (std::getline(ss, cell, ','))
			cells.push_back(cell);
		if (line.back() == ',')
			cells.emplace_back();
		if (cells.size() < 3 || cells.size() > 4)
			throw Error(ErrorCode::ParseError, "pattern CSV line " + std::to_string(lineno));
		try {
			Packet p;
			p.round = std::stoll(cells[0]);
			p.source = std::stoi(cells[1]);
			p.dest = std::stoi(cells[2]);
			p.type = cells.size() == 4 && !cells[3].empty() ? std::stoi(cells[3]) : 0;
			packets.push_back(p);
		} catch (const std::logic_error&) {
			throw Error(ErrorCode::ParseError, "pattern CSV line " + std::to_string(lineno));
		}
	}
	return InjectionPattern::numbered(std::move(packets));
}

} // namespace aqt
