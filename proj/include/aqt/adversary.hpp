#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqt/rational.hpp"
#include "aqt/topology.hpp"

namespace aqt {

using Round = std::int64_t;
using PacketId = std::int64_t;

struct Packet
{
	PacketId id = 0;
	Round round = 1;
	NodeId source = 0;
	NodeId dest = 0;
	// Lower-bound route type 1..ell+1; 0 for everything else.
	int type = 0;

	friend bool operator==(const Packet&, const Packet&) = default;
};

struct RateBound
{
	Rational rho;
	std::int64_t sigma = 0;
};

// Packets sorted by injection round, ids in injection order.
class InjectionPattern
{
	public:

	InjectionPattern() = default;

	// Stable-sorts by round. Ids are kept as given.
	explicit InjectionPattern(std::vector<Packet> packets,
	                          std::optional<RateBound> bound = std::nullopt);

	// Stable-sorts by round and renumbers ids 0, 1, ... in that order.
	static InjectionPattern numbered(std::vector<Packet> packets,
	                                 std::optional<RateBound> bound = std::nullopt);

	const std::vector<Packet>& packets() const { return packets_; }
	const std::optional<RateBound>& bound() const { return bound_; }
	void set_bound(std::optional<RateBound> b) { bound_ = b; }

	bool empty() const { return packets_.empty(); }
	std::size_t size() const { return packets_.size(); }
	Round last_round() const { return packets_.empty() ? 0 : packets_.back().round; }

	// Packets injected in rounds [from, to].
	std::span<const Packet> between(Round from, Round to) const;
	std::span<const Packet> at(Round t) const { return between(t, t); }

	private:

	std::vector<Packet> packets_;
	std::optional<RateBound> bound_;
};

// Throws InvalidPacket unless every packet has round >= 1 and a source that
// strictly precedes its destination.
void check_packets(const InjectionPattern& pattern, const Topology& topo);

// Packet must be forwarded out of v: source <= v < dest along its path.
inline bool crosses(const Topology& topo, const Packet& p, NodeId v)
{
	return topo.precedes_or_equal(p.source, v) && topo.precedes(v, p.dest);
}

// N_[s,t](v).
std::int64_t count_crossing(const InjectionPattern& pattern, const Topology& topo, NodeId v,
                            Round s, Round t);

struct BoundViolation
{
	NodeId node = kNoNode;
	Round start = 0;
	Round end = 0;
	std::int64_t count = 0;
	// count - rho * (end - start + 1)
	Rational excess;
};

// nullopt iff N_T(v) <= rho |T| + sigma for every buffer and interval. On
// failure returns the interval with the largest excess over all buffers.
std::optional<BoundViolation> validate_bounded(const InjectionPattern& pattern,
                                               const Topology& topo, Rational rho,
                                               std::int64_t sigma);

// Largest N_T(v) - rho |T| over all buffers and intervals (0 when empty).
Rational max_excess(const InjectionPattern& pattern, const Topology& topo, Rational rho);

struct ExcessTrace
{
	NodeId node = kNoNode;
	// values[t] for t = 0..horizon; values[0] == 0.
	std::vector<Rational> values;
};

ExcessTrace excess_trace(const InjectionPattern& pattern, const Topology& topo, NodeId v,
                         Rational rho, Round horizon);

// Round t -> floor((t-1)/ell) + 1. A (rho, sigma) bound becomes (ell*rho, sigma).
InjectionPattern ell_reduction(const InjectionPattern& pattern, int ell);

// Token-bucket generator: each buffer's out-edge holds at most sigma + rho
// tokens and gains rho per round; a packet is emitted only if every edge on
// its path has a whole token. Deterministic in `seed`.
InjectionPattern random_bounded(std::uint64_t seed, const Topology& topo, Rational rho,
                                std::int64_t sigma, Round horizon,
                                std::span<const NodeId> dests);

// CSV with header round,source,dest,type.
void write_pattern_csv(std::ostream& out, const InjectionPattern& pattern);
InjectionPattern read_pattern_csv(std::istream& in);

//
// Lower-bound adversary on a line of n = (ell+1) m^ell buffers.
//

struct LbParams
{
	int m = 2;
	int ell = 2;
	Rational rho{1, 2};

	// Throws InvalidParams unless m >= 2, ell >= 2, rho <= 1,
	// rho * m integral and rho > 1/(ell+1).
	void validate() const;
	std::int64_t n() const;
	// m^(ell+1) rounds, numbered 0 .. horizon-1.
	Round horizon() const;
	std::int64_t packets_per_route() const;
};

std::int64_t ipow(std::int64_t base, int exp);

// Base-m digits of t, least significant first: digits[i] == t_i for
// i = 0..ell. Throws OutOfRange unless 0 <= t < m^(ell+1).
std::vector<int> base_m_digits(Round t, int m, int ell);

// Injection site of type-k packets in the phase whose digits are given
// (indexed as returned by base_m_digits; digits[0] is ignored).
std::int64_t lb_site(const LbParams& params, int k, std::span<const int> digits);

// Right-most injection site during lower-bound round t (0-based).
std::int64_t lb_frontier(const LbParams& params, Round t);

// Lower-bound round t (0-based) is injected as engine round t + 1.
inline Round lb_round_to_engine(Round t) { return t + 1; }

// Whether round offset r of a phase carries an injection on every route.
bool lb_injects_at(const LbParams& params, int offset);

InjectionPattern lb_pattern(const LbParams& params);

} // namespace aqt
