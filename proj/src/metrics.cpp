#include "aqt/metrics.hpp"

namespace aqt {

BadnessSnapshot badness(const Configuration& config, const Topology& topo, int levels)
{
	const int nv = topo.vertex_count();
	BadnessSnapshot snap;
	snap.level.assign(levels, std::vector<std::int64_t>(nv, 0));
	snap.total.assign(nv, 0);

	if (topo.is_line()) {
		// difference arrays: bad packets at u heading for x cover [u, x-1]
		std::vector<std::vector<std::int64_t>> diff(levels, std::vector<std::int64_t>(nv + 1, 0));
		for (NodeId u = 0; u < nv; ++u)
			for (const auto& b : config.at(u)) {
				if (b.items.size() < 2 || b.key.target == kAnyTarget)
					continue;
				const auto beta = static_cast<std::int64_t>(b.items.size()) - 1;
				diff[b.key.level][u] += beta;
				diff[b.key.level][b.key.target] -= beta;
			}
		for (int j = 0; j < levels; ++j) {
			std::int64_t run = 0;
			for (NodeId v = 0; v < nv; ++v) {
				run += diff[j][v];
				snap.level[j][v] = run;
				snap.total[v] += run;
			}
		}
		return snap;
	}

	for (NodeId u = 0; u < nv; ++u)
		for (const auto& b : config.at(u)) {
			if (b.items.size() < 2 || b.key.target == kAnyTarget)
				continue;
			const auto beta = static_cast<std::int64_t>(b.items.size()) - 1;
			for (NodeId v = u; v != b.key.target && v != kNoNode; v = topo.next_hop(v)) {
				snap.level[b.key.level][v] += beta;
				snap.total[v] += beta;
			}
		}
	return snap;
}

nlohmann::json CheckerReport::to_json() const
{
	nlohmann::json j{{"checker", checker}, {"round", round}, {"node", node},
	                 {"expected", expected}, {"observed", observed}};
	if (!detail.empty())
		j["detail"] = detail;
	return j;
}

CheckerFailure::CheckerFailure(CheckerReport report)
: Error(ErrorCode::CheckerFailure, report.checker + " at round " + std::to_string(report.round) +
                                       (report.node == kNoNode ? "" : ", node " + std::to_string(report.node)) +
                                       ": expected " + report.expected + ", observed " + report.observed +
                                       (report.detail.empty() ? "" : " (" + report.detail + ")"))
, report_(std::move(report))
{}

ExcessTracker::ExcessTracker(const Topology& topo, Rational rho, int batch)
: topo_(topo)
, rate_(rho * Rational(batch))
, batch_(batch)
, den_(rate_.denominator())
, rate_scaled_(rate_.numerator())
, xi_(topo.vertex_count(), 0)
, prev_(topo.vertex_count(), 0)
, arrivals_(topo.vertex_count(), 0)
{}

void ExcessTracker::advance(Round t, std::span<const Packet> accepted)
{
	if (t % batch_ != 0)
		return;
	std::fill(arrivals_.begin(), arrivals_.end(), 0);
	for (const auto& p : accepted)
		for (NodeId v = p.source; v != p.dest && v != kNoNode; v = topo_.next_hop(v))
			++arrivals_[v];
	prev_ = xi_;
	for (std::size_t v = 0; v < xi_.size(); ++v)
		xi_[v] = std::max<std::int64_t>(xi_[v] + arrivals_[v] * den_ - rate_scaled_, 0);
}

} // namespace aqt
