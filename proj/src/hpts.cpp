#include <algorithm>
#include <limits>

#include "aqt/error.hpp"
#include "aqt/schedulers.hpp"

namespace aqt {

HierarchicalPartition::HierarchicalPartition(int m, int ell)
: m_(m)
, ell_(ell)
{
	if (ell < 1)
		throw Error(ErrorCode::InvalidEll, "ell must be >= 1, got " + std::to_string(ell));
	if (m < 2)
		throw Error(ErrorCode::InvalidParams, "m must be >= 2, got " + std::to_string(m));
	pow_.push_back(1);
	for (int j = 1; j <= ell + 1; ++j) {
		if (pow_.back() > std::numeric_limits<int>::max() / m)
			throw Error(ErrorCode::InvalidParams, "m^ell too large");
		pow_.push_back(pow_.back() * m);
	}
	size_ = pow_[ell];
}

Segment intermediate_dest(const HierarchicalPartition& part, std::int64_t i, std::int64_t w)
{
	if (i < 0 || i >= w || w > part.size())
		throw Error(ErrorCode::OutOfRange, "intermediate_dest needs 0 <= i < w <= m^ell");
	if (w == part.size())
		return {static_cast<NodeId>(w), part.ell() - 1};
	for (int j = part.ell() - 1; j >= 0; --j) {
		const auto p = part.power(j);
		if ((i / p) % part.m() != (w / p) % part.m())
			return {static_cast<NodeId>(w / p * p), j};
	}
	throw Error(ErrorCode::OutOfRange, "intermediate_dest: i == w");
}

int hpts_branching_for(std::int64_t n, int ell)
{
	int m = 2;
	while (ipow(m, ell) < n)
		++m;
	return m;
}

HptsScheduler::HptsScheduler(const Topology& topo, int m, int ell, LevelOrder order)
: topo_(topo)
, part_(m, ell)
, order_(order)
, n_(topo.node_count())
{
	if (topo.kind() != TopologyKind::Line)
		throw Error(ErrorCode::InvalidParams, "hpts needs a line");
	if (n_ > part_.size())
		throw Error(ErrorCode::InvalidParams, "hpts needs n <= m^ell; n = " + std::to_string(n_) +
		                                          ", m^ell = " + std::to_string(part_.size()));
}

PseudoBufferKey HptsScheduler::route(NodeId at, NodeId dest) const
{
	auto s = intermediate_dest(part_, at, dest);
	return {s.level, s.x};
}

std::optional<int> HptsScheduler::active_level(Round t) const
{
	const int q = static_cast<int>(t % part_.ell());
	return order_ == LevelOrder::Decreasing ? part_.ell() - 1 - q : q;
}

std::vector<NodeId> HptsScheduler::targets(int j, std::int64_t a) const
{
	std::vector<NodeId> out;
	for (int k = 0; k < part_.m(); ++k)
		out.push_back(static_cast<NodeId>(a + k * part_.power(j)));
	// the sink one past a full line is a top-level target
	if (j == part_.ell() - 1 && n_ == part_.size())
		out.push_back(n_);
	return out;
}

ActivationSet HptsScheduler::activate(const Configuration& config, Round t)
{
	const int lambda = *active_level(t);
	const std::int64_t span = part_.power(lambda + 1);

	std::vector<NodeId> leftmost(n_ + 1, kNoNode);
	for (NodeId i = 0; i < n_; ++i)
		for (const auto& b : config.at(i))
			if (b.key.level == lambda && b.items.size() >= 2 && leftmost[b.key.target] == kNoNode)
				leftmost[b.key.target] = i;

	std::vector<int> level_of(n_, -1);
	std::vector<NodeId> target_of(n_, kNoNode);
	ActivationSet act;
	auto turn_on = [&](NodeId i, int j, NodeId x) {
		level_of[i] = j;
		target_of[i] = x;
		act.push_back({i, {j, x}});
	};

	// the PPTS pattern inside every level-lambda interval
	for (std::int64_t a = 0; a < n_; a += span) {
		auto ws = targets(lambda, a);
		NodeId sentinel = ws.back();
		for (int k = static_cast<int>(ws.size()) - 1; k >= 0; --k) {
			NodeId w = ws[k];
			if (w > n_)
				continue;
			NodeId ik = leftmost[w];
			if (ik == kNoNode || ik >= sentinel)
				continue;
			NodeId last = std::min(sentinel - 1, w - 1);
			for (NodeId i = ik; i <= last; ++i)
				turn_on(i, lambda, w);
			sentinel = ik;
		}
	}

	// lower levels, highest first, so chains of pre-bad arrivals cascade
	for (int j = lambda - 1; j >= 0; --j) {
		const std::int64_t width = part_.power(j + 1);
		for (std::int64_t a = width; a < n_; a += width) {
			const auto ai = static_cast<NodeId>(a);
			if (level_of[ai] >= 0 || level_of[ai - 1] < 0 || target_of[ai - 1] != ai)
				continue;
			const auto* sender = config.find(ai - 1, {level_of[ai - 1], target_of[ai - 1]});
			if (!sender)
				continue;
			const StoredPacket& p = sender->items.back();
			if (p.dest == ai)
				continue;
			auto seg = intermediate_dest(part_, ai, p.dest);
			if (seg.level != j || config.size(ai, {j, seg.x}) == 0)
				continue;
			const auto cap = std::min<std::int64_t>({seg.x - 1, a + width - 1, n_ - 1});
			for (std::int64_t i = a; i <= cap && level_of[i] < 0; ++i)
				turn_on(static_cast<NodeId>(i), j, seg.x);
		}
	}
	return act;
}

} // namespace aqt
