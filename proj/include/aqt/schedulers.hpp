#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aqt/engine.hpp"

namespace aqt {

enum class SchedulerKind
{
	Pts,
	Ppts,
	Hpts,
	TreePts,
	TreePpts,
	Greedy,
	Optimal,
};

std::string to_string(SchedulerKind k);
SchedulerKind parse_scheduler_kind(const std::string& s);

// Order in which HPTS visits levels within a phase.
enum class LevelOrder
{
	Decreasing,
	Increasing,
};

struct SchedulerSpec
{
	SchedulerKind kind = SchedulerKind::Ppts;
	// PTS: single destination (defaults to the sink / root). PPTS and tree
	// PPTS: the destination set.
	std::vector<NodeId> dests;
	int m = 2;
	int ell = 1;
	LevelOrder order = LevelOrder::Decreasing;
	bool drain = false;
};

std::unique_ptr<Scheduler> make_scheduler(const SchedulerSpec& spec, const Topology& topo);

// Level-0 keys aimed at one of a fixed destination set, activated along
// root paths from the minimal bad nodes. On a line this is PPTS (and PTS
// when the set is a single destination).
class PathScheduler : public Scheduler
{
	public:

	// `tree_rule`: use the min-antichain path union instead of interval caps.
	PathScheduler(const Topology& topo, std::vector<NodeId> dests, bool tree_rule, std::string name);

	std::string name() const override { return name_; }
	PseudoBufferKey route(NodeId at, NodeId dest) const override;
	ActivationSet activate(const Configuration& config, Round t) override;

	// Destinations in the order the algorithm indexes them (w_i < w_j => i < j).
	const std::vector<NodeId>& dests() const { return dests_; }

	private:

	ActivationSet activate_line(const Configuration& config) const;
	ActivationSet activate_tree(const Configuration& config) const;

	const Topology& topo_;
	std::vector<NodeId> dests_;
	std::vector<char> is_dest_;
	bool tree_rule_;
	std::string name_;
};

class GreedyScheduler : public Scheduler
{
	public:

	std::string name() const override { return "greedy"; }
	PseudoBufferKey route(NodeId, NodeId) const override { return {0, kAnyTarget}; }
	ActivationSet activate(const Configuration& config, Round t) override;
	bool has_badness() const override { return false; }
};

// Line positions 0..m^ell, grouped into nested intervals by base-m digits.
class HierarchicalPartition
{
	public:

	HierarchicalPartition(int m, int ell);

	int m() const { return m_; }
	int ell() const { return ell_; }
	std::int64_t size() const { return size_; }
	// m^j
	std::int64_t power(int j) const { return pow_[j]; }

	// Left end of the level-j interval holding i: r * m^(j+1).
	std::int64_t interval_start(int j, std::int64_t i) const { return i / pow_[j + 1] * pow_[j + 1]; }
	std::int64_t interval_count(int j) const { return size_ / pow_[j + 1]; }

	private:

	int m_;
	int ell_;
	std::int64_t size_;
	std::vector<std::int64_t> pow_;
};

struct Segment
{
	NodeId x = 0;
	int level = 0;

	friend bool operator==(const Segment&, const Segment&) = default;
};

// Next waypoint for a packet at i bound for w: x = floor(w / m^j) m^j where
// j is the highest base-m digit in which i and w differ. A destination equal
// to m^ell (one past the last buffer) is reached in one top-level segment.
Segment intermediate_dest(const HierarchicalPartition& part, std::int64_t i, std::int64_t w);

class HptsScheduler : public Scheduler
{
	public:

	// Needs a line with n <= m^ell.
	HptsScheduler(const Topology& topo, int m, int ell, LevelOrder order = LevelOrder::Decreasing);

	std::string name() const override { return "hpts"; }
	PseudoBufferKey route(NodeId at, NodeId dest) const override;
	ActivationSet activate(const Configuration& config, Round t) override;
	int batch_length() const override { return part_.ell(); }
	int levels() const override { return part_.ell(); }
	std::optional<int> active_level(Round t) const override;

	const HierarchicalPartition& partition() const { return part_; }

	private:

	// Targets of level-j pseudo-buffers in the interval starting at a.
	std::vector<NodeId> targets(int j, std::int64_t a) const;

	const Topology& topo_;
	HierarchicalPartition part_;
	LevelOrder order_;
	NodeId n_;
};

// Smallest m with m^ell >= n.
int hpts_branching_for(std::int64_t n, int ell);

// Minimum over all protocols of the largest buffer load reached in rounds
// 1..horizon, found by exhaustive search. Throws TooLarge beyond n <= 6,
// horizon <= 8, 10 packets.
int brute_force_optimal(const Topology& topo, const InjectionPattern& pattern, Round horizon);

} // namespace aqt
