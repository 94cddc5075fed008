#include "doctest.h"

#include <set>

#include "aqt/error.hpp"
#include "aqt/schedulers.hpp"
#include "helpers.hpp"

using namespace aqt;
using aqt::test::pkt;

namespace {

Configuration with_loads(const Topology& topo, const Scheduler& s, const std::vector<int>& loads, NodeId w)
{
	Configuration c(topo.vertex_count());
	PacketId id = 0;
	for (NodeId v = 0; v < static_cast<NodeId>(loads.size()); ++v)
		for (int k = 0; k < loads[v]; ++k)
			c.push(v, s.route(v, w), {id++, w});
	return c;
}

std::vector<NodeId> nodes_of(const ActivationSet& a)
{
	std::vector<NodeId> out;
	for (const auto& x : a)
		out.push_back(x.node);
	std::sort(out.begin(), out.end());
	return out;
}

ActivationSet sorted(ActivationSet a)
{
	normalize(a);
	return a;
}

} // namespace

TEST_CASE("PTS hand cases")
{
	auto line = Topology::line(3);
	PathScheduler pts(line, {3}, false, "pts");
	CHECK(nodes_of(pts.activate(with_loads(line, pts, {2, 0, 1}, 3), 1)) == std::vector<NodeId>{0, 1, 2});
	CHECK(pts.activate(with_loads(line, pts, {1, 1, 1}, 3), 1).empty());
	CHECK(nodes_of(pts.activate(with_loads(line, pts, {0, 0, 2}, 3), 1)) == std::vector<NodeId>{2});
	CHECK(nodes_of(pts.activate(with_loads(line, pts, {0, 2, 0}, 3), 1)) == std::vector<NodeId>{1, 2});
}

TEST_CASE("PTS with drain forwards when nothing is bad")
{
	auto line = Topology::line(3);
	PathScheduler pts(line, {3}, false, "pts");
	pts.set_drain(true);
	bool drained = false;
	auto a = pts.select(with_loads(line, pts, {1, 1, 1}, 3), 1, drained);
	CHECK(drained);
	CHECK(nodes_of(a) == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("PPTS hand trace")
{
	auto line = Topology::line(5);
	PathScheduler ppts(line, {2, 4}, false, "ppts");
	Configuration c(6);
	c.push(1, ppts.route(1, 4), {0, 4});
	c.push(1, ppts.route(1, 4), {1, 4});
	c.push(0, ppts.route(0, 2), {2, 2});
	c.push(0, ppts.route(0, 2), {3, 2});
	auto a = sorted(ppts.activate(c, 1));
	ActivationSet expect = {{0, {0, 2}}, {1, {0, 4}}, {2, {0, 4}}, {3, {0, 4}}};
	CHECK(a == expect);

	Configuration calm(6);
	calm.push(0, ppts.route(0, 2), {0, 2});
	calm.push(0, ppts.route(0, 4), {1, 4});
	calm.push(3, ppts.route(3, 4), {2, 4});
	CHECK(ppts.activate(calm, 1).empty());
}

TEST_CASE("destination order follows precedence")
{
	auto line = Topology::line(8);
	PathScheduler ppts(line, {8, 3, 5, 3}, false, "ppts");
	CHECK(ppts.dests() == std::vector<NodeId>{3, 5, 8});
	CHECK_THROWS_AS(ppts.route(0, 4), Error);
}

TEST_CASE("PPTS with one destination is PTS")
{
	CounterRng rng(11);
	for (int i = 0; i < 2000; ++i) {
		const int n = static_cast<int>(rng.between(2, 20));
		auto line = Topology::line(n);
		const auto w = static_cast<NodeId>(rng.between(1, n));
		PathScheduler pts(line, {w}, false, "pts");
		PathScheduler ppts(line, {w}, false, "ppts");
		auto c = test::random_config(rng, line, pts, {w}, static_cast<int>(rng.between(0, 2 * n)));
		CHECK(sorted(pts.activate(c, 1)) == sorted(ppts.activate(c, 1)));
	}
}

TEST_CASE("tree rules on a line match the line rules")
{
	CounterRng rng(12);
	for (int i = 0; i < 2000; ++i) {
		const int n = static_cast<int>(rng.between(2, 20));
		auto line = Topology::line(n);
		std::vector<NodeId> parent(n + 1);
		for (NodeId v = 0; v < n; ++v)
			parent[v] = v + 1;
		parent[n] = n;
		auto path = Topology::tree(n, parent);
		std::vector<NodeId> dests;
		for (NodeId w = 1; w <= n; ++w)
			if (rng.chance(1, 3) || w == n)
				dests.push_back(w);
		PathScheduler ppts(line, dests, false, "ppts");
		PathScheduler tree(path, dests, true, "tree-ppts");
		auto c = test::random_config(rng, line, ppts, dests, static_cast<int>(rng.between(0, 3 * n)));
		CHECK(sorted(ppts.activate(c, 1)) == sorted(tree.activate(c, 1)));
	}
}

TEST_CASE("tree PTS on a star")
{
	auto star = Topology::tree(3, {3, 3, 3, 3});
	PathScheduler tpts(star, {3}, true, "tree-pts");
	Configuration c(4);
	c.push(0, tpts.route(0, 3), {0, 3});
	c.push(0, tpts.route(0, 3), {1, 3});
	c.push(1, tpts.route(1, 3), {2, 3});
	CHECK(nodes_of(tpts.activate(c, 1)) == std::vector<NodeId>{0});
}

TEST_CASE("tree PPTS activations are feasible and cover every minimal bad node")
{
	CounterRng rng(13);
	for (int i = 0; i < 2000; ++i) {
		const int n = static_cast<int>(rng.between(2, 30));
		auto tree = Topology::random_tree(n, rng);
		std::vector<NodeId> dests;
		for (NodeId v = 0; v < n; ++v)
			if (!tree.children(v).empty() && (rng.chance(1, 3) || v == tree.root()))
				dests.push_back(v);
		PathScheduler s(tree, dests, true, "tree-ppts");
		auto c = test::random_config(rng, tree, s, dests, static_cast<int>(rng.between(0, 3 * n)));
		auto a = s.activate(c, 1);
		CHECK(check_feasible(a));
		for (const auto& x : a)
			CHECK(tree.precedes(x.node, x.key.target));
		for (NodeId v = 0; v < n; ++v)
			for (const auto& b : c.at(v))
				if (b.items.size() >= 2) {
					// some activation lies on v's way to that target
					bool covered = false;
					for (const auto& x : a)
						covered |= tree.precedes_or_equal(v, x.node) && tree.precedes(x.node, b.key.target);
					CHECK(covered);
				}
	}
}

TEST_CASE("intermediate destinations")
{
	HierarchicalPartition p4(2, 4);
	CHECK(intermediate_dest(p4, 3, 12) == Segment{8, 3});
	CHECK(intermediate_dest(p4, 8, 12) == Segment{12, 2});
	CHECK(intermediate_dest(p4, 12, 13) == Segment{13, 0});
	CHECK(intermediate_dest(p4, 0, 16) == Segment{16, 3});
	HierarchicalPartition p3(3, 2);
	CHECK(intermediate_dest(p3, 0, 5) == Segment{3, 1});
	CHECK(intermediate_dest(p3, 3, 5) == Segment{5, 0});
	CHECK(intermediate_dest(p3, 4, 5) == Segment{5, 0});
}

TEST_CASE("hierarchical partition nests")
{
	for (int m : {2, 3, 4})
		for (int ell = 1; ell <= 3; ++ell) {
			HierarchicalPartition p(m, ell);
			CHECK(p.size() == ipow(m, ell));
			CHECK(p.interval_count(ell - 1) == 1);
			for (int j = 1; j < ell; ++j)
				CHECK(p.interval_count(j - 1) == m * p.interval_count(j));
			for (std::int64_t i = 0; i < p.size(); ++i)
				for (int j = 0; j < ell; ++j) {
					CHECK(p.interval_start(j, i) <= i);
					CHECK(i < p.interval_start(j, i) + p.power(j + 1));
					if (j > 0)
						CHECK(p.interval_start(j, i) <= p.interval_start(j - 1, i));
				}
		}
}

TEST_CASE("segments always make progress and stay inside the current interval")
{
	for (int m : {2, 3, 4})
		for (int ell = 1; ell <= 3; ++ell) {
			HierarchicalPartition p(m, ell);
			for (std::int64_t w = 1; w <= p.size(); ++w)
				for (std::int64_t i = 0; i < w; ++i) {
					auto s = intermediate_dest(p, i, w);
					CHECK(s.x > i);
					CHECK(s.x <= w);
					CHECK(s.level >= 0);
					CHECK(s.level < ell);
					// levels strictly drop along the way
					if (s.x < w)
						CHECK(intermediate_dest(p, s.x, w).level < s.level);
				}
		}
}

TEST_CASE("HPTS with one level is PPTS")
{
	CounterRng rng(14);
	for (int i = 0; i < 2000; ++i) {
		const int n = static_cast<int>(rng.between(2, 20));
		auto line = Topology::line(n);
		std::vector<NodeId> dests;
		for (NodeId w = 1; w <= n; ++w)
			if (rng.chance(1, 2) || w == n)
				dests.push_back(w);
		PathScheduler ppts(line, dests, false, "ppts");
		HptsScheduler hpts(line, n, 1);
		auto c = test::random_config(rng, line, ppts, dests, static_cast<int>(rng.between(0, 3 * n)));
		for (NodeId v = 0; v < n; ++v)
			for (const auto& b : c.at(v))
				CHECK(hpts.route(v, b.key.target) == b.key);
		CHECK(sorted(ppts.activate(c, 1)) == sorted(hpts.activate(c, 1)));
	}
}

TEST_CASE("HPTS hand trace: two packets for the sink")
{
	// m = 2, ell = 2, n = 4; both packets arrive in the first phase and
	// the top level goes first
	auto line = Topology::line(4);
	auto pattern = InjectionPattern::numbered({pkt(1, 0, 4), pkt(1, 0, 4)});
	HptsScheduler hpts(line, 2, 2);
	CHECK(hpts.route(0, 4) == PseudoBufferKey{1, 4});
	CHECK(hpts.active_level(2) == 1);
	CHECK(hpts.active_level(3) == 0);

	Simulation sim(line, pattern, hpts);
	auto r1 = sim.step(1, {});
	CHECK(r1.load_before == std::vector<int>(5, 0));
	auto r2 = sim.step(2, pattern.between(1, 2));
	CHECK(r2.load_before[0] == 2);
	ActivationSet expect = {{0, {1, 4}}, {1, {1, 4}}, {2, {1, 4}}, {3, {1, 4}}};
	CHECK(r2.activation == expect);
	CHECK(r2.load_after[0] == 1);
	CHECK(r2.load_after[1] == 1);
}

TEST_CASE("HPTS activations are feasible and single-level per round")
{
	CounterRng rng(15);
	for (int i = 0; i < 3000; ++i) {
		const int m = static_cast<int>(rng.between(2, 4));
		const int ell = static_cast<int>(rng.between(1, 3));
		const auto cap = ipow(m, ell);
		const int n = static_cast<int>(rng.between(1, cap));
		auto line = Topology::line(n);
		HptsScheduler hpts(line, m, ell);
		std::vector<NodeId> dests;
		for (NodeId w = 1; w <= n; ++w)
			dests.push_back(w);
		auto c = test::random_config(rng, line, hpts, dests, static_cast<int>(rng.between(0, 3 * n)));
		const Round t = rng.between(1, 12);
		auto a = hpts.activate(c, t);
		CHECK(check_feasible(a));
		for (const auto& x : a) {
			CHECK(x.node < n);
			CHECK(x.node < x.key.target);
			CHECK(x.key.level <= *hpts.active_level(t));
		}
	}
}

TEST_CASE("HPTS rejects lines that do not fit")
{
	auto line = Topology::line(9);
	CHECK_THROWS_AS(HptsScheduler(line, 2, 3), Error);
	CHECK_NOTHROW(HptsScheduler(line, 3, 2));
	CHECK(hpts_branching_for(9, 2) == 3);
	CHECK(hpts_branching_for(10, 2) == 4);
	CHECK(hpts_branching_for(64, 3) == 4);
}

TEST_CASE("greedy forwards the top packet of every nonempty node")
{
	auto line = Topology::line(4);
	GreedyScheduler g;
	Configuration c(5);
	c.push(0, g.route(0, 2), {0, 2});
	c.push(0, g.route(0, 4), {1, 4});
	c.push(2, g.route(2, 3), {2, 3});
	CHECK(nodes_of(g.activate(c, 1)) == std::vector<NodeId>{0, 2});
	CHECK_FALSE(g.has_badness());
}

TEST_CASE("scheduler factory")
{
	auto line = Topology::line(6);
	CHECK(make_scheduler({SchedulerKind::Pts, {}}, line)->name() == "pts");
	CHECK_THROWS_AS(make_scheduler({SchedulerKind::Pts, {3, 6}}, line), Error);
	CHECK_THROWS_AS(make_scheduler({SchedulerKind::Optimal, {}}, line), Error);
	CHECK_THROWS_AS(make_scheduler({SchedulerKind::TreePts, {3}}, line), Error);
	CHECK(parse_scheduler_kind("tree-ppts") == SchedulerKind::TreePpts);
	CHECK_THROWS_AS(parse_scheduler_kind("fifo"), Error);
}

TEST_CASE("exhaustive optimum")
{
	auto line = Topology::line(3);
	CHECK(brute_force_optimal(line, InjectionPattern{}, 4) == 0);
	CHECK(brute_force_optimal(line, InjectionPattern::numbered({pkt(1, 0, 3)}), 3) == 1);
	CHECK(brute_force_optimal(line, InjectionPattern::numbered({pkt(1, 0, 3), pkt(1, 0, 3)}), 3) == 2);
	// one packet per round into the same node never needs more than one slot
	CHECK(brute_force_optimal(line, InjectionPattern::numbered({pkt(1, 0, 3), pkt(2, 0, 3), pkt(3, 0, 3)}), 5) ==
	      1);
	CHECK_THROWS_AS(brute_force_optimal(Topology::line(7), InjectionPattern{}, 3), Error);
	CHECK_THROWS_AS(brute_force_optimal(line, InjectionPattern{}, 9), Error);
	CHECK_THROWS_AS(brute_force_optimal(line, InjectionPattern::numbered({pkt(5, 0, 3)}), 4), Error);
}
