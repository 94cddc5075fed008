#include "doctest.h"

#include <set>

#include "aqt/error.hpp"
#include "aqt/metrics.hpp"
#include "aqt/schedulers.hpp"
#include "aqt/stale.hpp"
#include "helpers.hpp"

using namespace aqt;
using aqt::test::pkt;

TEST_CASE("badness of a single stack")
{
	auto line = Topology::line(6);
	PathScheduler ppts(line, {4, 6}, false, "ppts");
	Configuration empty(7);
	auto z = badness(empty, line, 1);
	CHECK(z.total == std::vector<std::int64_t>(7, 0));

	Configuration c(7);
	for (PacketId id = 0; id < 3; ++id)
		c.push(0, ppts.route(0, 4), {id, 4});
	auto b = badness(c, line, 1);
	CHECK(b.total == std::vector<std::int64_t>{2, 2, 2, 2, 0, 0, 0});
	CHECK(b.level[0] == b.total);
}

TEST_CASE("badness on trees walks the path")
{
	auto t = Topology::tree(3, {2, 2, 3, 3});
	PathScheduler s(t, {3}, true, "tree-ppts");
	Configuration c(4);
	c.push(0, s.route(0, 3), {0, 3});
	c.push(0, s.route(0, 3), {1, 3});
	c.push(1, s.route(1, 3), {2, 3});
	auto b = badness(c, t, 1);
	CHECK(b.total == std::vector<std::int64_t>{1, 0, 1, 0});
}

TEST_CASE("PPTS hand trace drops badness in every activated interval")
{
	auto line = Topology::line(5);
	PathScheduler ppts(line, {2, 4}, false, "ppts");
	auto pattern = InjectionPattern::numbered({pkt(1, 1, 4), pkt(1, 1, 4), pkt(1, 0, 2), pkt(1, 0, 2)});
	Simulation sim(line, pattern, ppts);
	Configuration before(6);
	for (const auto& p : pattern.packets())
		before.push(p.source, ppts.route(p.source, p.dest), {p.id, p.dest});
	auto b0 = badness(before, line, 1);
	auto rec = sim.step(1, pattern.at(1));
	auto b1 = badness(sim.config(), line, 1);
	for (const auto& a : rec.activation)
		CHECK(b1.total[a.node] <= b0.total[a.node] - 1);
	CHECK(rec.activation.size() == 4);
}

TEST_CASE("checker selection")
{
	auto line = Topology::line(8);
	PathScheduler ppts(line, {8}, false, "ppts");
	GreedyScheduler greedy;
	CheckerContext with_bound{line, ppts, RateBound{Rational(1), 2}};
	CheckerContext no_bound{line, ppts, std::nullopt};
	CheckerContext no_badness{line, greedy, RateBound{Rational(1), 2}};

	CHECK(make_checkers("all", with_bound).size() == 4);
	CHECK(make_checkers("none", with_bound).empty());
	CHECK(make_checkers("all", no_bound).size() == 2);
	CHECK(make_checkers("all", no_badness).size() == 2);
	CHECK_THROWS_AS(make_checkers("excess", no_bound), Error);
	CHECK_THROWS_AS(make_checkers("bad-decrease", no_badness), Error);
	CHECK_THROWS_AS(make_checkers("typo", with_bound), Error);

	std::string why;
	CHECK_FALSE(checker_applies("badness-excess", no_bound, &why));
	CHECK_FALSE(why.empty());

	HptsScheduler hpts(line, 3, 2);
	CheckerContext too_fast{line, hpts, RateBound{Rational(2, 3), 1}};
	CHECK_FALSE(checker_applies("badness-excess", too_fast));
	CHECK(checker_applies("bad-decrease", too_fast));
}

TEST_CASE("excess tracker batches at rate ell rho")
{
	auto line = Topology::line(3);
	ExcessTracker x(line, Rational(1, 3), 3);
	CHECK(x.rate() == Rational(1));
	auto p = InjectionPattern::numbered({pkt(1, 0, 3), pkt(2, 0, 3)});
	x.advance(1, {});
	x.advance(2, {});
	CHECK(x.value(0) == Rational(0));
	x.advance(3, p.between(1, 3));
	CHECK(x.arrivals()[0] == 2);
	CHECK(x.value(0) == Rational(1));
	CHECK(x.value(2) == Rational(1));
	x.advance(6, {});
	CHECK(x.value(0) == Rational(0));
	CHECK(x.previous(0) == Rational(1));
}

namespace {

// Runs one scheduler against a random pattern with every checker on.
void run_all_checkers(const Topology& topo, const SchedulerSpec& spec, const InjectionPattern& pattern, Round horizon)
{
	auto s = make_scheduler(spec, topo);
	auto checkers = make_checkers("all", {topo, *s, pattern.bound()});
	Simulation sim(topo, pattern, *s);
	for (auto& c : checkers)
		sim.add_checker(*c);
	CHECK_NOTHROW(sim.run(horizon));
}

} // namespace

TEST_CASE("lemma checkers hold on random bounded traffic")
{
	// about 10^4 rounds per scheduler family
	for (std::uint64_t seed = 0; seed < 25; ++seed) {
		auto line = Topology::line(32);
		std::vector<NodeId> dests{7, 16, 25, 32};
		const Rational rho(1 + static_cast<std::int64_t>(seed % 4), 4);
		const auto sigma = static_cast<std::int64_t>(seed % 5);
		auto pattern = random_bounded(seed, line, rho, sigma, 400, dests);
		run_all_checkers(line, {SchedulerKind::Ppts, dests}, pattern, 400);
		auto single = random_bounded(seed, line, rho, sigma, 400, std::vector<NodeId>{32});
		run_all_checkers(line, {SchedulerKind::Pts, {32}}, single, 400);

		SchedulerSpec h{SchedulerKind::Hpts, {}};
		h.m = 2;
		h.ell = 5;
		auto slow = random_bounded(seed, line, Rational(1, 5), sigma, 400, dests);
		run_all_checkers(line, h, slow, 400);

		CounterRng rng(seed);
		auto tree = Topology::random_tree(30, rng);
		std::vector<NodeId> tdests{tree.root()};
		for (NodeId v = 0; v < 30; ++v)
			if (!tree.children(v).empty() && rng.chance(1, 4))
				tdests.push_back(v);
		auto tp = random_bounded(seed, tree, rho, sigma, 400, tdests);
		run_all_checkers(tree, {SchedulerKind::TreePpts, tdests}, tp, 400);
	}
}

TEST_CASE("a checker reports the round and node it objects to")
{
	// declare a bound the traffic does not respect
	auto line = Topology::line(4);
	auto pattern = InjectionPattern(
	    InjectionPattern::numbered({pkt(1, 0, 4), pkt(1, 0, 4), pkt(1, 0, 4), pkt(1, 0, 4)}).packets(),
	    RateBound{Rational(1), 0});
	PathScheduler pts(line, {4}, false, "pts");
	auto checkers = make_checkers("excess", {line, pts, pattern.bound()});
	Simulation sim(line, pattern, pts);
	sim.add_checker(*checkers[0]);
	try {
		sim.run(5);
		FAIL("expected a checker failure");
	} catch (const CheckerFailure& f) {
		CHECK(f.report().checker == "excess");
		CHECK(f.report().round == 1);
		CHECK(f.report().node == 0);
		auto j = f.report().to_json();
		CHECK(j.contains("expected"));
		CHECK(j.contains("observed"));
	}
}

TEST_CASE("scenario thresholds")
{
	LbParams p{4, 2, Rational(1, 2)};
	CHECK(beta_threshold(p, 0) == Rational(1, 2));     // (3/2 - 1) * 4 / 4
	CHECK(beta_threshold(p, 1) == Rational(2));        // (1/2) * 16 / 4
	CHECK(fresh_growth_threshold(p) == Rational(4));   // (1/2) * 16 / 2
	LbParams edge{3, 2, Rational(1, 3)};
	CHECK(beta_threshold(edge, 0) == Rational(0));
	CHECK(beta_threshold(edge, 1) == Rational(0));
	CHECK(fresh_growth_threshold(edge) == Rational(0));
}

TEST_CASE("phase-final rounds")
{
	LbParams p{2, 2, Rational(1, 2)};
	CHECK_FALSE(beta_level(p, 0));
	CHECK(beta_level(p, 1) == 0);
	CHECK_FALSE(beta_level(p, 2));
	CHECK(beta_level(p, 3) == 1);
	CHECK(beta_level(p, 5) == 0);
	CHECK_FALSE(beta_level(p, 7));
}

TEST_CASE("stale oracle against the small lower-bound instance")
{
	LbParams p{2, 2, Rational(1, 2)};
	auto pattern = lb_pattern(p);
	auto line = Topology::line(12);
	for (auto kind : {SchedulerKind::Ppts, SchedulerKind::Greedy}) {
		std::set<NodeId> ds;
		for (const auto& q : pattern.packets())
			ds.insert(q.dest);
		auto s = make_scheduler({kind, {ds.begin(), ds.end()}}, line);
		Simulation sim(line, pattern, *s);
		auto tr = sim.run(p.horizon());
		auto log = stale_oracle(tr, pattern, line, p);
		CHECK(log.violations.empty());
		CHECK(log.frontier.size() >= static_cast<std::size_t>(p.horizon()));
		for (Round t = 0; t < p.horizon(); ++t)
			if (!beta_level(p, t))
				CHECK(log.beta[t] == 0);
		for (auto a : log.alpha)
			CHECK(a <= 1);
		for (const auto& v : scenario_check(log))
			CHECK(v.holds());
	}
}

TEST_CASE("scenario two chains into the final fresh count")
{
	for (int m : {2, 3, 4}) {
		LbParams p{m, 2, Rational(1, 2)};
		if (p.rho * Rational(m) != Rational(p.packets_per_route()))
			continue;
		auto pattern = lb_pattern(p);
		auto line = Topology::line(static_cast<int>(p.n()));
		std::set<NodeId> ds;
		for (const auto& q : pattern.packets())
			ds.insert(q.dest);
		auto s = make_scheduler({SchedulerKind::Ppts, {ds.begin(), ds.end()}}, line);
		Simulation sim(line, pattern, *s);
		auto log = stale_oracle(sim.run(p.horizon()), pattern, line, p);
		auto verdicts = scenario_check(log);
		bool all_two = std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.branch2; });
		if (all_two) {
			CHECK(Rational(log.fresh_at_block.back()) >= Rational(m - 1) * fresh_growth_threshold(p));
		}
	}
}

TEST_CASE("frontier claim")
{
	for (const auto& p : {LbParams{2, 2, Rational(1, 2)}, LbParams{3, 3, Rational(1, 3)}, LbParams{4, 2, Rational(1)}})
		CHECK_FALSE(check_f_moves(p));
}

TEST_CASE("stale oracle flags a delivered fresh packet")
{
	// claim that the first type-3 packet left the network at once,
	// while it still sits at buffer 0 behind the frontier
	LbParams p{2, 2, Rational(1, 2)};
	auto pattern = lb_pattern(p);
	auto line = Topology::line(12);
	std::set<NodeId> ds;
	for (const auto& q : pattern.packets())
		ds.insert(q.dest);
	auto s = make_scheduler({SchedulerKind::Ppts, {ds.begin(), ds.end()}}, line);
	Simulation sim(line, pattern, *s);
	auto tr = sim.run(p.horizon());

	PacketId victim = -1;
	Round injected = 0;
	for (const auto& q : pattern.between(1, 2))
		if (q.type == 3) {
			victim = q.id;
			injected = q.round;
		}
	REQUIRE(victim >= 0);
	for (auto& r : tr.rounds) {
		std::erase_if(r.sent, [&](const auto& e) { return e.second == victim; });
		std::erase(r.delivered, victim);
	}
	tr.rounds[injected - 1].delivered.push_back(victim);
	auto log = stale_oracle(tr, pattern, line, p);
	REQUIRE_FALSE(log.violations.empty());
	CHECK(log.violations.front().lemma == "FreshUndelivered");
	CHECK(log.violations.front().packet == victim);
}
