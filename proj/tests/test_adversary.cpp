#include "doctest.h"

#include <sstream>

#include "aqt/adversary.hpp"
#include "aqt/error.hpp"
#include "aqt/rng.hpp"
#include "helpers.hpp"

using namespace aqt;
using aqt::test::pkt;

TEST_CASE("crossing counts")
{
	auto line = Topology::line(4);
	auto p = InjectionPattern::numbered({pkt(1, 0, 3), pkt(2, 2, 3)});
	CHECK(count_crossing(p, line, 2, 1, 2) == 2);
	CHECK(count_crossing(p, line, 2, 2, 2) == 1);
	CHECK(count_crossing(p, line, 0, 1, 5) == 1);
	for (Round s = 1; s <= 3; ++s)
		CHECK(count_crossing(p, line, 3, s, 3) == 0);
	CHECK(count_crossing(InjectionPattern{}, line, 1, 1, 10) == 0);
}

TEST_CASE("validate_bounded")
{
	auto line = Topology::line(3);
	std::vector<Packet> steady;
	for (Round t = 1; t <= 20; ++t)
		steady.push_back(pkt(t, 0, 3));
	CHECK_FALSE(validate_bounded(InjectionPattern::numbered(steady), line, Rational(1), 0));

	auto burst = InjectionPattern::numbered({pkt(1, 1, 3), pkt(1, 0, 2)});
	auto v = validate_bounded(burst, line, Rational(1), 0);
	REQUIRE(v);
	CHECK(v->node == 1);
	CHECK(v->start == 1);
	CHECK(v->end == 1);
	CHECK(v->count == 2);
	CHECK(v->excess == Rational(1));
	CHECK_FALSE(validate_bounded(burst, line, Rational(1), 1));

	// rounds 1, 4, 5 at rate 1/2: [4, 5] beats [1, 5] (3 - 5/2)
	auto spread = InjectionPattern::numbered({pkt(1, 0, 1), pkt(5, 0, 1), pkt(4, 0, 1)});
	auto w = validate_bounded(spread, line, Rational(1, 2), 0);
	REQUIRE(w);
	CHECK(w->excess == Rational(1));
	CHECK(w->start == 4);
	CHECK(w->end == 5);
	CHECK_FALSE(validate_bounded(spread, line, Rational(1, 2), 1));
}

TEST_CASE("excess values")
{
	auto line = Topology::line(2);
	auto p = InjectionPattern::numbered({pkt(1, 0, 2), pkt(2, 0, 2)});
	auto e = excess_trace(p, line, 0, Rational(1, 2), 3);
	CHECK(e.values[0] == Rational(0));
	CHECK(e.values[1] == Rational(1, 2));
	CHECK(e.values[2] == Rational(1));
	CHECK(e.values[3] == Rational(1, 2));

	auto none = excess_trace(InjectionPattern{}, line, 1, Rational(1, 3), 5);
	for (const auto& x : none.values)
		CHECK(x == Rational(0));

	auto one = InjectionPattern::numbered({pkt(1, 0, 2)});
	CHECK(excess_trace(one, line, 0, Rational(1), 1).values[1] == Rational(0));
	CHECK(max_excess(p, line, Rational(1, 2)) == Rational(1));
}

TEST_CASE("excess stays within sigma for bounded patterns")
{
	auto line = Topology::line(12);
	std::vector<NodeId> dests{4, 9, 12};
	for (std::uint64_t seed = 0; seed < 30; ++seed) {
		const auto sigma = static_cast<std::int64_t>(seed % 4);
		auto p = random_bounded(seed, line, Rational(2, 3), sigma, 150, dests);
		for (NodeId v = 0; v < 12; ++v)
			for (const auto& x : excess_trace(p, line, v, Rational(2, 3), 150).values)
				CHECK(x <= Rational(sigma));
	}
}

TEST_CASE("ell reduction")
{
	auto p = InjectionPattern({Packet{7, 5, 1, 4, 0}});
	CHECK(ell_reduction(p, 3).packets()[0] == Packet{7, 2, 1, 4, 0});
	CHECK(ell_reduction(p, 1).packets() == p.packets());

	auto q = InjectionPattern::numbered({pkt(1, 0, 2), pkt(3, 0, 2), pkt(4, 0, 2)});
	auto r = ell_reduction(q, 3);
	CHECK(r.packets()[0].round == 1);
	CHECK(r.packets()[1].round == 1);
	CHECK(r.packets()[2].round == 2);
	CHECK_THROWS_AS(ell_reduction(q, 0), Error);
}

TEST_CASE("ell reduction multiplies the rate")
{
	auto line = Topology::line(16);
	std::vector<NodeId> dests{5, 11, 16};
	for (std::uint64_t seed = 0; seed < 40; ++seed) {
		const int ell = 1 + static_cast<int>(seed % 4);
		const Rational rho(1, ell);
		const std::int64_t sigma = static_cast<std::int64_t>(seed % 3);
		auto p = random_bounded(seed, line, rho, sigma, 200, dests);
		auto r = ell_reduction(p, ell);
		CHECK_FALSE(validate_bounded(r, line, rho * Rational(ell), sigma));
		REQUIRE(r.bound());
		CHECK(r.bound()->rho == rho * Rational(ell));
	}
}

TEST_CASE("random generator")
{
	auto line = Topology::line(10);
	std::vector<NodeId> dests{10};
	CHECK(random_bounded(3, line, Rational(0), 0, 100, dests).empty());

	for (std::uint64_t seed = 0; seed < 40; ++seed) {
		std::vector<NodeId> ds{3, 7, 10};
		const Rational rho(1 + static_cast<std::int64_t>(seed % 4), 4);
		const auto sigma = static_cast<std::int64_t>(seed % 5);
		auto p = random_bounded(seed, line, rho, sigma, 300, ds);
		CHECK_FALSE(validate_bounded(p, line, rho, sigma));
		CHECK_NOTHROW(check_packets(p, line));
		CHECK(random_bounded(seed, line, rho, sigma, 300, ds).packets() == p.packets());
	}
	CHECK(random_bounded(1, line, Rational(1), 2, 300, dests).packets() !=
	      random_bounded(2, line, Rational(1), 2, 300, dests).packets());
}

TEST_CASE("pattern CSV round trip")
{
	auto line = Topology::line(6);
	std::vector<NodeId> dests{3, 6};
	auto p = random_bounded(9, line, Rational(1, 2), 2, 60, dests);
	std::stringstream io;
	write_pattern_csv(io, p);
	auto back = read_pattern_csv(io);
	CHECK(back.packets() == p.packets());

	std::stringstream bad("round,source,dest,type\n1,x,3,\n");
	CHECK_THROWS_AS(read_pattern_csv(bad), Error);
}

TEST_CASE("packets must move forward")
{
	auto line = Topology::line(4);
	CHECK_THROWS_AS(check_packets(InjectionPattern({pkt(1, 2, 2)}), line), Error);
	CHECK_THROWS_AS(check_packets(InjectionPattern({pkt(0, 0, 2)}), line), Error);
	CHECK_THROWS_AS(check_packets(InjectionPattern({pkt(1, 3, 1)}), line), Error);
	CHECK_NOTHROW(check_packets(InjectionPattern({pkt(1, 3, 4)}), line));
}

TEST_CASE("base-m digits")
{
	CHECK(base_m_digits(0, 2, 2) == std::vector<int>{0, 0, 0});
	CHECK(base_m_digits(5, 2, 2) == std::vector<int>{1, 0, 1});
	CHECK(base_m_digits(6, 2, 2) == std::vector<int>{0, 1, 1});
	CHECK(base_m_digits(7, 2, 2) == std::vector<int>{1, 1, 1});
	CHECK_THROWS_AS(base_m_digits(8, 2, 2), Error);
	CHECK_THROWS_AS(base_m_digits(-1, 2, 2), Error);
}

TEST_CASE("lower-bound parameters")
{
	LbParams p{2, 2, Rational(1, 2)};
	CHECK_NOTHROW(p.validate());
	CHECK(p.n() == 12);
	CHECK(p.horizon() == 8);
	CHECK_THROWS_AS((LbParams{2, 2, Rational(1, 3)}.validate()), Error);  // rho = 1/(ell+1)
	CHECK_THROWS_AS((LbParams{2, 3, Rational(1, 3)}.validate()), Error);  // rho m not integral
	CHECK_THROWS_AS((LbParams{2, 1, Rational(1)}.validate()), Error);
	CHECK_THROWS_AS((LbParams{1, 2, Rational(1)}.validate()), Error);
	CHECK_THROWS_AS((LbParams{2, 2, Rational(3, 2)}.validate()), Error);
}

TEST_CASE("lower-bound pattern: first phase")
{
	LbParams p{2, 2, Rational(1, 2)};
	auto pattern = lb_pattern(p);
	// rho m = 1 packet per route in phase (0,0), rounds 0 and 1 (engine 1 and 2)
	std::vector<Packet> first;
	for (const auto& q : pattern.between(1, 2))
		first.push_back(q);
	REQUIRE(first.size() == 3);
	std::vector<std::pair<NodeId, NodeId>> routes;
	for (const auto& q : first)
		routes.emplace_back(q.source, q.dest);
	std::sort(routes.begin(), routes.end());
	CHECK(routes == std::vector<std::pair<NodeId, NodeId>>{{0, 8}, {8, 11}, {11, 12}});
	for (const auto& q : first) {
		if (q.source == 11)
			CHECK(q.type == 1);
		if (q.source == 8)
			CHECK(q.type == 2);
		if (q.source == 0)
			CHECK(q.type == 3);
	}
	CHECK(lb_frontier(p, 0) == 11);
}

TEST_CASE("lower-bound pattern is (rho, 1)-bounded with rho m packets per route and phase")
{
	const std::vector<LbParams> grid = {{2, 2, Rational(1, 2)}, {4, 2, Rational(1, 2)}, {3, 2, Rational(2, 3)},
	                                    {4, 2, Rational(1)},    {3, 3, Rational(1, 3)}, {2, 3, Rational(1)}};
	for (const auto& p : grid) {
		auto pattern = lb_pattern(p);
		auto line = Topology::line(static_cast<int>(p.n()));
		CHECK_NOTHROW(check_packets(pattern, line));
		CHECK_FALSE(validate_bounded(pattern, line, p.rho, 1));
		const auto per_phase = p.packets_per_route() * (p.ell + 1);
		CHECK(static_cast<std::int64_t>(pattern.size()) == per_phase * ipow(p.m, p.ell));
		for (Round phase = 0; phase < ipow(p.m, p.ell); ++phase)
			CHECK(static_cast<std::int64_t>(pattern.between(phase * p.m + 1, phase * p.m + p.m).size()) ==
			      per_phase);
	}
}
