#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aqt/adversary.hpp"
#include "aqt/engine.hpp"

namespace aqt {

// Bookkeeping for a run of the lower-bound adversary. Rounds here are the
// adversary's rounds 0 .. horizon-1 (engine round t+1). A packet is fresh in
// round t while it sits at or left of the frontier F(t), and becomes stale
// at the end of round t if it is fresh in t and right of F(t+1) in t+1.

struct OracleViolation
{
	std::string lemma;
	Round round = 0;
	PacketId packet = -1;
	std::string detail;
};

enum class StaleKind
{
	Alpha,
	Beta,
};

struct StaleEvent
{
	Round round = 0;
	PacketId packet = 0;
	StaleKind kind = StaleKind::Alpha;
};

struct StaleLog
{
	LbParams params;
	// F(t)
	std::vector<std::int64_t> frontier;
	// transitions at the end of round t
	std::vector<std::int64_t> alpha;
	std::vector<std::int64_t> beta;
	// buffered packets in [F(t+1)+1, F(t)] after the last round of a phase
	std::vector<std::int64_t> beta_interval_load;
	// largest single-buffer load in that interval
	std::vector<std::int64_t> beta_interval_peak;
	// f(t_ell): fresh packets at the start of round t_ell * m^ell
	std::vector<std::int64_t> fresh_at_block;
	std::vector<StaleEvent> events;
	std::vector<OracleViolation> violations;
};

// Replays the trace and classifies every fresh-to-stale transition. Any
// breach of the stale-type, fresh-undelivered or stale-count lemmas is
// recorded as a violation.
StaleLog stale_oracle(const Trace& trace, const InjectionPattern& pattern, const Topology& topo,
                      const LbParams& params);

// Last round of the phase whose frontier moves by the smallest amount:
// the k with t_1..t_k = m-1 and t_{k+1} < m-1. nullopt if t is not
// phase-final or is the very last round.
std::optional<int> beta_level(const LbParams& params, Round t);

// ((ell+1) rho - 1) m^(k+1) / (2 ell)
Rational beta_threshold(const LbParams& params, int k);
// ((ell+1) rho - 1) m^ell / 2
Rational fresh_growth_threshold(const LbParams& params);

struct ScenarioVerdict
{
	int t_ell = 0;
	bool branch1 = false;
	bool branch2 = false;
	// branch 1: the phase-final round with the most beta-stale packets
	// relative to its threshold
	Round witness_round = -1;
	int witness_k = -1;
	std::int64_t witness_beta = 0;
	Rational witness_threshold;
	std::int64_t witness_interval_size = 0;
	std::int64_t witness_peak = 0;
	// branch 2
	std::int64_t fresh_before = 0;
	std::int64_t fresh_after = 0;
	Rational fresh_threshold;

	bool holds() const { return branch1 || branch2; }
	nlohmann::json to_json() const;
};

std::vector<ScenarioVerdict> scenario_check(const StaleLog& log);

// For all rounds t < t' in [0, horizon): if digit k is the highest digit in
// which they differ and t'_k > t_k, then F(t') < v_k(digits of t). Returns
// the first counterexample.
std::optional<OracleViolation> check_f_moves(const LbParams& params);

nlohmann::json to_json(const OracleViolation& v);

} // namespace aqt
