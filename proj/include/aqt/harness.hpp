#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aqt/adversary.hpp"
#include "aqt/engine.hpp"
#include "aqt/metrics.hpp"
#include "aqt/schedulers.hpp"
#include "aqt/stale.hpp"

namespace aqt {

enum class AdversaryKind
{
	None,
	Random,
	LowerBound,
	File,
};

struct AdversarySpec
{
	AdversaryKind kind = AdversaryKind::Random;
	Rational rho{1, 2};
	std::int64_t sigma = 0;
	// generator destinations; empty means the scheduler's, else the root
	std::vector<NodeId> dests;
	// pattern CSV for AdversaryKind::File
	std::string path;
	// whether rho/sigma declare the bound of a file pattern
	bool declared_bound = false;
};

struct ExperimentSpec
{
	// line:N, tree:FILE or tree-random:N. Empty: line:16, or the line the
	// lower-bound adversary needs.
	std::string topology;
	AdversarySpec adversary;
	SchedulerKind scheduler = SchedulerKind::Ppts;
	std::vector<NodeId> dests;
	// with no explicit dests: d destinations spread evenly up to the sink
	int d = 0;
	bool drain = false;
	LevelOrder order = LevelOrder::Decreasing;
	// HPTS branching (0: smallest m with m^ell >= n) and levels; for the
	// lower-bound adversary these are its m and ell instead.
	int m = 0;
	int ell = 1;
	Round horizon = 1000;
	std::uint64_t seed = 0;
	std::string checkers = "all";
	std::string trace_path;
	std::string summary_path;
};

ExperimentSpec spec_from_json(const nlohmann::json& j);
// Applies the keys present in j on top of `base`.
void merge_spec(ExperimentSpec& base, const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);
nlohmann::json to_json(const SchedulerSpec& spec);
SchedulerSpec scheduler_spec_from_json(const nlohmann::json& j);

std::vector<NodeId> parse_node_list(const std::string& text);
AdversaryKind parse_adversary_kind(const std::string& s);
std::string to_string(AdversaryKind k);

// Everything a run needs, built from a spec.
struct Experiment
{
	ExperimentSpec spec;
	Topology topo;
	SchedulerSpec scheduler;
	InjectionPattern pattern;
	std::optional<RateBound> bound;
	std::optional<LbParams> lb;
	Round horizon = 0;
};

Experiment build_experiment(const ExperimentSpec& spec);

struct RunResult
{
	Trace trace;
	nlohmann::json header;
	std::optional<CheckerReport> failure;
	// theorem bound for the scheduler, when one applies
	std::optional<std::int64_t> load_bound;
};

// Runs the experiment; checker failures are captured, not thrown.
RunResult run_experiment(const Experiment& ex);

// Load bound of the scheduler against the experiment's adversary:
// 2+sigma, 1+d+sigma, ell*m+sigma+1 or 1+d'+sigma.
std::optional<std::int64_t> theorem_bound(const Experiment& ex);

nlohmann::json trace_header(const Experiment& ex);

// Sweep: every combination of the listed values applied to a base spec.
struct SweepAxis
{
	std::string key;
	std::vector<nlohmann::json> values;
};

struct SweepCell
{
	int id = 0;
	ExperimentSpec spec;
	std::string status = "ok";
	int max_load = 0;
	std::optional<std::int64_t> bound;
	std::string scenarios;
};

std::vector<SweepCell> sweep_cells(const ExperimentSpec& base, const std::vector<SweepAxis>& axes);
// Runs cells on up to `jobs` threads; results keep cell order.
void run_sweep(std::vector<SweepCell>& cells, int jobs);
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

struct LowerBoundRun
{
	std::string scheduler;
	int max_load = 0;
	std::optional<CheckerReport> checker_failure;
	StaleLog log;
	std::vector<ScenarioVerdict> verdicts;

	bool ok() const;
	nlohmann::json to_json() const;
};

struct LowerBoundReport
{
	LbParams params;
	std::optional<BoundViolation> boundedness;
	std::optional<OracleViolation> f_moves;
	std::vector<LowerBoundRun> runs;

	bool ok() const;
	nlohmann::json to_json() const;
};

// Scheduler names: ppts, hpts, greedy, drain-ppts, pts (drain- prefix on any).
LowerBoundReport run_lowerbound(const LbParams& params, const std::vector<std::string>& schedulers);

struct ValidateResult
{
	bool ok = true;
	std::vector<std::string> problems;
	int max_load = 0;
};

// Replays a stored trace: the recorded activations drive the engine, every
// applicable checker runs, and each recomputed record must equal the stored
// one. Lower-bound traces also go through the stale oracle.
ValidateResult validate_trace(std::istream& in, const std::string& checkers = "all");

// Exit code for an exception escaping a subcommand: 1 for checker-type
// failures, 2 for bad input.
int exit_code_for(const Error& e);

} // namespace aqt
