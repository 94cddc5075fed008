#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "aqt/harness.hpp"
#include "aqt/trace_io.hpp"

using namespace aqt;

namespace {

// flags shared by simulate and sweep; anything set overrides the config file
const std::vector<std::pair<std::string, std::string>> kSpecFlags = {
    {"topo", "line:N, tree:FILE or tree-random:N"},
    {"adversary", "random, lowerbound, file or none"},
    {"pattern", "pattern CSV for --adversary file"},
    {"rho", "rate as num/den"},
    {"rho-num", "rate numerator"},
    {"rho-den", "rate denominator"},
    {"sigma", "burstiness"},
    {"adversary-dests", "destinations the random adversary uses"},
    {"scheduler", "pts, ppts, hpts, tree-pts, tree-ppts or greedy"},
    {"order", "hpts level order: decreasing or increasing"},
    {"ell", "hpts levels, or the lower-bound ell"},
    {"m", "hpts branching, or the lower-bound m"},
    {"dests", "scheduler destinations, e.g. 8,16"},
    {"d", "number of evenly spread destinations"},
    {"horizon", "rounds to simulate"},
    {"seed", "random seed"},
    {"checkers", "all, none or a comma list"},
};

struct SpecFlags
{
	std::map<std::string, std::string> values;
	std::string config;
	bool drain = false;
	CLI::Option* drain_opt = nullptr;

	void add_to(CLI::App& app)
	{
		app.add_option("--config", config, "experiment spec JSON")->check(CLI::ExistingFile);
		for (const auto& [name, help] : kSpecFlags)
			app.add_option("--" + name, values[name], help);
		drain_opt = app.add_flag("--drain", drain, "forward something whenever the rule selects nothing");
	}

	ExperimentSpec build(const CLI::App& app) const
	{
		ExperimentSpec spec;
		if (!config.empty()) {
			std::ifstream in(config);
			try {
				merge_spec(spec, nlohmann::json::parse(in));
			} catch (const nlohmann::json::exception& e) {
				throw Error(ErrorCode::ParseError, config + ": " + e.what());
			}
		}
		nlohmann::json over = nlohmann::json::object();
		for (const auto& [name, help] : kSpecFlags)
			if (app.count("--" + name))
				over[name] = values.at(name);
		if (drain_opt->count())
			over["drain"] = true;
		merge_spec(spec, over);
		return spec;
	}
};

int jobs_default()
{
	if (const char* env = std::getenv("AQT_JOBS")) {
		try {
			return std::max(1, std::stoi(env));
		} catch (const std::logic_error&) {
			throw Error(ErrorCode::ParseError, std::string("AQT_JOBS is not a number: ") + env);
		}
	}
	return 1;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& fill)
{
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw Error(ErrorCode::ParseError, "cannot write " + path);
	fill(out);
}

int simulate(const ExperimentSpec& spec, const std::string& pattern_out)
{
	auto ex = build_experiment(spec);
	if (!pattern_out.empty())
		write_file(pattern_out, [&](std::ostream& o) { write_pattern_csv(o, ex.pattern); });
	auto res = run_experiment(ex);
	if (!spec.trace_path.empty())
		write_file(spec.trace_path, [&](std::ostream& o) { write_trace_jsonl(o, res.header, res.trace); });
	if (!spec.summary_path.empty())
		write_file(spec.summary_path, [&](std::ostream& o) { write_summary_csv(o, res.trace); });

	nlohmann::json out{{"rounds", res.trace.rounds.size()},
	                   {"injected", res.trace.injected},
	                   {"delivered", res.trace.delivered},
	                   {"max_load", res.trace.max_load},
	                   {"scheduler", to_json(ex.scheduler)}};
	out["bound"] = res.load_bound ? nlohmann::json(*res.load_bound) : nlohmann::json();
	int code = 0;
	if (res.failure) {
		out["failure"] = res.failure->to_json();
		code = 1;
	}
	if (res.load_bound && res.trace.max_load > *res.load_bound) {
		out["bound_exceeded"] = true;
		code = 1;
	}
	if (ex.lb && !res.failure) {
		auto log = stale_oracle(res.trace, ex.pattern, ex.topo, *ex.lb);
		out["oracle_violations"] = log.violations.size();
		if (!log.violations.empty()) {
			out["first_violation"] = to_json(log.violations.front());
			code = 1;
		}
	}
	std::cout << out.dump(2) << '\n';
	return code;
}

std::vector<SweepAxis> parse_axes(const std::vector<std::string>& texts)
{
	std::vector<SweepAxis> axes;
	for (const auto& t : texts) {
		auto eq = t.find('=');
		if (eq == std::string::npos || eq == 0)
			throw Error(ErrorCode::ParseError, "axis must look like key=v1,v2: '" + t + "'");
		SweepAxis a{t.substr(0, eq), {}};
		std::stringstream ss(t.substr(eq + 1));
		std::string v;
		while (std::getline(ss, v, ','))
			a.values.emplace_back(v);
		axes.push_back(std::move(a));
	}
	return axes;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"adversarial queuing simulator"};
	app.require_subcommand(1);

	auto* sim = app.add_subcommand("simulate", "run one experiment");
	SpecFlags sim_flags;
	sim_flags.add_to(*sim);
	std::string trace_path, summary_path, pattern_out;
	sim->add_option("--trace", trace_path, "write the JSON-lines trace here");
	sim->add_option("--summary", summary_path, "write the per-round summary CSV here");
	sim->add_option("--write-pattern", pattern_out, "write the injection pattern CSV here");

	auto* sweep = app.add_subcommand("sweep", "run the product of axis values over a base spec");
	SpecFlags sweep_flags;
	sweep_flags.add_to(*sweep);
	std::vector<std::string> axis_texts;
	std::string sweep_out;
	int jobs = 0;
	sweep->add_option("--axis", axis_texts, "key=v1,v2 (use 4:8 for node lists)");
	sweep->add_option("--out", sweep_out, "CSV output (default stdout)");
	sweep->add_option("--jobs", jobs, "parallel cells (default AQT_JOBS or 1)");

	auto* lb = app.add_subcommand("lowerbound", "run the lower-bound adversary against schedulers");
	int lb_m = 2, lb_ell = 2;
	std::string lb_rho, lb_out, lb_scheds = "ppts,hpts,greedy,drain-ppts";
	std::int64_t rho_num = 0, rho_den = 0;
	lb->add_option("--m", lb_m, "branching m");
	lb->add_option("--ell", lb_ell, "levels ell");
	lb->add_option("--rho", lb_rho, "rate as num/den");
	auto* rn = lb->add_option("--rho-num", rho_num, "rate numerator");
	auto* rd = lb->add_option("--rho-den", rho_den, "rate denominator");
	rn->needs(rd);
	rd->needs(rn);
	lb->add_option("--schedulers", lb_scheds, "comma list; drain- prefix allowed");
	lb->add_option("--out", lb_out, "also write the JSON report here");

	auto* val = app.add_subcommand("validate", "replay a stored trace through the checkers");
	std::string val_path, val_checkers = "all";
	val->add_option("trace", val_path, "JSON-lines trace")->required();
	val->add_option("--checkers", val_checkers, "all, none or a comma list");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		int rc = app.exit(e);
		return rc == 0 ? 0 : 2;
	}

	try {
		if (*sim) {
			auto spec = sim_flags.build(*sim);
			if (!trace_path.empty())
				spec.trace_path = trace_path;
			if (!summary_path.empty())
				spec.summary_path = summary_path;
			return simulate(spec, pattern_out);
		}
		if (*sweep) {
			auto cells = sweep_cells(sweep_flags.build(*sweep), parse_axes(axis_texts));
			run_sweep(cells, jobs > 0 ? jobs : jobs_default());
			if (sweep_out.empty())
				write_sweep_csv(std::cout, cells);
			else
				write_file(sweep_out, [&](std::ostream& o) { write_sweep_csv(o, cells); });
			int failed = 0;
			for (const auto& c : cells)
				failed += c.status == "ok" ? 0 : 1;
			if (failed)
				std::cerr << failed << " of " << cells.size() << " cells did not pass\n";
			return failed ? 1 : 0;
		}
		if (*lb) {
			LbParams params{lb_m, lb_ell, Rational(1, 2)};
			if (!lb_rho.empty())
				params.rho = parse_rational(lb_rho);
			if (rn->count()) {
				if (rho_den <= 0)
					throw Error(ErrorCode::InvalidParams, "--rho-den must be positive");
				params.rho = Rational(rho_num, rho_den);
			}
			std::vector<std::string> names;
			std::stringstream ss(lb_scheds);
			for (std::string s; std::getline(ss, s, ',');)
				if (!s.empty())
					names.push_back(s);
			auto rep = run_lowerbound(params, names);
			auto j = rep.to_json();
			if (!lb_out.empty())
				write_file(lb_out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
			std::cout << j.dump(2) << '\n';
			return rep.ok() ? 0 : 1;
		}
		if (*val) {
			std::ifstream in(val_path, std::ios::binary);
			if (!in)
				throw Error(ErrorCode::ParseError, "cannot open " + val_path);
			auto res = validate_trace(in, val_checkers);
			nlohmann::json j{{"ok", res.ok}, {"max_load", res.max_load}, {"problems", res.problems}};
			std::cout << j.dump(2) << '\n';
			return res.ok ? 0 : 1;
		}
	} catch (const Error& e) {
		std::cerr << "aqt: " << e.what() << '\n';
		return exit_code_for(e);
	} catch (const std::exception& e) {
		std::cerr << "aqt: " << e.what() << '\n';
		return 2;
	}
	return 0;
}
