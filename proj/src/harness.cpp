#include "aqt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "aqt/trace_io.hpp"

namespace aqt {

namespace {

std::string lower(std::string s)
{
	std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
	return s;
}

Rational json_rational(const nlohmann::json& v)
{
	if (v.is_string())
		return parse_rational(v.get<std::string>());
	if (v.is_number_integer())
		return Rational(v.get<std::int64_t>());
	throw Error(ErrorCode::ParseError, "rates are written as \"num/den\" strings, got " + v.dump());
}

std::int64_t json_int(const nlohmann::json& v, const std::string& key)
{
	if (v.is_number_integer())
		return v.get<std::int64_t>();
	if (v.is_string()) {
		try {
			std::size_t used = 0;
			auto x = std::stoll(v.get<std::string>(), &used);
			if (used == v.get<std::string>().size())
				return x;
		} catch (const std::logic_error&) {
		}
	}
	throw Error(ErrorCode::ParseError, key + " must be an integer, got " + v.dump());
}

bool json_bool(const nlohmann::json& v, const std::string& key)
{
	if (v.is_boolean())
		return v.get<bool>();
	if (v.is_string()) {
		auto s = lower(v.get<std::string>());
		if (s == "true" || s == "1" || s == "yes")
			return true;
		if (s == "false" || s == "0" || s == "no")
			return false;
	}
	if (v.is_number_integer())
		return v.get<int>() != 0;
	throw Error(ErrorCode::ParseError, key + " must be a boolean, got " + v.dump());
}

std::vector<NodeId> json_nodes(const nlohmann::json& v)
{
	if (v.is_array()) {
		std::vector<NodeId> out;
		for (const auto& x : v)
			out.push_back(static_cast<NodeId>(json_int(x, "dests")));
		return out;
	}
	if (v.is_string())
		return parse_node_list(v.get<std::string>());
	if (v.is_number_integer())
		return {v.get<NodeId>()};
	throw Error(ErrorCode::ParseError, "node list expected, got " + v.dump());
}

std::vector<NodeId> spread_dests(int n, int d)
{
	if (d < 1 || d > n)
		throw Error(ErrorCode::InvalidParams, "need 1 <= d <= n, got d = " + std::to_string(d));
	std::vector<NodeId> out;
	for (int k = 1; k <= d; ++k)
		out.push_back(static_cast<NodeId>((static_cast<std::int64_t>(n) * k + d - 1) / d));
	out.erase(std::unique(out.begin(), out.end()), out.end());
	return out;
}

Topology load_topology(const std::string& text, std::uint64_t seed)
{
	auto colon = text.find(':');
	if (colon == std::string::npos)
		throw Error(ErrorCode::ParseError, "topology must be line:N, tree:FILE or tree-random:N");
	auto kind = text.substr(0, colon);
	auto arg = text.substr(colon + 1);
	auto number = [&]() {
		try {
			std::size_t used = 0;
			int n = std::stoi(arg, &used);
			if (used == arg.size())
				return n;
		} catch (const std::logic_error&) {
		}
		throw Error(ErrorCode::ParseError, "bad node count in topology '" + text + "'");
	};
	if (kind == "line")
		return Topology::line(number());
	if (kind == "tree-random") {
		CounterRng rng(seed, 0x7ee);
		return Topology::random_tree(number(), rng);
	}
	if (kind == "tree") {
		std::ifstream in(arg);
		if (!in)
			throw Error(ErrorCode::ParseError, "cannot open topology file " + arg);
		try {
			return Topology::from_json(nlohmann::json::parse(in));
		} catch (const nlohmann::json::exception& e) {
			throw Error(ErrorCode::ParseError, "topology file " + arg + ": " + e.what());
		}
	}
	throw Error(ErrorCode::ParseError, "unknown topology kind '" + kind + "'");
}

std::string order_name(LevelOrder o) { return o == LevelOrder::Decreasing ? "decreasing" : "increasing"; }

LevelOrder parse_order(const std::string& s)
{
	if (s == "decreasing")
		return LevelOrder::Decreasing;
	if (s == "increasing")
		return LevelOrder::Increasing;
	throw Error(ErrorCode::ParseError, "level order is decreasing or increasing, got '" + s + "'");
}

std::string join(const std::vector<NodeId>& v)
{
	std::string out;
	for (std::size_t i = 0; i < v.size(); ++i)
		out += (i ? "," : "") + std::to_string(v[i]);
	return out;
}

} // namespace

std::vector<NodeId> parse_node_list(const std::string& text)
{
	// "4,8" on the command line, "4:8" inside sweep axis values
	std::vector<NodeId> out;
	std::string item;
	std::stringstream ss(text);
	auto flush = [&]() {
		if (item.empty())
			return;
		try {
			std::size_t used = 0;
			out.push_back(std::stoi(item, &used));
			if (used != item.size())
				throw std::invalid_argument(item);
		} catch (const std::logic_error&) {
			throw Error(ErrorCode::ParseError, "bad node id '" + item + "' in list '" + text + "'");
		}
		item.clear();
	};
	for (char c : text) {
		if (c == ',' || c == ':' || c == ' ')
			flush();
		else
			item += c;
	}
	flush();
	return out;
}

AdversaryKind parse_adversary_kind(const std::string& s)
{
	if (s == "random")
		return AdversaryKind::Random;
	if (s == "lowerbound")
		return AdversaryKind::LowerBound;
	if (s == "file")
		return AdversaryKind::File;
	if (s == "none" || s == "empty")
		return AdversaryKind::None;
	throw Error(ErrorCode::ParseError, "unknown adversary '" + s + "'");
}

std::string to_string(AdversaryKind k)
{
	switch (k) {
		case AdversaryKind::None: return "none";
		case AdversaryKind::Random: return "random";
		case AdversaryKind::LowerBound: return "lowerbound";
		case AdversaryKind::File: return "file";
	}
	return "?";
}

void merge_spec(ExperimentSpec& s, const nlohmann::json& j)
{
	if (!j.is_object())
		throw Error(ErrorCode::ParseError, "experiment spec must be a JSON object");
	std::optional<std::int64_t> rho_num, rho_den;
	for (const auto& [key, v] : j.items()) {
		if (key == "topo" || key == "topology")
			s.topology = v.get<std::string>();
		else if (key == "n")
			s.topology = "line:" + std::to_string(json_int(v, key));
		else if (key == "adversary")
			s.adversary.kind = parse_adversary_kind(v.get<std::string>());
		else if (key == "pattern")
			s.adversary.path = v.get<std::string>();
		else if (key == "rho") {
			s.adversary.rho = json_rational(v);
			s.adversary.declared_bound = true;
		} else if (key == "rho-num")
			rho_num = json_int(v, key);
		else if (key == "rho-den")
			rho_den = json_int(v, key);
		else if (key == "sigma") {
			s.adversary.sigma = json_int(v, key);
			s.adversary.declared_bound = true;
		} else if (key == "adversary-dests")
			s.adversary.dests = json_nodes(v);
		else if (key == "scheduler") {
			auto name = v.get<std::string>();
			if (name.rfind("drain-", 0) == 0) {
				s.drain = true;
				name = name.substr(6);
			}
			s.scheduler = parse_scheduler_kind(name);
		} else if (key == "dests")
			s.dests = json_nodes(v);
		else if (key == "d")
			s.d = static_cast<int>(json_int(v, key));
		else if (key == "drain")
			s.drain = json_bool(v, key);
		else if (key == "order")
			s.order = parse_order(v.get<std::string>());
		else if (key == "m")
			s.m = static_cast<int>(json_int(v, key));
		else if (key == "ell")
			s.ell = static_cast<int>(json_int(v, key));
		else if (key == "horizon")
			s.horizon = json_int(v, key);
		else if (key == "seed")
			s.seed = static_cast<std::uint64_t>(json_int(v, key));
		else if (key == "checkers")
			s.checkers = v.get<std::string>();
		else if (key == "trace")
			s.trace_path = v.get<std::string>();
		else if (key == "summary")
			s.summary_path = v.get<std::string>();
		else
			throw Error(ErrorCode::ParseError, "unknown spec key '" + key + "'");
	}
	if (rho_num || rho_den) {
		if (!rho_num || !rho_den || *rho_den <= 0)
			throw Error(ErrorCode::ParseError, "rho-num and rho-den go together, with rho-den > 0");
		s.adversary.rho = Rational(*rho_num, *rho_den);
		s.adversary.declared_bound = true;
	}
}

ExperimentSpec spec_from_json(const nlohmann::json& j)
{
	ExperimentSpec s;
	merge_spec(s, j);
	return s;
}

nlohmann::json to_json(const ExperimentSpec& s)
{
	nlohmann::json j{{"topo", s.topology},
	                 {"adversary", to_string(s.adversary.kind)},
	                 {"rho", to_string(s.adversary.rho)},
	                 {"sigma", s.adversary.sigma},
	                 {"scheduler", to_string(s.scheduler)},
	                 {"drain", s.drain},
	                 {"order", order_name(s.order)},
	                 {"m", s.m},
	                 {"ell", s.ell},
	                 {"horizon", s.horizon},
	                 {"seed", s.seed},
	                 {"checkers", s.checkers}};
	if (!s.dests.empty())
		j["dests"] = s.dests;
	if (s.d)
		j["d"] = s.d;
	if (!s.adversary.dests.empty())
		j["adversary-dests"] = s.adversary.dests;
	if (!s.adversary.path.empty())
		j["pattern"] = s.adversary.path;
	return j;
}

nlohmann::json to_json(const SchedulerSpec& s)
{
	nlohmann::json j{{"kind", to_string(s.kind)}, {"dests", s.dests}, {"drain", s.drain}};
	if (s.kind == SchedulerKind::Hpts) {
		j["m"] = s.m;
		j["ell"] = s.ell;
		j["order"] = order_name(s.order);
	}
	return j;
}

SchedulerSpec scheduler_spec_from_json(const nlohmann::json& j)
{
	try {
		SchedulerSpec s;
		s.kind = parse_scheduler_kind(j.at("kind").get<std::string>());
		s.dests = j.value("dests", std::vector<NodeId>{});
		s.drain = j.value("drain", false);
		s.m = j.value("m", 2);
		s.ell = j.value("ell", 1);
		s.order = parse_order(j.value("order", std::string("decreasing")));
		return s;
	} catch (const nlohmann::json::exception& e) {
		throw Error(ErrorCode::ParseError, std::string("scheduler spec: ") + e.what());
	}
}

Experiment build_experiment(const ExperimentSpec& spec)
{
	Experiment ex{spec, Topology::line(1), {}, {}, {}, {}, spec.horizon};
	const auto& adv = spec.adversary;
	if (spec.horizon < 1)
		throw Error(ErrorCode::InvalidParams, "horizon must be >= 1");

	if (adv.kind == AdversaryKind::LowerBound) {
		LbParams lb{spec.m, spec.ell, adv.rho};
		lb.validate();
		ex.lb = lb;
		const auto n = static_cast<int>(lb.n());
		if (spec.topology.empty())
			ex.topo = Topology::line(n);
		else {
			ex.topo = load_topology(spec.topology, spec.seed);
			if (!ex.topo.is_line() || ex.topo.node_count() != n)
				throw Error(ErrorCode::InvalidParams,
				            "the lower-bound adversary needs line:" + std::to_string(n));
		}
		ex.pattern = lb_pattern(lb);
		ex.bound = ex.pattern.bound();
		ex.horizon = lb.horizon();
	} else {
		ex.topo = load_topology(spec.topology.empty() ? "line:16" : spec.topology, spec.seed);
	}

	auto dests = spec.dests;
	if (dests.empty() && spec.d > 0)
		dests = spread_dests(ex.topo.node_count(), spec.d);

	switch (adv.kind) {
		case AdversaryKind::None:
			ex.pattern = InjectionPattern({}, RateBound{adv.rho, adv.sigma});
			ex.bound = ex.pattern.bound();
			break;
		case AdversaryKind::Random: {
			auto gen = !adv.dests.empty() ? adv.dests : dests;
			if (gen.empty())
				gen = {ex.topo.root()};
			if (dests.empty())
				dests = gen;
			ex.pattern = random_bounded(spec.seed, ex.topo, adv.rho, adv.sigma, spec.horizon, gen);
			ex.bound = ex.pattern.bound();
			break;
		}
		case AdversaryKind::File: {
			std::ifstream in(adv.path);
			if (!in)
				throw Error(ErrorCode::ParseError, "cannot open pattern file '" + adv.path + "'");
			ex.pattern = read_pattern_csv(in);
			if (adv.declared_bound) {
				ex.bound = RateBound{adv.rho, adv.sigma};
				ex.pattern.set_bound(ex.bound);
			}
			ex.horizon = std::max(spec.horizon, ex.pattern.last_round());
			break;
		}
		case AdversaryKind::LowerBound:
			break;
	}
	check_packets(ex.pattern, ex.topo);
	if (ex.bound) {
		if (auto bad = validate_bounded(ex.pattern, ex.topo, ex.bound->rho, ex.bound->sigma))
			throw Error(ErrorCode::InvalidParams,
			            "pattern is not (" + to_string(ex.bound->rho) + ", " + std::to_string(ex.bound->sigma) +
			                ")-bounded at node " + std::to_string(bad->node) + " over rounds [" +
			                std::to_string(bad->start) + ", " + std::to_string(bad->end) + "]");
	}

	if (dests.empty()) {
		std::set<NodeId> seen;
		for (const auto& p : ex.pattern.packets())
			seen.insert(p.dest);
		dests.assign(seen.begin(), seen.end());
		if (dests.empty())
			dests = {ex.topo.root()};
	}

	SchedulerSpec& s = ex.scheduler;
	s.kind = spec.scheduler;
	s.dests = dests;
	s.drain = spec.drain;
	s.order = spec.order;
	s.ell = spec.ell;
	s.m = spec.m;
	if (spec.scheduler == SchedulerKind::Hpts && (ex.lb || s.m == 0))
		s.m = hpts_branching_for(ex.topo.node_count(), s.ell);
	return ex;
}

std::optional<std::int64_t> theorem_bound(const Experiment& ex)
{
	if (!ex.bound || ex.scheduler.drain)
		return std::nullopt;
	const auto sigma = ex.bound->sigma;
	const auto& s = ex.scheduler;
	if (ex.bound->rho > Rational(1))
		return std::nullopt;
	switch (s.kind) {
		case SchedulerKind::Pts:
		case SchedulerKind::TreePts:
			return 2 + sigma;
		case SchedulerKind::Ppts:
			return 1 + static_cast<std::int64_t>(s.dests.size()) + sigma;
		case SchedulerKind::TreePpts:
			return 1 + destination_depth(ex.topo, s.dests) + sigma;
		case SchedulerKind::Hpts:
			if (ex.bound->rho * Rational(s.ell) > Rational(1))
				return std::nullopt;
			return static_cast<std::int64_t>(s.ell) * s.m + sigma + 1;
		default:
			return std::nullopt;
	}
}

nlohmann::json trace_header(const Experiment& ex)
{
	nlohmann::json packets = nlohmann::json::array();
	for (const auto& p : ex.pattern.packets())
		packets.push_back({p.id, p.round, p.source, p.dest, p.type});
	nlohmann::json h{{"format", "aqt-trace/1"},
	                 {"topology", ex.topo.to_json()},
	                 {"scheduler", to_json(ex.scheduler)},
	                 {"horizon", ex.horizon},
	                 {"seed", ex.spec.seed},
	                 {"packets", packets}};
	if (ex.bound)
		h["bound"] = {{"rho", to_string(ex.bound->rho)}, {"sigma", ex.bound->sigma}};
	if (ex.lb)
		h["lowerbound"] = {{"m", ex.lb->m}, {"ell", ex.lb->ell}, {"rho", to_string(ex.lb->rho)}};
	return h;
}

namespace {

std::optional<CheckerReport> run_guarded(Simulation& sim, Round horizon, Trace& trace)
{
	try {
		sim.run(horizon, trace);
	} catch (const CheckerFailure& f) {
		return f.report();
	} catch (const Error& e) {
		if (e.code() == ErrorCode::InfeasibleActivation)
			return CheckerReport{"feasibility", static_cast<Round>(trace.rounds.size()) + 1, kNoNode,
			                     "at most one pseudo-buffer per node", e.what(), {}};
		if (e.code() == ErrorCode::CapacityViolation)
			return CheckerReport{"capacity", static_cast<Round>(trace.rounds.size()) + 1, kNoNode,
			                     "one packet per edge", e.what(), {}};
		throw;
	}
	return std::nullopt;
}

} // namespace

RunResult run_experiment(const Experiment& ex)
{
	RunResult res;
	auto sched = make_scheduler(ex.scheduler, ex.topo);
	auto checkers = make_checkers(ex.spec.checkers, {ex.topo, *sched, ex.bound});
	Simulation sim(ex.topo, ex.pattern, *sched);
	for (auto& c : checkers)
		sim.add_checker(*c);
	res.failure = run_guarded(sim, ex.horizon, res.trace);
	res.header = trace_header(ex);
	res.load_bound = theorem_bound(ex);
	return res;
}

//
// sweep
//

std::vector<SweepCell> sweep_cells(const ExperimentSpec& base, const std::vector<SweepAxis>& axes)
{
	std::vector<SweepCell> cells(1);
	cells[0].spec = base;
	for (const auto& axis : axes) {
		if (axis.values.empty())
			throw Error(ErrorCode::InvalidParams, "sweep axis '" + axis.key + "' has no values");
		std::vector<SweepCell> next;
		for (const auto& cell : cells)
			for (const auto& v : axis.values) {
				SweepCell c = cell;
				merge_spec(c.spec, nlohmann::json{{axis.key, v}});
				next.push_back(std::move(c));
			}
		cells = std::move(next);
	}
	for (std::size_t i = 0; i < cells.size(); ++i)
		cells[i].id = static_cast<int>(i);
	return cells;
}

namespace {

void run_cell(SweepCell& cell)
{
	try {
		auto spec = cell.spec;
		spec.trace_path.clear();
		spec.summary_path.clear();
		auto ex = build_experiment(spec);
		auto res = run_experiment(ex);
		cell.max_load = res.trace.max_load;
		cell.bound = res.load_bound;
		if (res.failure)
			cell.status = std::string("checker-failure: ") + CheckerFailure(*res.failure).what();
		else if (cell.bound && cell.max_load > *cell.bound)
			cell.status = "bound-exceeded";
		if (ex.lb && !res.failure) {
			auto log = stale_oracle(res.trace, ex.pattern, ex.topo, *ex.lb);
			auto verdicts = scenario_check(log);
			int held = 0;
			for (const auto& v : verdicts)
				held += v.holds() ? 1 : 0;
			cell.scenarios = std::to_string(held) + "/" + std::to_string(verdicts.size());
			if (!log.violations.empty())
				cell.status = "oracle: " + log.violations.front().lemma;
			else if (held != static_cast<int>(verdicts.size()))
				cell.status = "dichotomy-failed";
		}
	} catch (const Error& e) {
		cell.status = std::string("error: ") + e.what();
	}
}

std::string csv_field(const std::string& s)
{
	if (s.find_first_of(",\"\n") == std::string::npos)
		return s;
	std::string out = "\"";
	for (char c : s)
		out += c == '"' ? std::string("\"\"") : std::string(1, c);
	return out + "\"";
}

} // namespace

void run_sweep(std::vector<SweepCell>& cells, int jobs)
{
	jobs = std::max(1, jobs);
	std::atomic<std::size_t> next{0};
	auto worker = [&]() {
		for (std::size_t i = next++; i < cells.size(); i = next++)
			run_cell(cells[i]);
	};
	std::vector<std::thread> pool;
	for (int i = 1; i < jobs && i < static_cast<int>(cells.size()); ++i)
		pool.emplace_back(worker);
	worker();
	for (auto& t : pool)
		t.join();
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells)
{
	out << "cell,topology,adversary,scheduler,rho,sigma,d,dests,ell,m,seed,horizon,max_load,bound,ratio,"
	       "scenarios,status\n";
	for (const auto& c : cells) {
		const auto& s = c.spec;
		std::ostringstream ratio;
		if (c.bound && *c.bound > 0)
			ratio << std::fixed << std::setprecision(4) << static_cast<double>(c.max_load) / *c.bound;
		out << c.id << ',' << csv_field(s.topology.empty() ? "auto" : s.topology) << ','
		    << to_string(s.adversary.kind) << ',' << (s.drain ? "drain-" : "") << to_string(s.scheduler) << ','
		    << to_string(s.adversary.rho) << ',' << s.adversary.sigma << ',' << s.d << ','
		    << csv_field(join(s.dests)) << ',' << s.ell << ',' << s.m << ',' << s.seed << ',' << s.horizon << ','
		    << c.max_load << ',' << (c.bound ? std::to_string(*c.bound) : "") << ',' << ratio.str() << ','
		    << c.scenarios << ',' << csv_field(c.status) << '\n';
	}
}

//
// lower bound
//

bool LowerBoundRun::ok() const
{
	if (checker_failure || !log.violations.empty())
		return false;
	return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.holds(); });
}

nlohmann::json LowerBoundRun::to_json() const
{
	nlohmann::json violations = nlohmann::json::array();
	for (const auto& v : log.violations)
		violations.push_back(aqt::to_json(v));
	nlohmann::json scen = nlohmann::json::array();
	for (const auto& v : verdicts)
		scen.push_back(v.to_json());
	std::int64_t alpha = 0, beta = 0;
	for (auto x : log.alpha)
		alpha += x;
	for (auto x : log.beta)
		beta += x;
	nlohmann::json j{{"scheduler", scheduler},
	                 {"ok", ok()},
	                 {"max_load", max_load},
	                 {"alpha_stale", alpha},
	                 {"beta_stale", beta},
	                 {"fresh_at_block", log.fresh_at_block},
	                 {"violations", violations},
	                 {"scenarios", scen}};
	if (checker_failure)
		j["checker_failure"] = checker_failure->to_json();

	// what the run shows about buffer space: the fullest buffer inside a
	// branch-1 interval, and the average load the fresh packets force
	std::int64_t peak = 0;
	for (const auto& v : verdicts)
		if (v.branch1)
			peak = std::max(peak, v.witness_peak);
	j["branch1_peak_load"] = peak;
	if (!log.fresh_at_block.empty())
		j["fresh_average_load"] =
		    to_string(Rational(log.fresh_at_block.back(), log.params.n()));
	return j;
}

bool LowerBoundReport::ok() const
{
	if (boundedness || f_moves)
		return false;
	return std::all_of(runs.begin(), runs.end(), [](const auto& r) { return r.ok(); });
}

nlohmann::json LowerBoundReport::to_json() const
{
	nlohmann::json j{{"m", params.m},
	                 {"ell", params.ell},
	                 {"rho", to_string(params.rho)},
	                 {"n", params.n()},
	                 {"horizon", params.horizon()},
	                 {"ok", ok()},
	                 {"bounded", !boundedness.has_value()}};
	if (boundedness)
		j["boundedness_violation"] = {{"node", boundedness->node},
		                              {"start", boundedness->start},
		                              {"end", boundedness->end},
		                              {"count", boundedness->count}};
	j["f_moves"] = f_moves ? aqt::to_json(*f_moves) : nlohmann::json("ok");
	j["runs"] = nlohmann::json::array();
	for (const auto& r : runs)
		j["runs"].push_back(r.to_json());
	return j;
}

LowerBoundReport run_lowerbound(const LbParams& params, const std::vector<std::string>& schedulers)
{
	params.validate();
	LowerBoundReport rep{params, {}, {}, {}};
	{
		auto pattern = lb_pattern(params);
		auto topo = Topology::line(static_cast<int>(params.n()));
		rep.boundedness = validate_bounded(pattern, topo, params.rho, 1);
	}
	rep.f_moves = check_f_moves(params);

	for (const auto& name : schedulers) {
		ExperimentSpec spec;
		spec.adversary.kind = AdversaryKind::LowerBound;
		spec.adversary.rho = params.rho;
		spec.m = params.m;
		spec.ell = params.ell;
		merge_spec(spec, nlohmann::json{{"scheduler", name}});
		auto ex = build_experiment(spec);
		auto res = run_experiment(ex);

		LowerBoundRun run;
		run.scheduler = name;
		run.max_load = res.trace.max_load;
		run.checker_failure = res.failure;
		if (!res.failure) {
			run.log = stale_oracle(res.trace, ex.pattern, ex.topo, params);
			run.verdicts = scenario_check(run.log);
		} else {
			run.log.params = params;
		}
		rep.runs.push_back(std::move(run));
	}
	return rep;
}

//
// validate
//

namespace {

// Feeds stored activations to the engine while answering every other
// question the way the original scheduler does.
class ReplayScheduler : public Scheduler
{
	public:

	ReplayScheduler(std::unique_ptr<Scheduler> inner, const Trace& stored)
	: inner_(std::move(inner))
	, stored_(stored)
	{
		drain_ = inner_->drain();
	}

	std::string name() const override { return inner_->name(); }
	PseudoBufferKey route(NodeId at, NodeId dest) const override { return inner_->route(at, dest); }
	int batch_length() const override { return inner_->batch_length(); }
	int levels() const override { return inner_->levels(); }
	bool has_badness() const override { return inner_->has_badness(); }
	std::optional<int> active_level(Round t) const override { return inner_->active_level(t); }

	ActivationSet activate(const Configuration& config, Round t) override
	{
		bool drained = false;
		rule_ = inner_->select(config, t, drained);
		const auto* rec = record(t);
		if (!rec || rec->drained)
			return {};
		return rec->activation;
	}

	const ActivationSet& rule() const { return rule_; }

	const RoundRecord* record(Round t) const
	{
		if (t < 1 || t > static_cast<Round>(stored_.rounds.size()))
			return nullptr;
		return &stored_.rounds[static_cast<std::size_t>(t - 1)];
	}

	private:

	std::unique_ptr<Scheduler> inner_;
	const Trace& stored_;
	ActivationSet rule_;
};

// The activation a scheduler's own rule picks must be the one recorded.
class RuleChecker : public Checker
{
	public:

	explicit RuleChecker(const ReplayScheduler& replay)
	: replay_(replay)
	{
	}

	std::string name() const override { return "replay-rule"; }

	void after_forwarding(const StepView& v) override
	{
		auto recorded = v.record.activation;
		normalize(recorded);
		if (recorded == replay_.rule())
			return;
		throw CheckerFailure(CheckerReport{name(), v.round, kNoNode, describe(replay_.rule()),
		                                   describe(recorded),
		                                   "recorded activation is not the scheduler's choice"});
	}

	private:

	static std::string describe(const ActivationSet& a)
	{
		nlohmann::json j = nlohmann::json::array();
		for (const auto& x : a)
			j.push_back({x.node, x.key.level, x.key.target});
		return j.dump();
	}

	const ReplayScheduler& replay_;
};

InjectionPattern pattern_from_header(const nlohmann::json& h)
{
	std::vector<Packet> packets;
	for (const auto& p : h.at("packets"))
		packets.push_back(Packet{p.at(0).get<PacketId>(), p.at(1).get<Round>(), p.at(2).get<NodeId>(),
		                         p.at(3).get<NodeId>(), p.at(4).get<int>()});
	std::optional<RateBound> bound;
	if (h.contains("bound"))
		bound = RateBound{parse_rational(h["bound"].at("rho").get<std::string>()),
		                  h["bound"].at("sigma").get<std::int64_t>()};
	return InjectionPattern(std::move(packets), bound);
}

} // namespace

ValidateResult validate_trace(std::istream& in, const std::string& checkers)
{
	ValidateResult out;
	auto stored = read_trace_jsonl(in);
	const auto& h = stored.header;

	std::optional<Topology> topo;
	InjectionPattern pattern;
	SchedulerSpec sspec;
	std::optional<LbParams> lb;
	Round horizon = 0;
	try {
		topo = Topology::from_json(h.at("topology"));
		pattern = pattern_from_header(h);
		sspec = scheduler_spec_from_json(h.at("scheduler"));
		horizon = h.at("horizon").get<Round>();
		if (h.contains("lowerbound")) {
			const auto& l = h["lowerbound"];
			lb = LbParams{l.at("m").get<int>(), l.at("ell").get<int>(),
			              parse_rational(l.at("rho").get<std::string>())};
		}
	} catch (const nlohmann::json::exception& e) {
		throw Error(ErrorCode::ParseError, std::string("trace header: ") + e.what());
	}
	check_packets(pattern, *topo);

	auto replay = std::make_unique<ReplayScheduler>(make_scheduler(sspec, *topo), stored.trace);
	auto list = make_checkers(checkers, {*topo, *replay, pattern.bound()});
	RuleChecker rule(*replay);
	Simulation sim(*topo, pattern, *replay);
	for (auto& c : list)
		sim.add_checker(*c);
	sim.add_checker(rule);

	if (static_cast<Round>(stored.trace.rounds.size()) != effective_horizon(pattern, replay->batch_length(), horizon)) {
		out.problems.push_back("trace has " + std::to_string(stored.trace.rounds.size()) +
		                       " rounds, expected " +
		                       std::to_string(effective_horizon(pattern, replay->batch_length(), horizon)));
	}

	Trace again;
	try {
		sim.run(horizon, again);
	} catch (const CheckerFailure& f) {
		out.problems.push_back(f.what());
	} catch (const Error& e) {
		if (e.code() != ErrorCode::InfeasibleActivation && e.code() != ErrorCode::CapacityViolation)
			throw;
		out.problems.push_back(e.what());
	}
	out.max_load = again.max_load;

	for (std::size_t i = 0; i < again.rounds.size() && i < stored.trace.rounds.size(); ++i) {
		if (to_json(again.rounds[i]) != to_json(stored.trace.rounds[i])) {
			out.problems.push_back("round " + std::to_string(i + 1) + " differs from its recomputation: stored " +
			                       to_json(stored.trace.rounds[i]).dump() + ", recomputed " +
			                       to_json(again.rounds[i]).dump());
			break;
		}
	}

	if (lb && out.problems.empty()) {
		auto log = stale_oracle(again, pattern, *topo, *lb);
		for (const auto& v : log.violations)
			out.problems.push_back("oracle " + v.lemma + " at round " + std::to_string(v.round) + ": " + v.detail);
		for (const auto& v : scenario_check(log))
			if (!v.holds())
				out.problems.push_back("no scenario holds for t_ell = " + std::to_string(v.t_ell));
	}
	out.ok = out.problems.empty();
	return out;
}

int exit_code_for(const Error& e)
{
	switch (e.code()) {
		case ErrorCode::CheckerFailure:
		case ErrorCode::InfeasibleActivation:
		case ErrorCode::CapacityViolation:
			return 1;
		default:
			return 2;
	}
}

} // namespace aqt
