#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "aqt/metrics.hpp"

namespace aqt {

namespace {

[[noreturn]] void fail(const std::string& checker, Round t, NodeId v, const std::string& expected,
                       const std::string& observed, const std::string& detail = {})
{
	throw CheckerFailure({checker, t, v, expected, observed, detail});
}

std::string leq(std::int64_t bound) { return "<= " + std::to_string(bound); }
std::string leq(const Rational& bound) { return "<= " + to_string(bound); }

class ConservationChecker : public Checker
{
	public:

	std::string name() const override { return "conservation"; }

	void after_forwarding(const StepView& v) override
	{
		const auto in_flight = v.injected_total - v.delivered_total;
		if (v.config.total() != in_flight)
			fail(name(), v.round, kNoNode, std::to_string(in_flight), std::to_string(v.config.total()),
			     "injected = delivered + in flight");

		const auto& rec = v.record;
		std::unordered_set<PacketId> delivered(rec.delivered.begin(), rec.delivered.end());
		std::vector<int> expect = rec.load_before;
		std::unordered_set<PacketId> seen;
		for (const auto& [from, id] : rec.sent) {
			if (!seen.insert(id).second)
				fail(name(), v.round, from, "one hop per packet", "packet " + std::to_string(id) + " sent twice");
			--expect[from];
			if (!delivered.count(id))
				++expect[v.topo.next_hop(from)];
		}
		for (NodeId u = 0; u < v.topo.vertex_count(); ++u)
			if (expect[u] != rec.load_after[u])
				fail(name(), v.round, u, std::to_string(expect[u]), std::to_string(rec.load_after[u]),
				     "load after = before - sent + received");
	}
};

class BadDecreaseChecker : public Checker
{
	public:

	BadDecreaseChecker(const Topology& topo, int levels, int batch)
	: topo_(topo)
	, levels_(levels)
	, batch_(batch)
	{}

	std::string name() const override { return "bad-decrease"; }

	void after_injection(const StepView& v) override
	{
		before_ = badness(v.config, topo_, levels_);
		if (batch_ > 1 && v.round % batch_ == 0) {
			phase_start_ = before_;
			in_phase_ = true;
		}
	}

	void after_forwarding(const StepView& v) override
	{
		const auto after = badness(v.config, topo_, levels_);
		const auto lambda = v.scheduler.active_level(v.round);
		const int nv = topo_.vertex_count();

		if (!lambda || batch_ == 1) {
			for (NodeId u = 0; u < nv; ++u) {
				auto bound = std::max<std::int64_t>(before_.total[u] - 1, 0);
				if (after.total[u] > bound)
					fail(name(), v.round, u, leq(bound), std::to_string(after.total[u]),
					     "badness after forwarding vs before (" + std::to_string(before_.total[u]) + ")");
			}
			return;
		}

		const int lv = *lambda;
		for (NodeId u = 0; u < nv; ++u) {
			if (after.total[u] > before_.total[u])
				fail(name(), v.round, u, leq(before_.total[u]), std::to_string(after.total[u]),
				     "total badness may not grow within a phase");
			auto bound = std::max<std::int64_t>(before_.level[lv][u] - 1, 0);
			if (after.level[lv][u] > bound)
				fail(name(), v.round, u, leq(bound), std::to_string(after.level[lv][u]),
				     "badness of active level " + std::to_string(lv));
			for (int j = lv + 1; j < levels_; ++j)
				if (after.level[j][u] != before_.level[j][u])
					fail(name(), v.round, u, std::to_string(before_.level[j][u]),
					     std::to_string(after.level[j][u]),
					     "level " + std::to_string(j) + " above the active level must not change");
		}

		if (in_phase_ && v.round % batch_ == batch_ - 1) {
			for (NodeId u = 0; u < nv; ++u) {
				auto bound = std::max<std::int64_t>(phase_start_.total[u] - 1, 0);
				if (after.total[u] > bound)
					fail(name(), v.round, u, leq(bound), std::to_string(after.total[u]),
					     "badness at phase end vs phase start (" + std::to_string(phase_start_.total[u]) + ")");
			}
		}
	}

	private:

	const Topology& topo_;
	int levels_;
	int batch_;
	BadnessSnapshot before_;
	BadnessSnapshot phase_start_;
	bool in_phase_ = false;
};

class BadnessExcessChecker : public Checker
{
	public:

	BadnessExcessChecker(const Topology& topo, int levels, Rational rho, int batch)
	: topo_(topo)
	, levels_(levels)
	, batch_(batch)
	, excess_(topo, rho, batch)
	{}

	std::string name() const override { return "badness-excess"; }

	void after_injection(const StepView& v) override
	{
		excess_.advance(v.round, v.accepted);
		if (v.round % batch_ != 0)
			return;
		const auto b = badness(v.config, topo_, levels_);
		for (NodeId u = 0; u < topo_.vertex_count(); ++u)
			if (b.total[u] * excess_.den() > excess_.scaled(u) + excess_.den())
				fail(name(), v.round, u, leq(excess_.value(u) + 1), std::to_string(b.total[u]),
				     "badness after injection vs excess + 1");
	}

	void after_forwarding(const StepView& v) override
	{
		if (v.round < batch_ || v.round % batch_ != batch_ - 1)
			return;
		const auto b = badness(v.config, topo_, levels_);
		for (NodeId u = 0; u < topo_.vertex_count(); ++u)
			if (b.total[u] * excess_.den() > excess_.scaled(u))
				fail(name(), v.round, u, leq(excess_.value(u)), std::to_string(b.total[u]),
				     "badness after forwarding vs excess");
	}

	private:

	const Topology& topo_;
	int levels_;
	int batch_;
	ExcessTracker excess_;
};

class ExcessChecker : public Checker
{
	public:

	ExcessChecker(const Topology& topo, RateBound bound, int batch)
	: bound_(bound)
	, batch_(batch)
	, excess_(topo, bound.rho, batch)
	{}

	std::string name() const override { return "excess"; }

	void after_injection(const StepView& v) override
	{
		excess_.advance(v.round, v.accepted);
		if (v.round % batch_ != 0)
			return;
		const auto den = excess_.den();
		const auto rate = excess_.rate().numerator();
		for (NodeId u = 0; u < static_cast<NodeId>(excess_.arrivals().size()); ++u) {
			const auto xi = excess_.scaled(u);
			if (xi > bound_.sigma * den)
				fail(name(), v.round, u, leq(bound_.sigma), to_string(excess_.value(u)),
				     "excess bounded by sigma");
			if (excess_.arrivals()[u] * den > xi - excess_.scaled_previous(u) + rate)
				fail(name(), v.round, u, leq(excess_.value(u) - excess_.previous(u) + excess_.rate()),
				     std::to_string(excess_.arrivals()[u]), "arrivals vs excess increase + rate");
		}
	}

	private:

	RateBound bound_;
	int batch_;
	ExcessTracker excess_;
};

std::vector<std::string> split(const std::string& s)
{
	std::vector<std::string> out;
	std::stringstream ss(s);
	std::string item;
	while (std::getline(ss, item, ','))
		if (!item.empty())
			out.push_back(item);
	return out;
}

} // namespace

std::vector<std::string> checker_names() { return {"conservation", "bad-decrease", "badness-excess", "excess"}; }

bool checker_applies(const std::string& name, const CheckerContext& ctx, std::string* why)
{
	auto no = [&](const std::string& reason) {
		if (why)
			*why = reason;
		return false;
	};
	const auto& s = ctx.scheduler;
	if (name == "conservation")
		return true;
	if (name == "bad-decrease" || name == "badness-excess") {
		if (!s.has_badness())
			return no(s.name() + " has no badness potential");
		if (s.drain())
			return no("the drain rule forwards non-bad packets, outside the lemma's activation rule");
		if (name == "bad-decrease")
			return true;
		if (!ctx.bound)
			return no("adversary bound unknown");
		if (ctx.bound->rho * Rational(s.batch_length()) > Rational(1))
			return no("needs batch * rho <= 1");
		return true;
	}
	if (name == "excess") {
		if (!ctx.bound)
			return no("adversary bound unknown");
		return true;
	}
	return no("unknown checker '" + name + "'");
}

std::vector<std::unique_ptr<Checker>> make_checkers(const std::string& selection, const CheckerContext& ctx)
{
	std::vector<std::string> names;
	bool explicit_list = false;
	if (selection == "all")
		names = checker_names();
	else if (selection != "none" && !selection.empty()) {
		names = split(selection);
		explicit_list = true;
	}

	std::vector<std::unique_ptr<Checker>> out;
	const int batch = ctx.scheduler.batch_length();
	const int levels = ctx.scheduler.levels();
	for (const auto& name : names) {
		std::string why;
		if (!checker_applies(name, ctx, &why)) {
			if (explicit_list)
				throw Error(ErrorCode::InvalidParams, "checker " + name + ": " + why);
			continue;
		}
		if (name == "conservation")
			out.push_back(std::make_unique<ConservationChecker>());
		else if (name == "bad-decrease")
			out.push_back(std::make_unique<BadDecreaseChecker>(ctx.topo, levels, batch));
		else if (name == "badness-excess")
			out.push_back(std::make_unique<BadnessExcessChecker>(ctx.topo, levels, ctx.bound->rho, batch));
		else if (name == "excess")
			out.push_back(std::make_unique<ExcessChecker>(ctx.topo, *ctx.bound, batch));
	}
	return out;
}

} // namespace aqt
