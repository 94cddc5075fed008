#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aqt/engine.hpp"
#include "aqt/error.hpp"

namespace aqt {

// B_j(v) for every level j and vertex v, and their sum. A bad packet counts
// toward every node its path still has to leave: from its current node up
// to, but excluding, the target of its pseudo-buffer.
struct BadnessSnapshot
{
	std::vector<std::vector<std::int64_t>> level;
	std::vector<std::int64_t> total;
};

BadnessSnapshot badness(const Configuration& config, const Topology& topo, int levels);

struct CheckerReport
{
	std::string checker;
	Round round = 0;
	NodeId node = kNoNode;
	std::string expected;
	std::string observed;
	std::string detail;

	nlohmann::json to_json() const;
};

class CheckerFailure : public Error
{
	public:

	explicit CheckerFailure(CheckerReport report);
	const CheckerReport& report() const { return report_; }

	private:

	CheckerReport report_;
};

// Running excess of every vertex against accepted batches. With batches of
// ell rounds this is the excess of the ell-reduced pattern at rate ell*rho.
class ExcessTracker
{
	public:

	ExcessTracker(const Topology& topo, Rational rho, int batch);

	// Call once per round with the packets accepted in it.
	void advance(Round t, std::span<const Packet> accepted);

	Rational value(NodeId v) const { return Rational(xi_[v], den_); }
	Rational previous(NodeId v) const { return Rational(prev_[v], den_); }
	// value(v) * den(), kept as an integer so the hot loop avoids gcds
	std::int64_t scaled(NodeId v) const { return xi_[v]; }
	std::int64_t scaled_previous(NodeId v) const { return prev_[v]; }
	std::int64_t den() const { return den_; }
	const std::vector<std::int64_t>& arrivals() const { return arrivals_; }
	Rational rate() const { return rate_; }

	private:

	const Topology& topo_;
	Rational rate_;
	int batch_;
	std::int64_t den_;
	std::int64_t rate_scaled_;
	std::vector<std::int64_t> xi_;
	std::vector<std::int64_t> prev_;
	std::vector<std::int64_t> arrivals_;
};

struct CheckerContext
{
	const Topology& topo;
	const Scheduler& scheduler;
	// Declared bound of the adversary, when known.
	std::optional<RateBound> bound;
};

// Names: conservation, bad-decrease, badness-excess, excess.
std::vector<std::string> checker_names();

// "all", "none" or a comma list. With "all", checkers whose hypotheses do
// not hold for the context are left out; naming one explicitly is an error.
std::vector<std::unique_ptr<Checker>> make_checkers(const std::string& selection,
                                                    const CheckerContext& ctx);

// Whether a checker's hypotheses hold; fills `why` otherwise.
bool checker_applies(const std::string& name, const CheckerContext& ctx, std::string* why = nullptr);

} // namespace aqt
