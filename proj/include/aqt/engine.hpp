#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqt/adversary.hpp"
#include "aqt/topology.hpp"

namespace aqt {

// Target used by schedulers that do not split buffers (greedy).
inline constexpr NodeId kAnyTarget = kNoNode;

// Every pseudo-buffer is named by a segment level and the node its packets
// are heading for. PTS and PPTS use level 0 and the final destination; HPTS
// uses the segment level and the intermediate destination.
struct PseudoBufferKey
{
	int level = 0;
	NodeId target = kAnyTarget;

	friend auto operator<=>(const PseudoBufferKey&, const PseudoBufferKey&) = default;
};

struct StoredPacket
{
	PacketId id = 0;
	NodeId dest = 0;
};

struct PseudoBuffer
{
	PseudoBufferKey key;
	// back() is the most recently stored packet
	std::vector<StoredPacket> items;
};

class Configuration
{
	public:

	Configuration() = default;
	explicit Configuration(int vertex_count);

	int vertex_count() const { return static_cast<int>(nodes_.size()); }

	void push(NodeId v, PseudoBufferKey key, StoredPacket p);
	// Removes and returns the top packet; nullopt if the pseudo-buffer is empty.
	std::optional<StoredPacket> pop(NodeId v, PseudoBufferKey key);

	// Nonempty pseudo-buffers of v, sorted by key.
	const std::vector<PseudoBuffer>& at(NodeId v) const { return nodes_[v]; }
	const PseudoBuffer* find(NodeId v, PseudoBufferKey key) const;
	std::size_t size(NodeId v, PseudoBufferKey key) const;

	int load(NodeId v) const;
	std::int64_t total() const { return total_; }
	std::vector<int> loads() const;

	private:

	std::vector<std::vector<PseudoBuffer>> nodes_;
	std::int64_t total_ = 0;
};

struct Activation
{
	NodeId node = 0;
	PseudoBufferKey key;

	friend auto operator<=>(const Activation&, const Activation&) = default;
};

using ActivationSet = std::vector<Activation>;

// At most one pseudo-buffer per node.
bool check_feasible(const ActivationSet& act);

// Sorts by node so traces do not depend on the order schedulers emit entries.
void normalize(ActivationSet& act);

class Scheduler
{
	public:

	virtual ~Scheduler() = default;

	virtual std::string name() const = 0;

	// Pseudo-buffer for a packet stored at `at` and bound for `dest`.
	virtual PseudoBufferKey route(NodeId at, NodeId dest) const = 0;

	virtual ActivationSet activate(const Configuration& config, Round t) = 0;

	// Injections are accepted every `batch_length` rounds.
	virtual int batch_length() const { return 1; }
	// Number of pseudo-buffer levels used in badness accounting.
	virtual int levels() const { return 1; }
	// Whether keys carry real targets, so badness is defined.
	virtual bool has_badness() const { return true; }
	// Level forwarded in round t, for schedulers that multiplex levels.
	virtual std::optional<int> active_level(Round) const { return std::nullopt; }

	bool drain() const { return drain_; }
	void set_drain(bool on) { drain_ = on; }

	// activate(), falling back to the drain rule when nothing was selected.
	ActivationSet select(const Configuration& config, Round t, bool& drained);

	protected:

	bool drain_ = false;
};

// One nonempty pseudo-buffer per nonempty node, largest key first.
ActivationSet drain_activation(const Configuration& config);

struct RoundRecord
{
	Round round = 0;
	std::vector<PacketId> injected;
	ActivationSet activation;
	// (sending node, packet)
	std::vector<std::pair<NodeId, PacketId>> sent;
	std::vector<PacketId> delivered;
	std::vector<int> load_before;
	std::vector<int> load_after;
	bool drained = false;
};

struct Trace
{
	Round horizon = 0;
	std::vector<RoundRecord> rounds;
	int max_load = 0;
	std::int64_t injected = 0;
	std::int64_t delivered = 0;
};

struct StepView
{
	const Topology& topo;
	const Scheduler& scheduler;
	const Configuration& config;
	Round round;
	// Packets accepted this round.
	std::span<const Packet> accepted;
	const RoundRecord& record;
	// Null in the after-injection hook.
	const ActivationSet* activation;
	std::int64_t injected_total;
	std::int64_t delivered_total;
};

class Checker
{
	public:

	virtual ~Checker() = default;
	virtual std::string name() const = 0;
	virtual void after_injection(const StepView&) {}
	virtual void after_forwarding(const StepView&) {}
};

class Simulation
{
	public:

	Simulation(const Topology& topo, const InjectionPattern& pattern, Scheduler& scheduler);

	void add_checker(Checker& c) { checkers_.push_back(&c); }

	// Runs rounds 1..horizon, extended to the last round in which a batch
	// is accepted. Throws CheckerFailure if a checker objects.
	Trace run(Round horizon);
	// Same, filling `trace` as it goes so a failed run keeps its prefix.
	void run(Round horizon, Trace& trace);

	// Single round; exposed for tests.
	RoundRecord step(Round t, std::span<const Packet> accepted);

	const Configuration& config() const { return config_; }

	private:

	const Topology& topo_;
	const InjectionPattern& pattern_;
	Scheduler& scheduler_;
	Configuration config_;
	std::vector<Checker*> checkers_;
	std::int64_t injected_ = 0;
	std::int64_t delivered_ = 0;
};

// Rounds actually simulated: horizon, stretched so every batch is accepted.
Round effective_horizon(const InjectionPattern& pattern, int batch, Round horizon);

// Original injection rounds accepted in round t.
std::pair<Round, Round> accepted_window(Round t, int batch);

} // namespace aqt
