#pragma once

#include <span>
#include <vector>

#include "json.hpp"

#include "aqt/rng.hpp"

namespace aqt {

using NodeId = int;

inline constexpr NodeId kNoNode = -1;

enum class TopologyKind { Line, Tree };

// A line of n buffers feeding an absorbing sink, or a directed tree with all
// edges pointing toward the root. Both are stored as parent arrays; a line is
// the path 0 -> 1 -> ... -> n-1 -> n with the sink n acting as the root.
// Immutable after construction.
class Topology
{
	public:

	static Topology line(int n);
	// parent[root] == root; every other node points at its next hop.
	static Topology tree(NodeId root, std::vector<NodeId> parent);
	// Random directed tree on n nodes; mixes bushy and path-like shapes.
	static Topology random_tree(int n, CounterRng& rng);

	// {"n": int} for lines, {"n", "root", "parent"} for trees.
	static Topology from_json(const nlohmann::json& j);
	nlohmann::json to_json() const;

	TopologyKind kind() const { return kind_; }
	bool is_line() const { return kind_ == TopologyKind::Line; }

	// Number of node ids usable as buffers or tree nodes (n).
	int node_count() const { return node_count_; }
	// Number of vertex ids including the line's sink (n + 1 for lines).
	int vertex_count() const { return static_cast<int>(parent_.size()); }
	NodeId root() const { return root_; }

	bool is_vertex(NodeId v) const { return v >= 0 && v < vertex_count(); }
	// A buffer is any vertex with an out-edge.
	bool is_buffer(NodeId v) const { return is_vertex(v) && v != root_; }
	NodeId next_hop(NodeId v) const { return v == root_ ? kNoNode : parent_[v]; }
	const std::vector<NodeId>& children(NodeId v) const { return children_[v]; }

	// u strictly precedes v: v lies on the path from u to the root.
	bool precedes(NodeId u, NodeId v) const
	{
		if (kind_ == TopologyKind::Line)
			return u < v;
		return enter_[v] < enter_[u] && exit_[u] <= exit_[v];
	}

	bool precedes_or_equal(NodeId u, NodeId v) const { return u == v || precedes(u, v); }

	// Inclusive node sequence u, ..., w. Throws NoPath unless u <= w.
	std::vector<NodeId> path(NodeId u, NodeId w) const;

	// Edges from v to the root.
	int depth_of(NodeId v) const { return depth_[v]; }
	// Longest leaf-to-root edge count.
	int depth() const { return max_depth_; }

	// Preorder position of v; descendants of v occupy (enter(v), exit(v)).
	int enter(NodeId v) const { return enter_[v]; }
	int exit(NodeId v) const { return exit_[v]; }

	private:

	Topology(TopologyKind kind, int node_count, NodeId root, std::vector<NodeId> parent);

	TopologyKind kind_;
	int node_count_;
	NodeId root_;
	std::vector<NodeId> parent_;
	std::vector<std::vector<NodeId>> children_;
	std::vector<int> enter_;
	std::vector<int> exit_;
	std::vector<int> depth_;
	int max_depth_ = 0;
};

// Members of `bad` with no other member of `bad` strictly below them.
std::vector<NodeId> min_antichain(const Topology& topo, std::span<const NodeId> bad);

// Length of the longest strictly increasing chain inside `dests`.
int destination_depth(const Topology& topo, std::span<const NodeId> dests);

} // namespace aqt
