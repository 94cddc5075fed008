#include "aqt/topology.hpp"

#include <algorithm>
#include <numeric>

#include "aqt/error.hpp"

namespace aqt {

Topology::Topology(TopologyKind kind, int node_count, NodeId root, std::vector<NodeId> parent)
: kind_(kind)
, node_count_(node_count)
, root_(root)
, parent_(std::move(parent))
{
	const int V = vertex_count();
	children_.assign(V, {});
	for (NodeId v = 0; v < V; ++v)
		if (v != root_)
			children_[parent_[v]].push_back(v);

	// iterative preorder walk from the root; also detects cycles
	enter_.assign(V, -1);
	exit_.assign(V, -1);
	depth_.assign(V, 0);
	int clock = 0;
	std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 0}};
	enter_[root_] = clock++;
	while (!stack.empty()) {
		auto& [v, next_child] = stack.back();
		if (next_child < children_[v].size()) {
			NodeId c = children_[v][next_child++];
			enter_[c] = clock++;
			depth_[c] = depth_[v] + 1;
			max_depth_ = std::max(max_depth_, depth_[c]);
			stack.emplace_back(c, 0);
		} else {
			exit_[v] = clock;
			stack.pop_back();
		}
	}
	if (clock != V)
		throw Error(ErrorCode::InvalidTopology, "parent pointers contain a cycle");
}

Topology Topology::line(int n)
{
	if (n < 1)
		throw Error(ErrorCode::InvalidTopology, "line needs at least one buffer");
	std::vector<NodeId> parent(n + 1);
	std::iota(parent.begin(), parent.end(), 1);
	parent[n] = n;
	return Topology(TopologyKind::Line, n, n, std::move(parent));
}

Topology Topology::tree(NodeId root, std::vector<NodeId> parent)
{
	const int n = static_cast<int>(parent.size());
	if (n < 1 || root < 0 || root >= n)
		throw Error(ErrorCode::InvalidTopology, "root out of range");
	if (parent[root] != root)
		throw Error(ErrorCode::InvalidTopology, "parent[root] must equal root");
	for (NodeId v = 0; v < n; ++v) {
		if (parent[v] < 0 || parent[v] >= n)
			throw Error(ErrorCode::InvalidTopology, "parent id out of range");
		if (v != root && parent[v] == v)
			throw Error(ErrorCode::InvalidTopology, "more than one root");
	}
	return Topology(TopologyKind::Tree, n, root, std::move(parent));
}

Topology Topology::random_tree(int n, CounterRng& rng)
{
	if (n < 1)
		throw Error(ErrorCode::InvalidTopology, "tree needs at least one node");
	// attach node i below one of the `window` most recent nodes; window 1
	// yields a path, window i a uniform recursive tree
	const int window = static_cast<int>(rng.between(1, std::max(1, n - 1)));
	std::vector<NodeId> shape(n, 0);
	for (int i = 1; i < n; ++i)
		shape[i] = static_cast<NodeId>(rng.between(std::max(0, i - window), i - 1));

	std::vector<NodeId> label(n);
	std::iota(label.begin(), label.end(), 0);
	for (int i = n - 1; i > 0; --i)
		std::swap(label[i], label[rng.below(i + 1)]);

	std::vector<NodeId> parent(n);
	for (int i = 0; i < n; ++i)
		parent[label[i]] = label[shape[i]];
	return tree(label[0], std::move(parent));
}

Topology Topology::from_json(const nlohmann::json& j)
{
	try {
		const int n = j.at("n").get<int>();
		if (!j.contains("parent"))
			return line(n);
		auto parent = j.at("parent").get<std::vector<NodeId>>();
		if (static_cast<int>(parent.size()) != n)
			throw Error(ErrorCode::InvalidTopology, "parent array length differs from n");
		return tree(j.at("root").get<NodeId>(), std::move(parent));
	} catch (const nlohmann::json::exception& e) {
		throw Error(ErrorCode::ParseError, e.what());
	}
}

nlohmann::json Topology::to_json() const
{
	if (is_line())
		return {{"n", node_count_}};
	return {{"n", node_count_}, {"root", root_}, {"parent", parent_}};
}

std::vector<NodeId> Topology::path(NodeId u, NodeId w) const
{
	if (!is_vertex(u) || !is_vertex(w) || !precedes_or_equal(u, w))
		throw Error(ErrorCode::NoPath,
		            std::to_string(w) + " is not reachable from " + std::to_string(u));
	std::vector<NodeId> out{u};
	for (NodeId v = u; v != w;) {
		v = parent_[v];
		out.push_back(v);
	}
	return out;
}

std::vector<NodeId> min_antichain(const Topology& topo, std::span<const NodeId> bad)
{
	// u has a strict descendant in `bad` iff some member's preorder index
	// falls inside (enter(u), exit(u)).
	std::vector<int> order;
	order.reserve(bad.size());
	for (NodeId v : bad)
		order.push_back(topo.enter(v));
	std::sort(order.begin(), order.end());

	std::vector<NodeId> out;
	for (NodeId u : bad) {
		auto it = std::upper_bound(order.begin(), order.end(), topo.enter(u));
		if (it == order.end() || *it >= topo.exit(u))
			out.push_back(u);
	}
	std::sort(out.begin(), out.end());
	out.erase(std::unique(out.begin(), out.end()), out.end());
	return out;
}

int destination_depth(const Topology& topo, std::span<const NodeId> dests)
{
	std::vector<NodeId> uniq(dests.begin(), dests.end());
	std::sort(uniq.begin(), uniq.end());
	uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
	if (topo.is_line())
		return static_cast<int>(uniq.size());

	// every chain lies on some root path, so count members on each w's path
	std::vector<char> member(topo.vertex_count(), 0);
	for (NodeId w : uniq)
		member[w] = 1;
	int best = 0;
	for (NodeId w : uniq) {
		int chain = 0;
		for (NodeId v = w; v != kNoNode; v = topo.next_hop(v))
			chain += member[v];
		best = std::max(best, chain);
	}
	return best;
}

} // namespace aqt
