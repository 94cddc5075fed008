#pragma once

#include <vector>

#include "aqt/engine.hpp"
#include "aqt/rng.hpp"

namespace aqt::test {

// Random configuration: `count` packets, each at a node strictly before one
// of `dests` and stored under the scheduler's key.
inline Configuration random_config(CounterRng& rng, const Topology& topo, const Scheduler& s,
                                   const std::vector<NodeId>& dests, int count)
{
	Configuration c(topo.vertex_count());
	for (int k = 0; k < count; ++k) {
		NodeId w = dests[rng.below(dests.size())];
		std::vector<NodeId> before;
		for (NodeId u = 0; u < topo.vertex_count(); ++u)
			if (topo.precedes(u, w))
				before.push_back(u);
		if (before.empty())
			continue;
		NodeId u = before[rng.below(before.size())];
		c.push(u, s.route(u, w), {k, w});
	}
	return c;
}

inline Packet pkt(Round t, NodeId src, NodeId dst) { return {0, t, src, dst, 0}; }

} // namespace aqt::test
