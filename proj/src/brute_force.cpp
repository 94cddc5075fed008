#include <algorithm>
#include <string>
#include <unordered_set>

#include "aqt/error.hpp"
#include "aqt/schedulers.hpp"

namespace aqt {

namespace {

struct Item
{
	NodeId pos;
	NodeId dest;

	friend auto operator<=>(const Item&, const Item&) = default;
};

class Search
{
	public:

	Search(const Topology& topo, const InjectionPattern& pattern, Round horizon)
	: topo_(topo)
	, pattern_(pattern)
	, horizon_(horizon)
	{}

	bool feasible(int bound)
	{
		bound_ = bound;
		failed_.clear();
		return explore(1, {});
	}

	private:

	static std::string encode(Round t, const std::vector<Item>& s)
	{
		std::string key(1, static_cast<char>(t));
		for (const auto& it : s) {
			key.push_back(static_cast<char>(it.pos));
			key.push_back(static_cast<char>(it.dest));
		}
		return key;
	}

	bool within_bound(const std::vector<Item>& s) const
	{
		std::vector<int> load(topo_.vertex_count(), 0);
		for (const auto& it : s)
			if (++load[it.pos] > bound_)
				return false;
		return true;
	}

	// s: packets in the network at the start of round t, sorted
	bool explore(Round t, std::vector<Item> s)
	{
		if (t > horizon_)
			return true;
		for (const auto& p : pattern_.at(t))
			s.push_back({p.source, p.dest});
		std::sort(s.begin(), s.end());
		if (!within_bound(s))
			return false;
		const auto key = encode(t, s);
		if (failed_.count(key))
			return false;

		// per node: idle, or forward one packet of some destination
		std::vector<std::vector<int>> options;
		std::vector<NodeId> nodes;
		for (std::size_t i = 0; i < s.size();) {
			std::size_t j = i;
			std::vector<int> opts{-1};
			while (j < s.size() && s[j].pos == s[i].pos) {
				if (j == i || s[j].dest != s[j - 1].dest)
					opts.push_back(static_cast<int>(j));
				++j;
			}
			nodes.push_back(s[i].pos);
			options.push_back(std::move(opts));
			i = j;
		}

		std::vector<int> choice(options.size(), 0);
		while (true) {
			std::vector<Item> next;
			next.reserve(s.size());
			std::vector<char> moved(s.size(), 0);
			for (std::size_t k = 0; k < options.size(); ++k)
				if (int idx = options[k][choice[k]]; idx >= 0)
					moved[idx] = 1;
			for (std::size_t i = 0; i < s.size(); ++i) {
				if (!moved[i]) {
					next.push_back(s[i]);
					continue;
				}
				NodeId to = topo_.next_hop(s[i].pos);
				if (to != s[i].dest)
					next.push_back({to, s[i].dest});
			}
			std::sort(next.begin(), next.end());
			if (within_bound(next) && explore(t + 1, std::move(next)))
				return true;

			std::size_t k = 0;
			while (k < options.size() && ++choice[k] == static_cast<int>(options[k].size()))
				choice[k++] = 0;
			if (k == options.size())
				break;
		}
		failed_.insert(key);
		return false;
	}

	const Topology& topo_;
	const InjectionPattern& pattern_;
	Round horizon_;
	int bound_ = 0;
	std::unordered_set<std::string> failed_;
};

} // namespace

int brute_force_optimal(const Topology& topo, const InjectionPattern& pattern, Round horizon)
{
	if (topo.node_count() > 6 || horizon > 8 || pattern.size() > 10)
		throw Error(ErrorCode::TooLarge, "exhaustive search is limited to n <= 6, horizon <= 8, 10 packets");
	if (pattern.last_round() > horizon)
		throw Error(ErrorCode::OutOfRange, "pattern injects after the horizon");
	check_packets(pattern, topo);
	if (pattern.empty())
		return 0;
	Search search(topo, pattern, horizon);
	for (int bound = 1;; ++bound)
		if (search.feasible(bound))
			return bound;
}

} // namespace aqt
