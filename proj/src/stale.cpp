#include "aqt/stale.hpp"

#include <algorithm>

#include "aqt/error.hpp"

namespace aqt {

std::optional<int> beta_level(const LbParams& params, Round t)
{
	auto digits = base_m_digits(t, params.m, params.ell);
	if (digits[0] != params.m - 1)
		return std::nullopt;
	for (int k = 0; k < params.ell; ++k)
		if (digits[k + 1] < params.m - 1)
			return k;
	return std::nullopt;
}

Rational beta_threshold(const LbParams& params, int k)
{
	return (Rational(params.ell + 1) * params.rho - 1) * Rational(ipow(params.m, k + 1)) /
	       Rational(2 * params.ell);
}

Rational fresh_growth_threshold(const LbParams& params)
{
	return (Rational(params.ell + 1) * params.rho - 1) * Rational(ipow(params.m, params.ell)) / Rational(2);
}

StaleLog stale_oracle(const Trace& trace, const InjectionPattern& pattern, const Topology& topo,
                      const LbParams& params)
{
	params.validate();
	const Round horizon = params.horizon();
	if (trace.rounds.size() < static_cast<std::size_t>(horizon))
		throw Error(ErrorCode::InvalidParams, "trace shorter than the lower-bound horizon");

	StaleLog log;
	log.params = params;
	log.frontier.resize(horizon);
	for (Round t = 0; t < horizon; ++t)
		log.frontier[t] = lb_frontier(params, t);
	log.alpha.assign(horizon, 0);
	log.beta.assign(horizon, 0);
	log.beta_interval_load.assign(horizon, 0);
	log.beta_interval_peak.assign(horizon, 0);
	log.fresh_at_block.assign(params.m, 0);

	auto violation = [&](std::string lemma, Round t, PacketId id, std::string detail) {
		log.violations.push_back({std::move(lemma), t, id, std::move(detail)});
	};

	const auto& packets = pattern.packets();
	std::vector<const Packet*> by_id(packets.size(), nullptr);
	for (const auto& p : packets) {
		if (p.id < 0 || p.id >= static_cast<PacketId>(packets.size()))
			throw Error(ErrorCode::InvalidPacket, "lower-bound pattern ids must be 0..N-1");
		by_id[p.id] = &p;
	}

	// position of every packet present in the network (not yet delivered)
	std::vector<NodeId> pos(packets.size(), kNoNode);
	std::vector<PacketId> present;
	std::vector<char> stale(packets.size(), 0);
	const std::int64_t block = ipow(params.m, params.ell);

	for (Round t = 0; t < horizon; ++t) {
		const std::int64_t F = log.frontier[t];
		if (t % block == 0) {
			std::int64_t fresh = 0;
			for (PacketId id : present)
				fresh += pos[id] <= F ? 1 : 0;
			log.fresh_at_block[t / block] = fresh;
		}

		for (const auto& p : pattern.at(lb_round_to_engine(t))) {
			pos[p.id] = p.source;
			present.push_back(p.id);
			if (p.source > F)
				violation("fresh-at-injection", t, p.id,
				          "injected at " + std::to_string(p.source) + " right of F = " + std::to_string(F));
		}

		std::vector<NodeId> before(packets.size(), kNoNode);
		for (PacketId id : present)
			before[id] = pos[id];

		const auto& rec = trace.rounds[t];
		std::vector<char> forwarded(packets.size(), 0);
		for (const auto& [from, id] : rec.sent) {
			if (id < 0 || id >= static_cast<PacketId>(packets.size()) || pos[id] != from)
				throw Error(ErrorCode::InvalidParams,
				            "trace moves packet " + std::to_string(id) + " from a node it is not at");
			pos[id] = topo.next_hop(from);
			forwarded[id] = 1;
		}
		std::vector<char> delivered(packets.size(), 0);
		for (PacketId id : rec.delivered)
			delivered[id] = 1;

		if (t + 1 < horizon) {
			const std::int64_t F1 = log.frontier[t + 1];
			for (PacketId id : present) {
				const bool fresh_now = before[id] <= F;
				const bool fresh_next = pos[id] <= F1;
				if (!fresh_now && fresh_next)
					violation("monotone", t, id, "stale packet became fresh again");
				if (delivered[id] && fresh_next)
					violation("FreshUndelivered", t, id,
					          "delivered at " + std::to_string(pos[id]) + " while F = " + std::to_string(F1));
				if (!fresh_now || fresh_next)
					continue;
				const bool alpha = before[id] == F && forwarded[id];
				const bool beta = F1 < F && pos[id] >= F1 + 1 && pos[id] <= F;
				if (alpha == beta) {
					violation("staletypes", t, id,
					          alpha ? "transition fits both stale types" : "transition fits no stale type");
					continue;
				}
				stale[id] = 1;
				log.events.push_back({t, id, alpha ? StaleKind::Alpha : StaleKind::Beta});
				++(alpha ? log.alpha : log.beta)[t];
			}

			if (log.alpha[t] > 1)
				violation("boundstale", t, -1,
				          std::to_string(log.alpha[t]) + " alpha-stale packets in one round");
			auto k = beta_level(params, t);
			if (!k) {
				if (log.beta[t] != 0)
					violation("boundstale", t, -1, "beta-stale packets outside a phase-final round");
			} else {
				std::int64_t jump = 0;
				for (int j = 1; j <= *k; ++j)
					jump += ipow(params.m, j);
				if (F1 + 1 != F - jump)
					violation("boundstale", t, -1, "frontier moved by " + std::to_string(F - F1 - 1) +
					                                   ", expected " + std::to_string(jump));
				// every packet landing in the vacated interval was fresh a
				// round earlier, delivered ones included
				std::int64_t stored = 0;
				std::int64_t landed = 0;
				for (PacketId id : present)
					if (pos[id] > F1 && pos[id] <= F) {
						++landed;
						stored += delivered[id] ? 0 : 1;
					}
				std::int64_t peak = 0;
				for (std::int64_t v = F1 + 1; v <= F; ++v)
					peak = std::max<std::int64_t>(peak, rec.load_after[v]);
				log.beta_interval_load[t] = stored;
				log.beta_interval_peak[t] = peak;
				if (log.beta[t] != landed)
					violation("boundstale", t, -1,
					          std::to_string(log.beta[t]) + " beta-stale packets but " + std::to_string(landed) +
					              " packets in the vacated interval");
			}
		}

		present.erase(std::remove_if(present.begin(), present.end(), [&](PacketId id) { return delivered[id]; }),
		              present.end());
	}
	return log;
}

nlohmann::json ScenarioVerdict::to_json() const
{
	nlohmann::json j{{"t_ell", t_ell}, {"holds", holds()}, {"branch1", branch1}, {"branch2", branch2},
	                 {"fresh_before", fresh_before}, {"fresh_after", fresh_after},
	                 {"fresh_threshold", to_string(fresh_threshold)}};
	if (witness_round >= 0) {
		j["witness_round"] = witness_round;
		j["witness_k"] = witness_k;
		j["witness_beta"] = witness_beta;
		j["witness_threshold"] = to_string(witness_threshold);
		j["witness_interval_size"] = witness_interval_size;
		j["witness_peak_load"] = witness_peak;
	}
	return j;
}

std::vector<ScenarioVerdict> scenario_check(const StaleLog& log)
{
	const auto& params = log.params;
	const std::int64_t block = ipow(params.m, params.ell);
	std::vector<ScenarioVerdict> out;
	for (int tl = 0; tl + 1 < params.m; ++tl) {
		ScenarioVerdict v;
		v.t_ell = tl;
		v.fresh_before = log.fresh_at_block[tl];
		v.fresh_after = log.fresh_at_block[tl + 1];
		v.fresh_threshold = fresh_growth_threshold(params);
		v.branch2 = Rational(v.fresh_after) >= Rational(v.fresh_before) + v.fresh_threshold;

		// witness: the phase-final round with the largest beta relative to
		// its threshold
		Rational best_ratio(-1);
		for (Round t = tl * block; t < (tl + 1) * block; ++t) {
			auto k = beta_level(params, t);
			if (!k)
				continue;
			const Rational thr = beta_threshold(params, *k);
			v.branch1 = v.branch1 || Rational(log.beta[t]) >= thr;
			const Rational ratio = thr > 0 ? Rational(log.beta[t]) / thr : Rational(log.beta[t]);
			if (ratio <= best_ratio)
				continue;
			best_ratio = ratio;
			v.witness_round = t;
			v.witness_k = *k;
			v.witness_beta = log.beta[t];
			v.witness_threshold = thr;
			v.witness_peak = log.beta_interval_peak[t];
			v.witness_interval_size = 1;
			for (int j = 1; j <= *k; ++j)
				v.witness_interval_size += ipow(params.m, j);
		}
		out.push_back(v);
	}
	return out;
}

std::optional<OracleViolation> check_f_moves(const LbParams& params)
{
	params.validate();
	const Round h = params.horizon();
	std::vector<std::vector<int>> digits(h);
	std::vector<std::int64_t> F(h);
	for (Round t = 0; t < h; ++t) {
		digits[t] = base_m_digits(t, params.m, params.ell);
		F[t] = lb_site(params, 1, digits[t]);
	}
	for (Round t = 0; t < h; ++t)
		for (Round u = t + 1; u < h; ++u) {
			int k = params.ell;
			while (k >= 1 && digits[u][k] == digits[t][k])
				--k;
			if (k < 1 || digits[u][k] <= digits[t][k])
				continue;
			const auto vk = lb_site(params, k, digits[t]);
			if (F[u] >= vk)
				return OracleViolation{"FMoves", t, -1,
				                       "F(" + std::to_string(u) + ") = " + std::to_string(F[u]) +
				                           " not below v_" + std::to_string(k) + " = " + std::to_string(vk)};
		}
	return std::nullopt;
}

nlohmann::json to_json(const OracleViolation& v)
{
	nlohmann::json j{{"lemma", v.lemma}, {"round", v.round}, {"detail", v.detail}};
	if (v.packet >= 0)
		j["packet"] = v.packet;
	return j;
}

} // namespace aqt
