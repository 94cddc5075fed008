#include <string>

#include "aqt/adversary.hpp"
#include "aqt/error.hpp"

namespace aqt {

std::int64_t ipow(std::int64_t base, int exp)
{
	std::int64_t r = 1;
	for (int i = 0; i < exp; ++i)
		r *= base;
	return r;
}

void LbParams::validate() const
{
	if (m < 2 || ell < 2)
		throw Error(ErrorCode::InvalidParams, "lower bound needs m >= 2 and ell >= 2");
	if (rho > Rational(1))
		throw Error(ErrorCode::InvalidParams, "rho must be at most 1");
	if ((rho * Rational(m)).denominator() != 1)
		throw Error(ErrorCode::InvalidParams, "rho * m must be an integer, got rho = " + to_string(rho));
	if (rho <= Rational(1, ell + 1))
		throw Error(ErrorCode::InvalidParams,
		            "rho must exceed 1/(ell+1), got rho = " + to_string(rho));
}

std::int64_t LbParams::n() const { return (ell + 1) * ipow(m, ell); }

Round LbParams::horizon() const { return ipow(m, ell + 1); }

std::int64_t LbParams::packets_per_route() const
{
	return (rho * Rational(m)).numerator() / (rho * Rational(m)).denominator();
}

std::vector<int> base_m_digits(Round t, int m, int ell)
{
	if (t < 0 || t >= ipow(m, ell + 1))
		throw Error(ErrorCode::OutOfRange, "round " + std::to_string(t) + " outside [0, m^(ell+1))");
	std::vector<int> digits(ell + 1);
	for (int i = 0; i <= ell; ++i) {
		digits[i] = static_cast<int>(t % m);
		t /= m;
	}
	return digits;
}

std::int64_t lb_site(const LbParams& params, int k, std::span<const int> digits)
{
	const std::int64_t m = params.m;
	std::int64_t site = 0;
	for (int j = k; j <= params.ell; ++j)
		site += (j + 1) * ipow(m, j) - (digits[j] + 1) * j * ipow(m, j - 1);
	return site;
}

std::int64_t lb_frontier(const LbParams& params, Round t)
{
	auto digits = base_m_digits(t, params.m, params.ell);
	return lb_site(params, 1, digits);
}

bool lb_injects_at(const LbParams& params, int offset)
{
	// offset r carries an injection iff r * rho crosses an integer
	return floor(Rational(offset + 1) * params.rho) > floor(Rational(offset) * params.rho);
}

InjectionPattern lb_pattern(const LbParams& params)
{
	params.validate();
	const auto n = static_cast<NodeId>(params.n());
	std::vector<Packet> packets;
	for (Round t = 0; t < params.horizon(); ++t) {
		if (!lb_injects_at(params, static_cast<int>(t % params.m)))
			continue;
		auto digits = base_m_digits(t, params.m, params.ell);
		const Round r = lb_round_to_engine(t);
		auto site = [&](int k) { return static_cast<NodeId>(lb_site(params, k, digits)); };
		packets.push_back({0, r, site(1), n, 1});
		for (int k = 2; k <= params.ell; ++k)
			packets.push_back({0, r, site(k), site(k - 1), k});
		packets.push_back({0, r, 0, site(params.ell), params.ell + 1});
	}
	return InjectionPattern::numbered(std::move(packets), RateBound{params.rho, 1});
}

} // namespace aqt
