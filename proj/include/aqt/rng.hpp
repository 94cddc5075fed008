#pragma once

#include <cstdint>

namespace aqt {

// Counter-based generator: the i-th draw is a pure function of (seed, i),
// so streams are identical on every platform and compiler. Distribution
// helpers are implemented here rather than via <random>, whose
// distributions are implementation-defined.
class CounterRng
{
	public:

	explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
	: key_(mix(seed ^ (stream * 0xD1B54A32D192ED03ull)))
	{
	}

	std::uint64_t next()
	{
		return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_);
	}

	// Uniform in [0, bound). bound must be positive.
	std::uint64_t below(std::uint64_t bound)
	{
		// rejection sampling to avoid modulo bias
		const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
		std::uint64_t x;
		do {
			x = next();
		} while (x >= limit);
		return x % bound;
	}

	// Uniform in [lo, hi].
	std::int64_t between(std::int64_t lo, std::int64_t hi)
	{
		return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
	}

	bool chance(std::uint64_t num, std::uint64_t den)
	{
		return below(den) < num;
	}

	private:

	static std::uint64_t mix(std::uint64_t z)
	{
		z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
		z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
		return z ^ (z >> 31);
	}

	std::uint64_t key_;
	std::uint64_t counter_ = 0;
};

} // namespace aqt
