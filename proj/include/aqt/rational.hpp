#pragma once

#include <cstdint>
#include <string>

#include <boost/rational.hpp>

namespace aqt {

// Exact rates and excess values. Never converted to floating point for
// comparisons.
using Rational = boost::rational<std::int64_t>;

std::int64_t floor(const Rational& r);
std::int64_t ceil(const Rational& r);

// "num/den" or a plain integer.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);

} // namespace aqt
