#include "aqt/rational.hpp"

#include <charconv>

#include "aqt/error.hpp"

namespace aqt {

std::int64_t floor(const Rational& r)
{
	auto q = r.numerator() / r.denominator();
	if (r.numerator() % r.denominator() != 0 && r.numerator() < 0)
		--q;
	return q;
}

std::int64_t ceil(const Rational& r)
{
	return -floor(-r);
}

namespace {

std::int64_t parse_int(std::string_view s, const std::string& whole)
{
	std::int64_t v = 0;
	auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
	if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
		throw Error(ErrorCode::ParseError, "bad rational '" + whole + "'");
	return v;
}

} // namespace

Rational parse_rational(const std::string& text)
{
	auto slash = text.find('/');
	std::string_view sv(text);
	if (slash == std::string::npos)
		return Rational(parse_int(sv, text));
	auto num = parse_int(sv.substr(0, slash), text);
	auto den = parse_int(sv.substr(slash + 1), text);
	if (den == 0)
		throw Error(ErrorCode::ParseError, "zero denominator in '" + text + "'");
	return Rational(num, den);
}

std::string to_string(const Rational& r)
{
	if (r.denominator() == 1)
		return std::to_string(r.numerator());
	return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

} // namespace aqt
