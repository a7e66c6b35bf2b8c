#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace visitlab {

using Rational = boost::multiprecision::cpp_rational;

// Accepts "p/q", integers and plain decimals ("0.35", "-1.5e-2") and
// returns the exact rational they denote.
Rational parse_rational(std::string_view text);

double to_double(const Rational& r);
std::string to_string(const Rational& r);

}  // namespace visitlab
