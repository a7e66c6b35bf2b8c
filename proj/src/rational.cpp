#include "visitlab/rational.hpp"

#include <cctype>

#include "visitlab/error.hpp"

namespace visitlab {

namespace {

using boost::multiprecision::cpp_int;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view text) {
  fail(ErrorKind::config, "not a rational or decimal literal: '" + std::string(text) + "'");
}

Rational parse_decimal(std::string_view s) {
  const std::string_view original = s;
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  cpp_int mantissa = 0;
  long long scale = 0;
  bool digits = false, dot = false;
  while (!s.empty() && s.front() != 'e' && s.front() != 'E') {
    const char c = s.front();
    if (c == '.') {
      if (dot) bad(original);
      dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa = mantissa * 10 + (c - '0');
      digits = true;
      if (dot) --scale;
    } else {
      bad(original);
    }
    s.remove_prefix(1);
  }
  if (!digits) bad(original);
  if (!s.empty()) {
    s.remove_prefix(1);
    if (s.empty()) bad(original);
    try {
      std::size_t used = 0;
      const long long e = std::stoll(std::string(s), &used);
      if (used != s.size() || e > 4000 || e < -4000) bad(original);
      scale += e;
    } catch (const std::logic_error&) {
      bad(original);
    }
  }
  Rational r(mantissa);
  const cpp_int ten_pow = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
  r = scale < 0 ? r / Rational(ten_pow) : r * Rational(ten_pow);
  return negative ? Rational(-r) : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) bad(text);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s);
  const Rational num = parse_decimal(trim(s.substr(0, slash)));
  const Rational den = parse_decimal(trim(s.substr(slash + 1)));
  if (den == 0) fail(ErrorKind::config, "zero denominator in '" + std::string(text) + "'");
  return num / den;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace visitlab
