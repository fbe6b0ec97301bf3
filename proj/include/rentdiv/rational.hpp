#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "rentdiv/error.hpp"

namespace rentdiv {

/// Exact rational number in canonical form (gcd 1, positive denominator).
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw Error(ErrorCode::InvalidInput, "zero denominator");
  return Rational(Integer(num), Integer(den));
}

inline Integer numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

/// "p/q" when the denominator is not 1, otherwise "p".
inline std::string to_string(const Rational& q) {
  const Integer den = denominator_of(q);
  if (den == 1) return numerator_of(q).str();
  return numerator_of(q).str() + "/" + den.str();
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline Integer parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s))
    throw Error(ErrorCode::InvalidInput, "malformed rational", std::string(whole));
  Integer value{std::string(s)};
  return negative ? Integer(-value) : value;
}

}  // namespace detail

/// Accepts "p", "p/q" and plain decimals such as "-12.25". No exponents.
inline Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw Error(ErrorCode::InvalidInput, "empty rational");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Integer num = detail::parse_integer(s.substr(0, slash), text);
    std::string_view den_text = s.substr(slash + 1);
    if (!detail::all_digits(den_text))
      throw Error(ErrorCode::InvalidInput, "malformed rational", std::string(text));
    Integer den(std::string{den_text});
    if (den == 0) throw Error(ErrorCode::InvalidInput, "zero denominator", std::string(text));
    return Rational(num, den);
  }

  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = s.substr(0, dot);
    std::string_view frac_part = s.substr(dot + 1);
    bool negative = !int_part.empty() && int_part.front() == '-';
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+'))
      int_part.remove_prefix(1);
    if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !detail::all_digits(int_part)) ||
        (!frac_part.empty() && !detail::all_digits(frac_part)))
      throw Error(ErrorCode::InvalidInput, "malformed rational", std::string(text));
    Integer scale = 1;
    for (std::size_t k = 0; k < frac_part.size(); ++k) scale *= 10;
    Integer whole = int_part.empty() ? Integer(0) : Integer(std::string(int_part));
    Integer frac = frac_part.empty() ? Integer(0) : Integer(std::string(frac_part));
    Integer num = whole * scale + frac;
    if (negative) num = -num;
    return Rational(num, scale);
  }

  return Rational(detail::parse_integer(s, text));
}

inline Rational abs_value(const Rational& q) { return q < 0 ? Rational(-q) : q; }

/// Floating view for reporting only; never used in a comparison.
inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace rentdiv
