#ifndef TRACEMEASURE_RATIONAL_HPP
#define TRACEMEASURE_RATIONAL_HPP

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tracemeasure {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const Rational& q) {
  const BigInt& n = boost::multiprecision::numerator(q);
  const BigInt& d = boost::multiprecision::denominator(q);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

/// Parses "n", "n/d" or "-n/d". Throws std::invalid_argument on malformed input
/// or a zero denominator.
inline Rational parse_rational(std::string_view text) {
  auto digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  const auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
  if (!digits(num) || !digits(den)) throw std::invalid_argument("malformed rational: " + std::string(text));
  BigInt n{std::string(num)};
  BigInt d{std::string(den)};
  if (d == 0) throw std::invalid_argument("zero denominator");
  Rational q(n, d);
  return negative ? Rational(-q) : q;
}

/// Decimal rendering with `digits` significant digits, for display only.
inline std::string to_decimal(const Rational& q, int digits = 10) {
  if (q == 0) return "0";
  using Float = boost::multiprecision::cpp_dec_float_50;
  Float f = Float(boost::multiprecision::numerator(q)) / Float(boost::multiprecision::denominator(q));
  std::string s = f.str(digits, std::ios_base::fmtflags(0));
  return s;
}

/// An exact probability in [0, 1].
class Prob {
 public:
  Prob() = default;
  explicit Prob(Rational value) : value_(std::move(value)) {
    if (value_ < 0 || value_ > 1) throw std::domain_error("probability out of [0,1]: " + tracemeasure::to_string(value_));
  }
  Prob(std::int64_t num, std::int64_t den) : Prob(Rational(num, den)) {}

  static Prob zero() { return Prob(); }
  static Prob one() { return Prob(Rational(1)); }

  const Rational& value() const { return value_; }
  std::string str() const { return tracemeasure::to_string(value_); }
  std::string decimal(int digits = 10) const { return to_decimal(value_, digits); }

  friend bool operator==(const Prob& a, const Prob& b) { return a.value_ == b.value_; }
  friend bool operator<(const Prob& a, const Prob& b) { return a.value_ < b.value_; }
  friend bool operator<=(const Prob& a, const Prob& b) { return a.value_ <= b.value_; }
  friend std::ostream& operator<<(std::ostream& os, const Prob& p) { return os << p.str(); }

 private:
  Rational value_{0};
};

inline std::string to_string(const Prob& p) { return p.str(); }

}  // namespace tracemeasure

#endif
