#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace pwmperc {

// Exact nonnegative rational, used for frequencies (Hz) so that
// hyperperiod detection is exact instead of floating-point guesswork.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;

  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (num < 0 || den < 0) throw std::invalid_argument("Rational: negative");
    normalize();
  }

  explicit Rational(std::int64_t n) : Rational(n, 1) {}

  void normalize() {
    if (num == 0) { den = 1; return; }
    const std::int64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational inverse() const { return Rational(den, num); }

  bool operator==(const Rational&) const = default;
};

namespace detail {

inline std::optional<std::int64_t> checked_mul(std::int64_t a, std::int64_t b) {
  __int128 r = static_cast<__int128>(a) * b;
  if (r > INT64_MAX) return std::nullopt;
  return static_cast<std::int64_t>(r);
}

}  // namespace detail

// lcm(a/b, c/d) = lcm(a,c) / gcd(b,d). Returns nullopt on overflow.
inline std::optional<Rational> rational_lcm(const Rational& x, const Rational& y) {
  if (x.num == 0) return y;
  if (y.num == 0) return x;
  const std::int64_t g = std::gcd(x.num, y.num);
  auto n = detail::checked_mul(x.num / g, y.num);
  if (!n) return std::nullopt;
  return Rational(*n, std::gcd(x.den, y.den));
}

}  // namespace pwmperc
