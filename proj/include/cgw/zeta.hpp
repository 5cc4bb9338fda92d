#pragma once

// Riemann zeta, partial power sums and the polylogarithm near 1.
// Everything is evaluated in double precision with absolute error well
// below 1e-12 in the ranges used by the offspring laws (s in (0, 4)).

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cgw::special {

namespace detail {

// B_{2j} / (2j)!, j = 1..10
inline constexpr std::array<double, 10> kBernoulliOverFactorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
};

// Euler-Maclaurin correction for sum_{k >= a} k^{-s}, without the
// integral term: f(a)/2 - sum_j B_{2j}/(2j)! f^{(2j-1)}(a).
inline double em_tail_corrections(double s, double a) {
  double result = 0.5 * std::pow(a, -s);
  // f^{(2j-1)}(a) = -s(s+1)...(s+2j-2) a^{-s-2j+1}
  double rising = s;  // s(s+1)...(s+2j-2)
  double power = std::pow(a, -s - 1.0);
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    result += kBernoulliOverFactorial[j] * rising * power;
    rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    power /= a * a;
  }
  return result;
}

inline constexpr double kEulerMaclaurinStart = 24.0;

}  // namespace detail

/// Riemann zeta for real s != 1.
///
/// s > 0: direct sum of the first terms plus an Euler-Maclaurin tail
/// (valid by analytic continuation on (0,1) as well).
/// s <= 0: functional equation.
inline double riemann_zeta(double s) {
  if (s == 1.0) return std::numeric_limits<double>::infinity();
  if (s <= 0.0) {
    if (s == std::floor(s) && std::fmod(-s, 2.0) == 0.0 && s < 0.0) return 0.0;
    const double pi = std::numbers::pi;
    return std::pow(2.0, s) * std::pow(pi, s - 1.0) * std::sin(pi * s / 2.0) *
           std::tgamma(1.0 - s) * riemann_zeta(1.0 - s);
  }
  const double start = detail::kEulerMaclaurinStart;
  double sum = 0.0;
  for (double k = start - 1.0; k >= 1.0; k -= 1.0) sum += std::pow(k, -s);
  return sum + std::pow(start, 1.0 - s) / (s - 1.0) +
         detail::em_tail_corrections(s, start);
}

/// sum_{k=1}^{m} k^{-s} for any real s and integer m >= 0.
inline double power_sum(double s, double m) {
  m = std::floor(m);
  if (m < 1.0) return 0.0;
  constexpr double kDirectLimit = 2048.0;
  if (m <= kDirectLimit) {
    double sum = 0.0;
    for (double k = m; k >= 1.0; k -= 1.0) sum += std::pow(k, -s);
    return sum;
  }
  if (std::isinf(m)) {
    if (s <= 1.0) return std::numeric_limits<double>::infinity();
    return riemann_zeta(s);
  }
  // Direct head, then Euler-Maclaurin for sum_{k=a}^{m}
  // = [tail from a] - [tail from m+1].
  const double a = kDirectLimit;
  double head = 0.0;
  for (double k = a - 1.0; k >= 1.0; k -= 1.0) head += std::pow(k, -s);
  auto tail_from = [s](double b) {
    // sum_{k >= b} k^{-s} minus its (possibly divergent) integral part.
    return detail::em_tail_corrections(s, b);
  };
  double integral;
  if (std::abs(s - 1.0) < 1e-15) {
    integral = std::log((m + 1.0) / a);
  } else {
    integral = (std::pow(m + 1.0, 1.0 - s) - std::pow(a, 1.0 - s)) / (1.0 - s);
  }
  return head + integral + tail_from(a) - tail_from(m + 1.0);
}

/// zeta(s) - Li_s(x) for x in (0.5, 1], computed without cancellation from
/// the expansion Li_s(e^m) = Gamma(1-s)(-m)^{s-1} + sum_k zeta(s-k) m^k/k!.
/// Requires s not an integer.
inline double polylog_deficit(double s, double x);

/// Polylogarithm Li_s(x) = sum_{k>=1} x^k k^{-s} for 0 <= x <= 1 and
/// non-integer s > 0. Li_s(1) = zeta(s) (infinite for s <= 1).
inline double polylog(double s, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("polylog: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) {
    return s > 1.0 ? riemann_zeta(s) : std::numeric_limits<double>::infinity();
  }
  if (x <= 0.5) {
    double sum = 0.0;
    double xk = x;
    for (int k = 1; k < 200; ++k) {
      const double term = xk * std::pow(static_cast<double>(k), -s);
      sum += term;
      if (term < 1e-18 * sum) break;
      xk *= x;
    }
    return sum;
  }
  return riemann_zeta(s) - polylog_deficit(s, x);
}

inline double polylog_deficit(double s, double x) {
  if (x == 1.0) return 0.0;
  if (x <= 0.5) return riemann_zeta(s) - polylog(s, x);
  if (s == std::floor(s)) throw std::domain_error("polylog_deficit: integer order");
  const double m = std::log(x);  // in [-ln 2, 0)
  double deficit = -std::tgamma(1.0 - s) * std::pow(-m, s - 1.0);
  double mk = 1.0;
  for (int k = 1; k < 60; ++k) {
    mk *= m / k;
    const double term = riemann_zeta(s - k) * mk;
    deficit -= term;
    if (std::abs(term) < 1e-18) break;
  }
  return deficit;
}

}  // namespace cgw::special
