#pragma once

// Lamperti time change on nonnegative step functions.
//
//   g(u)    = sup{ s : int_0^s dt / f(t) <= u }     (time_change)
//   psi(f)  = d+/du g = f(g(u)) for u < h, 0 after  (height_transform)
//   h       = int_0^1 dt / f(t)                     (harmonic_integral)
//
// On a step function every piece of value v and length l maps to a linear
// piece of g with slope v and duration l / v, so all three are exact up to
// rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cgw/offspring.hpp"
#include "cgw/step_function.hpp"
#include "cgw/tree.hpp"

namespace cgw {

/// int_0^s dt / f(t); +infinity once a zero piece of positive length is met.
inline double harmonic_integral(const StepFunction& f, double s) {
  if (s < 0.0 || s > f.domain_end()) throw std::invalid_argument("harmonic_integral: s outside the domain");
  double acc = 0.0;
  for (std::size_t j = 0; j < f.piece_count(); ++j) {
    const double begin = f.piece_begin(j);
    if (begin >= s) break;
    const double overlap = std::min(f.piece_end(j), s) - begin;
    if (f.piece_value(j) == 0.0) return kInfinity;
    acc += overlap / f.piece_value(j);
  }
  return acc;
}

inline double harmonic_integral(const StepFunction& f) { return harmonic_integral(f, f.domain_end()); }

namespace detail {

// Breakpoints u_j of g for the leading run of positive pieces, and the
// index of the first zero piece (or piece_count()).
struct TimeChangeNodes {
  std::vector<double> u;  // u_0 = 0, u_{j+1} = u_j + len_j / v_j
  std::vector<double> s;  // matching positions in the original time
  std::size_t positive_pieces = 0;
};

inline TimeChangeNodes time_change_nodes(const StepFunction& f) {
  TimeChangeNodes out;
  out.u.push_back(0.0);
  out.s.push_back(0.0);
  for (std::size_t j = 0; j < f.piece_count(); ++j) {
    const double v = f.piece_value(j);
    if (v == 0.0) break;
    const double end = f.piece_end(j);
    if (std::isinf(end)) throw std::invalid_argument("time_change: unbounded positive piece");
    out.u.push_back(out.u.back() + (end - f.piece_begin(j)) / v);
    out.s.push_back(end);
    ++out.positive_pieces;
  }
  return out;
}

}  // namespace detail

/// g = time_change(f): continuous, nondecreasing, g(0) = 0, constant
/// after the last node (at 1 when h < infinity on [0,1]).
inline PiecewiseLinear time_change(const StepFunction& f) {
  auto nodes = detail::time_change_nodes(f);
  return PiecewiseLinear(std::move(nodes.u), std::move(nodes.s));
}

/// psi(f) on [0, infinity), with an explicit terminal zero piece.
inline StepFunction height_transform(const StepFunction& f) {
  const auto nodes = detail::time_change_nodes(f);
  const std::size_t m = nodes.positive_pieces;
  if (m == 0) return StepFunction({0.0}, {0.0}, kInfinity, 0.0);
  std::vector<double> bp(nodes.u.begin(), nodes.u.end());  // m + 1 entries
  std::vector<double> vals(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) vals[j] = f.piece_value(j);
  return StepFunction(std::move(bp), std::move(vals), kInfinity, 0.0);
}

/// Rescaled height profile H^n, its integral C^n, the time-changed
/// excursion Y^n and the rescaled height h_n of one tree.
struct ProfileTriple {
  StepFunction height_profile;      // H^n on [0, inf)
  PiecewiseLinear cumulative;       // C^n
  StepFunction excursion;           // Y^n on [0, 1]
  double rescaled_height;           // h_n = (h(T) + 1) a_n / n
};

inline ProfileTriple profile_triple(const OrderedTree& tree, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("profile_triple: scale must be positive");
  const auto z = generation_sizes(tree);
  const double n = static_cast<double>(tree.size());
  const std::size_t gens = z.size();
  const double step = scale / n;

  std::vector<double> h_bp(gens + 1), h_val(gens + 1, 0.0);
  std::vector<double> c_nodes(gens + 1), c_vals(gens + 1);
  std::vector<double> y_bp(gens), y_val(gens);
  std::int64_t cumulative = 0;
  for (std::size_t k = 0; k <= gens; ++k) {
    const double u = static_cast<double>(k) * step;
    const double t = static_cast<double>(cumulative) / n;
    h_bp[k] = u;
    c_nodes[k] = u;
    c_vals[k] = t;
    if (k < gens) {
      const double value = static_cast<double>(z[k]) / scale;
      h_val[k] = value;
      y_bp[k] = t;
      y_val[k] = value;
      cumulative += z[k];
    }
  }
  return {StepFunction(std::move(h_bp), std::move(h_val), kInfinity, 0.0),
          PiecewiseLinear(std::move(c_nodes), std::move(c_vals)),
          StepFunction(std::move(y_bp), std::move(y_val), 1.0, 0.0),
          static_cast<double>(gens) * step};
}

inline ProfileTriple profile_triple(const OrderedTree& tree, const OffspringLaw& law) {
  return profile_triple(tree, law.scaling_a(static_cast<double>(tree.size())));
}

/// H^n evaluated at u without building the step function: Z_{[n u / a]} / a.
inline double height_profile_at(const std::vector<std::int64_t>& generation_sizes, double n, double scale, double u) {
  const double k = std::floor(n * u / scale);
  if (k < 0.0 || k >= static_cast<double>(generation_sizes.size())) return 0.0;
  return static_cast<double>(generation_sizes[static_cast<std::size_t>(k)]) / scale;
}

/// Largest |difference| between two piecewise-linear functions over the
/// union of their nodes.
inline double max_deviation(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  double worst = 0.0;
  for (double x : a.nodes()) worst = std::max(worst, std::abs(a(x) - b(x)));
  for (double x : b.nodes()) worst = std::max(worst, std::abs(a(x) - b(x)));
  return worst;
}

/// Largest difference in breakpoints and values between two step
/// functions with the same number of pieces; +infinity otherwise.
inline double max_deviation(const StepFunction& a, const StepFunction& b) {
  if (a.piece_count() != b.piece_count()) return kInfinity;
  double worst = 0.0;
  for (std::size_t j = 0; j < a.piece_count(); ++j) {
    worst = std::max(worst, std::abs(a.piece_begin(j) - b.piece_begin(j)));
    worst = std::max(worst, std::abs(a.piece_value(j) - b.piece_value(j)));
  }
  if (std::isinf(a.domain_end()) != std::isinf(b.domain_end())) return kInfinity;
  if (!std::isinf(a.domain_end())) worst = std::max(worst, std::abs(a.domain_end() - b.domain_end()));
  return worst;
}

}  // namespace cgw
