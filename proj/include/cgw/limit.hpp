#pragma once

// Fine-mesh approximations of the normalized excursion and of the limiting
// height profile, plus a Brownian excursion generator (3-d Bessel bridge)
// used as an independent check in the finite-variance case.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "cgw/conditioned.hpp"
#include "cgw/lamperti.hpp"
#include "cgw/path.hpp"
#include "cgw/rng.hpp"
#include "cgw/step_function.hpp"

namespace cgw {

inline constexpr std::int64_t kMinLimitMesh = 100;

/// S^N of an exact CGW(N) excursion, scaled by a_N.
inline StepFunction sample_limit_excursion(const ConditionedSampler& sampler, Rng& rng) {
  if (sampler.n() < kMinLimitMesh) throw std::invalid_argument("limit excursion: mesh must be >= 100");
  const auto draw = sampler.draw(rng);
  const auto excursion = rotate_to_excursion(LatticePath::from_offspring(draw.increments));
  return rescale(excursion, sampler.law().scaling_a(static_cast<double>(sampler.n())));
}

inline StepFunction sample_limit_excursion(const OffspringLaw& law, std::int64_t mesh, Strategy strategy, Rng& rng) {
  return sample_limit_excursion(ConditionedSampler(law, mesh, strategy), rng);
}

/// Normalized Brownian excursion on the mesh k/N as the modulus of a
/// three-dimensional Brownian bridge. Piece k carries Y(k/N); Y(0) and
/// Y(1) are exactly 0.
inline StepFunction sample_brownian_excursion(std::int64_t mesh, Rng& rng) {
  if (mesh < kMinLimitMesh) throw std::invalid_argument("brownian excursion: mesh must be >= 100");
  const auto n = static_cast<std::size_t>(mesh);
  const double dn = static_cast<double>(mesh);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(dn));
  std::vector<double> squared(n + 1, 0.0);
  std::vector<double> walk(n + 1);
  for (int dim = 0; dim < 3; ++dim) {
    walk[0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) walk[k] = walk[k - 1] + normal(rng);
    const double end = walk[n];
    for (std::size_t k = 0; k <= n; ++k) {
      const double bridge = k == n ? 0.0 : walk[k] - (static_cast<double>(k) / dn) * end;
      squared[k] += bridge * bridge;
    }
  }
  std::vector<double> bp(n), vals(n);
  for (std::size_t k = 0; k < n; ++k) {
    bp[k] = static_cast<double>(k) / dn;
    vals[k] = std::sqrt(squared[k]);
  }
  return StepFunction(std::move(bp), std::move(vals), 1.0, 0.0);
}

struct LimitProfile {
  StepFunction height_profile;  // psi(Y) on [0, inf)
  double height;                // int dt / Y over the positive run
  bool degenerate;              // int_{0+} dt / Y = inf at working precision
};

/// psi and h of a sampled excursion.
///
/// Zero pieces at the end of the domain are excluded from the harmonic
/// integral. A single zero piece at the start (a mesh excursion's Y(0) = 0)
/// takes the value of its right neighbour; two or more leading zero pieces
/// make the profile degenerate.
inline LimitProfile sample_limit_profile(const StepFunction& source) {
  const std::size_t m = source.piece_count();
  std::size_t last_positive = m;
  for (std::size_t j = m; j-- > 0;) {
    if (source.piece_value(j) > 0.0) {
      last_positive = j;
      break;
    }
  }
  const bool all_zero = last_positive == m;
  const bool leading_double_zero = m >= 2 && source.piece_value(0) == 0.0 && source.piece_value(1) == 0.0;
  if (all_zero || leading_double_zero || (m == 1 && source.piece_value(0) == 0.0)) {
    return {StepFunction({0.0}, {0.0}, kInfinity, 0.0), 0.0, true};
  }
  std::vector<double> bp(source.breakpoints().begin(), source.breakpoints().begin() + static_cast<std::ptrdiff_t>(last_positive + 1));
  std::vector<double> vals(source.values().begin(), source.values().begin() + static_cast<std::ptrdiff_t>(last_positive + 1));
  if (vals[0] == 0.0) vals[0] = vals[1];
  const StepFunction trimmed(std::move(bp), std::move(vals), source.piece_end(last_positive), 0.0);
  return {height_transform(trimmed), harmonic_integral(trimmed), false};
}

}  // namespace cgw
