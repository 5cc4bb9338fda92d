#pragma once

// Exact samplers for i.i.d. offspring counts conditioned on
// xi_1 + ... + xi_n = n - 1, and the resulting CGW(n) tree sampler.
//
// The conditioned sequence is exchangeable, and a sequence of length n
// with sum n - 1 has n distinct cyclic shifts of which exactly one codes
// a tree. Rotating the bridge at its first suffix-minimum therefore turns
// a conditioned draw into an exact draw of the conditioned tree.

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgw/convolution.hpp"
#include "cgw/offspring.hpp"
#include "cgw/path.hpp"
#include "cgw/rng.hpp"
#include "cgw/tree.hpp"

namespace cgw {

enum class Strategy { Rejection, UniformComposition, Multinomial, DpSequential };

inline Strategy strategy_from_name(const std::string& name) {
  if (name == "rejection") return Strategy::Rejection;
  if (name == "uniform_composition") return Strategy::UniformComposition;
  if (name == "multinomial") return Strategy::Multinomial;
  if (name == "dp_sequential") return Strategy::DpSequential;
  throw std::invalid_argument("unknown strategy: " + name);
}

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Rejection: return "rejection";
    case Strategy::UniformComposition: return "uniform_composition";
    case Strategy::Multinomial: return "multinomial";
    case Strategy::DpSequential: return "dp_sequential";
  }
  return "unknown";
}

/// Strategies that are exact for the given law.
inline std::vector<Strategy> applicable_strategies(const OffspringLaw& law) {
  std::vector<Strategy> out{Strategy::Rejection, Strategy::DpSequential};
  if (law.kind() == LawKind::Geometric) out.push_back(Strategy::UniformComposition);
  if (law.kind() == LawKind::Poisson) out.push_back(Strategy::Multinomial);
  return out;
}

/// Fastest exact strategy for the law.
inline Strategy default_strategy(const OffspringLaw& law) {
  if (law.kind() == LawKind::Geometric) return Strategy::UniformComposition;
  if (law.kind() == LawKind::Poisson) return Strategy::Multinomial;
  return Strategy::DpSequential;
}

struct ConditionedDraw {
  std::vector<std::int64_t> increments;  // offspring counts xi_1..xi_n
  std::uint64_t attempts = 1;            // rejection only
  double truncation_bound = 0.0;         // probability mass ignored; 0 = exact
};

/// Sampler for (xi_1, ..., xi_n) conditioned on their sum being n - 1.
/// Construction precomputes whatever the strategy needs; draw() is const
/// and may be called concurrently with distinct engines.
class ConditionedSampler {
 public:
  ConditionedSampler(OffspringLaw law, std::int64_t n, Strategy strategy, std::uint64_t max_attempts = 0)
      : law_(std::move(law)), n_(n), strategy_(strategy), max_attempts_(max_attempts) {
    if (n_ < 1) throw std::invalid_argument("conditioned sampler: n must be >= 1");
    if (strategy_ == Strategy::UniformComposition && law_.kind() != LawKind::Geometric) {
      throw std::invalid_argument("uniform_composition requires the geometric law");
    }
    if (strategy_ == Strategy::Multinomial && law_.kind() != LawKind::Poisson) {
      throw std::invalid_argument("multinomial requires the poisson law");
    }
    if (law_.kind() == LawKind::Binary && n_ % 2 == 0) {
      throw std::invalid_argument("binary law has no tree of even size");
    }
    if (strategy_ == Strategy::DpSequential) build_tables(n_);
  }

  const OffspringLaw& law() const { return law_; }
  std::int64_t n() const { return n_; }
  Strategy strategy() const { return strategy_; }

  ConditionedDraw draw(Rng& rng) const {
    ConditionedDraw out;
    out.increments.assign(static_cast<std::size_t>(n_), 0);
    switch (strategy_) {
      case Strategy::Rejection: draw_rejection(rng, out); break;
      case Strategy::UniformComposition: draw_composition(rng, out); break;
      case Strategy::Multinomial: draw_multinomial(rng, out); break;
      case Strategy::DpSequential: draw_split(rng, out.increments, 0, n_, n_ - 1); break;
    }
    return out;
  }

  /// Exact draw of a Galton-Watson tree conditioned on n vertices.
  OrderedTree sample_tree(Rng& rng) const {
    auto d = draw(rng);
    const auto bridge = LatticePath::from_offspring(d.increments);
    return decode_path(rotate_to_excursion(bridge));
  }

 private:
  void draw_rejection(Rng& rng, ConditionedDraw& out) const {
    const std::int64_t target = n_ - 1;
    for (std::uint64_t attempt = 1;; ++attempt) {
      std::int64_t sum = 0;
      bool ok = true;
      for (auto& x : out.increments) {
        x = law_.sample(rng);
        sum += x;
        if (sum > target) {
          ok = false;
          break;
        }
      }
      if (ok && sum == target) {
        out.attempts = attempt;
        return;
      }
      if (max_attempts_ != 0 && attempt >= max_attempts_) {
        throw std::runtime_error("rejection sampler: no acceptance after " + std::to_string(attempt) + " attempts");
      }
    }
  }

  // Geometric: the conditioned product measure is uniform over weak
  // compositions of n - 1 into n parts (stars and bars, selection sampling).
  void draw_composition(Rng& rng, ConditionedDraw& out) const {
    const std::int64_t slots = 2 * n_ - 2;
    std::int64_t bars_left = n_ - 1;
    std::size_t part = 0;
    for (std::int64_t slot = 0; slot < slots; ++slot) {
      const double remaining = static_cast<double>(slots - slot);
      if (uniform01(rng) * remaining < static_cast<double>(bars_left)) {
        --bars_left;
        ++part;
      } else {
        ++out.increments[part];
      }
    }
  }

  // Poisson: conditioned on the sum the counts are multinomial, i.e. the
  // cell counts of n - 1 balls dropped uniformly into n cells.
  void draw_multinomial(Rng& rng, ConditionedDraw& out) const {
    std::uniform_int_distribution<std::int64_t> cell(0, n_ - 1);
    for (std::int64_t b = 0; b < n_ - 1; ++b) ++out.increments[static_cast<std::size_t>(cell(rng))];
  }

  // Splits a block of m variables with known sum s into halves: the left
  // sum is a with probability P_{m1}(a) P_{m2}(s - a) / P_m(s).
  void draw_split(Rng& rng, std::vector<std::int64_t>& out, std::int64_t offset, std::int64_t m,
                  std::int64_t s) const {
    if (s == 0) return;  // already zero-filled
    if (m == 1) {
      out[static_cast<std::size_t>(offset)] = s;
      return;
    }
    const std::int64_t m1 = m / 2, m2 = m - m1;
    const auto& left = tables_.at(m1);
    const auto& right = tables_.at(m2);
    double total = 0.0;
    for (std::int64_t a = 0; a <= s; ++a) {
      total += left[static_cast<std::size_t>(a)] * right[static_cast<std::size_t>(s - a)];
    }
    if (!(total > 0.0)) throw std::runtime_error("dp_sequential: conditioning event has zero probability");
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::int64_t a = 0;
    std::int64_t last_positive = 0;
    for (; a <= s; ++a) {
      const double w = left[static_cast<std::size_t>(a)] * right[static_cast<std::size_t>(s - a)];
      if (w > 0.0) last_positive = a;
      acc += w;
      if (u < acc) break;
    }
    if (a > s) a = last_positive;
    draw_split(rng, out, offset, m1, a);
    draw_split(rng, out, offset + m1, m2, s - a);
  }

  const std::vector<double>& build_tables(std::int64_t m) {
    if (auto it = tables_.find(m); it != tables_.end()) return it->second;
    const auto len = static_cast<std::size_t>(n_);
    std::vector<double> table;
    if (m == 1) {
      table = law_.pmf_table(len);
    } else {
      const auto& a = build_tables(m / 2);
      const auto& b = build_tables(m - m / 2);
      table = convolve_truncated(a, b, len);
    }
    return tables_.emplace(m, std::move(table)).first->second;
  }

  OffspringLaw law_;
  std::int64_t n_;
  Strategy strategy_;
  std::uint64_t max_attempts_;
  std::map<std::int64_t, std::vector<double>> tables_;  // P(xi_1+...+xi_m = s), s < n
};

inline ConditionedDraw sample_conditioned_increments(const OffspringLaw& law, std::int64_t n, Strategy strategy,
                                                     Rng& rng) {
  return ConditionedSampler(law, n, strategy).draw(rng);
}

inline OrderedTree sample_cgw_tree(const OffspringLaw& law, std::int64_t n, Strategy strategy, Rng& rng) {
  return ConditionedSampler(law, n, strategy).sample_tree(rng);
}

}  // namespace cgw
