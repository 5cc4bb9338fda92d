#pragma once

// Size-biased Galton-Watson trees built around a distinguished ancestral
// line (the trunk): geometric trunk length, size-biased trunk offspring,
// uniform choice of the continuing child, ordinary Galton-Watson trees
// everywhere else.

#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cgw/offspring.hpp"
#include "cgw/rng.hpp"
#include "cgw/tree.hpp"

namespace cgw {

inline constexpr std::size_t kMaxSpineTreeVertices = 50'000'000;

struct SpineSample {
  OrderedTree tree;
  std::vector<std::size_t> trunk;     // labels of trunk vertices, root first (G entries)
  std::int64_t trunk_length = 0;      // G, also the generation of the mark
  std::vector<std::int64_t> xi_hat;   // offspring counts along the trunk
  std::vector<std::int64_t> zeta;     // 1-based index of the continuing child
  std::size_t mark = 0;               // label of M
};

namespace detail {

// Grows independent Galton-Watson families below every vertex in `pending`,
// stopping at generation `cap` (no cap when cap < 0).
template <OffspringDistribution L>
void grow_families(TreeBuilder& builder, std::deque<std::pair<std::size_t, std::int64_t>> pending, const L& law,
                   std::int64_t cap, Rng& rng) {
  while (!pending.empty()) {
    const auto [v, gen] = pending.front();
    pending.pop_front();
    if (cap >= 0 && gen >= cap) continue;
    const std::int64_t kids = law.sample(rng);
    if (builder.vertex_count() + static_cast<std::size_t>(kids) > kMaxSpineTreeVertices) {
      throw std::runtime_error("spine tree exceeds the vertex limit");
    }
    for (std::int64_t c = 0; c < kids; ++c) pending.emplace_back(builder.add_child(v), gen + 1);
  }
}

}  // namespace detail

/// Draws (T-hat, M) for the tilt lambda in (0,1): P(G = k) = (1 - mu) mu^k.
inline SpineSample sample_size_biased(const TiltedLaw& q, Rng& rng) {
  if (!(q.lambda() < 1.0)) throw std::invalid_argument("sample_size_biased: lambda must be < 1");
  const std::int64_t g = std::geometric_distribution<std::int64_t>(1.0 - q.mu())(rng);

  TreeBuilder builder;
  std::vector<std::size_t> trunk_ids;
  std::vector<std::int64_t> xi_hat, zeta;
  std::deque<std::pair<std::size_t, std::int64_t>> pending;
  std::size_t current = TreeBuilder::kRoot;
  for (std::int64_t j = 0; j < g; ++j) {
    trunk_ids.push_back(current);
    const std::int64_t kids = q.sample_size_biased(rng);
    const std::int64_t chosen = std::uniform_int_distribution<std::int64_t>(1, kids)(rng);
    xi_hat.push_back(kids);
    zeta.push_back(chosen);
    std::size_t next = 0;
    for (std::int64_t c = 1; c <= kids; ++c) {
      const std::size_t child = builder.add_child(current);
      if (c == chosen) {
        next = child;
      } else {
        pending.emplace_back(child, j + 1);
      }
    }
    current = next;
  }
  const std::size_t mark_id = current;
  pending.emplace_back(mark_id, g);
  detail::grow_families(builder, std::move(pending), q, -1, rng);

  auto built = builder.build();
  SpineSample out{std::move(built.tree), {}, g, std::move(xi_hat), std::move(zeta), built.label_of[mark_id]};
  for (std::size_t id : trunk_ids) out.trunk.push_back(built.label_of[id]);
  return out;
}

inline SpineSample sample_size_biased(const OffspringLaw& law, double lambda, Rng& rng) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("sample_size_biased: lambda must lie in (0,1)");
  return sample_size_biased(tilt(law, lambda), rng);
}

/// The infinite size-biased tree cut at generation k: spine offspring from
/// x p_x, uniform continuation, critical Galton-Watson families off the
/// spine, nothing below generation k.
inline OrderedTree sample_spine_truncated(const OffspringLaw& law, std::int64_t k, Rng& rng) {
  if (k < 0) throw std::invalid_argument("sample_spine_truncated: k must be >= 0");
  TreeBuilder builder;
  std::deque<std::pair<std::size_t, std::int64_t>> pending;
  std::size_t spine = TreeBuilder::kRoot;
  for (std::int64_t gen = 0; gen < k; ++gen) {
    const std::int64_t kids = law.sample_size_biased(rng);
    if (builder.vertex_count() + static_cast<std::size_t>(kids) > kMaxSpineTreeVertices) {
      throw std::runtime_error("spine tree exceeds the vertex limit");
    }
    const std::int64_t chosen = std::uniform_int_distribution<std::int64_t>(1, kids)(rng);
    std::size_t next = 0;
    for (std::int64_t c = 1; c <= kids; ++c) {
      const std::size_t child = builder.add_child(spine);
      if (c == chosen) {
        next = child;
      } else {
        pending.emplace_back(child, gen + 1);
      }
    }
    spine = next;
  }
  detail::grow_families(builder, std::move(pending), law, k, rng);
  return builder.build().tree;
}

/// Q-hat(T = t, M = m) = (1 - mu) mu^g prod_{i < m} q-hat_{d(i)} / d(i)
///                        * prod_{i not< m} q_{d(i)},
/// where i < m ranges over the strict ancestors of m and g is its depth.
inline double exact_prob_size_biased(const TiltedLaw& q, const OrderedTree& tree, std::size_t mark) {
  if (mark >= tree.size()) throw std::invalid_argument("exact_prob_size_biased: mark is not a vertex");
  const auto parent = tree.parents();
  std::vector<char> ancestor(tree.size(), 0);
  std::int64_t g = 0;
  for (std::size_t v = mark; v != 0; v = parent[v]) {
    ancestor[parent[v]] = 1;
    ++g;
  }
  double p = (1.0 - q.mu()) * std::pow(q.mu(), static_cast<double>(g));
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const std::int64_t d = tree.degree(i);
    if (ancestor[i]) {
      p *= q.size_biased_pmf(d) / static_cast<double>(d);
    } else {
      p *= q.pmf(d);
    }
  }
  return p;
}

inline double exact_prob_size_biased(const OffspringLaw& law, double lambda, const OrderedTree& tree,
                                     std::size_t mark) {
  return exact_prob_size_biased(tilt(law, lambda), tree, mark);
}

inline nlohmann::json to_json(const SpineSample& s) {
  return {{"xi", tree_to_json(s.tree)}, {"trunk", s.trunk}, {"G", s.trunk_length},
          {"xi_hat", s.xi_hat},         {"zeta", s.zeta},   {"mark", s.mark}};
}

}  // namespace cgw
