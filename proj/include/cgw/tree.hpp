#pragma once

// Rooted ordered trees stored as their breadth-first offspring sequence.
//
// Vertex labels are 0-based breadth-first positions: the root is 0, each
// generation occupies a contiguous block, siblings appear in birth order.
// With this labelling the children of vertex i are the labels
// 1 + xi_0 + ... + xi_{i-1}, ..., xi_0 + ... + xi_i, so the offspring
// sequence alone determines the tree.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgw/offspring.hpp"

namespace cgw {

class OrderedTree {
 public:
  OrderedTree() : offspring_{0} {}

  /// Validates that the sequence codes a tree: its Lukasiewicz path stays
  /// positive before the last label and ends at zero.
  static OrderedTree from_offspring(std::vector<std::int64_t> offspring) {
    if (offspring.empty()) throw std::invalid_argument("tree: empty offspring sequence");
    std::int64_t level = 1;
    for (std::size_t i = 0; i < offspring.size(); ++i) {
      if (offspring[i] < 0) throw std::invalid_argument("tree: negative offspring count");
      if (level <= 0) {
        throw std::invalid_argument("tree: sequence closes before label " + std::to_string(i));
      }
      level += offspring[i] - 1;
    }
    if (level != 0) throw std::invalid_argument("tree: offspring counts do not sum to size - 1");
    OrderedTree t;
    t.offspring_ = std::move(offspring);
    return t;
  }

  static OrderedTree single_vertex() { return OrderedTree(); }

  std::size_t size() const { return offspring_.size(); }
  const std::vector<std::int64_t>& offspring() const { return offspring_; }
  std::int64_t degree(std::size_t label) const { return offspring_.at(label); }

  /// Parent label of every vertex; the root maps to itself.
  std::vector<std::size_t> parents() const {
    std::vector<std::size_t> parent(size(), 0);
    std::size_t next = 1;
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::int64_t c = 0; c < offspring_[i]; ++c) parent[next++] = i;
    }
    return parent;
  }

  std::vector<std::size_t> depths() const {
    auto parent = parents();
    std::vector<std::size_t> depth(size(), 0);
    for (std::size_t i = 1; i < size(); ++i) depth[i] = depth[parent[i]] + 1;
    return depth;
  }

  /// Label of the first child of `label` (meaningful when degree > 0).
  std::vector<std::size_t> first_children() const {
    std::vector<std::size_t> first(size(), 0);
    std::size_t next = 1;
    for (std::size_t i = 0; i < size(); ++i) {
      first[i] = next;
      next += static_cast<std::size_t>(offspring_[i]);
    }
    return first;
  }

  auto operator<=>(const OrderedTree&) const = default;

 private:
  std::vector<std::int64_t> offspring_;
};

/// Z_0 = 1, Z_1, ..., Z_h.
inline std::vector<std::int64_t> generation_sizes(const OrderedTree& tree) {
  std::vector<std::int64_t> z{1};
  const auto xi = tree.offspring();
  std::size_t start = 0;
  for (;;) {
    const auto width = static_cast<std::size_t>(z.back());
    std::int64_t next = 0;
    for (std::size_t i = start; i < start + width; ++i) next += xi[i];
    if (next == 0) break;
    start += width;
    z.push_back(next);
  }
  return z;
}

inline std::int64_t height(const OrderedTree& tree) {
  return static_cast<std::int64_t>(generation_sizes(tree).size()) - 1;
}

/// t(k): remove every vertex in a generation greater than k.
inline OrderedTree truncate(const OrderedTree& tree, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("truncate: k must be >= 0");
  const auto z = generation_sizes(tree);
  if (k >= static_cast<std::int64_t>(z.size()) - 1) return tree;
  std::size_t keep = 0, last_block = 0;
  for (std::int64_t g = 0; g <= k; ++g) {
    last_block = keep;
    keep += static_cast<std::size_t>(z[static_cast<std::size_t>(g)]);
  }
  std::vector<std::int64_t> xi(tree.offspring().begin(), tree.offspring().begin() + static_cast<std::ptrdiff_t>(keep));
  for (std::size_t i = last_block; i < keep; ++i) xi[i] = 0;
  return OrderedTree::from_offspring(std::move(xi));
}

/// Incremental construction of a tree from parent links; children are
/// ordered by insertion. build() relabels breadth-first.
class TreeBuilder {
 public:
  static constexpr std::size_t kRoot = 0;

  TreeBuilder() : children_(1) {}

  std::size_t add_child(std::size_t parent) {
    const std::size_t id = children_.size();
    children_.at(parent).push_back(id);
    children_.emplace_back();
    return id;
  }

  std::size_t vertex_count() const { return children_.size(); }
  std::size_t child_count(std::size_t v) const { return children_.at(v).size(); }

  struct Result {
    OrderedTree tree;
    std::vector<std::size_t> label_of;  // builder id -> breadth-first label
  };

  Result build() const {
    std::vector<std::int64_t> xi;
    xi.reserve(children_.size());
    std::vector<std::size_t> label_of(children_.size(), 0);
    std::deque<std::size_t> queue{kRoot};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      label_of[v] = xi.size();
      xi.push_back(static_cast<std::int64_t>(children_[v].size()));
      for (std::size_t c : children_[v]) queue.push_back(c);
    }
    return {OrderedTree::from_offspring(std::move(xi)), std::move(label_of)};
  }

 private:
  std::vector<std::vector<std::size_t>> children_;
};

inline constexpr std::int64_t kMaxEnumerationSize = 12;

struct WeightedTree {
  OrderedTree tree;
  double probability;
};

/// All trees of size n whose degrees lie in the law's support, each with
/// its Galton-Watson probability prod_i p_{d(i)}. Lexicographic in the
/// offspring sequence.
template <OffspringDistribution L>
std::vector<WeightedTree> enumerate_trees(const L& law, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("enumerate_trees: n must be >= 1");
  if (n > kMaxEnumerationSize) throw std::invalid_argument("enumerate_trees: n exceeds 12");
  const auto len = static_cast<std::size_t>(n);
  std::vector<std::int64_t> support;
  std::vector<double> prob;
  for (std::int64_t x = 0; x < n; ++x) {
    const double p = law.pmf(x);
    if (p > 0.0) {
      support.push_back(x);
      prob.push_back(p);
    }
  }
  std::vector<WeightedTree> out;
  std::vector<std::int64_t> xi(len, 0);
  // level = S(i) after placing i values
  auto recurse = [&](auto&& self, std::size_t i, std::int64_t level, double weight) -> void {
    if (i == len) {
      if (level == 0) out.push_back({OrderedTree::from_offspring(xi), weight});
      return;
    }
    for (std::size_t s = 0; s < support.size(); ++s) {
      const std::int64_t next = level + support[s] - 1;
      const auto remaining = static_cast<std::int64_t>(len - i - 1);
      if (next > remaining) break;             // cannot come back down in time
      if (next <= 0 && remaining > 0) continue;  // touched zero early
      if (remaining == 0 && next != 0) continue;
      xi[i] = support[s];
      self(self, i + 1, next, weight * prob[s]);
    }
  };
  recurse(recurse, 0, 1, 1.0);
  return out;
}

inline nlohmann::json tree_to_json(const OrderedTree& tree) {
  return nlohmann::json(std::vector<std::int64_t>(tree.offspring().begin(), tree.offspring().end()));
}

inline OrderedTree tree_from_json(const nlohmann::json& j) {
  return OrderedTree::from_offspring(j.get<std::vector<std::int64_t>>());
}

}  // namespace cgw
