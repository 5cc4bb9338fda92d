#pragma once

// Skip-free lattice paths and the breadth-first tree <-> excursion
// bijection: S(0) = 1, S(i) = S(i-1) + xi_i - 1.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgw/step_function.hpp"
#include "cgw/tree.hpp"

namespace cgw {

enum class PathViolation {
  kTooShort,       // fewer than two points
  kBigDownStep,    // S(i) - S(i-1) < -1
  kWrongStart,     // S(0) != 1
  kWrongEnd,       // S(n) != 0
  kEarlyZero,      // S(i) <= 0 for some i < n
};

inline const char* describe(PathViolation v) {
  switch (v) {
    case PathViolation::kTooShort: return "path has fewer than two points";
    case PathViolation::kBigDownStep: return "step below -1";
    case PathViolation::kWrongStart: return "does not start at 1";
    case PathViolation::kWrongEnd: return "does not end at 0";
    case PathViolation::kEarlyZero: return "hits 0 before n";
  }
  return "invalid path";
}

class PathError : public std::invalid_argument {
 public:
  PathError(PathViolation violation, std::size_t index)
      : std::invalid_argument(std::string(describe(violation)) + " (index " + std::to_string(index) + ")"),
        violation_(violation),
        index_(index) {}
  PathViolation violation() const { return violation_; }
  std::size_t index() const { return index_; }

 private:
  PathViolation violation_;
  std::size_t index_;
};

/// Integer path S(0..n) with increments >= -1.
class LatticePath {
 public:
  explicit LatticePath(std::vector<std::int64_t> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw PathError(PathViolation::kTooShort, 0);
    for (std::size_t i = 1; i < values_.size(); ++i) {
      if (values_[i] - values_[i - 1] < -1) throw PathError(PathViolation::kBigDownStep, i);
    }
  }

  /// Path started at `start` with increments xi_i - 1.
  static LatticePath from_offspring(std::span<const std::int64_t> xi, std::int64_t start = 1) {
    std::vector<std::int64_t> s(xi.size() + 1);
    s[0] = start;
    for (std::size_t i = 0; i < xi.size(); ++i) s[i + 1] = s[i] + xi[i] - 1;
    return LatticePath(std::move(s));
  }

  std::size_t length() const { return values_.size() - 1; }
  std::int64_t operator[](std::size_t i) const { return values_[i]; }
  const std::vector<std::int64_t>& values() const { return values_; }

  /// xi_i = S(i) - S(i-1) + 1, i = 1..n.
  std::vector<std::int64_t> offspring() const {
    std::vector<std::int64_t> xi(length());
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = values_[i + 1] - values_[i] + 1;
    return xi;
  }

  /// First violated excursion condition, if any.
  std::optional<PathError> excursion_violation() const {
    if (values_.front() != 1) return PathError(PathViolation::kWrongStart, 0);
    for (std::size_t i = 1; i < length(); ++i) {
      if (values_[i] <= 0) return PathError(PathViolation::kEarlyZero, i);
    }
    if (values_.back() != 0) return PathError(PathViolation::kWrongEnd, length());
    return std::nullopt;
  }

  bool is_bridge() const { return values_.front() == 1 && values_.back() == 0; }
  bool is_excursion() const { return !excursion_violation().has_value(); }

  bool operator==(const LatticePath&) const = default;

 private:
  std::vector<std::int64_t> values_;
};

inline LatticePath encode_tree(const OrderedTree& tree) { return LatticePath::from_offspring(tree.offspring()); }

inline OrderedTree decode_path(const LatticePath& path) {
  if (auto v = path.excursion_violation()) throw *v;
  return OrderedTree::from_offspring(path.offspring());
}

/// Smallest i with S(j) >= S(i) for all j in [i, n].
inline std::size_t first_min_index(const LatticePath& path) {
  const std::size_t n = path.length();
  std::size_t best = n;
  std::int64_t suffix_min = path[n];
  for (std::size_t i = n + 1; i-- > 0;) {
    if (path[i] <= suffix_min) {
      suffix_min = path[i];
      best = i;
    }
  }
  return best;
}

/// Cyclic shift of the increments starting right after the first
/// suffix-minimum. For a skip-free bridge from 1 to 0 this is the unique
/// rotation that is an excursion.
inline LatticePath rotate_to_excursion(const LatticePath& bridge) {
  if (!bridge.is_bridge()) {
    throw PathError(bridge[0] != 1 ? PathViolation::kWrongStart : PathViolation::kWrongEnd,
                    bridge[0] != 1 ? 0 : bridge.length());
  }
  const std::size_t n = bridge.length();
  const std::size_t t = first_min_index(bridge) % n;  // t = n is the identity rotation
  std::vector<std::int64_t> s(n + 1);
  s[0] = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t k = (t + i - 1) % n;  // increment index, 0-based
    s[i] = s[i - 1] + (bridge[k + 1] - bridge[k]);
  }
  return LatticePath(std::move(s));
}

/// S^n(s) = S([ns]) / a on [0,1].
inline StepFunction rescale(const LatticePath& path, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("rescale: scale must be positive");
  const std::size_t n = path.length();
  std::vector<double> bp(n), vals(n);
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    bp[k] = static_cast<double>(k) / dn;
    const auto v = path[k];
    if (v < 0) throw std::invalid_argument("rescale: path takes negative values");
    vals[k] = static_cast<double>(v) / scale;
  }
  const auto last = path[n];
  if (last < 0) throw std::invalid_argument("rescale: path takes negative values");
  return StepFunction(std::move(bp), std::move(vals), 1.0, static_cast<double>(last) / scale);
}

inline nlohmann::json to_json(const LatticePath& path) { return nlohmann::json(path.values()); }

}  // namespace cgw
