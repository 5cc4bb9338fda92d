#pragma once

// Empirical distributions, distances and the exact checks against the
// local limit theorem and the height tail.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "cgw/convolution.hpp"
#include "cgw/offspring.hpp"

namespace cgw {

class EmpiricalSample {
 public:
  EmpiricalSample() = default;
  explicit EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end());
  }

  std::size_t count() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::vector<double>& sorted() const { return values_; }

  double mean() const {
    double acc = 0.0;
    for (double v : values_) acc += v;
    return values_.empty() ? 0.0 : acc / static_cast<double>(values_.size());
  }

  /// Fraction of values <= x.
  double cdf(double x) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
  }

  double quantile(double p) const {
    if (values_.empty()) throw std::invalid_argument("quantile of an empty sample");
    const auto idx = static_cast<std::size_t>(std::clamp(p, 0.0, 1.0) * static_cast<double>(values_.size() - 1));
    return values_[idx];
  }

 private:
  std::vector<double> values_;
};

/// sup_x |F_a(x) - F_b(x)|.
inline double ks_distance(const EmpiricalSample& a, const EmpiricalSample& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  const auto& x = a.sorted();
  const auto& y = b.sorted();
  const double m = static_cast<double>(x.size()), n = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
  }
  return worst;
}

/// Wasserstein-1 distance: integral of |F_a - F_b|.
inline double wasserstein1(const EmpiricalSample& a, const EmpiricalSample& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  std::vector<double> grid(a.sorted());
  grid.insert(grid.end(), b.sorted().begin(), b.sorted().end());
  std::sort(grid.begin(), grid.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    acc += std::abs(a.cdf(grid[i]) - b.cdf(grid[i])) * (grid[i + 1] - grid[i]);
  }
  return acc;
}

/// Asymptotic two-sample critical value c(level) sqrt((m + n) / (m n)),
/// c(level) = sqrt(-ln(level / 2) / 2); c(0.01) = 1.628.
inline double ks_threshold(std::size_t m, std::size_t n, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("ks_threshold: level must lie in (0,1)");
  const double c = std::sqrt(-std::log(level / 2.0) / 2.0);
  const double dm = static_cast<double>(m), dn = static_cast<double>(n);
  return c * std::sqrt((dm + dn) / (dm * dn));
}

/// (1/2) sum |p - q| over the union of supports.
template <class K>
double tv_discrete(const std::map<K, double>& p, const std::map<K, double>& q) {
  double acc = 0.0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    acc += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q) {
    if (!p.contains(k)) acc += std::abs(v);
  }
  return 0.5 * acc;
}

/// Normalized frequency table.
template <class K>
std::map<K, double> empirical_pmf(const std::vector<K>& draws) {
  std::map<K, double> out;
  for (const auto& d : draws) out[d] += 1.0;
  for (auto& [k, v] : out) v /= static_cast<double>(draws.size());
  return out;
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Two-sample chi-square homogeneity test on category counts. Categories
/// with a pooled count below `min_pooled` are merged into one cell.
template <class K>
ChiSquareResult chi_square_two_sample(const std::map<K, std::uint64_t>& a, const std::map<K, std::uint64_t>& b,
                                      std::uint64_t min_pooled = 10) {
  std::map<K, std::pair<double, double>> cells;
  for (const auto& [k, c] : a) cells[k].first += static_cast<double>(c);
  for (const auto& [k, c] : b) cells[k].second += static_cast<double>(c);
  std::vector<std::pair<double, double>> merged;
  std::pair<double, double> rest{0.0, 0.0};
  for (const auto& [k, c] : cells) {
    if (c.first + c.second < static_cast<double>(min_pooled)) {
      rest.first += c.first;
      rest.second += c.second;
    } else {
      merged.push_back(c);
    }
  }
  if (rest.first + rest.second >= static_cast<double>(min_pooled) || merged.empty()) {
    if (rest.first + rest.second > 0.0) merged.push_back(rest);
  } else if (rest.first + rest.second > 0.0) {
    // too sparse to stand alone: fold into the smallest kept cell
    auto smallest = std::min_element(merged.begin(), merged.end(), [](const auto& x, const auto& y) {
      return x.first + x.second < y.first + y.second;
    });
    smallest->first += rest.first;
    smallest->second += rest.second;
  }
  double na = 0.0, nb = 0.0;
  for (const auto& c : merged) {
    na += c.first;
    nb += c.second;
  }
  ChiSquareResult r;
  if (merged.size() < 2) return r;
  const double total = na + nb;
  for (const auto& c : merged) {
    const double pooled = c.first + c.second;
    const double ea = pooled * na / total, eb = pooled * nb / total;
    r.statistic += (c.first - ea) * (c.first - ea) / ea + (c.second - eb) * (c.second - eb) / eb;
  }
  r.dof = static_cast<double>(merged.size() - 1);
  r.p_value = boost::math::gamma_q(r.dof / 2.0, r.statistic / 2.0);
  return r;
}

/// Goodness of fit of observed counts to expected cell probabilities
/// (probabilities need not sum to one; the remainder forms an extra cell).
inline ChiSquareResult chi_square_goodness_of_fit(const std::vector<double>& observed,
                                                  const std::vector<double>& probabilities) {
  if (observed.size() != probabilities.size()) throw std::invalid_argument("chi_square: size mismatch");
  double total = 0.0, mass = 0.0;
  for (double o : observed) total += o;
  ChiSquareResult r;
  double observed_rest = total;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * probabilities[i];
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
    observed_rest -= observed[i];
    mass += probabilities[i];
  }
  std::size_t cells = observed.size();
  if (1.0 - mass > 1e-12) {
    const double e = total * (1.0 - mass);
    r.statistic += (observed_rest - e) * (observed_rest - e) / e;
    ++cells;
  }
  r.dof = static_cast<double>(cells - 1);
  r.p_value = boost::math::gamma_q(r.dof / 2.0, r.statistic / 2.0);
  return r;
}

/// Limit density for the finite-variance column with a_n = sigma sqrt(n):
/// the standard normal.
class GaussianDensity {
 public:
  double operator()(double x) const { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
  double at_zero() const { return (*this)(0.0); }
};

struct LocalLimitResult {
  std::int64_t n = 0;
  double scale = 0.0;          // a_n
  double max_deviation = 0.0;  // max_x |a_n P(S_n - n = x) - g(x / a_n)|
  double density_at_zero = 0.0;
};

/// Exact point probabilities P(xi_1 + ... + xi_n = s) for s in [lo, hi].
inline std::vector<double> sum_point_probabilities(const OffspringLaw& law, std::int64_t n, std::int64_t lo,
                                                   std::int64_t hi) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(hi - lo + 1));
  const double dn = static_cast<double>(n);
  if (law.kind() == LawKind::Geometric) {
    // negative binomial: C(s + n - 1, s) 2^{-(s + n)}
    for (std::int64_t s = lo; s <= hi; ++s) {
      const double ds = static_cast<double>(s);
      out.push_back(std::exp(std::lgamma(ds + dn) - std::lgamma(ds + 1.0) - std::lgamma(dn) -
                             (ds + dn) * std::numbers::ln2));
    }
    return out;
  }
  if (law.kind() == LawKind::Poisson) {
    for (std::int64_t s = lo; s <= hi; ++s) {
      const double ds = static_cast<double>(s);
      out.push_back(std::exp(-dn + ds * std::log(dn) - std::lgamma(ds + 1.0)));
    }
    return out;
  }
  const auto len = static_cast<std::size_t>(hi + 1);
  const auto all = convolution_power(law.pmf_table(len), static_cast<std::uint64_t>(n), len);
  return std::vector<double>(all.begin() + lo, all.end());
}

inline LocalLimitResult local_limit_check(const OffspringLaw& law, std::int64_t n) {
  if (law.alpha() < 2.0) throw std::invalid_argument("local_limit_check: only the Gaussian case is supported");
  if (n < 1) throw std::invalid_argument("local_limit_check: n must be >= 1");
  const double a = law.scaling_a(static_cast<double>(n));
  const auto reach = static_cast<std::int64_t>(std::floor(5.0 * a));
  const std::int64_t lo = std::max<std::int64_t>(0, n - reach);
  const std::int64_t hi = n + reach;
  const auto probs = sum_point_probabilities(law, n, lo, hi);
  const GaussianDensity g;
  LocalLimitResult r{n, a, 0.0, g.at_zero()};
  for (std::int64_t s = lo; s <= hi; ++s) {
    const double x = static_cast<double>(s - n);
    const double dev = std::abs(a * probs[static_cast<std::size_t>(s - lo)] - g(x / a));
    r.max_deviation = std::max(r.max_deviation, dev);
  }
  return r;
}

/// P(a Galton-Watson forest of k trees has exactly m vertices)
/// = (k / m) P(xi_1 + ... + xi_m = m - k).
inline double forest_size_pmf(const OffspringLaw& law, std::int64_t k, std::int64_t m) {
  if (k < 0 || m < 0) throw std::invalid_argument("forest_size_pmf: negative argument");
  if (k == 0) return m == 0 ? 1.0 : 0.0;
  if (m < k) return 0.0;
  const double point = sum_point_probabilities(law, m, m - k, m - k).front();
  return static_cast<double>(k) / static_cast<double>(m) * point;
}

/// Ratio of the law of the infinite size-biased tree cut at generation k
/// to the law of truncate(CGW(n), k), at generation sizes z = (z_0..z_k):
///   z_k P(s(T) = n) / P(forest of z_k trees has n - z_0 - ... - z_{k-1} vertices).
/// Returns +inf where the CGW(n) law puts no mass.
inline double spine_likelihood_ratio(const OffspringLaw& law, std::int64_t n, const std::vector<std::int64_t>& z) {
  if (z.empty()) throw std::invalid_argument("spine_likelihood_ratio: empty generation vector");
  std::int64_t above = 0;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) above += z[j];
  const std::int64_t last = z.back();
  const std::int64_t rest = n - above;
  const double forest = rest < 0 ? 0.0 : forest_size_pmf(law, last, rest);
  const double spine = static_cast<double>(last) * forest_size_pmf(law, 1, n);
  if (forest == 0.0) return spine == 0.0 ? 1.0 : kInfinity;
  return spine / forest;
}

/// Monte Carlo total variation from draws of both laws with a known ratio
/// r = dQ/dP: (E_P[(1 - r)^+] + E_Q[(1 - 1/r)^+]) / 2. Unlike the plug-in
/// distance between two empirical pmfs it carries no support-size bias.
inline double tv_likelihood_ratio(const std::vector<double>& ratios_under_p,
                                  const std::vector<double>& ratios_under_q) {
  if (ratios_under_p.empty() || ratios_under_q.empty()) throw std::invalid_argument("tv_likelihood_ratio: empty sample");
  double a = 0.0, b = 0.0;
  for (double r : ratios_under_p) a += std::max(0.0, 1.0 - r);
  for (double r : ratios_under_q) b += std::max(0.0, 1.0 - 1.0 / r);
  return 0.5 * (a / static_cast<double>(ratios_under_p.size()) + b / static_cast<double>(ratios_under_q.size()));
}

struct HeightTailRung {
  std::int64_t n = 0;
  double scale = 0.0;    // a_n
  std::int64_t k = 0;    // floor(n / a_n)
  double tail = 0.0;     // P(h(T) > k)
  double ratio = 0.0;    // a_n P(h(T) > k), tail over the predicted order 1/a_n
};

inline std::vector<HeightTailRung> height_tail_check(const OffspringLaw& law, const std::vector<std::int64_t>& ladder) {
  std::vector<HeightTailRung> out;
  for (std::int64_t n : ladder) {
    HeightTailRung r;
    r.n = n;
    r.scale = law.scaling_a(static_cast<double>(n));
    r.k = static_cast<std::int64_t>(std::floor(static_cast<double>(n) / r.scale));
    r.tail = height_survival(law, r.k);
    r.ratio = r.scale * r.tail;
    out.push_back(r);
  }
  return out;
}

/// n = 10^2, 10^3, ..., 10^6.
inline std::vector<std::int64_t> decade_ladder(int from_exp = 2, int to_exp = 6) {
  std::vector<std::int64_t> out;
  std::int64_t n = 1;
  for (int e = 0; e <= to_exp; ++e) {
    if (e >= from_exp) out.push_back(n);
    n *= 10;
  }
  return out;
}

}  // namespace cgw
