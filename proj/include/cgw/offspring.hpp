#pragma once

// Critical offspring laws, exponential tilting, size-biasing and the exact
// distributional formulas built on them (total size, height CDF).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgw/convolution.hpp"
#include "cgw/rng.hpp"
#include "cgw/zeta.hpp"

namespace cgw {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class LawKind { Geometric, Poisson, Binary, Zeta, Table };

/// Inverse-CDF sampler over a finite table of weights.
class DiscreteTable {
 public:
  DiscreteTable() = default;
  explicit DiscreteTable(const std::vector<double>& weights) {
    cumulative_.resize(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      cumulative_[i] = acc;
    }
    if (!(acc > 0.0)) throw std::invalid_argument("DiscreteTable: zero total weight");
  }

  std::int64_t operator()(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    // skip zero-weight cells that share the cumulative value
    return static_cast<std::int64_t>(it - cumulative_.begin());
  }

  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

namespace detail {

// Devroye's rejection sampler for P(X = x) proportional to x^{-(a+1)},
// x >= 1, a > 0.
inline std::int64_t sample_zipf(double a, Rng& rng) {
  const double b = std::pow(2.0, a);
  constexpr double kMax = 4.0e18;
  for (;;) {
    const double u = 1.0 - uniform01(rng);  // (0,1]
    const double v = uniform01(rng);
    const double x = std::floor(std::pow(u, -1.0 / a));
    if (!(x < kMax)) continue;
    const double t = std::pow(1.0 + 1.0 / x, a);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return static_cast<std::int64_t>(x);
  }
}

}  // namespace detail

/// A critical (mean one) offspring distribution.
class OffspringLaw {
 public:
  static OffspringLaw geometric() { return OffspringLaw(LawKind::Geometric, 2.0); }
  static OffspringLaw poisson() { return OffspringLaw(LawKind::Poisson, 2.0); }
  static OffspringLaw binary() { return OffspringLaw(LawKind::Binary, 2.0); }

  static OffspringLaw zeta(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) {
      throw std::invalid_argument("zeta law: alpha must lie in (1,2)");
    }
    OffspringLaw law(LawKind::Zeta, alpha);
    law.zeta_alpha_ = special::riemann_zeta(alpha);
    law.zeta_alpha_plus_one_ = special::riemann_zeta(alpha + 1.0);
    law.p0_ = 1.0 - law.zeta_alpha_plus_one_ / law.zeta_alpha_;
    return law;
  }

  static OffspringLaw table(std::vector<double> pmf) {
    constexpr double kTol = 1e-12;
    while (!pmf.empty() && pmf.back() == 0.0) pmf.pop_back();
    if (pmf.size() < 3) throw std::invalid_argument("table law: support must reach x >= 2");
    double total = 0.0, mean = 0.0;
    std::int64_t span = 0;
    for (std::size_t x = 0; x < pmf.size(); ++x) {
      if (pmf[x] < 0.0 || !std::isfinite(pmf[x])) {
        throw std::invalid_argument("table law: probabilities must be finite and >= 0");
      }
      total += pmf[x];
      mean += static_cast<double>(x) * pmf[x];
      if (pmf[x] > 0.0) span = std::gcd(span, static_cast<std::int64_t>(x));
    }
    if (std::abs(total - 1.0) > kTol) throw std::invalid_argument("table law: pmf must sum to 1");
    if (std::abs(mean - 1.0) > kTol) throw std::invalid_argument("table law: mean must be 1");
    if (!(pmf[0] > 0.0)) throw std::invalid_argument("table law: p_0 must be positive");
    if (span != 1) throw std::invalid_argument("table law: support must have gcd 1");
    OffspringLaw law(LawKind::Table, 2.0);
    law.table_ = std::move(pmf);
    law.table_sampler_ = DiscreteTable(law.table_);
    std::vector<double> biased(law.table_.size());
    for (std::size_t x = 0; x < biased.size(); ++x) biased[x] = static_cast<double>(x) * law.table_[x];
    law.table_biased_sampler_ = DiscreteTable(biased);
    return law;
  }

  LawKind kind() const { return kind_; }

  /// Stability index: 2 for every finite-variance kind.
  double alpha() const { return alpha_; }

  /// sigma^2 = sum x^2 p_x - 1, or nullopt when infinite.
  std::optional<double> variance() const {
    switch (kind_) {
      case LawKind::Geometric: return 2.0;
      case LawKind::Poisson: return 1.0;
      case LawKind::Binary: return 1.0;
      case LawKind::Zeta: return std::nullopt;
      case LawKind::Table: {
        double m2 = 0.0;
        for (std::size_t x = 0; x < table_.size(); ++x) {
          m2 += static_cast<double>(x) * static_cast<double>(x) * table_[x];
        }
        return m2 - 1.0;
      }
    }
    return std::nullopt;
  }

  double sigma() const {
    auto v = variance();
    if (!v) throw std::domain_error("sigma: infinite variance");
    return std::sqrt(*v);
  }

  /// Largest support point, when finite.
  std::optional<std::int64_t> support_max() const {
    if (kind_ == LawKind::Binary) return 2;
    if (kind_ == LawKind::Table) return static_cast<std::int64_t>(table_.size()) - 1;
    return std::nullopt;
  }

  double pmf(std::int64_t x) const {
    if (x < 0) return 0.0;
    switch (kind_) {
      case LawKind::Geometric: return std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(x + 1, 2000)));
      case LawKind::Poisson: return std::exp(-1.0 - std::lgamma(static_cast<double>(x) + 1.0));
      case LawKind::Binary: return (x == 0 || x == 2) ? 0.5 : 0.0;
      case LawKind::Zeta:
        if (x == 0) return p0_;
        return std::pow(static_cast<double>(x), -1.0 - alpha_) / zeta_alpha_;
      case LawKind::Table:
        return static_cast<std::size_t>(x) < table_.size() ? table_[static_cast<std::size_t>(x)] : 0.0;
    }
    return 0.0;
  }

  /// p_0, ..., p_{len-1}.
  std::vector<double> pmf_table(std::size_t len) const {
    std::vector<double> out(len);
    for (std::size_t x = 0; x < len; ++x) out[x] = pmf(static_cast<std::int64_t>(x));
    return out;
  }

  /// Size-biased pmf x p_x.
  double size_biased_pmf(std::int64_t x) const { return x <= 0 ? 0.0 : static_cast<double>(x) * pmf(x); }

  /// Generating function sum lambda^x p_x on [0,1].
  double gen_fn(double lambda) const {
    check_unit(lambda);
    switch (kind_) {
      case LawKind::Geometric: return 1.0 / (2.0 - lambda);
      case LawKind::Poisson: return std::exp(lambda - 1.0);
      case LawKind::Binary: return 0.5 * (1.0 + lambda * lambda);
      case LawKind::Zeta: return p0_ + special::polylog(alpha_ + 1.0, lambda) / zeta_alpha_;
      case LawKind::Table: {
        double acc = 0.0;
        for (auto it = table_.rbegin(); it != table_.rend(); ++it) acc = acc * lambda + *it;
        return acc;
      }
    }
    return 0.0;
  }

  /// 1 - gen_fn(1 - t), evaluated without cancellation near t = 0.
  double gen_fn_complement(double t) const {
    check_unit(t);
    switch (kind_) {
      case LawKind::Geometric: return t / (1.0 + t);
      case LawKind::Poisson: return -std::expm1(-t);
      case LawKind::Binary: return t - 0.5 * t * t;
      case LawKind::Zeta:
        return special::polylog_deficit(alpha_ + 1.0, 1.0 - t) / zeta_alpha_;
      case LawKind::Table: {
        double acc = 0.0;
        const double log_keep = std::log1p(-t);
        for (std::size_t x = 1; x < table_.size(); ++x) {
          acc += table_[x] * -std::expm1(static_cast<double>(x) * log_keep);
        }
        return acc;
      }
    }
    return 0.0;
  }

  /// First or second derivative of the generating function. The second
  /// derivative at 1 is +infinity when the variance is infinite.
  double gen_fn_deriv(double lambda, int order) const {
    check_unit(lambda);
    if (order != 1 && order != 2) throw std::invalid_argument("gen_fn_deriv: order must be 1 or 2");
    switch (kind_) {
      case LawKind::Geometric: {
        const double d = 2.0 - lambda;
        return order == 1 ? 1.0 / (d * d) : 2.0 / (d * d * d);
      }
      case LawKind::Poisson: return std::exp(lambda - 1.0);
      case LawKind::Binary: return order == 1 ? lambda : 1.0;
      case LawKind::Zeta: return zeta_deriv(lambda, order);
      case LawKind::Table: {
        // Horner over the shifted coefficients
        double horner = 0.0;
        for (std::size_t x = table_.size(); x-- > static_cast<std::size_t>(order);) {
          const double xd = static_cast<double>(x);
          const double coeff = order == 1 ? xd : xd * (xd - 1.0);
          horner = horner * lambda + coeff * table_[x];
        }
        return horner;
      }
    }
    return 0.0;
  }

  /// v(x) = sum_{y <= x} y(y-1) p_y; x = +inf gives sigma^2 (or +inf).
  double truncated_second_moment(double x) const {
    if (x < 0.0) throw std::invalid_argument("truncated_second_moment: x < 0");
    if (std::isinf(x)) {
      auto v = variance();
      return v ? *v : kInfinity;
    }
    const double m = std::floor(x);
    if (kind_ == LawKind::Zeta) {
      return (special::power_sum(alpha_ - 1.0, m) - special::power_sum(alpha_, m)) / zeta_alpha_;
    }
    // Geometric and Poisson terms are below 1e-300 long before y = 2000.
    const double stop = std::min(m, 2000.0);
    double acc = 0.0;
    for (double y = 2.0; y <= stop; y += 1.0) acc += y * (y - 1.0) * pmf(static_cast<std::int64_t>(y));
    return acc;
  }

  /// Normalizing sequence a_n: sigma sqrt(n) with finite variance,
  /// (n / (zeta(alpha)(2 - alpha)))^{1/alpha} for the zeta family.
  double scaling_a(double n) const {
    if (!(n >= 1.0)) throw std::invalid_argument("scaling_a: n must be >= 1");
    if (kind_ == LawKind::Zeta) return std::pow(n / (zeta_alpha_ * (2.0 - alpha_)), 1.0 / alpha_);
    return sigma() * std::sqrt(n);
  }

  std::int64_t sample(Rng& rng) const {
    switch (kind_) {
      case LawKind::Geometric: return std::geometric_distribution<std::int64_t>(0.5)(rng);
      case LawKind::Poisson: return std::poisson_distribution<std::int64_t>(1.0)(rng);
      case LawKind::Binary: return std::bernoulli_distribution(0.5)(rng) ? 2 : 0;
      case LawKind::Zeta:
        if (uniform01(rng) < p0_) return 0;
        return detail::sample_zipf(alpha_, rng);
      case LawKind::Table: return table_sampler_(rng);
    }
    return 0;
  }

  /// Draw from the size-biased law x p_x.
  std::int64_t sample_size_biased(Rng& rng) const {
    switch (kind_) {
      case LawKind::Geometric: {
        std::geometric_distribution<std::int64_t> g(0.5);
        return 1 + g(rng) + g(rng);
      }
      case LawKind::Poisson: return 1 + std::poisson_distribution<std::int64_t>(1.0)(rng);
      case LawKind::Binary: return 2;
      case LawKind::Zeta: return detail::sample_zipf(alpha_ - 1.0, rng);
      case LawKind::Table: return table_biased_sampler_(rng);
    }
    return 0;
  }

  std::string name() const {
    switch (kind_) {
      case LawKind::Geometric: return "geometric";
      case LawKind::Poisson: return "poisson";
      case LawKind::Binary: return "binary";
      case LawKind::Zeta: return "zeta";
      case LawKind::Table: return "table";
    }
    return "unknown";
  }

  const std::vector<double>& table_pmf() const { return table_; }

  bool operator==(const OffspringLaw& other) const {
    return kind_ == other.kind_ && alpha_ == other.alpha_ && table_ == other.table_;
  }

 private:
  OffspringLaw(LawKind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  static void check_unit(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("argument must lie in [0,1]");
  }

  double zeta_deriv(double lambda, int order) const {
    if (lambda == 1.0) return order == 1 ? 1.0 : kInfinity;
    if (lambda <= 0.5) {
      double acc = 0.0;
      double lpow = 1.0;  // lambda^{x - order}
      for (std::int64_t x = order; x < 400; ++x) {
        const double xd = static_cast<double>(x);
        const double coeff = order == 1 ? xd : xd * (xd - 1.0);
        acc += coeff * lpow * pmf(x);
        lpow *= lambda;
        if (lpow < 1e-20) break;
      }
      return acc;
    }
    const double la = special::polylog(alpha_, lambda);
    if (order == 1) return la / (lambda * zeta_alpha_);
    const double lam1 = special::polylog(alpha_ - 1.0, lambda);
    return (lam1 - la) / (lambda * lambda * zeta_alpha_);
  }

  LawKind kind_;
  double alpha_;
  double zeta_alpha_ = 0.0;
  double zeta_alpha_plus_one_ = 0.0;
  double p0_ = 0.0;
  std::vector<double> table_;
  DiscreteTable table_sampler_;
  DiscreteTable table_biased_sampler_;
};

/// Exponential tilt q_x = lambda^x p_x / phi(lambda) of a critical law.
class TiltedLaw {
 public:
  TiltedLaw(OffspringLaw base, double lambda) : base_(std::move(base)), lambda_(lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("tilt: lambda must lie in (0,1]");
    phi_ = base_.gen_fn(lambda_);
    mu_ = lambda_ < 1.0 ? lambda_ * base_.gen_fn_deriv(lambda_, 1) / phi_ : 1.0;
    if (lambda_ < 1.0) build_tables();
  }

  const OffspringLaw& base() const { return base_; }
  double lambda() const { return lambda_; }
  double phi() const { return phi_; }
  double mu() const { return mu_; }

  double pmf(std::int64_t x) const {
    if (x < 0) return 0.0;
    if (lambda_ == 1.0) return base_.pmf(x);
    return std::exp(static_cast<double>(x) * std::log(lambda_)) * base_.pmf(x) / phi_;
  }

  std::vector<double> pmf_table(std::size_t len) const {
    std::vector<double> out(len);
    for (std::size_t x = 0; x < len; ++x) out[x] = pmf(static_cast<std::int64_t>(x));
    return out;
  }

  /// q-hat_x = x q_x / mu.
  double size_biased_pmf(std::int64_t x) const {
    return x <= 0 ? 0.0 : static_cast<double>(x) * pmf(x) / mu_;
  }

  std::int64_t sample(Rng& rng) const { return lambda_ == 1.0 ? base_.sample(rng) : q_sampler_(rng); }
  std::int64_t sample_size_biased(Rng& rng) const {
    return lambda_ == 1.0 ? base_.sample_size_biased(rng) : q_hat_sampler_(rng);
  }

  /// Mass dropped by the sampling tables (bounded above, not estimated).
  double truncation_bound() const { return truncation_bound_; }

 private:
  void build_tables() {
    // Tail bounds use p_x <= 1: sum_{x > K} lambda^x and sum_{x > K} x lambda^x.
    constexpr double kTail = 1e-17;
    const double l = lambda_;
    std::int64_t k = 1;
    auto tail_q = [&](std::int64_t kk) { return std::pow(l, kk + 1) / ((1.0 - l) * phi_); };
    auto tail_qhat = [&](std::int64_t kk) {
      const double kd = static_cast<double>(kk);
      return std::pow(l, kk + 1) * ((kd + 1.0) * (1.0 - l) + l) / ((1.0 - l) * (1.0 - l) * phi_ * mu_);
    };
    while (std::max(tail_q(k), tail_qhat(k)) > kTail) k *= 2;
    if (auto smax = base_.support_max()) k = std::min(k, *smax);
    truncation_bound_ = base_.support_max() && k == *base_.support_max() ? 0.0
                                                                           : std::max(tail_q(k), tail_qhat(k));
    std::vector<double> q(static_cast<std::size_t>(k) + 1), qhat(q.size());
    for (std::int64_t x = 0; x <= k; ++x) {
      q[static_cast<std::size_t>(x)] = pmf(x);
      qhat[static_cast<std::size_t>(x)] = size_biased_pmf(x);
    }
    q_sampler_ = DiscreteTable(q);
    q_hat_sampler_ = DiscreteTable(qhat);
  }

  OffspringLaw base_;
  double lambda_;
  double phi_ = 1.0;
  double mu_ = 1.0;
  double truncation_bound_ = 0.0;
  DiscreteTable q_sampler_;
  DiscreteTable q_hat_sampler_;
};

inline TiltedLaw tilt(const OffspringLaw& law, double lambda) { return TiltedLaw(law, lambda); }

/// Any offspring distribution that exposes point probabilities and draws.
template <class L>
concept OffspringDistribution = requires(const L& law, std::int64_t x, Rng& rng) {
  { law.pmf(x) } -> std::convertible_to<double>;
  { law.sample(rng) } -> std::convertible_to<std::int64_t>;
  { law.pmf_table(std::size_t{}) } -> std::convertible_to<std::vector<double>>;
};

using PmfFunction = std::function<double(std::int64_t)>;

template <class L>
  requires requires(const L& law, std::int64_t x) { law.size_biased_pmf(x); }
PmfFunction size_bias(const L& law) {
  return [law](std::int64_t x) { return law.size_biased_pmf(x); };
}

/// P(s(T) = n) = P(xi_1 + ... + xi_n = n - 1) / n, from the exact n-fold
/// convolution. Only offspring values <= n - 1 can contribute, so the
/// truncated convolution carries no tail error.
template <OffspringDistribution L>
double total_size_pmf(const L& law, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("total_size_pmf: n must be >= 1");
  const auto len = static_cast<std::size_t>(n);
  const auto base = law.pmf_table(len);
  const auto sum = convolution_power(base, static_cast<std::uint64_t>(n), len);
  return sum[len - 1] / static_cast<double>(n);
}

/// P(h(T) > k), by iterating t -> 1 - phi(1 - t) from t = 1.
inline double height_survival(const OffspringLaw& law, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("height_survival: k must be >= 0");
  double t = 1.0;
  for (std::int64_t i = 0; i <= k; ++i) t = law.gen_fn_complement(t);
  return t;
}

/// P(h(T) <= k) = phi^{(k+1)}(0).
inline double height_cdf(const OffspringLaw& law, std::int64_t k) { return 1.0 - height_survival(law, k); }

// --- JSON ---------------------------------------------------------------

inline LawKind law_kind_from_name(const std::string& name) {
  if (name == "geometric") return LawKind::Geometric;
  if (name == "poisson") return LawKind::Poisson;
  if (name == "binary") return LawKind::Binary;
  if (name == "zeta") return LawKind::Zeta;
  if (name == "table") return LawKind::Table;
  throw std::invalid_argument("unknown law: " + name);
}

inline OffspringLaw make_law(const std::string& name, double alpha = 1.5,
                             const std::vector<double>& pmf = {}) {
  switch (law_kind_from_name(name)) {
    case LawKind::Geometric: return OffspringLaw::geometric();
    case LawKind::Poisson: return OffspringLaw::poisson();
    case LawKind::Binary: return OffspringLaw::binary();
    case LawKind::Zeta: return OffspringLaw::zeta(alpha);
    case LawKind::Table: return OffspringLaw::table(pmf);
  }
  throw std::invalid_argument("unknown law: " + name);
}

inline nlohmann::json law_to_json(const OffspringLaw& law) {
  nlohmann::json j;
  j["kind"] = law.name();
  j["alpha"] = law.alpha();
  if (law.kind() == LawKind::Table) j["pmf"] = law.table_pmf();
  return j;
}

inline OffspringLaw law_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const double alpha = j.contains("alpha") ? j.at("alpha").get<double>() : 1.5;
  std::vector<double> pmf;
  if (j.contains("pmf")) pmf = j.at("pmf").get<std::vector<double>>();
  return make_law(kind, alpha, pmf);
}

}  // namespace cgw
