#pragma once

// Deterministic replicate fan-out. Replicate r always draws from
// RngStream(seed, r) and writes only its own result slot, so the output is
// identical for every worker count.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cgw/conditioned.hpp"
#include "cgw/lamperti.hpp"
#include "cgw/limit.hpp"
#include "cgw/offspring.hpp"
#include "cgw/rng.hpp"
#include "cgw/stats.hpp"

namespace cgw {

inline constexpr const char* kFormatVersion = "cgw-results/1";

class ReplicateError : public std::runtime_error {
 public:
  ReplicateError(std::uint64_t replicate, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(replicate) + ": " + what), replicate_(replicate) {}
  std::uint64_t replicate() const { return replicate_; }

 private:
  std::uint64_t replicate_;
};

/// Calls body(r, rng) for r in [0, count) on `workers` threads. Errors are
/// rethrown as ReplicateError for the lowest failing replicate.
template <class Body>
void for_each_replicate(std::uint64_t count, std::uint64_t seed, unsigned workers, Body&& body) {
  workers = std::max(1U, workers);
  const auto threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
  std::mutex error_mutex;
  std::optional<std::uint64_t> failed;
  std::string failure;
  auto run_stripe = [&](unsigned stripe) {
    for (std::uint64_t r = stripe; r < count; r += threads) {
      try {
        Rng rng = RngStream(seed, r).engine();
        body(r, rng);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed || r < *failed) {
          failed = r;
          failure = e.what();
        }
        return;
      }
    }
  };
  if (threads == 1) {
    run_stripe(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run_stripe, t);
  }
  if (failed) throw ReplicateError(*failed, failure);
}

enum class Source { Cgw, Lattice, Bessel };

inline Source source_from_name(const std::string& s) {
  if (s == "cgw") return Source::Cgw;
  if (s == "lattice") return Source::Lattice;
  if (s == "bessel") return Source::Bessel;
  throw std::invalid_argument("unknown source: " + s);
}

inline std::string source_name(Source s) {
  switch (s) {
    case Source::Cgw: return "cgw";
    case Source::Lattice: return "lattice";
    case Source::Bessel: return "bessel";
  }
  return "unknown";
}

/// Statistic names. For CGW trees: height, width, max_h, h, H_at_u.
/// For lattice/Bessel excursions: max_h, h, H_at_u, max_y.
struct ExperimentSpec {
  OffspringLaw law = OffspringLaw::geometric();
  std::int64_t n = 100;
  std::uint64_t samples = 100;
  std::string statistic = "height";
  Source source = Source::Cgw;
  std::optional<Strategy> strategy;  // default_strategy(law) when unset
  double u = 1.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  Strategy resolved_strategy() const { return strategy.value_or(default_strategy(law)); }

  /// Everything that determines the output (the worker hint is excluded).
  nlohmann::json canonical_json() const {
    nlohmann::json j;
    j["law"] = law_to_json(law);
    j["n"] = n;
    j["samples"] = samples;
    j["statistic"] = statistic;
    j["source"] = source_name(source);
    j["strategy"] = strategy_name(resolved_strategy());
    j["u"] = u;
    j["seed"] = seed;
    return j;
  }

  nlohmann::json to_json() const {
    auto j = canonical_json();
    j["workers"] = workers;
    return j;
  }

  static ExperimentSpec from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    s.law = law_from_json(j.at("law"));
    s.n = j.at("n").get<std::int64_t>();
    if (s.n < 1) throw std::invalid_argument("spec: n must be >= 1");
    s.samples = j.value("samples", std::uint64_t{100});
    s.statistic = j.value("statistic", std::string("height"));
    s.source = source_from_name(j.value("source", std::string("cgw")));
    if (j.contains("strategy")) s.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    s.u = j.value("u", 1.0);
    s.seed = j.value("seed", std::uint64_t{1});
    s.workers = j.value("workers", 1U);
    return s;
  }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string spec_hash(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(spec.canonical_json().dump());
  return os.str();
}

struct RunResult {
  std::vector<double> values;           // statistic, by replicate index
  std::vector<double> rescaled_height;  // auxiliary column: h_n or h
  EmpiricalSample sample;
  nlohmann::json metadata;
};

namespace detail {

struct Observation {
  double value;
  double height;
};

inline Observation observe_tree(const OrderedTree& tree, const ExperimentSpec& spec, double scale) {
  const auto z = generation_sizes(tree);
  const double n = static_cast<double>(tree.size());
  const double rescaled_height = static_cast<double>(z.size()) * scale / n;
  const auto& stat = spec.statistic;
  double value;
  if (stat == "height") {
    value = static_cast<double>(z.size() - 1);
  } else if (stat == "width") {
    value = static_cast<double>(*std::max_element(z.begin(), z.end()));
  } else if (stat == "max_h") {
    value = static_cast<double>(*std::max_element(z.begin(), z.end())) / scale;
  } else if (stat == "h") {
    value = rescaled_height;
  } else if (stat == "H_at_u") {
    value = height_profile_at(z, n, scale, spec.u);
  } else {
    throw std::invalid_argument("unknown statistic for cgw source: " + stat);
  }
  return {value, rescaled_height};
}

inline Observation observe_excursion(const StepFunction& y, const ExperimentSpec& spec) {
  const auto& stat = spec.statistic;
  if (stat == "max_y") return {y.max_value(), 0.0};
  const auto profile = sample_limit_profile(y);
  if (stat == "max_h") return {profile.height_profile.max_value(), profile.height};
  if (stat == "h") return {profile.height, profile.height};
  if (stat == "H_at_u") return {profile.height_profile(spec.u), profile.height};
  throw std::invalid_argument("unknown statistic for excursion source: " + stat);
}

}  // namespace detail

inline RunResult run(const ExperimentSpec& spec) {
  RunResult out;
  out.values.assign(spec.samples, 0.0);
  out.rescaled_height.assign(spec.samples, 0.0);

  std::optional<ConditionedSampler> sampler;
  if (spec.source != Source::Bessel) sampler.emplace(spec.law, spec.n, spec.resolved_strategy());
  const double scale = spec.law.scaling_a(static_cast<double>(spec.n));

  for_each_replicate(spec.samples, spec.seed, spec.workers, [&](std::uint64_t r, Rng& rng) {
    detail::Observation obs{};
    switch (spec.source) {
      case Source::Cgw: obs = detail::observe_tree(sampler->sample_tree(rng), spec, scale); break;
      case Source::Lattice: obs = detail::observe_excursion(sample_limit_excursion(*sampler, rng), spec); break;
      case Source::Bessel: obs = detail::observe_excursion(sample_brownian_excursion(spec.n, rng), spec); break;
    }
    out.values[r] = obs.value;
    out.rescaled_height[r] = obs.height;
  });

  out.sample = EmpiricalSample(out.values);
  out.metadata = {{"version", kFormatVersion},
                  {"seed", spec.seed},
                  {"spec_hash", spec_hash(spec)},
                  {"spec", spec.canonical_json()},
                  {"samples", spec.samples}};
  return out;
}

/// One row per replicate, preceded by a versioned comment line.
inline void write_csv(const RunResult& result, std::ostream& os) {
  os << "# " << kFormatVersion << " columns: replicate,value,rescaled_height\n";
  os << "replicate,value,rescaled_height\n";
  os << std::setprecision(17);
  for (std::size_t r = 0; r < result.values.size(); ++r) {
    os << r << ',' << result.values[r] << ',' << result.rescaled_height[r] << '\n';
  }
}

}  // namespace cgw
