#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace cgw {

/// Nonnegative right-continuous step function on [0, domain_end).
///
/// Piece j covers [breakpoints[j], breakpoints[j+1]) with the last piece
/// ending at domain_end, which may be +infinity. For a bounded domain the
/// value at domain_end itself is terminal_value.
class StepFunction {
 public:
  StepFunction(std::vector<double> breakpoints, std::vector<double> values, double domain_end,
               double terminal_value = 0.0)
      : breakpoints_(std::move(breakpoints)),
        values_(std::move(values)),
        domain_end_(domain_end),
        terminal_value_(terminal_value) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
      throw std::invalid_argument("StepFunction: need one value per breakpoint");
    }
    if (breakpoints_.front() != 0.0) throw std::invalid_argument("StepFunction: first breakpoint must be 0");
    for (std::size_t j = 1; j < breakpoints_.size(); ++j) {
      if (!(breakpoints_[j] > breakpoints_[j - 1])) {
        throw std::invalid_argument("StepFunction: breakpoints must increase strictly");
      }
    }
    if (!(domain_end_ > breakpoints_.back())) throw std::invalid_argument("StepFunction: domain_end too small");
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("StepFunction: values must be finite, >= 0");
    }
    if (!(terminal_value_ >= 0.0)) throw std::invalid_argument("StepFunction: negative terminal value");
  }

  static StepFunction constant(double value, double domain_end = 1.0) {
    return StepFunction({0.0}, {value}, domain_end, value);
  }

  std::size_t piece_count() const { return values_.size(); }
  double piece_begin(std::size_t j) const { return breakpoints_[j]; }
  double piece_end(std::size_t j) const {
    return j + 1 < breakpoints_.size() ? breakpoints_[j + 1] : domain_end_;
  }
  double piece_value(std::size_t j) const { return values_[j]; }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double domain_end() const { return domain_end_; }
  double terminal_value() const { return terminal_value_; }

  double operator()(double x) const {
    if (x < 0.0) throw std::domain_error("StepFunction: negative argument");
    if (x >= domain_end_) return terminal_value_;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  double integral() const {
    double acc = 0.0;
    for (std::size_t j = 0; j < piece_count(); ++j) {
      if (values_[j] == 0.0) continue;
      acc += (piece_end(j) - piece_begin(j)) * values_[j];
    }
    return acc;
  }

  double max_value() const {
    double m = std::isinf(domain_end_) ? 0.0 : terminal_value_;
    for (double v : values_) m = std::max(m, v);
    return m;
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double domain_end_;
  double terminal_value_;
};

/// Continuous piecewise-linear function through (nodes[j], values[j]),
/// held constant after the last node.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> nodes, std::vector<double> values)
      : nodes_(std::move(nodes)), values_(std::move(values)) {
    if (nodes_.empty() || nodes_.size() != values_.size()) {
      throw std::invalid_argument("PiecewiseLinear: need one value per node");
    }
    for (std::size_t j = 1; j < nodes_.size(); ++j) {
      if (!(nodes_[j] > nodes_[j - 1])) throw std::invalid_argument("PiecewiseLinear: nodes must increase");
    }
  }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double x) const {
    if (x <= nodes_.front()) return values_.front();
    if (x >= nodes_.back()) return values_.back();
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const auto j = static_cast<std::size_t>(it - nodes_.begin());
    const double w = (x - nodes_[j - 1]) / (nodes_[j] - nodes_[j - 1]);
    return values_[j - 1] + w * (values_[j] - values_[j - 1]);
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

namespace detail {
inline nlohmann::json number_or_inf(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}
inline double parse_number_or_inf(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("expected a number or \"inf\"");
  }
  return j.get<double>();
}
}  // namespace detail

inline nlohmann::json to_json(const StepFunction& f) {
  return {{"breakpoints", f.breakpoints()},
          {"values", f.values()},
          {"domain_end", detail::number_or_inf(f.domain_end())},
          {"terminal_value", f.terminal_value()}};
}

inline StepFunction step_function_from_json(const nlohmann::json& j) {
  const double end = j.contains("domain_end") ? detail::parse_number_or_inf(j.at("domain_end")) : 1.0;
  const double terminal = j.contains("terminal_value") ? j.at("terminal_value").get<double>() : 0.0;
  return StepFunction(j.at("breakpoints").get<std::vector<double>>(), j.at("values").get<std::vector<double>>(),
                      end, terminal);
}

inline nlohmann::json to_json(const PiecewiseLinear& g) {
  return {{"nodes", g.nodes()}, {"values", g.values()}};
}

}  // namespace cgw
