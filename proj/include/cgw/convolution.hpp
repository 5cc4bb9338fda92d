#pragma once

// Truncated discrete convolutions of probability vectors on {0, 1, ...}.
//
// All results are exact on the retained prefix: for nonnegative integer
// variables, P(X_1 + ... + X_n = s) only involves values <= s, so cutting
// every vector at length len loses nothing below len.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cgw {

namespace detail {
// Values below this are flushed to zero so that long convolution chains
// never wander into subnormal arithmetic.
inline constexpr double kFlushBelow = 1e-290;
}  // namespace detail

inline std::vector<double> convolve_truncated(std::span<const double> a,
                                              std::span<const double> b,
                                              std::size_t len) {
  std::vector<double> out(len, 0.0);
  const std::size_t na = std::min(a.size(), len);
  for (std::size_t i = 0; i < na; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    const std::size_t nb = std::min(b.size(), len - i);
    double* dst = out.data() + i;
    for (std::size_t j = 0; j < nb; ++j) dst[j] += ai * b[j];
  }
  for (double& v : out) {
    if (v < detail::kFlushBelow) v = 0.0;
  }
  return out;
}

/// Distribution of X_1 + ... + X_n for i.i.d. X_i ~ base, on {0..len-1}.
inline std::vector<double> convolution_power(std::span<const double> base,
                                             std::uint64_t n, std::size_t len) {
  std::vector<double> result(len, 0.0);
  if (len == 0) return result;
  result[0] = 1.0;
  std::vector<double> power(base.begin(), base.begin() + std::min(base.size(), len));
  while (n > 0) {
    if (n & 1U) result = convolve_truncated(result, power, len);
    n >>= 1U;
    if (n > 0) power = convolve_truncated(power, power, len);
  }
  return result;
}

}  // namespace cgw
