#pragma once

#include <cmath>
#include <numbers>

namespace caauc {

/// Standard normal distribution function.
inline double normal_cdf(double x) {
  // erfc keeps relative accuracy in the lower tail; mirror the upper tail so
  // the complement is formed from a small, accurately computed number.
  if (x > 8.0) return 1.0 - 0.5 * std::erfc(x * std::numbers::sqrt2 * 0.5);
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

/// Standard normal density.
inline double normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Logistic function computed without overflow for any finite argument.
inline double expit(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace caauc
