#pragma once

// Probit-smoothed center AUCs, the smoothed adjusted AUC, the
// variability-penalized objective and its analytic gradient.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"
#include "caauc/normal.hpp"
#include "caauc/roc_metrics.hpp"

namespace caauc {

/// Per-center smoothing scale, in linear-score units.
struct Bandwidths {
  std::vector<double> h;
  double floor = 0.0;

  std::size_t size() const noexcept { return h.size(); }
  double operator[](std::size_t c) const { return h[c]; }
};

constexpr double kBandwidthRelativeFloor = 1e-4;
constexpr double kBandwidthAbsoluteFloor = 1e-8;

namespace detail {

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// h_c = sd(center-c scores under theta_start) * n_c^(-1/3), floored at
/// 1e-4 times the pooled score sd (never below 1e-8).
inline Bandwidths bandwidths(const Vector& theta_start, std::span<const CenterView> views) {
  if (views.empty()) throw PreconditionError("bandwidths need at least one center");
  std::vector<double> pooled;
  std::vector<double> sd;
  std::vector<double> n;
  for (const auto& v : views) {
    auto a = linear_scores(v.cases, theta_start);
    auto b = linear_scores(v.controls, theta_start);
    a.insert(a.end(), b.begin(), b.end());
    sd.push_back(detail::sample_sd(a));
    n.push_back(static_cast<double>(a.size()));
    pooled.insert(pooled.end(), a.begin(), a.end());
  }
  Bandwidths bw;
  bw.floor = std::max(kBandwidthRelativeFloor * detail::sample_sd(pooled), kBandwidthAbsoluteFloor);
  for (std::size_t c = 0; c < views.size(); ++c)
    bw.h.push_back(std::max(sd[c] * std::pow(n[c], -1.0 / 3.0), bw.floor));
  return bw;
}

/// Everything the smoothed objective depends on besides theta. The views are
/// borrowed and must outlive the spec.
struct ObjectiveSpec {
  std::span<const CenterView> views;
  std::vector<double> weights;
  Bandwidths bandwidths;
  double lambda = 0.0;

  ObjectiveSpec() = default;
  ObjectiveSpec(std::span<const CenterView> v, Bandwidths bw, double lam)
      : views(v), weights(center_weights(v)), bandwidths(std::move(bw)), lambda(lam) {
    validate();
  }

  void validate() const {
    if (views.empty()) throw PreconditionError("objective needs at least one center");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw ConfigError("penalty lambda must be a finite value >= 0");
    if (weights.size() != views.size() || bandwidths.size() != views.size())
      throw DimensionError("one weight and one bandwidth are required per center");
    for (double h : bandwidths.h)
      if (!(h > 0.0)) throw PreconditionError("bandwidths must be positive");
  }
};

/// Smoothed AUC of one center; optionally accumulates its gradient into `grad`.
inline double smooth_center_auc(const Vector& theta, const CenterView& view, double h,
                                Vector* grad = nullptr) {
  if (!(h > 0.0)) throw PreconditionError("bandwidth must be positive");
  if (theta.size() != view.p()) throw DimensionError("coefficient length does not match marker count");
  const Vector s_case = view.cases * theta;
  const Vector s_ctrl = view.controls * theta;
  const Eigen::Index na = s_case.size();
  const Eigen::Index nb = s_ctrl.size();
  const double inv_h = 1.0 / h;
  const double inv_pairs = 1.0 / (static_cast<double>(na) * static_cast<double>(nb));

  double total = 0.0;
  if (grad == nullptr) {
    for (Eigen::Index i = 0; i < na; ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < nb; ++j) row += normal_cdf((s_case(i) - s_ctrl(j)) * inv_h);
      total += row;
    }
    return total * inv_pairs;
  }

  // sum_ij phi(z_ij) (x_i - y_j) = X^T rowsum - Y^T colsum
  Vector row_density = Vector::Zero(na);
  Vector col_density = Vector::Zero(nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    double row = 0.0;
    double dens = 0.0;
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double z = (s_case(i) - s_ctrl(j)) * inv_h;
      row += normal_cdf(z);
      const double f = normal_pdf(z);
      dens += f;
      col_density(j) += f;
    }
    total += row;
    row_density(i) = dens;
  }
  grad->resize(theta.size());
  *grad = (view.cases.transpose() * row_density - view.controls.transpose() * col_density) *
          (inv_pairs * inv_h);
  return total * inv_pairs;
}

/// Per-center smoothed AUCs R^c(theta).
inline std::vector<double> smooth_center_aucs(const Vector& theta, const ObjectiveSpec& spec) {
  std::vector<double> r;
  r.reserve(spec.views.size());
  for (std::size_t c = 0; c < spec.views.size(); ++c)
    r.push_back(smooth_center_auc(theta, spec.views[c], spec.bandwidths[c]));
  return r;
}

/// aR_n(theta) = sum_c w_c R^c(theta).
inline double smooth_aauc(const Vector& theta, const ObjectiveSpec& spec) {
  return weighted_mean(smooth_center_aucs(theta, spec), spec.weights);
}

/// aR_n(theta) - lambda * sum_c w_c (R^c - aR_n)^2, with its gradient when `grad` is set.
inline double penalized_objective(const Vector& theta, const ObjectiveSpec& spec, Vector* grad = nullptr) {
  const std::size_t m = spec.views.size();
  std::vector<double> r(m);
  std::vector<Vector> dr(grad ? m : 0);
  for (std::size_t c = 0; c < m; ++c)
    r[c] = smooth_center_auc(theta, spec.views[c], spec.bandwidths[c], grad ? &dr[c] : nullptr);
  const double ar = weighted_mean(r, spec.weights);

  Vector dar;
  if (grad) {
    dar = Vector::Zero(theta.size());
    for (std::size_t c = 0; c < m; ++c) dar += spec.weights[c] * dr[c];
    *grad = dar;
  }
  if (spec.lambda == 0.0) return ar;

  const double penalty = variability(r, spec.weights, ar);
  if (grad) {
    Vector dp = Vector::Zero(theta.size());
    for (std::size_t c = 0; c < m; ++c) dp += spec.weights[c] * (r[c] - ar) * (dr[c] - dar);
    *grad -= 2.0 * spec.lambda * dp;
  }
  return ar - spec.lambda * penalty;
}

inline Vector gradient(const Vector& theta, const ObjectiveSpec& spec) {
  Vector g;
  penalized_objective(theta, spec, &g);
  return g;
}

}  // namespace caauc
