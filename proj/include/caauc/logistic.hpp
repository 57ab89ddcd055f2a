#pragma once

// Logistic regression with fixed center-specific intercepts, fitted by IRLS.
// Serves as the GLM comparator and supplies SaAUC starting directions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"
#include "caauc/normal.hpp"

namespace caauc {

struct LogisticConfig {
  int max_iterations = 100;
  double tolerance = 1e-10;   // on |dev - dev_old| / (|dev| + 0.1)
  double score_tolerance = 1e-8;  // norm of the log-likelihood gradient, checked with `tolerance`
  double slope_cap = 30.0;    // max |slope| before declaring separation
  double ridge = 1e-10;       // jitter on the normal equations
  int max_halvings = 30;
};

struct LogisticFit {
  Vector slopes;
  std::vector<double> intercepts;  // one per view, in view order
  bool converged = false;
  bool separation = false;         // slopes hit the cap; they are clipped
  int iterations = 0;
  double deviance = 0.0;
  std::vector<double> deviance_trace;
};

namespace detail {

struct Design {
  Matrix x;     // [center indicators | markers]
  Vector y;
  Eigen::Index m = 0;
  Eigen::Index p = 0;
};

inline Design build_design(std::span<const CenterView> views) {
  Design d;
  d.m = static_cast<Eigen::Index>(views.size());
  d.p = views.front().p();
  Eigen::Index n = 0;
  for (const auto& v : views) {
    if (v.p() != d.p) throw DimensionError("centers disagree on marker count");
    n += v.size();
  }
  d.x = Matrix::Zero(n, d.m + d.p);
  d.y = Vector::Zero(n);
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < d.m; ++c) {
    const auto& v = views[static_cast<std::size_t>(c)];
    for (Eigen::Index i = 0; i < v.n_cases(); ++i, ++r) {
      d.x(r, c) = 1.0;
      d.x.row(r).tail(d.p) = v.cases.row(i);
      d.y(r) = 1.0;
    }
    for (Eigen::Index i = 0; i < v.n_controls(); ++i, ++r) {
      d.x(r, c) = 1.0;
      d.x.row(r).tail(d.p) = v.controls.row(i);
    }
  }
  return d;
}

// log(1 + e^v) without overflow
inline double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

inline double deviance(const Vector& eta, const Vector& y) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    dev += y(i) > 0.5 ? softplus(-eta(i)) : softplus(eta(i));
  return 2.0 * dev;
}

}  // namespace detail

/// Gradient of the log-likelihood at the fitted parameters, intercepts first.
inline Vector logistic_score(std::span<const CenterView> views, const LogisticFit& fit) {
  const auto d = detail::build_design(views);
  Vector beta(d.m + d.p);
  for (Eigen::Index c = 0; c < d.m; ++c) beta(c) = fit.intercepts[static_cast<std::size_t>(c)];
  beta.tail(d.p) = fit.slopes;
  const Vector eta = d.x * beta;
  Vector resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = d.y(i) - expit(eta(i));
  return d.x.transpose() * resid;
}

inline LogisticFit fit_logistic(std::span<const CenterView> views, const LogisticConfig& config = {}) {
  if (views.empty()) throw PreconditionError("logistic fit needs at least one center");
  const auto d = detail::build_design(views);
  const Eigen::Index k = d.m + d.p;

  Eigen::ColPivHouseholderQR<Matrix> qr(d.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < k)
    throw SingularDesignError("design matrix with center intercepts is rank deficient (rank " +
                              std::to_string(qr.rank()) + " of " + std::to_string(k) + ")");

  Vector beta = Vector::Zero(k);
  for (Eigen::Index c = 0; c < d.m; ++c) {
    const auto& v = views[static_cast<std::size_t>(c)];
    beta(c) = logit(static_cast<double>(v.n_cases()) / static_cast<double>(v.size()));
  }

  LogisticFit fit;
  Vector eta = d.x * beta;
  double dev = detail::deviance(eta, d.y);
  fit.deviance_trace.push_back(dev);

  const Eigen::Index n = d.x.rows();
  Vector mu(n), w(n);
  double last_change = HUGE_VAL;
  for (int it = 0; it <= config.max_iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = expit(eta(i));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-300);
    }
    const Vector score = d.x.transpose() * (d.y - mu);
    if (last_change < config.tolerance && score.norm() <= config.score_tolerance) {
      fit.converged = true;
      break;
    }
    if (it == config.max_iterations) break;
    Matrix xtwx = d.x.transpose() * w.asDiagonal() * d.x;
    xtwx.diagonal().array() += config.ridge;
    const Vector delta = xtwx.ldlt().solve(score);

    double step = 1.0;
    Vector candidate = beta + delta;
    Vector eta_candidate = d.x * candidate;
    double dev_candidate = detail::deviance(eta_candidate, d.y);
    for (int h = 0; h < config.max_halvings && !(dev_candidate <= dev); ++h) {
      step *= 0.5;
      candidate = beta + step * delta;
      eta_candidate = d.x * candidate;
      dev_candidate = detail::deviance(eta_candidate, d.y);
    }
    if (!(dev_candidate <= dev)) {  // no descent possible; keep the current iterate
      fit.converged = score.norm() <= config.score_tolerance;
      break;
    }

    last_change = std::abs(dev - dev_candidate) / (std::abs(dev_candidate) + 0.1);
    beta = candidate;
    eta = eta_candidate;
    dev = dev_candidate;
    fit.deviance_trace.push_back(dev);
    fit.iterations = it + 1;

    const double max_slope = beta.tail(d.p).cwiseAbs().maxCoeff();
    if (max_slope > config.slope_cap) {
      fit.separation = true;
      beta.tail(d.p) *= config.slope_cap / max_slope;
      break;
    }
  }

  fit.slopes = beta.tail(d.p);
  fit.intercepts.assign(beta.data(), beta.data() + d.m);
  eta = d.x * beta;
  fit.deviance = detail::deviance(eta, d.y);
  // fitted probabilities numerically 0 or 1 (the glm.fit criterion)
  const double edge = -std::log(10.0 * std::numeric_limits<double>::epsilon());
  if (!fit.separation && (eta.array().abs() > edge).any()) {
    fit.separation = true;
    fit.converged = false;
  }
  if (fit.separation)
    log::warn("logistic fit indicates separation (slopes capped or fitted probabilities 0 or 1)");
  else if (!fit.converged)
    log::warn("logistic fit did not converge in " + std::to_string(config.max_iterations) + " iterations");
  return fit;
}

struct StartDirection {
  Vector theta;
  bool fallback = false;  // slopes were all zero; the equal-weight direction was used
};

/// Normalized slopes; intercepts are dropped since they do not affect any AUC.
inline StartDirection direction_from(const Vector& slopes) {
  const double norm = slopes.norm();
  if (norm > 0.0 && std::isfinite(norm)) return {slopes / norm, false};
  log::warn("all logistic slopes are zero; using the equal-weight direction");
  const auto p = slopes.size();
  return {Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p))), true};
}

inline StartDirection direction_from(const LogisticFit& fit) { return direction_from(fit.slopes); }

}  // namespace caauc
