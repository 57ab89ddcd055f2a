#pragma once

// End-to-end SaAUC fit: starting direction, frozen bandwidths, penalized
// ascent on the sphere, and the apparent performance report.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"
#include "caauc/logistic.hpp"
#include "caauc/roc_metrics.hpp"
#include "caauc/smooth_objective.hpp"
#include "caauc/sphere_optimizer.hpp"

namespace caauc {

enum class StartPolicy {
  Logistic,              // normalized slopes of the fixed-intercept logistic fit
  User,                  // FitConfig::user_start, in the units of the input data
  LogisticWithRestarts,  // logistic start plus optimizer.restarts random directions
};

struct FitConfig {
  double lambda = 0.0;
  bool standardize = false;
  OptimizerConfig optimizer;
  LogisticConfig logistic;
  StartPolicy start = StartPolicy::Logistic;
  std::optional<Vector> user_start;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a finite value >= 0");
    optimizer.validate();
    if (start == StartPolicy::User && !user_start) throw ConfigError("user start policy needs a start vector");
  }
};

struct FitReport {
  Vector theta;                    // unit norm, acting on the input markers
  Vector theta_start;              // unit norm, input units
  FitResult optimizer;             // in working units (standardized when requested)
  PerformanceReport apparent;      // empirical, on the training data
  Bandwidths bandwidths;
  std::vector<double> smoothed_center_aucs;  // R^c at the optimum
  double lambda = 0.0;
  std::vector<std::string> dropped_centers;
  std::optional<ScalingRecord> scaling;
  std::optional<LogisticFit> logistic;
  bool start_fallback = false;

  double start_objective() const { return optimizer.start_objective(); }
  double objective() const { return optimizer.objective; }
};

/// Scores `views` with theta (renormalized with a warning when not unit length).
inline PerformanceReport evaluate(const Vector& theta, std::span<const CenterView> views,
                                  std::optional<double> reference = std::nullopt) {
  if (views.empty()) throw PreconditionError("evaluation needs at least one usable center");
  if (theta.size() != views.front().p())
    throw DimensionError("coefficient length " + std::to_string(theta.size()) +
                         " does not match marker count " + std::to_string(views.front().p()));
  const double norm = theta.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw PreconditionError("coefficients must be finite and nonzero");
  if (std::abs(norm - 1.0) > 1e-12) {
    log::warn("coefficients were not unit norm and have been renormalized");
    return adjusted_auc(theta / norm, views, reference);
  }
  return adjusted_auc(theta, views, reference);
}

inline PerformanceReport evaluate(const Vector& theta, const Dataset& data,
                                  std::optional<double> reference = std::nullopt) {
  if (theta.size() != data.p())
    throw DimensionError("coefficient length " + std::to_string(theta.size()) +
                         " does not match marker count " + std::to_string(data.p()));
  const auto split = split_centers(data);
  return evaluate(theta, split.views, reference);
}

/// Fits a unit-norm combination maximizing the (penalized) smoothed adjusted AUC.
inline FitReport fit(const Dataset& data, const FitConfig& config = {}) {
  config.validate();
  FitReport report;
  report.lambda = config.lambda;

  std::optional<Standardized> standardized;
  if (config.standardize) standardized = standardize(data);
  const Dataset& working = standardized ? standardized->data : data;

  const auto split = split_centers(working);
  report.dropped_centers = split.dropped;
  const std::span<const CenterView> views = split.views;
  if (config.lambda > 0.0 && views.size() < 2)
    throw ConfigError("a penalized fit (lambda > 0) needs at least 2 usable centers, found " +
                      std::to_string(views.size()));

  Vector start;
  if (config.start == StartPolicy::User) {
    if (config.user_start->size() != data.p())
      throw DimensionError("start vector length does not match marker count");
    start = *config.user_start;
    if (standardized) start = start.cwiseProduct(standardized->scaling.scale);
    if (!(start.norm() > 0.0)) throw PreconditionError("start vector must be nonzero");
    start /= start.norm();
  } else {
    report.logistic = fit_logistic(views, config.logistic);
    auto dir = direction_from(*report.logistic);
    start = dir.theta;
    report.start_fallback = dir.fallback;
  }

  report.bandwidths = bandwidths(start, views);
  const ObjectiveSpec spec(views, report.bandwidths, config.lambda);
  const ObjectiveFn objective = [&spec](const Vector& t) { return penalized_objective(t, spec); };
  const GradientFn grad = [&spec](const Vector& t) { return gradient(t, spec); };

  if (config.start == StartPolicy::LogisticWithRestarts)
    report.optimizer = multi_start(objective, grad, {start}, config.optimizer);
  else
    report.optimizer = maximize_on_sphere(objective, grad, start, config.optimizer);
  report.smoothed_center_aucs = smooth_center_aucs(report.optimizer.theta, spec);

  auto to_input_units = [&](const Vector& t) -> Vector {
    if (!standardized) return t;
    Vector raw = standardized->scaling.to_original_units(t);
    return raw / raw.norm();
  };
  report.theta = to_input_units(report.optimizer.theta);
  report.theta_start = to_input_units(start);
  if (standardized) report.scaling = standardized->scaling;

  if (standardized)
    report.apparent = adjusted_auc(report.theta, split_centers(data, false).views);
  else
    report.apparent = adjusted_auc(report.theta, views);
  return report;
}

}  // namespace caauc
