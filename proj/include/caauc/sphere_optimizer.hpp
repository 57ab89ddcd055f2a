#pragma once

// Projected gradient ascent on the unit sphere with Armijo backtracking and
// renormalization as the retraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"

namespace caauc {

struct OptimizerConfig {
  int max_iterations = 500;
  double objective_tolerance = 1e-8;  // relative change between accepted iterates
  double gradient_tolerance = 1e-6;   // norm of the tangent gradient
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_increase = 1e-4;
  int max_backtracks = 60;
  int restarts = 0;  // extra random unit-direction starts in multi_start
  std::uint64_t seed = 0;
  // Flip the result so its largest-magnitude coordinate is positive. Only
  // meaningful for sign-symmetric objectives; AUC objectives are not.
  bool canonicalize_sign = false;

  void validate() const {
    if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    if (!(objective_tolerance > 0.0)) throw ConfigError("objective tolerance must be > 0");
    if (!(gradient_tolerance > 0.0)) throw ConfigError("gradient tolerance must be > 0");
    if (!(initial_step > 0.0)) throw ConfigError("initial step must be > 0");
    if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("line-search shrink factor must lie in (0,1)");
    if (!(sufficient_increase > 0.0 && sufficient_increase < 1.0))
      throw ConfigError("sufficient-increase constant must lie in (0,1)");
    if (max_backtracks < 1) throw ConfigError("max_backtracks must be >= 1");
    if (restarts < 0) throw ConfigError("restart count must be >= 0");
  }
};

enum class StopReason {
  GradientTolerance,
  ObjectiveTolerance,
  LineSearchExhausted,  // no step down to initial_step * shrink^max_backtracks improves
  MaxIterations,
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::ObjectiveTolerance: return "objective_tolerance";
    case StopReason::LineSearchExhausted: return "line_search_exhausted";
    case StopReason::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

struct FitResult {
  Vector theta;                // unit norm
  double objective = 0.0;
  std::vector<double> trace;   // trace[0] is the objective at the (normalized) start
  int iterations = 0;
  bool converged = false;
  StopReason stop = StopReason::MaxIterations;
  std::size_t start_index = 0;  // which start produced this result in multi_start
  Vector start;                 // normalized starting point

  double start_objective() const { return trace.empty() ? objective : trace.front(); }
};

using ObjectiveFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;

inline Vector canonicalize_sign(Vector theta) {
  Eigen::Index k = 0;
  theta.cwiseAbs().maxCoeff(&k);
  if (theta(k) < 0.0) theta = -theta;
  return theta;
}

namespace detail {

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline double checked_value(const ObjectiveFn& f, const Vector& theta) {
  const double v = f(theta);
  if (!std::isfinite(v)) throw NumericalError("objective is not finite", to_std(theta));
  return v;
}

inline Vector checked_gradient(const GradientFn& g, const Vector& theta) {
  Vector v = g(theta);
  if (v.size() != theta.size()) throw DimensionError("gradient length does not match theta");
  if (!v.allFinite()) throw NumericalError("gradient is not finite", to_std(theta));
  return v;
}

}  // namespace detail

inline FitResult maximize_on_sphere(const ObjectiveFn& objective, const GradientFn& gradient,
                                    const Vector& theta0, const OptimizerConfig& config = {}) {
  config.validate();
  const double norm0 = theta0.norm();
  if (!(norm0 > 0.0) || !std::isfinite(norm0))
    throw PreconditionError("starting direction must be a finite nonzero vector");

  FitResult out;
  Vector theta = theta0 / norm0;
  out.start = theta;
  double f = detail::checked_value(objective, theta);
  out.trace.push_back(f);

  out.stop = StopReason::MaxIterations;
  while (true) {
    const Vector g = detail::checked_gradient(gradient, theta);
    const Vector tangent = g - g.dot(theta) * theta;
    const double tangent_sq = tangent.squaredNorm();
    if (std::sqrt(tangent_sq) < config.gradient_tolerance) {
      out.stop = StopReason::GradientTolerance;
      break;
    }
    if (out.iterations >= config.max_iterations) {
      out.stop = StopReason::MaxIterations;
      break;
    }

    double step = config.initial_step;
    bool accepted = false;
    Vector candidate;
    double f_candidate = f;
    for (int k = 0; k < config.max_backtracks; ++k) {
      candidate = theta + step * tangent;
      candidate /= candidate.norm();
      f_candidate = detail::checked_value(objective, candidate);
      if (f_candidate >= f + config.sufficient_increase * step * tangent_sq && f_candidate > f) {
        accepted = true;
        break;
      }
      step *= config.shrink;
    }
    if (!accepted) {
      out.stop = StopReason::LineSearchExhausted;
      break;
    }

    const double change = f_candidate - f;
    theta = candidate;
    f = f_candidate;
    out.trace.push_back(f);
    ++out.iterations;
    if (change <= config.objective_tolerance * std::max(std::abs(f), 1e-300)) {
      out.stop = StopReason::ObjectiveTolerance;
      break;
    }
  }

  // Exhausting the line search means no representable ascent step remains.
  out.converged = out.stop != StopReason::MaxIterations;
  out.theta = config.canonicalize_sign ? canonicalize_sign(theta) : theta;
  out.objective = f;
  return out;
}

/// Unit directions drawn from the seeded generator, one per extra restart.
inline std::vector<Vector> random_unit_directions(Eigen::Index p, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vector> out;
  for (int r = 0; r < count; ++r) {
    Vector v(p);
    do {
      for (Eigen::Index k = 0; k < p; ++k) v(k) = normal(rng);
    } while (v.norm() == 0.0);
    out.push_back(v / v.norm());
  }
  return out;
}

/// Runs maximize_on_sphere from every start plus `config.restarts` random
/// directions; the best final objective wins, ties broken lexicographically on theta.
inline FitResult multi_start(const ObjectiveFn& objective, const GradientFn& gradient,
                             const std::vector<Vector>& starts, const OptimizerConfig& config = {}) {
  config.validate();
  if (starts.empty()) throw PreconditionError("multi_start needs at least one start");
  std::vector<Vector> all = starts;
  for (auto& v : random_unit_directions(starts.front().size(), config.restarts, config.seed))
    all.push_back(std::move(v));

  bool have = false;
  FitResult best;
  std::exception_ptr last_error;
  for (std::size_t s = 0; s < all.size(); ++s) {
    FitResult r;
    try {
      r = maximize_on_sphere(objective, gradient, all[s], config);
    } catch (const Error&) {
      last_error = std::current_exception();
      continue;
    }
    r.start_index = s;
    auto better = [&] {
      if (!have || r.objective > best.objective) return true;
      if (r.objective < best.objective) return false;
      return std::lexicographical_compare(r.theta.begin(), r.theta.end(), best.theta.begin(), best.theta.end());
    };
    if (better()) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) std::rethrow_exception(last_error);
  return best;
}

}  // namespace caauc
