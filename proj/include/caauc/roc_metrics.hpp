#pragma once

// Exact empirical AUC, case-count center weights, adjusted AUC and
// cross-center variability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"

namespace caauc {

enum class TiePolicy {
  Strict,  // tied case-control pairs count 0
  Half,    // tied pairs count 1/2 (Mann-Whitney convention)
};

namespace detail {

inline void check_scores(std::span<const double> cases, std::span<const double> controls) {
  if (cases.empty() || controls.empty())
    throw PreconditionError("empirical AUC needs at least one case and one control");
  for (double v : cases)
    if (!std::isfinite(v)) throw PreconditionError("non-finite case score");
  for (double v : controls)
    if (!std::isfinite(v)) throw PreconditionError("non-finite control score");
}

}  // namespace detail

struct PairCounts {
  std::uint64_t greater = 0;  // case score > control score
  std::uint64_t tied = 0;
};

/// Counts concordant and tied case-control pairs in O(n log n): sort the pooled
/// scores once, walk tie groups, and credit each group's cases with the controls
/// strictly below it. Integer counts keep the result exact.
inline PairCounts count_pairs(std::span<const double> cases, std::span<const double> controls) {
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(cases.size() + controls.size());
  for (double v : cases) pooled.emplace_back(v, true);
  for (double v : controls) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  PairCounts out;
  std::uint64_t controls_below = 0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    std::uint64_t g_cases = 0, g_controls = 0;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) {
      (pooled[j].second ? g_cases : g_controls) += 1;
      ++j;
    }
    out.greater += g_cases * controls_below;
    out.tied += g_cases * g_controls;
    controls_below += g_controls;
    i = j;
  }
  return out;
}

/// Exact empirical AUC of case scores against control scores.
inline double empirical_auc(std::span<const double> cases, std::span<const double> controls,
                            TiePolicy ties = TiePolicy::Strict) {
  detail::check_scores(cases, controls);
  const auto counts = count_pairs(cases, controls);
  const double pairs = static_cast<double>(cases.size()) * static_cast<double>(controls.size());
  if (ties == TiePolicy::Half)
    return (2.0 * static_cast<double>(counts.greater) + static_cast<double>(counts.tied)) / (2.0 * pairs);
  return static_cast<double>(counts.greater) / pairs;
}

/// Scores every row of `rows` by theta.
inline std::vector<double> linear_scores(const Matrix& rows, const Vector& theta) {
  if (rows.cols() != theta.size())
    throw DimensionError("coefficient length " + std::to_string(theta.size()) +
                         " does not match marker count " + std::to_string(rows.cols()));
  Vector s = rows * theta;
  return {s.data(), s.data() + s.size()};
}

inline double center_auc(const Vector& theta, const CenterView& view, TiePolicy ties = TiePolicy::Strict) {
  const auto a = linear_scores(view.cases, theta);
  const auto b = linear_scores(view.controls, theta);
  return empirical_auc(a, b, ties);
}

/// w_c = n_D^c / sum of case counts.
inline std::vector<double> center_weights(std::span<const CenterView> views) {
  if (views.empty()) throw PreconditionError("center weights need at least one center");
  double total = 0.0;
  for (const auto& v : views) total += static_cast<double>(v.n_cases());
  std::vector<double> w;
  w.reserve(views.size());
  for (const auto& v : views) w.push_back(static_cast<double>(v.n_cases()) / total);
  return w;
}

inline double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw DimensionError("values and weights differ in length");
  double s = 0.0;
  for (std::size_t c = 0; c < values.size(); ++c) s += weights[c] * values[c];
  return s;
}

/// Weighted squared deviation of center AUCs about `reference` (variance scale).
inline double variability(std::span<const double> center_aucs, std::span<const double> weights, double reference) {
  if (center_aucs.size() != weights.size())
    throw DimensionError("center AUC and weight lists differ in length");
  double s = 0.0;
  for (std::size_t c = 0; c < center_aucs.size(); ++c) {
    const double d = center_aucs[c] - reference;
    s += weights[c] * d * d;
  }
  return s;
}

struct CenterPerformance {
  std::string center;
  Eigen::Index n_cases = 0;
  Eigen::Index n_controls = 0;
  double weight = 0.0;
  double auc = 0.0;
};

struct PerformanceReport {
  std::vector<CenterPerformance> centers;
  double aauc = 0.0;
  double variability_internal = 0.0;           // about aauc
  std::optional<double> reference;             // external reference, e.g. the training aAUC
  std::optional<double> variability_reference;  // about *reference

  std::vector<double> aucs() const {
    std::vector<double> out;
    for (const auto& c : centers) out.push_back(c.auc);
    return out;
  }
  std::vector<double> weights() const {
    std::vector<double> out;
    for (const auto& c : centers) out.push_back(c.weight);
    return out;
  }
  double sd_internal() const { return std::sqrt(variability_internal); }
  std::optional<double> sd_reference() const {
    if (!variability_reference) return std::nullopt;
    return std::sqrt(*variability_reference);
  }
  double min_auc() const {
    double m = 1.0;
    for (const auto& c : centers) m = std::min(m, c.auc);
    return m;
  }
  double max_auc() const {
    double m = 0.0;
    for (const auto& c : centers) m = std::max(m, c.auc);
    return m;
  }
};

inline PerformanceReport adjusted_auc(const Vector& theta, std::span<const CenterView> views,
                                      std::optional<double> reference = std::nullopt) {
  if (views.empty()) throw PreconditionError("adjusted AUC needs at least one center");
  if (theta.size() != views.front().p())
    throw DimensionError("coefficient length " + std::to_string(theta.size()) +
                         " does not match marker count " + std::to_string(views.front().p()));
  const auto w = center_weights(views);
  PerformanceReport r;
  std::vector<double> aucs;
  for (std::size_t c = 0; c < views.size(); ++c) {
    const double auc = center_auc(theta, views[c]);
    aucs.push_back(auc);
    r.centers.push_back({views[c].center, views[c].n_cases(), views[c].n_controls(), w[c], auc});
  }
  r.aauc = weighted_mean(aucs, w);
  r.variability_internal = variability(aucs, w, r.aauc);
  if (reference) {
    r.reference = reference;
    r.variability_reference = variability(aucs, w, *reference);
  }
  return r;
}

}  // namespace caauc
