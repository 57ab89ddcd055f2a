#pragma once

// Text serialization shared by the CLI: comment headers, full-precision
// numbers, performance and fit reports.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "caauc/pipeline.hpp"
#include "caauc/resample.hpp"
#include "caauc/roc_metrics.hpp"
#include "caauc/simgen.hpp"

namespace caauc {

inline constexpr const char* kVersion = "0.1.0";

/// 17 significant digits, enough to round-trip any double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Comment block naming the tool version, subcommand and every resolved setting.
inline void write_comment_header(std::ostream& out, const std::string& command, const KeyValues& config) {
  out << "# caauc " << kVersion << '\n';
  out << "# command: " << command << '\n';
  for (const auto& [k, v] : config) out << "# " << k << ": " << v << '\n';
}

inline void write_performance(std::ostream& out, const PerformanceReport& r) {
  out << "[summary]\n";
  out << "aauc," << format_number(r.aauc) << '\n';
  out << "variability_about_aauc," << format_number(r.variability_internal) << '\n';
  out << "sd_about_aauc," << format_number(r.sd_internal()) << '\n';
  if (r.reference) {
    out << "reference," << format_number(*r.reference) << '\n';
    out << "variability_about_reference," << format_number(*r.variability_reference) << '\n';
    out << "sd_about_reference," << format_number(*r.sd_reference()) << '\n';
  }
  out << "min_center_auc," << format_number(r.min_auc()) << '\n';
  out << "max_center_auc," << format_number(r.max_auc()) << '\n';
  out << "[centers]\n";
  out << "center,n_cases,n_controls,weight,auc\n";
  for (const auto& c : r.centers)
    out << c.center << ',' << c.n_cases << ',' << c.n_controls << ',' << format_number(c.weight) << ','
        << format_number(c.auc) << '\n';
}

inline void write_fit_report(std::ostream& out, const FitReport& fit, const std::vector<std::string>& marker_names) {
  out << "[fit]\n";
  out << "lambda," << format_number(fit.lambda) << '\n';
  out << "objective_start," << format_number(fit.start_objective()) << '\n';
  out << "objective," << format_number(fit.objective()) << '\n';
  out << "iterations," << fit.optimizer.iterations << '\n';
  out << "converged," << (fit.optimizer.converged ? 1 : 0) << '\n';
  out << "stop_reason," << to_string(fit.optimizer.stop) << '\n';
  out << "standardized," << (fit.scaling ? 1 : 0) << '\n';
  if (fit.logistic) {
    out << "logistic_converged," << (fit.logistic->converged ? 1 : 0) << '\n';
    out << "logistic_separation," << (fit.logistic->separation ? 1 : 0) << '\n';
  }
  out << "start_fallback," << (fit.start_fallback ? 1 : 0) << '\n';
  out << "dropped_centers,";
  for (std::size_t i = 0; i < fit.dropped_centers.size(); ++i) out << (i ? ";" : "") << fit.dropped_centers[i];
  out << '\n';
  out << "[coefficients]\n";
  out << "marker,theta,theta_start\n";
  for (Eigen::Index k = 0; k < fit.theta.size(); ++k)
    out << marker_names[static_cast<std::size_t>(k)] << ',' << format_number(fit.theta(k)) << ','
        << format_number(fit.theta_start(k)) << '\n';
  out << "[bandwidths]\n";
  out << "center,bandwidth,smoothed_auc\n";
  for (std::size_t c = 0; c < fit.bandwidths.size(); ++c)
    out << fit.apparent.centers[c].center << ',' << format_number(fit.bandwidths[c]) << ','
        << format_number(fit.smoothed_center_aucs[c]) << '\n';
  write_performance(out, fit.apparent);
}

/// Method rows with mean and sd of test aAUC and of the min/max center AUC.
inline void write_study_summary(std::ostream& out, const StudySummary& s) {
  out << "method,aauc_mean,aauc_sd,min_auc_mean,min_auc_sd,max_auc_mean,max_auc_sd,completed,replications\n";
  for (const auto& m : s.methods)
    out << to_string(m.method) << ',' << format_number(m.aauc.mean) << ',' << format_number(m.aauc.sd) << ','
        << format_number(m.min_auc.mean) << ',' << format_number(m.min_auc.sd) << ','
        << format_number(m.max_auc.mean) << ',' << format_number(m.max_auc.sd) << ',' << m.completed << ','
        << s.replications << '\n';
}

inline void write_bootstrap(std::ostream& out, const BootstrapResult& r) {
  out << "apparent," << format_number(r.apparent) << '\n';
  out << "corrected," << format_number(r.corrected) << '\n';
  out << "mean_optimism," << format_number(r.mean_optimism) << '\n';
  out << "replicates_used," << r.optimism.size() << '\n';
  out << "skipped," << r.skipped << '\n';
  out << "redraws," << r.redraws << '\n';
}

}  // namespace caauc
