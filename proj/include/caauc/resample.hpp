#pragma once

// Bootstrap estimate of the optimism in the apparent adjusted AUC.

#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"
#include "caauc/parallel.hpp"
#include "caauc/pipeline.hpp"

namespace caauc {

enum class BootstrapScheme {
  Stratified,  // within each center, cases and controls resampled separately
  ByCenter,    // whole centers resampled with replacement
};

struct BootstrapConfig {
  int replicates = 200;
  BootstrapScheme scheme = BootstrapScheme::Stratified;
  std::uint64_t seed = 0;
  FitConfig fit;
  int max_redraws = 10;
  unsigned threads = 1;

  void validate() const {
    if (replicates < 1) throw ConfigError("bootstrap replicate count B must be >= 1");
    if (max_redraws < 0) throw ConfigError("redraw limit must be >= 0");
    fit.validate();
  }
};

struct BootstrapResult {
  double apparent = 0.0;
  double corrected = 0.0;
  double mean_optimism = 0.0;
  std::vector<double> optimism;  // one per successful replicate, replicate order
  int skipped = 0;               // replicates that failed after every redraw
  int redraws = 0;               // failed draws that were replaced
};

/// corrected = apparent - mean(optimism).
inline double corrected_estimate(double apparent, const std::vector<double>& optimism) {
  if (optimism.empty()) throw PreconditionError("no optimism draws");
  return apparent - std::accumulate(optimism.begin(), optimism.end(), 0.0) / static_cast<double>(optimism.size());
}

/// One bootstrap dataset. Only usable (non-concordant) centers are resampled.
inline Dataset bootstrap_sample(const Dataset& data, BootstrapScheme scheme, std::mt19937_64& rng) {
  const auto split = split_centers(data, false);
  std::vector<std::size_t> usable;
  for (const auto& v : split.views) usable.push_back(data.index_of(v.center));

  std::vector<std::string> centers;
  std::vector<int> outcomes;
  std::vector<Eigen::Index> rows;
  if (scheme == BootstrapScheme::Stratified) {
    for (auto c : usable) {
      std::vector<std::size_t> cases, controls;
      for (auto r : data.rows_of(c)) (data.outcomes()[r] ? cases : controls).push_back(r);
      for (const auto* group : {&cases, &controls}) {
        std::uniform_int_distribution<std::size_t> pick(0, group->size() - 1);
        for (std::size_t k = 0; k < group->size(); ++k) {
          const auto r = (*group)[pick(rng)];
          rows.push_back(static_cast<Eigen::Index>(r));
          centers.push_back(data.centers()[c]);
          outcomes.push_back(data.outcomes()[r]);
        }
      }
    }
  } else {
    // A center drawn twice becomes two distinct centers.
    std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
    for (std::size_t k = 0; k < usable.size(); ++k) {
      const auto c = usable[pick(rng)];
      const auto label = data.centers()[c] + "#" + std::to_string(k + 1);
      for (auto r : data.rows_of(c)) {
        rows.push_back(static_cast<Eigen::Index>(r));
        centers.push_back(label);
        outcomes.push_back(data.outcomes()[r]);
      }
    }
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), data.p());
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = data.markers().row(rows[i]);
  return Dataset(std::move(centers), std::move(outcomes), std::move(x), data.marker_names());
}

inline BootstrapResult bootstrap_corrected_aauc(const Dataset& data, const BootstrapConfig& config = {}) {
  config.validate();
  BootstrapResult out;
  const auto original = fit(data, config.fit);
  out.apparent = original.apparent.aauc;
  const auto original_views = split_centers(data, false).views;

  struct Slot {
    bool ok = false;
    double optimism = 0.0;
    int failures = 0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(config.replicates));
  parallel_for(slots.size(), config.threads, [&](std::size_t b) {
    Slot& slot = slots[b];
    for (int attempt = 0; attempt <= config.max_redraws; ++attempt) {
      auto rng = derive_stream(config.seed, {b, static_cast<std::uint64_t>(attempt)});
      try {
        const auto boot = bootstrap_sample(data, config.scheme, rng);
        FitConfig fc = config.fit;
        fc.optimizer.seed = rng();
        const auto rep = fit(boot, fc);
        const double on_original = adjusted_auc(rep.theta, original_views).aauc;
        slot.optimism = rep.apparent.aauc - on_original;
        slot.ok = true;
        return;
      } catch (const Error&) {
        ++slot.failures;
      }
    }
  });

  for (const auto& s : slots) {
    if (s.ok) {
      out.optimism.push_back(s.optimism);
      out.redraws += s.failures;
    } else {
      ++out.skipped;
      out.redraws += s.failures - 1;
    }
  }
  if (out.optimism.empty()) throw BootstrapFailure("every bootstrap replicate failed to fit");
  if (out.skipped > 0) log::warn(std::to_string(out.skipped) + " bootstrap replicates were skipped");
  out.corrected = corrected_estimate(out.apparent, out.optimism);
  out.mean_optimism = std::accumulate(out.optimism.begin(), out.optimism.end(), 0.0) /
                      static_cast<double>(out.optimism.size());
  return out;
}

}  // namespace caauc
