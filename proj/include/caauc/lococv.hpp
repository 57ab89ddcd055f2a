#pragma once

// Leave-one-center-out cross-validation over a penalty grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"
#include "caauc/io.hpp"
#include "caauc/parallel.hpp"
#include "caauc/pipeline.hpp"
#include "caauc/roc_metrics.hpp"

namespace caauc {

/// `size` values equally spaced on the log scale between lo and hi, endpoints exact.
inline std::vector<double> log_grid(int size, double lo, double hi) {
  if (size < 1) throw ConfigError("grid size must be >= 1");
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw ConfigError("log-spaced grid needs 0 < min <= max");
  if (size > 1 && !(hi > lo)) throw ConfigError("grid with more than one value needs min < max");
  std::vector<double> g(static_cast<std::size_t>(size));
  const double a = std::log(lo), b = std::log(hi);
  for (int k = 0; k < size; ++k)
    g[static_cast<std::size_t>(k)] = std::exp(a + (b - a) * k / std::max(size - 1, 1));
  g.front() = lo;
  if (size > 1) g.back() = hi;
  return g;
}

inline std::vector<double> default_lambda_grid() { return log_grid(50, 0.1, 200.0); }

struct CvConfig {
  std::vector<double> grid = default_lambda_grid();
  FitConfig fit;
  std::uint64_t seed = 0;  // derives per-fold optimizer seeds
  unsigned threads = 1;

  void validate() const {
    if (grid.empty()) throw ConfigError("lambda grid is empty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!(grid[k] >= 0.0) || !std::isfinite(grid[k])) throw ConfigError("lambda values must be finite and >= 0");
      if (k > 0 && !(grid[k] > grid[k - 1])) throw ConfigError("lambda grid must be strictly increasing");
    }
    fit.validate();
  }
};

struct CvRow {
  double lambda = 0.0;
  std::string center;         // held-out center
  double holdout_auc = std::nan("");
  bool ok = false;            // fold fit succeeded
  bool converged = false;     // optimizer converged in the fold fit
  double train_aauc = std::nan("");  // apparent aAUC of the fold fit on its training centers
  Vector theta;               // fold fit (empty when the fit failed)
  std::string error;
};

struct CvAggregate {
  double lambda = 0.0;
  double cv_aauc = std::nan("");                // case-count weighted mean of holdout AUCs
  double variability_about_cv = std::nan("");   // holdout AUCs about cv_aauc
  double variability_about_train = std::nan("");  // holdout AUC of each fold about that fold's training aAUC
  double completeness = 0.0;                    // fraction of folds that fit
};

struct CvTable {
  std::vector<double> grid;
  std::vector<std::string> centers;  // held-out centers in dataset order
  std::vector<double> weights;       // case-count weights over all folds' held-out centers
  std::vector<CvRow> rows;           // lambda-major, then center order
  std::vector<CvAggregate> aggregates;

  const CvRow& row(std::size_t lambda_index, std::size_t center_index) const {
    return rows.at(lambda_index * centers.size() + center_index);
  }
};

/// Fills cv-aAUC and both variability aggregates from the rows of one lambda.
inline CvAggregate aggregate_rows(double lambda, const std::vector<const CvRow*>& rows,
                                  const std::vector<double>& weights) {
  CvAggregate agg;
  agg.lambda = lambda;
  double wsum = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]->ok) continue;
    wsum += weights[i];
    ++ok;
  }
  agg.completeness = rows.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(rows.size());
  if (ok == 0) return agg;
  double mean = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i]->ok) mean += weights[i] / wsum * rows[i]->holdout_auc;
  double v_cv = 0.0, v_train = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]->ok) continue;
    const double w = weights[i] / wsum;
    v_cv += w * (rows[i]->holdout_auc - mean) * (rows[i]->holdout_auc - mean);
    v_train += w * (rows[i]->holdout_auc - rows[i]->train_aauc) * (rows[i]->holdout_auc - rows[i]->train_aauc);
  }
  agg.cv_aauc = mean;
  agg.variability_about_cv = v_cv;
  agg.variability_about_train = v_train;
  return agg;
}

inline void compute_aggregates(CvTable& table) {
  table.aggregates.clear();
  for (std::size_t k = 0; k < table.grid.size(); ++k) {
    std::vector<const CvRow*> rows;
    for (std::size_t i = 0; i < table.centers.size(); ++i) rows.push_back(&table.row(k, i));
    table.aggregates.push_back(aggregate_rows(table.grid[k], rows, table.weights));
  }
}

inline CvTable run_lococv(const Dataset& data, const CvConfig& config = {}) {
  config.validate();
  const auto split = split_centers(data);
  const auto& views = split.views;
  if (views.size() < 3)
    throw ConfigError("leave-one-center-out cross-validation needs at least 3 usable centers, found " +
                      std::to_string(views.size()));

  CvTable table;
  table.grid = config.grid;
  for (const auto& v : views) table.centers.push_back(v.center);
  table.weights = center_weights(views);
  const std::size_t m = views.size();
  table.rows.resize(config.grid.size() * m);

  // Training data for fold i: every row outside center i (concordant centers
  // included; the fit drops them itself).
  std::vector<Dataset> folds;
  for (const auto& v : views) folds.push_back(data.without_center(v.center));

  parallel_for(table.rows.size(), config.threads, [&](std::size_t idx) {
    const std::size_t k = idx / m;
    const std::size_t i = idx % m;
    CvRow& row = table.rows[idx];
    row.lambda = config.grid[k];
    row.center = views[i].center;
    FitConfig fc = config.fit;
    fc.lambda = config.grid[k];
    fc.optimizer.seed = derive_stream(config.seed, {k, i})();
    try {
      const auto rep = fit(folds[i], fc);
      row.theta = rep.theta;
      row.train_aauc = rep.apparent.aauc;
      row.converged = rep.optimizer.converged;
      row.holdout_auc = center_auc(rep.theta, views[i]);
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  compute_aggregates(table);
  return table;
}

inline const std::vector<std::string>& cv_columns() {
  static const std::vector<std::string> cols{"lambda",       "log10_lambda",      "center",
                                             "holdout_auc",  "cv_aauc",           "sd_about_cv_aauc",
                                             "sd_about_train_aauc", "fold_converged"};
  return cols;
}

/// Writes the plot-ready table: one row per (lambda, held-out center).
inline void emit_cv_table(const CvTable& table, std::ostream& out) {
  if (table.rows.empty()) throw PreconditionError("cross-validation table is empty");
  for (const auto& agg : table.aggregates)
    if (agg.completeness < 1.0)
      out << "# incomplete lambda " << format_number(agg.lambda) << ": fold completeness "
          << format_number(agg.completeness) << '\n';
  const auto& cols = cv_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j];
  out << '\n';
  const std::size_t m = table.centers.size();
  for (std::size_t idx = 0; idx < table.rows.size(); ++idx) {
    const auto& r = table.rows[idx];
    const auto& agg = table.aggregates[idx / m];
    out << format_number(r.lambda) << ',' << format_number(std::log10(r.lambda)) << ',' << r.center << ','
        << format_number(r.ok ? r.holdout_auc : std::nan("")) << ',' << format_number(agg.cv_aauc) << ','
        << format_number(std::sqrt(agg.variability_about_cv)) << ','
        << format_number(std::sqrt(agg.variability_about_train)) << ',' << (r.ok && r.converged ? 1 : 0)
        << '\n';
  }
  if (!out) throw IoError("failed writing cross-validation table");
}

/// Parsed form of an emitted table; sd columns are kept as written.
struct CvFileRow {
  double lambda = 0.0;
  double log10_lambda = 0.0;
  std::string center;
  double holdout_auc = 0.0;
  double cv_aauc = 0.0;
  double sd_about_cv_aauc = 0.0;
  double sd_about_train_aauc = 0.0;
  int fold_converged = 0;
};

inline std::vector<CvFileRow> read_cv_table(std::istream& in) {
  auto number = [](std::string_view s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    double v = 0.0;
    if (!detail::parse_double(s, v)) throw ValidationError("bad number in cross-validation table: " + std::string(s));
    return v;
  };
  std::vector<CvFileRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto f = detail::split_line(t, ',');
    if (!header) {
      const auto& cols = cv_columns();
      if (f.size() != cols.size() || !std::equal(cols.begin(), cols.end(), f.begin()))
        throw SchemaError("", "unexpected cross-validation table header");
      header = true;
      continue;
    }
    if (f.size() != 8) throw ValidationError("cross-validation row has " + std::to_string(f.size()) + " fields");
    rows.push_back({number(f[0]), number(f[1]), std::string(f[2]), number(f[3]), number(f[4]), number(f[5]),
                    number(f[6]), static_cast<int>(number(f[7]))});
  }
  return rows;
}

}  // namespace caauc
