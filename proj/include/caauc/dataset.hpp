#pragma once

// Grouped case-control data: loading, per-center views, standardization.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "caauc/error.hpp"

namespace caauc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Observation {
  std::string center;
  int outcome = 0;  // 1 = case, 0 = control
  Vector markers;
};

/// Immutable table of observations with a first-appearance center index.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<std::string> row_centers, std::vector<int> outcomes, Matrix markers,
          std::vector<std::string> marker_names = {})
      : outcomes_(std::move(outcomes)), markers_(std::move(markers)),
        marker_names_(std::move(marker_names)) {
    const auto n = row_centers.size();
    if (n == 0) throw EmptyInputError("dataset has no observations");
    if (outcomes_.size() != n || static_cast<std::size_t>(markers_.rows()) != n)
      throw DimensionError("center, outcome and marker row counts differ");
    if (markers_.cols() < 1) throw DimensionError("dataset needs at least one marker");
    if (marker_names_.empty()) {
      for (Eigen::Index k = 0; k < markers_.cols(); ++k)
        marker_names_.push_back("X" + std::to_string(k + 1));
    }
    if (static_cast<Eigen::Index>(marker_names_.size()) != markers_.cols())
      throw DimensionError("marker name count does not match marker columns");
    for (std::size_t i = 0; i < n; ++i) {
      if (outcomes_[i] != 0 && outcomes_[i] != 1)
        throw ParseError(i + 1, "outcome", "row " + std::to_string(i + 1) + ": outcome must be 0 or 1");
      for (Eigen::Index k = 0; k < markers_.cols(); ++k) {
        if (!std::isfinite(markers_(static_cast<Eigen::Index>(i), k)))
          throw ParseError(i + 1, marker_names_[static_cast<std::size_t>(k)],
                           "row " + std::to_string(i + 1) + ", column '" +
                               marker_names_[static_cast<std::size_t>(k)] + "': non-finite marker value");
      }
    }
    row_center_.resize(n);
    std::unordered_map<std::string, std::size_t> lookup;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = lookup.try_emplace(row_centers[i], centers_.size());
      if (inserted) {
        centers_.push_back(row_centers[i]);
        center_rows_.emplace_back();
      }
      row_center_[i] = it->second;
      center_rows_[it->second].push_back(i);
    }
  }

  static Dataset from_observations(const std::vector<Observation>& obs,
                                   std::vector<std::string> marker_names = {}) {
    if (obs.empty()) throw EmptyInputError("dataset has no observations");
    const auto p = obs.front().markers.size();
    Matrix x(static_cast<Eigen::Index>(obs.size()), p);
    std::vector<std::string> centers;
    std::vector<int> outcomes;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (obs[i].markers.size() != p)
        throw DimensionError("observation " + std::to_string(i + 1) + " has a different marker count");
      x.row(static_cast<Eigen::Index>(i)) = obs[i].markers.transpose();
      centers.push_back(obs[i].center);
      outcomes.push_back(obs[i].outcome);
    }
    return Dataset(std::move(centers), std::move(outcomes), std::move(x), std::move(marker_names));
  }

  std::size_t size() const noexcept { return outcomes_.size(); }
  Eigen::Index p() const noexcept { return markers_.cols(); }
  const Matrix& markers() const noexcept { return markers_; }
  const std::vector<int>& outcomes() const noexcept { return outcomes_; }
  const std::vector<std::string>& marker_names() const noexcept { return marker_names_; }

  /// Center labels in first-appearance order.
  const std::vector<std::string>& centers() const noexcept { return centers_; }
  std::size_t center_count() const noexcept { return centers_.size(); }
  std::size_t center_of(std::size_t row) const { return row_center_.at(row); }
  const std::string& center_label(std::size_t row) const { return centers_[row_center_.at(row)]; }
  const std::vector<std::size_t>& rows_of(std::size_t center) const { return center_rows_.at(center); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(centers_.begin(), centers_.end(), label);
    if (it == centers_.end()) throw PreconditionError("unknown center '" + label + "'");
    return static_cast<std::size_t>(it - centers_.begin());
  }

  /// Rows in the given order; center order follows first appearance within `rows`.
  Dataset subset(const std::vector<std::size_t>& rows) const {
    Matrix x(static_cast<Eigen::Index>(rows.size()), p());
    std::vector<std::string> centers;
    std::vector<int> outcomes;
    centers.reserve(rows.size());
    outcomes.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = markers_.row(static_cast<Eigen::Index>(rows[i]));
      centers.push_back(center_label(rows[i]));
      outcomes.push_back(outcomes_[rows[i]]);
    }
    return Dataset(std::move(centers), std::move(outcomes), std::move(x), marker_names_);
  }

  Dataset without_center(const std::string& label) const {
    const auto skip = index_of(label);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < size(); ++i)
      if (row_center_[i] != skip) keep.push_back(i);
    return subset(keep);
  }

  Dataset with_markers(Matrix markers) const {
    std::vector<std::string> centers;
    centers.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) centers.push_back(center_label(i));
    return Dataset(std::move(centers), outcomes_, std::move(markers), marker_names_);
  }

 private:
  std::vector<int> outcomes_;
  Matrix markers_;
  std::vector<std::string> marker_names_;
  std::vector<std::string> centers_;
  std::vector<std::size_t> row_center_;
  std::vector<std::vector<std::size_t>> center_rows_;
};

/// One non-concordant center split by case status.
struct CenterView {
  std::string center;
  Matrix cases;
  Matrix controls;

  Eigen::Index n_cases() const noexcept { return cases.rows(); }
  Eigen::Index n_controls() const noexcept { return controls.rows(); }
  Eigen::Index size() const noexcept { return cases.rows() + controls.rows(); }
  Eigen::Index p() const noexcept { return cases.cols(); }
};

struct CenterSplit {
  std::vector<CenterView> views;
  std::vector<std::string> dropped;
};

/// Builds a view, or returns false when the rows hold only cases or only controls.
inline bool make_center_view(const Matrix& markers, const std::vector<int>& outcomes,
                             std::string label, CenterView& out) {
  Eigen::Index n_cases = 0;
  for (int d : outcomes) n_cases += d;
  const auto n = static_cast<Eigen::Index>(outcomes.size());
  if (n_cases == 0 || n_cases == n) return false;
  out.center = std::move(label);
  out.cases.resize(n_cases, markers.cols());
  out.controls.resize(n - n_cases, markers.cols());
  Eigen::Index a = 0, b = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (outcomes[static_cast<std::size_t>(i)] == 1)
      out.cases.row(a++) = markers.row(i);
    else
      out.controls.row(b++) = markers.row(i);
  }
  return true;
}

inline CenterSplit split_centers(const Dataset& data, bool warn_dropped = true) {
  CenterSplit split;
  for (std::size_t c = 0; c < data.center_count(); ++c) {
    const auto& rows = data.rows_of(c);
    Matrix x(static_cast<Eigen::Index>(rows.size()), data.p());
    std::vector<int> d(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = data.markers().row(static_cast<Eigen::Index>(rows[i]));
      d[i] = data.outcomes()[rows[i]];
    }
    CenterView view;
    if (make_center_view(x, d, data.centers()[c], view)) {
      split.views.push_back(std::move(view));
    } else {
      split.dropped.push_back(data.centers()[c]);
      if (warn_dropped) log::warn("center '" + data.centers()[c] + "' is concordant and was dropped");
    }
  }
  if (split.views.empty())
    throw UnusableDataError("every center is concordant (all cases or all controls)");
  return split;
}

/// Per-marker mean and standard deviation used to standardize a dataset.
struct ScalingRecord {
  Vector center;
  Vector scale;

  /// Coefficients acting on raw markers that reproduce standardized scores up to a shift.
  Vector to_original_units(const Vector& theta_standardized) const {
    return theta_standardized.cwiseQuotient(scale);
  }

  /// Constant subtracted from raw-unit scores: theta_std . z = theta_raw . x - shift.
  double shift(const Vector& theta_standardized) const {
    return to_original_units(theta_standardized).dot(center);
  }
};

struct Standardized {
  Dataset data;
  ScalingRecord scaling;
};

inline Standardized standardize(const Dataset& data) {
  const auto n = static_cast<double>(data.size());
  const Matrix& x = data.markers();
  ScalingRecord rec;
  rec.center = x.colwise().mean().transpose();
  rec.scale.resize(data.p());
  for (Eigen::Index k = 0; k < data.p(); ++k) {
    const double ss = (x.col(k).array() - rec.center(k)).square().sum();
    const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(rec.center(k))))
      throw DegenerateMarkerError(data.marker_names()[static_cast<std::size_t>(k)],
                                  "marker '" + data.marker_names()[static_cast<std::size_t>(k)] +
                                      "' has zero variance");
    rec.scale(k) = sd;
  }
  Matrix z = (x.rowwise() - rec.center.transpose()).array().rowwise() / rec.scale.transpose().array();
  return {data.with_markers(std::move(z)), std::move(rec)};
}

struct TableSchema {
  std::string center_column = "center";
  std::string outcome_column = "outcome";
  std::vector<std::string> marker_columns;  // empty: every other column, in file order
  char delimiter = ',';
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Reads a delimited table with a header row. Lines starting with '#' and blank lines are skipped.
inline Dataset load_table(std::istream& in, const TableSchema& schema = {}) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    for (auto f : detail::split_line(t, schema.delimiter)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw EmptyInputError("input has no header row");

  auto find_col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError(name, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto center_col = find_col(schema.center_column);
  const auto outcome_col = find_col(schema.outcome_column);
  std::vector<std::size_t> marker_cols;
  std::vector<std::string> marker_names;
  if (schema.marker_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j == center_col || j == outcome_col) continue;
      marker_cols.push_back(j);
      marker_names.push_back(header[j]);
    }
  } else {
    for (const auto& name : schema.marker_columns) {
      marker_cols.push_back(find_col(name));
      marker_names.push_back(name);
    }
  }
  if (marker_cols.empty()) throw SchemaError("", "no marker columns in header");

  std::vector<std::string> centers;
  std::vector<int> outcomes;
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    ++row;
    auto fields = detail::split_line(t, schema.delimiter);
    auto cell = [&](std::size_t j) -> std::string_view {
      if (j >= fields.size() || fields[j].empty())
        throw ParseError(row, header[j], "row " + std::to_string(row) + ", column '" + header[j] + "': missing value");
      return fields[j];
    };
    centers.emplace_back(cell(center_col));
    auto o = cell(outcome_col);
    if (o == "1" || o == "1.0") {
      outcomes.push_back(1);
    } else if (o == "0" || o == "0.0") {
      outcomes.push_back(0);
    } else {
      throw ParseError(row, header[outcome_col],
                       "row " + std::to_string(row) + ", column '" + header[outcome_col] +
                           "': outcome must be 0 or 1, got '" + std::string(o) + "'");
    }
    for (std::size_t k = 0; k < marker_cols.size(); ++k) {
      double v = 0.0;
      auto s = cell(marker_cols[k]);
      if (!detail::parse_double(s, v) || !std::isfinite(v))
        throw ParseError(row, marker_names[k],
                         "row " + std::to_string(row) + ", column '" + marker_names[k] +
                             "': not a finite number: '" + std::string(s) + "'");
      values.push_back(v);
    }
  }
  if (row == 0) throw EmptyInputError("input has a header but no data rows");

  const auto p = static_cast<Eigen::Index>(marker_cols.size());
  Matrix x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(row), p);
  return Dataset(std::move(centers), std::move(outcomes), std::move(x), std::move(marker_names));
}

}  // namespace caauc
