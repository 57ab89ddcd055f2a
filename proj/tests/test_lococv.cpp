#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "caauc/lococv.hpp"
#include "oracles.hpp"

using namespace caauc;

namespace {

struct QuietLog : ::testing::Environment {
  void SetUp() override { log::silence(); }
};
const auto* const quiet = ::testing::AddGlobalTestEnvironment(new QuietLog);

Dataset six_centers(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return oracle::to_dataset(oracle::random_views(rng, 6, 2, 8, 25, 1.0));
}

CvConfig small_config() {
  CvConfig cfg;
  cfg.grid = log_grid(5, 0.1, 200.0);
  cfg.seed = 77;
  return cfg;
}

}  // namespace

TEST(LogGrid, DefaultHasFiftyLogSpacedValues) {
  const auto g = default_lambda_grid();
  ASSERT_EQ(g.size(), 50u);
  EXPECT_EQ(g.front(), 0.1);
  EXPECT_EQ(g.back(), 200.0);
  const double step = std::log(200.0 / 0.1) / 49.0;
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_NEAR(std::log(g[k] / g[k - 1]), step, 1e-12);
}

TEST(LogGrid, SmallGridAndErrors) {
  const auto g = log_grid(5, 1.0, 10.0);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_NEAR(g[2], std::sqrt(10.0), 1e-14);
  EXPECT_EQ(log_grid(1, 3.0, 3.0), std::vector<double>{3.0});
  EXPECT_THROW(log_grid(0, 1, 2), ConfigError);
  EXPECT_THROW(log_grid(3, 0, 2), ConfigError);
  EXPECT_THROW(log_grid(3, 2, 1), ConfigError);
}

TEST(Lococv, RowCountAndAggregates) {
  const auto d = six_centers(1);
  const auto t = run_lococv(d, small_config());
  ASSERT_EQ(t.rows.size(), 30u);
  ASSERT_EQ(t.aggregates.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& r = t.row(k, i);
      EXPECT_EQ(r.lambda, t.grid[k]);
      EXPECT_EQ(r.center, t.centers[i]);
      ASSERT_TRUE(r.ok);
      mean += t.weights[i] * r.holdout_auc;
    }
    EXPECT_NEAR(t.aggregates[k].cv_aauc, mean, 1e-12);
    EXPECT_EQ(t.aggregates[k].completeness, 1.0);
  }
}

TEST(Lococv, FoldRecomputedManually) {
  const auto d = six_centers(2);
  const auto cfg = small_config();
  const auto t = run_lococv(d, cfg);
  const auto views = split_centers(d, false).views;
  const std::size_t k = 3, i = 4;
  FitConfig fc = cfg.fit;
  fc.lambda = cfg.grid[k];
  fc.optimizer.seed = derive_stream(cfg.seed, {k, i})();
  const auto rep = fit(d.without_center(views[i].center), fc);
  EXPECT_EQ(rep.theta, t.row(k, i).theta);
  EXPECT_EQ(center_auc(rep.theta, views[i]), t.row(k, i).holdout_auc);
  EXPECT_EQ(rep.apparent.aauc, t.row(k, i).train_aauc);
}

TEST(Lococv, HeldOutCorruptionNeverLeaksIntoItsFold) {
  const auto d = six_centers(3);
  const auto cfg = small_config();
  const auto clean = run_lococv(d, cfg);
  const std::size_t target = 2;
  const auto label = clean.centers[target];

  Matrix x = d.markers();
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 10.0);
  for (auto r : d.rows_of(d.index_of(label)))
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(static_cast<Eigen::Index>(r), k) = n(rng);
  const auto dirty = run_lococv(d.with_markers(x), cfg);

  for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
    EXPECT_EQ(dirty.row(k, target).theta, clean.row(k, target).theta);
    EXPECT_EQ(dirty.row(k, target).train_aauc, clean.row(k, target).train_aauc);
  }
}

TEST(Lococv, DeterministicAndThreadIndependent) {
  const auto d = six_centers(4);
  auto cfg = small_config();
  const auto a = run_lococv(d, cfg);
  cfg.threads = 4;
  const auto b = run_lococv(d, cfg);
  std::ostringstream sa, sb;
  emit_cv_table(a, sa);
  emit_cv_table(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Lococv, Preconditions) {
  std::mt19937_64 rng(5);
  const auto two = oracle::to_dataset(oracle::random_views(rng, 2, 2, 8, 12));
  EXPECT_THROW(run_lococv(two, small_config()), ConfigError);
  auto cfg = small_config();
  cfg.grid = {1.0, 0.5};
  EXPECT_THROW(run_lococv(six_centers(6), cfg), ConfigError);
  cfg.grid = {};
  EXPECT_THROW(run_lococv(six_centers(6), cfg), ConfigError);
  cfg.grid = {-1.0};
  EXPECT_THROW(run_lococv(six_centers(6), cfg), ConfigError);
}

TEST(EmitCvTable, LayoutAndRoundTrip) {
  const auto d = six_centers(7);
  const auto t = run_lococv(d, small_config());
  std::ostringstream out;
  emit_cv_table(t, out);

  std::istringstream lines(out.str());
  std::string line;
  int body = 0, header = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("lambda,", 0) == 0)
      ++header;
    else if (!line.empty() && line[0] != '#')
      ++body;
  }
  EXPECT_EQ(header, 1);
  EXPECT_EQ(body, 30);

  std::istringstream in(out.str());
  const auto rows = read_cv_table(in);
  ASSERT_EQ(rows.size(), 30u);
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    const auto& r = t.rows[idx];
    const auto& agg = t.aggregates[idx / 6];
    EXPECT_NEAR(rows[idx].lambda, r.lambda, 1e-12);
    EXPECT_NEAR(rows[idx].log10_lambda, std::log10(r.lambda), 1e-12);
    EXPECT_EQ(rows[idx].center, r.center);
    EXPECT_NEAR(rows[idx].holdout_auc, r.holdout_auc, 1e-12);
    EXPECT_NEAR(rows[idx].cv_aauc, agg.cv_aauc, 1e-12);
    EXPECT_NEAR(rows[idx].sd_about_cv_aauc, std::sqrt(agg.variability_about_cv), 1e-12);
    EXPECT_NEAR(rows[idx].sd_about_train_aauc, std::sqrt(agg.variability_about_train), 1e-12);
    EXPECT_EQ(rows[idx].fold_converged, r.converged ? 1 : 0);
  }
}

TEST(AggregateRows, FailedFoldsExcludedAndReported) {
  CvRow a, b, c;
  a.ok = true;
  a.holdout_auc = 0.6;
  a.train_aauc = 0.7;
  b.ok = true;
  b.holdout_auc = 0.8;
  b.train_aauc = 0.7;
  c.ok = false;
  const auto agg = aggregate_rows(2.0, {&a, &b, &c}, {0.25, 0.25, 0.5});
  EXPECT_NEAR(agg.cv_aauc, 0.7, 1e-15);
  EXPECT_NEAR(agg.variability_about_cv, 0.01, 1e-15);
  EXPECT_NEAR(agg.variability_about_train, 0.01, 1e-15);
  EXPECT_NEAR(agg.completeness, 2.0 / 3.0, 1e-15);

  CvTable t;
  t.grid = {2.0};
  t.centers = {"x", "y", "z"};
  t.weights = {0.25, 0.25, 0.5};
  t.rows = {a, b, c};
  for (auto& r : t.rows) r.lambda = 2.0;
  compute_aggregates(t);
  std::ostringstream out;
  emit_cv_table(t, out);
  EXPECT_EQ(out.str().rfind("# incomplete lambda 2", 0), 0u);
  EXPECT_NE(out.str().find(",nan,"), std::string::npos);
}
