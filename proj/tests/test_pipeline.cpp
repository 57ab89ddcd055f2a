#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "caauc/pipeline.hpp"
#include "oracles.hpp"

using namespace caauc;

namespace {

struct QuietLog : ::testing::Environment {
  void SetUp() override { log::silence(); }
};
const auto* const quiet = ::testing::AddGlobalTestEnvironment(new QuietLog);

Dataset make_data(std::uint64_t seed, int centers, int p, int min_n = 8, int max_n = 30, double signal = 0.8) {
  std::mt19937_64 rng(seed);
  return oracle::to_dataset(oracle::random_views(rng, centers, p, min_n, max_n, signal));
}

// Spec built exactly as fit() builds it, for oracle comparisons.
struct Rebuilt {
  std::vector<CenterView> views;
  ObjectiveSpec spec;
};

Rebuilt rebuild(const Dataset& d, const FitReport& r) {
  Rebuilt out{split_centers(d, false).views, {}};
  out.spec = ObjectiveSpec(out.views, r.bandwidths, r.lambda);
  return out;
}

}  // namespace

TEST(Fit, ReturnsUnitNormAndAscends) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = make_data(s, 4, 3);
    const auto r = fit(d);
    EXPECT_NEAR(r.theta.norm(), 1.0, 1e-12);
    EXPECT_NEAR(r.optimizer.theta.norm(), 1.0, 1e-12);
    EXPECT_GE(r.objective(), r.start_objective());
    for (std::size_t k = 1; k < r.optimizer.trace.size(); ++k)
      EXPECT_GT(r.optimizer.trace[k], r.optimizer.trace[k - 1]);
  }
}

TEST(Fit, MatchesAngleGridOptimum) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto d = make_data(100 + s, 3, 2, 10, 25);
    FitConfig cfg;
    cfg.start = StartPolicy::LogisticWithRestarts;
    cfg.optimizer.restarts = 4;
    cfg.optimizer.seed = s;
    const auto r = fit(d, cfg);
    const auto rb = rebuild(d, r);
    const auto grid = oracle::angle_grid_max([&](const Vector& t) { return penalized_objective(t, rb.spec); });
    EXPECT_NEAR(r.objective(), grid.value, 1e-3) << "seed " << s;
    EXPECT_GE(r.objective(), grid.value - 1e-3);
  }
}

TEST(Fit, PerfectMarkerRecovered) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(2.0, 3.0);
  std::vector<std::string> c;
  std::vector<int> y;
  Matrix x(60, 2);
  for (int i = 0; i < 60; ++i) {
    c.push_back(i < 30 ? "a" : "b");
    y.push_back(i % 2);
    x(i, 0) = (y.back() ? 1.0 : -1.0) * u(rng);
    x(i, 1) = n(rng);
  }
  const Dataset d(c, y, x);
  const auto r = fit(d);
  EXPECT_EQ(r.apparent.aauc, 1.0);
  EXPECT_GT(std::abs(r.theta(0)), 0.95);
  EXPECT_TRUE(r.logistic->separation);
}

TEST(Fit, ExplicitLambdaZeroIsDefaultPathBitForBit) {
  const auto d = make_data(9, 4, 3);
  FitConfig a, b;
  b.lambda = 0.0;
  b.optimizer.max_iterations = 500;
  const auto ra = fit(d, a), rb = fit(d, b);
  EXPECT_EQ(ra.theta, rb.theta);
  EXPECT_EQ(ra.objective(), rb.objective());
}

TEST(Fit, PenaltyMonotoneUnderGridOracle) {
  // two centers, lambda = 0 versus 10 on the exact grid optimum
  const auto d = make_data(11, 2, 2, 10, 30, 1.5);
  const auto base = fit(d);
  auto rb = rebuild(d, base);
  auto variability_at_optimum = [&](double lambda) {
    rb.spec.lambda = lambda;
    const auto g = oracle::angle_grid_max([&](const Vector& t) { return penalized_objective(t, rb.spec); });
    const auto r = smooth_center_aucs(g.theta, rb.spec);
    return variability(r, rb.spec.weights, weighted_mean(r, rb.spec.weights));
  };
  EXPECT_LE(variability_at_optimum(10.0), variability_at_optimum(0.0) + 1e-9);
}

TEST(Fit, StandardizationChangesOnlyUnits) {
  const auto d = make_data(12, 4, 3);
  Matrix scaled = d.markers();
  scaled.col(0) *= 1000.0;
  scaled.col(2) *= 0.01;
  const auto ds = d.with_markers(scaled);
  FitConfig cfg;
  cfg.standardize = true;
  const auto r1 = fit(d, cfg), r2 = fit(ds, cfg);
  // the same combination expressed in each data set's own units
  Vector back = r2.theta;
  back(0) *= 1000.0;
  back(2) *= 0.01;
  back.normalize();
  EXPECT_TRUE(back.isApprox(r1.theta, 1e-6));
  EXPECT_NEAR(r1.apparent.aauc, r2.apparent.aauc, 1e-12);
  ASSERT_TRUE(r2.scaling.has_value());
}

TEST(Fit, UserStart) {
  const auto d = make_data(13, 3, 2);
  FitConfig cfg;
  cfg.start = StartPolicy::User;
  cfg.user_start = Vector::Ones(2) * 3.0;
  const auto r = fit(d, cfg);
  EXPECT_FALSE(r.logistic.has_value());
  EXPECT_TRUE(r.theta_start.isApprox(Vector::Ones(2).normalized()));
  EXPECT_GE(r.objective(), r.start_objective());
  cfg.user_start = Vector::Ones(3);
  EXPECT_THROW(fit(d, cfg), DimensionError);
}

TEST(Fit, ConfigErrors) {
  const auto d = make_data(14, 3, 2);
  FitConfig cfg;
  cfg.lambda = -1.0;
  EXPECT_THROW(fit(d, cfg), ConfigError);
  cfg.lambda = std::nan("");
  EXPECT_THROW(fit(d, cfg), ConfigError);
  cfg = {};
  cfg.start = StartPolicy::User;
  EXPECT_THROW(fit(d, cfg), ConfigError);

  const auto one = make_data(15, 1, 2);
  FitConfig pen;
  pen.lambda = 1.0;
  EXPECT_THROW(fit(one, pen), ConfigError);
  EXPECT_NO_THROW(fit(one));
}

TEST(Fit, ConcordantCenterDroppedAndReported) {
  auto views = [] {
    std::mt19937_64 rng(16);
    return oracle::random_views(rng, 3, 2, 8, 20);
  }();
  CenterView only_cases;
  only_cases.center = "solo";
  only_cases.cases = Matrix::Ones(4, 2);
  only_cases.controls = Matrix(0, 2);
  views.push_back(only_cases);
  const auto d = oracle::to_dataset(views);
  const auto r = fit(d);
  EXPECT_EQ(r.dropped_centers, std::vector<std::string>{"solo"});
  EXPECT_EQ(r.apparent.centers.size(), 3u);
}

TEST(Evaluate, ReferenceVariants) {
  const auto d = make_data(17, 3, 2);
  const Vector t = Vector::Ones(2).normalized();
  const auto r = evaluate(t, d);
  EXPECT_FALSE(r.reference.has_value());
  const auto same = evaluate(t, d, r.aauc);
  EXPECT_EQ(*same.variability_reference, same.variability_internal);
  const auto off = evaluate(t, d, r.aauc + 0.05);
  EXPECT_GT(*off.variability_reference, off.variability_internal);
}

TEST(Evaluate, HandEnumeratedThreeCenters) {
  // marker 1 only; second marker is ignored by theta = e1
  std::vector<std::string> c{"a", "a", "a", "b", "b", "b", "b", "c", "c", "c"};
  std::vector<int> y{1, 0, 0, 1, 1, 0, 0, 1, 1, 0};
  Matrix x(10, 2);
  x << 2, 9, 1, 9, 3, 9,   // a: case 2 vs {1,3} -> 1/2
      5, 0, 1, 0, 2, 0, 3, 0,  // b: cases {5,1} vs {2,3} -> 2/4
      0, 1, 4, 1, 2, 1;        // c: cases {0,4} vs {2} -> 1/2
  const Dataset d(c, y, x);
  Vector t(2);
  t << 1, 0;
  const auto r = evaluate(t, d);
  EXPECT_EQ(r.centers[0].auc, 0.5);
  EXPECT_EQ(r.centers[1].auc, 0.5);
  EXPECT_EQ(r.centers[2].auc, 0.5);
  EXPECT_DOUBLE_EQ(r.centers[1].weight, 0.4);
  EXPECT_DOUBLE_EQ(r.aauc, 0.5);

  x(6, 0) = -1;  // b: cases {5,1} vs {2,-1} -> 3/4
  const auto r2 = evaluate(t, d.with_markers(x));
  EXPECT_EQ(r2.centers[1].auc, 0.75);
  EXPECT_DOUBLE_EQ(r2.aauc, 0.2 * 0.5 + 0.4 * 0.75 + 0.4 * 0.5);
}

TEST(Evaluate, RenormalizesWithWarning) {
  const auto d = make_data(18, 2, 2);
  int warnings = 0;
  log::set_sink([&](const std::string&) { ++warnings; });
  const auto a = evaluate(Vector::Ones(2) * 5.0, d);
  log::silence();
  EXPECT_EQ(warnings, 1);
  EXPECT_EQ(a.aauc, evaluate(Vector::Ones(2).normalized(), d).aauc);
  EXPECT_THROW(evaluate(Vector::Ones(3), d), DimensionError);
}
