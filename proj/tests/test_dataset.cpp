#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "caauc/dataset.hpp"
#include "caauc/roc_metrics.hpp"

using namespace caauc;

namespace {

struct QuietLog : ::testing::Environment {
  void SetUp() override { log::silence(); }
};
const auto* const quiet = ::testing::AddGlobalTestEnvironment(new QuietLog);

Dataset load(const std::string& text, TableSchema schema = {}) {
  std::istringstream in(text);
  return load_table(in, schema);
}

}  // namespace

TEST(LoadTable, FourRowsTwoCenters) {
  const auto d = load("center,outcome,a,b\nx,1,1.5,2\nx,0,0.5,1\ny,1,3,4\ny,0,-1,0\n");
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(d.p(), 2);
  EXPECT_EQ(d.center_count(), 2u);
  EXPECT_EQ(d.marker_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(d.markers()(2, 1), 4.0);
  EXPECT_EQ(d.center_label(3), "y");
}

TEST(LoadTable, BadOutcomeNamesRow) {
  try {
    load("center,outcome,a\nx,1,1\nx,0,2\nx,2,3\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), "outcome");
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(LoadTable, MissingCellNamesRowAndColumn) {
  try {
    load("center,outcome,a,b\nx,1,1,2\nx,0,,3\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "a");
  }
}

TEST(LoadTable, NonFiniteCellRejected) {
  EXPECT_THROW(load("center,outcome,a\nx,1,nan\nx,0,1\n"), ParseError);
  EXPECT_THROW(load("center,outcome,a\nx,1,inf\nx,0,1\n"), ParseError);
}

TEST(LoadTable, MissingColumnIsSchemaError) {
  EXPECT_THROW(load("site,outcome,a\nx,1,1\n"), SchemaError);
  TableSchema s;
  s.marker_columns = {"a", "zz"};
  EXPECT_THROW(load("center,outcome,a\nx,1,1\n", s), SchemaError);
}

TEST(LoadTable, EmptyBodyIsEmptyInput) {
  EXPECT_THROW(load("center,outcome,a\n"), EmptyInputError);
  EXPECT_THROW(load(""), EmptyInputError);
}

TEST(LoadTable, CommentsBlankLinesAndTabs) {
  TableSchema s;
  s.delimiter = '\t';
  s.center_column = "site";
  s.outcome_column = "y";
  s.marker_columns = {"m2"};
  const auto d = load("# note\nsite\ty\tm1\tm2\n\nA\t1\t5\t7\n# skip\nA\t0\t6\t8\n", s);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.p(), 1);
  EXPECT_DOUBLE_EQ(d.markers()(1, 0), 8.0);
}

TEST(SplitCenters, BothMixed) {
  const auto d = load("center,outcome,a\nx,1,1\nx,0,2\ny,1,3\ny,0,4\n");
  const auto s = split_centers(d);
  EXPECT_EQ(s.views.size(), 2u);
  EXPECT_TRUE(s.dropped.empty());
  EXPECT_EQ(s.views[1].center, "y");
  EXPECT_EQ(s.views[1].n_cases(), 1);
}

TEST(SplitCenters, AllControlCenterDropped) {
  const auto d = load("center,outcome,a\nx,1,1\nx,0,2\ny,0,3\ny,0,4\nz,1,0\nz,0,5\n");
  const auto s = split_centers(d);
  EXPECT_EQ(s.views.size(), 2u);
  ASSERT_EQ(s.dropped.size(), 1u);
  EXPECT_EQ(s.dropped[0], "y");
}

TEST(SplitCenters, SingleAllCaseCenterUnusable) {
  const auto d = load("center,outcome,a\nx,1,1\nx,1,2\n");
  EXPECT_THROW(split_centers(d), UnusableDataError);
}

TEST(Standardize, AlreadyStandardizedIsIdentity) {
  Matrix x(4, 1);
  x << -1.5, -0.5, 0.5, 1.5;
  x /= std::sqrt((2 * 2.25 + 2 * 0.25) / 3.0);
  const Dataset d({"a", "a", "a", "a"}, {1, 0, 1, 0}, x);
  const auto s = standardize(d);
  EXPECT_NEAR(s.scaling.scale(0), 1.0, 1e-12);
  EXPECT_TRUE(s.data.markers().isApprox(x, 1e-12));
}

TEST(Standardize, MomentsRecomputedFromOutput) {
  Matrix x(4, 2);
  x << 0, 1, 2, 5, 0, 2, 2, 9;
  const Dataset d({"a", "a", "b", "b"}, {1, 0, 1, 0}, x);
  const auto s = standardize(d);
  for (int k = 0; k < 2; ++k) {
    const auto col = s.data.markers().col(k);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / 3.0;
    EXPECT_NEAR(mean, 0.0, 1e-14);
    EXPECT_NEAR(var, 1.0, 1e-14);
  }
  // {0,2,0,2}: sd = sqrt(4/3), so 2 maps to (2 - 1) / sqrt(4/3)
  EXPECT_NEAR(s.data.markers()(1, 0), std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(Standardize, ConstantColumnRejected) {
  Matrix x(3, 2);
  x << 1, 4, 2, 4, 3, 4;
  const Dataset d({"a", "a", "a"}, {1, 0, 1}, x, {"u", "v"});
  try {
    standardize(d);
    FAIL();
  } catch (const DegenerateMarkerError& e) {
    EXPECT_EQ(e.column(), "v");
  }
}

TEST(Standardize, RoundTripScoresDifferByConstantShift) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(3.0, 2.0);
  Matrix x(30, 3);
  std::vector<std::string> c;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    for (int k = 0; k < 3; ++k) x(i, k) = n(rng) * (k + 1);
    c.push_back(i < 15 ? "a" : "b");
    y.push_back(i % 3 == 0);
  }
  const Dataset d(c, y, x);
  const auto s = standardize(d);
  Vector ts(3);
  ts << 0.3, -0.8, 0.52;
  const Vector raw = s.scaling.to_original_units(ts);
  const Vector lhs = s.data.markers() * ts;
  const Vector rhs = (x * raw).array() - s.scaling.shift(ts);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(lhs(i), rhs(i), 1e-10 * (1.0 + std::abs(lhs(i))));

  const auto a = split_centers(d, false), b = split_centers(s.data, false);
  for (std::size_t v = 0; v < a.views.size(); ++v)
    EXPECT_EQ(center_auc(raw, a.views[v]), center_auc(ts, b.views[v]));
}

TEST(Dataset, RejectsBadOutcomeAndNonFinite) {
  Matrix x(2, 1);
  x << 1, 2;
  EXPECT_THROW(Dataset({"a", "a"}, {1, 3}, x), ValidationError);
  x(1, 0) = std::nan("");
  EXPECT_THROW(Dataset({"a", "a"}, {1, 0}, x), ValidationError);
}

TEST(Dataset, WithoutCenterAndSubset) {
  const auto d = load("center,outcome,a\nx,1,1\ny,0,2\nx,0,3\nz,1,4\n");
  const auto w = d.without_center("x");
  EXPECT_EQ(w.size(), 2u);
  EXPECT_EQ(w.centers(), (std::vector<std::string>{"y", "z"}));
  const auto s = d.subset({3, 0});
  EXPECT_DOUBLE_EQ(s.markers()(0, 0), 4.0);
  EXPECT_EQ(s.center_label(1), "x");
}
