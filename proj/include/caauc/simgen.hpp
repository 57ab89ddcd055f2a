#pragma once

// Seeded simulation populations and the train/test replication study.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"
#include "caauc/normal.hpp"
#include "caauc/parallel.hpp"
#include "caauc/pipeline.hpp"
#include "caauc/roc_metrics.hpp"

namespace caauc {

enum class Family { TwoMarkerOutlier, TenMarker, FourMarker };

/// f is the logistic function; g is the asymmetric link
/// g(v) = 1/(1+e^{-v/3}) for v < 0, 1/(1+e^{-3v}) otherwise.
enum class Link { F, G };

enum class VarianceMode { PerMarkerPerCenter, PerCenter };

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct PopulationSpec {
  int M = 50;       // population centers
  int N_c = 5000;   // observations per population center
  int m = 6;        // sampled training centers
  int n_c = 200;    // sampled observations per training center
  Family family = Family::TwoMarkerOutlier;
  double pi = 0.05;  // outlier-component probability (two-marker family)
  Link link = Link::F;
  VarianceMode variance = VarianceMode::PerMarkerPerCenter;
  std::optional<UniformRange> intercept;  // family default when unset
  UniformRange sigma{0.5, 1.5};           // four-marker standard deviations
  UniformRange gamma{0.5, 1.5};           // four-marker coefficients
  std::uint64_t seed = 0;

  UniformRange intercept_range() const {
    if (intercept) return *intercept;
    return family == Family::TenMarker ? UniformRange{0.2, 0.8} : UniformRange{-1.0, 1.0};
  }

  void validate() const {
    if (M < 1 || N_c < 1 || m < 1 || n_c < 1) throw ConfigError("population sizes must be positive");
    if (m > M) throw ConfigError("sampled centers m must not exceed population centers M");
    if (n_c > N_c) throw ConfigError("sampled size n_c must not exceed center size N_c");
    if (!(pi >= 0.0 && pi <= 1.0)) throw ConfigError("outlier probability pi must lie in [0,1]");
    for (auto r : {intercept_range(), sigma, gamma})
      if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw ConfigError("uniform ranges need finite lo <= hi");
    if (family == Family::FourMarker && !(sigma.lo > 0.0)) throw ConfigError("sigma range must be positive");
  }
};

struct PopulationCenter {
  std::string label;
  Matrix markers;               // analysis markers only
  std::vector<int> outcomes;
  std::vector<char> outlier;    // two-marker family: row drawn from the outlier component
};

struct Population {
  std::vector<PopulationCenter> centers;
  Eigen::Index p = 0;
};

inline double link_g(double v) {
  return v < 0.0 ? expit(v / 3.0) : expit(3.0 * v);
}

namespace detail {

inline double uniform(std::mt19937_64& rng, UniformRange r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

inline int bernoulli(std::mt19937_64& rng, double prob) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < prob ? 1 : 0;
}

inline std::string center_label(int c) { return "C" + std::to_string(c + 1); }

}  // namespace detail

inline Population gen_two_marker(const PopulationSpec& spec) {
  spec.validate();
  auto rng = derive_stream(spec.seed, {0x7770});
  std::normal_distribution<double> normal;
  // Z0 ~ N(0, 0.2 [[1, .9], [.9, 1]]) via its Cholesky factor; Z1 ~ N(0, 2 I).
  const double l11 = std::sqrt(0.2);
  const double l21 = 0.9 * std::sqrt(0.2);
  const double l22 = std::sqrt(0.2 * (1.0 - 0.81));
  const double s1 = std::sqrt(2.0);

  Population pop;
  pop.p = 2;
  for (int c = 0; c < spec.M; ++c) {
    PopulationCenter pc;
    pc.label = detail::center_label(c);
    const double intercept = detail::uniform(rng, spec.intercept_range());
    pc.markers.resize(spec.N_c, 2);
    pc.outcomes.resize(static_cast<std::size_t>(spec.N_c));
    pc.outlier.resize(static_cast<std::size_t>(spec.N_c));
    for (int i = 0; i < spec.N_c; ++i) {
      const int delta = detail::bernoulli(rng, spec.pi);
      const double a = normal(rng);
      const double b = normal(rng);
      double x1, x2;
      if (delta) {
        x1 = s1 * a;
        x2 = s1 * b;
      } else {
        x1 = l11 * a;
        x2 = l21 * a + l22 * b;
      }
      const double d = x1 - x2;
      const double v = intercept + 4.0 * x1 - 3.0 * x2 - d * d * d;
      pc.markers(i, 0) = x1;
      pc.markers(i, 1) = x2;
      pc.outcomes[static_cast<std::size_t>(i)] = detail::bernoulli(rng, expit(v));
      pc.outlier[static_cast<std::size_t>(i)] = static_cast<char>(delta);
    }
    pop.centers.push_back(std::move(pc));
  }
  return pop;
}

/// Center mean for the ten-marker family: -1 for the first fifth of centers,
/// +1 through four fifths, 0 for the rest (centers 1-10, 11-40, 41-50 when M = 50).
inline double ten_marker_mean(int center_index, int M) {
  const int c = center_index + 1;
  if (5 * c <= M) return -1.0;
  if (5 * c <= 4 * M) return 1.0;
  return 0.0;
}

inline Population gen_ten_marker(const PopulationSpec& spec) {
  spec.validate();
  auto rng = derive_stream(spec.seed, {0x7771});
  std::normal_distribution<double> normal;
  Population pop;
  pop.p = 2;
  for (int c = 0; c < spec.M; ++c) {
    PopulationCenter pc;
    pc.label = detail::center_label(c);
    const double mu = ten_marker_mean(c, spec.M);
    const double intercept = detail::uniform(rng, spec.intercept_range());
    pc.markers.resize(spec.N_c, 2);
    pc.outcomes.resize(static_cast<std::size_t>(spec.N_c));
    double x[10];
    for (int i = 0; i < spec.N_c; ++i) {
      for (double& xk : x) xk = mu + normal(rng);
      const double v = intercept + x[0] * x[0] - 2.0 * x[1] + x[2] - 3.0 * x[3] + x[4] - 4.0 * x[5] +
                       x[6] - x[7] + x[8] - x[9];
      pc.markers(i, 0) = x[0];
      pc.markers(i, 1) = x[1];
      pc.outcomes[static_cast<std::size_t>(i)] = detail::bernoulli(rng, expit(v));
    }
    pop.centers.push_back(std::move(pc));
  }
  return pop;
}

inline Population gen_four_marker(const PopulationSpec& spec) {
  spec.validate();
  auto rng = derive_stream(spec.seed, {0x7772});
  std::normal_distribution<double> normal;
  Population pop;
  pop.p = 4;
  for (int c = 0; c < spec.M; ++c) {
    PopulationCenter pc;
    pc.label = detail::center_label(c);
    double sd[4];
    if (spec.variance == VarianceMode::PerCenter) {
      const double s = detail::uniform(rng, spec.sigma);
      std::fill(sd, sd + 4, s);
    } else {
      for (double& s : sd) s = detail::uniform(rng, spec.sigma);
    }
    double gamma[4];
    for (double& g : gamma) g = detail::uniform(rng, spec.gamma);
    const double intercept = detail::uniform(rng, spec.intercept_range());
    pc.markers.resize(spec.N_c, 4);
    pc.outcomes.resize(static_cast<std::size_t>(spec.N_c));
    for (int i = 0; i < spec.N_c; ++i) {
      double x[4];
      for (int k = 0; k < 4; ++k) x[k] = sd[k] * normal(rng);
      const double v = intercept + gamma[0] * x[0] - gamma[1] * x[1] + gamma[2] * x[2] - gamma[3] * x[3];
      for (int k = 0; k < 4; ++k) pc.markers(i, k) = x[k];
      const double prob = spec.link == Link::F ? expit(v) : link_g(v);
      pc.outcomes[static_cast<std::size_t>(i)] = detail::bernoulli(rng, prob);
    }
    pop.centers.push_back(std::move(pc));
  }
  return pop;
}

inline Population generate(const PopulationSpec& spec) {
  switch (spec.family) {
    case Family::TwoMarkerOutlier: return gen_two_marker(spec);
    case Family::TenMarker: return gen_ten_marker(spec);
    case Family::FourMarker: return gen_four_marker(spec);
  }
  throw ConfigError("unknown family");
}

struct StudySample {
  Dataset train;
  std::vector<std::string> train_centers;  // sampled population centers, in sampling order
  std::vector<CenterView> test;            // every non-sampled, non-concordant center
  std::vector<std::string> test_dropped;
};

/// Samples m centers without replacement, n_c rows without replacement within
/// each; the remaining M - m centers in full form the test data.
inline StudySample sample_study(const Population& pop, const PopulationSpec& spec) {
  spec.validate();
  if (static_cast<int>(pop.centers.size()) != spec.M) throw ConfigError("population does not match spec M");
  auto rng = derive_stream(spec.seed, {0x5a3});
  std::vector<int> order(static_cast<std::size_t>(spec.M));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  StudySample s;
  std::vector<std::string> centers;
  std::vector<int> outcomes;
  Matrix x(static_cast<Eigen::Index>(spec.m) * spec.n_c, pop.p);
  Eigen::Index r = 0;
  std::vector<int> rows(static_cast<std::size_t>(spec.N_c));
  for (int k = 0; k < spec.m; ++k) {
    const auto& pc = pop.centers[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    s.train_centers.push_back(pc.label);
    std::iota(rows.begin(), rows.end(), 0);
    // partial Fisher-Yates: first n_c entries are a uniform sample without replacement
    for (int i = 0; i < spec.n_c; ++i) {
      std::uniform_int_distribution<int> pick(i, spec.N_c - 1);
      std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(pick(rng))]);
      const int row = rows[static_cast<std::size_t>(i)];
      x.row(r++) = pc.markers.row(row);
      centers.push_back(pc.label);
      outcomes.push_back(pc.outcomes[static_cast<std::size_t>(row)]);
    }
  }
  s.train = Dataset(std::move(centers), std::move(outcomes), std::move(x));

  for (int k = spec.m; k < spec.M; ++k) {
    const auto& pc = pop.centers[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    CenterView v;
    if (make_center_view(pc.markers, pc.outcomes, pc.label, v))
      s.test.push_back(std::move(v));
    else
      s.test_dropped.push_back(pc.label);
  }
  return s;
}

enum class Method { GLM, SaAUC };

inline const char* to_string(Method m) { return m == Method::GLM ? "GLM" : "SaAUC"; }

struct MethodOutcome {
  Method method = Method::GLM;
  Vector theta;
  double aauc = 0.0;     // on test centers, test case-count weights
  double min_auc = 0.0;
  double max_auc = 0.0;
  // SaAUC only: smoothed training objective at the logistic start and at the optimum
  double start_objective = 0.0;
  double objective = 0.0;
  bool converged = true;
};

struct ReplicationRecord {
  bool ok = false;
  std::string error;
  std::size_t dropped_train_centers = 0;
  std::vector<MethodOutcome> outcomes;  // in the requested method order
};

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

struct MethodSummary {
  Method method = Method::GLM;
  Moments aauc, min_auc, max_auc;
  std::size_t completed = 0;
};

struct StudySummary {
  PopulationSpec spec;
  int replications = 0;
  std::size_t completed = 0;
  std::vector<MethodSummary> methods;
  std::vector<ReplicationRecord> records;

  double completeness() const {
    return replications > 0 ? static_cast<double>(completed) / replications : 0.0;
  }
  const MethodSummary& summary(Method m) const {
    for (const auto& s : methods)
      if (s.method == m) return s;
    throw PreconditionError(std::string("method ") + to_string(m) + " was not run");
  }
};

/// One replication: fresh population, train/test sample, fit each method, test evaluation.
inline ReplicationRecord run_replication(const PopulationSpec& spec, const std::vector<Method>& methods,
                                         const FitConfig& config) {
  ReplicationRecord rec;
  const auto pop = generate(spec);
  const auto sample = sample_study(pop, spec);
  const auto train_split = split_centers(sample.train, false);
  rec.dropped_train_centers = train_split.dropped.size();

  std::optional<FitReport> saauc;
  for (auto m : methods)
    if (m == Method::SaAUC) saauc = fit(sample.train, config);

  for (auto m : methods) {
    MethodOutcome out;
    out.method = m;
    if (m == Method::GLM) {
      // the SaAUC start is exactly this direction; reuse it when available
      out.theta = saauc && config.start != StartPolicy::User
                      ? saauc->theta_start
                      : direction_from(fit_logistic(train_split.views, config.logistic)).theta;
    } else {
      out.theta = saauc->theta;
      out.start_objective = saauc->start_objective();
      out.objective = saauc->objective();
      out.converged = saauc->optimizer.converged;
    }
    const auto perf = adjusted_auc(out.theta, sample.test);
    out.aauc = perf.aauc;
    out.min_auc = perf.min_auc();
    out.max_auc = perf.max_auc();
    rec.outcomes.push_back(std::move(out));
  }
  rec.ok = true;
  return rec;
}

inline StudySummary run_study(const PopulationSpec& spec, int replications, const std::vector<Method>& methods,
                              const FitConfig& config = {}, unsigned threads = 1) {
  spec.validate();
  config.validate();
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (methods.empty()) throw ConfigError("at least one method is required");

  StudySummary summary;
  summary.spec = spec;
  summary.replications = replications;
  summary.records.resize(static_cast<std::size_t>(replications));
  parallel_for(static_cast<std::size_t>(replications), threads, [&](std::size_t r) {
    PopulationSpec rep = spec;
    rep.seed = derive_stream(spec.seed, {0x51, r})();
    try {
      summary.records[r] = run_replication(rep, methods, config);
    } catch (const Error& e) {
      summary.records[r].ok = false;
      summary.records[r].error = e.what();
    }
  });

  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<double> a, lo, hi;
    for (const auto& rec : summary.records) {
      if (!rec.ok) continue;
      a.push_back(rec.outcomes[k].aauc);
      lo.push_back(rec.outcomes[k].min_auc);
      hi.push_back(rec.outcomes[k].max_auc);
    }
    MethodSummary ms;
    ms.method = methods[k];
    ms.aauc = moments(a);
    ms.min_auc = moments(lo);
    ms.max_auc = moments(hi);
    ms.completed = a.size();
    summary.methods.push_back(ms);
  }
  for (const auto& rec : summary.records) summary.completed += rec.ok ? 1 : 0;
  return summary;
}

}  // namespace caauc
