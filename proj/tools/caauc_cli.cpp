// caauc: fit, evaluate, cross-validate, bootstrap and simulate center-adjusted
// AUC biomarker combinations.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "caauc/caauc.hpp"

namespace {

using namespace caauc;

struct InputOptions {
  std::string path;
  std::string delimiter = "comma";
  std::string center_col = "center";
  std::string outcome_col = "outcome";
  std::vector<std::string> markers;
};

struct FitOptions {
  double lambda = 0.0;
  bool standardize = true;
  int restarts = 0;
  int max_iterations = 500;
};

struct Common {
  std::string output;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("-i,--input", in.path, "Delimited input file with a header row")->required();
  cmd->add_option("--delimiter", in.delimiter, "Field delimiter")
      ->check(CLI::IsMember({"comma", "tab"}))
      ->capture_default_str();
  cmd->add_option("--center-col", in.center_col, "Center column name")->capture_default_str();
  cmd->add_option("--outcome-col", in.outcome_col, "Outcome column name (0/1)")->capture_default_str();
  cmd->add_option("--markers", in.markers, "Marker columns (default: all other columns)")->delimiter(',');
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-o,--output", c.output, "Output file (default: standard output)");
  cmd->add_option("--seed", c.seed, "Root random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_fit(CLI::App* cmd, FitOptions& f) {
  cmd->add_option("--lambda", f.lambda, "Variability penalty (>= 0)")->capture_default_str();
  cmd->add_flag("--standardize,!--no-standardize", f.standardize, "Scale markers to unit variance before fitting")
      ->capture_default_str();
  cmd->add_option("--restarts", f.restarts, "Extra random-direction starts")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iterations, "Optimizer iteration limit")->capture_default_str();
}

FitConfig make_fit_config(const FitOptions& f, std::uint64_t seed) {
  if (!(f.lambda >= 0.0)) throw ConfigError("--lambda must be >= 0, got " + format_number(f.lambda));
  if (f.restarts < 0) throw ConfigError("--restarts must be >= 0");
  if (f.max_iterations < 1) throw ConfigError("--max-iter must be >= 1");
  FitConfig cfg;
  cfg.lambda = f.lambda;
  cfg.standardize = f.standardize;
  cfg.optimizer.max_iterations = f.max_iterations;
  cfg.optimizer.restarts = f.restarts;
  cfg.optimizer.seed = seed;
  cfg.start = f.restarts > 0 ? StartPolicy::LogisticWithRestarts : StartPolicy::Logistic;
  cfg.validate();
  return cfg;
}

KeyValues input_config(const InputOptions& in) {
  std::string markers;
  for (std::size_t i = 0; i < in.markers.size(); ++i) markers += (i ? ";" : "") + in.markers[i];
  return {{"input", in.path},
          {"delimiter", in.delimiter},
          {"center_col", in.center_col},
          {"outcome_col", in.outcome_col},
          {"markers", markers.empty() ? "(all)" : markers}};
}

KeyValues fit_config(const FitOptions& f) {
  return {{"lambda", format_number(f.lambda)},
          {"standardize", f.standardize ? "true" : "false"},
          {"restarts", std::to_string(f.restarts)},
          {"max_iter", std::to_string(f.max_iterations)}};
}

KeyValues common_config(const Common& c) {
  return {{"seed", std::to_string(c.seed)}, {"threads", std::to_string(c.threads)}};
}

KeyValues concat(std::initializer_list<KeyValues> parts) {
  KeyValues out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Dataset read_input(const InputOptions& in) {
  std::ifstream file(in.path);
  if (!file) throw IoError("cannot open input file '" + in.path + "'");
  TableSchema schema;
  schema.center_column = in.center_col;
  schema.outcome_column = in.outcome_col;
  schema.marker_columns = in.markers;
  schema.delimiter = in.delimiter == "tab" ? '\t' : ',';
  return load_table(file, schema);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing output file '" + path + "'");
}

Vector parse_theta(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("--theta needs at least one coefficient");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) v(static_cast<Eigen::Index>(k)) = values[k];
  return v;
}

Family parse_family(const std::string& s) {
  if (s == "two_marker_outlier") return Family::TwoMarkerOutlier;
  if (s == "ten_marker") return Family::TenMarker;
  return Family::FourMarker;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Center-adjusted AUC biomarker combinations"};
  app.set_version_flag("--version", std::string("caauc ") + kVersion);
  app.require_subcommand(1);

  InputOptions in;
  FitOptions fo;
  Common common;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a combination maximizing the smoothed adjusted AUC");
  add_input(fit_cmd, in);
  add_fit(fit_cmd, fo);
  add_common(fit_cmd, common);

  auto* eval_cmd = app.add_subcommand("evaluate", "Empirical per-center and adjusted AUC of given coefficients");
  std::vector<double> theta_values;
  std::optional<double> reference;
  add_input(eval_cmd, in);
  add_common(eval_cmd, common);
  eval_cmd->add_option("--theta", theta_values, "Coefficients, comma separated, in marker order")
      ->delimiter(',')
      ->required();
  eval_cmd->add_option("--reference", reference, "External reference aAUC for the variability summary");

  auto* cv_cmd = app.add_subcommand("cv", "Leave-one-center-out cross-validation over a lambda grid");
  int grid_size = 50;
  double grid_min = 0.1, grid_max = 200.0;
  add_input(cv_cmd, in);
  add_fit(cv_cmd, fo);
  add_common(cv_cmd, common);
  cv_cmd->add_option("--grid-size", grid_size, "Number of lambda values")->capture_default_str();
  cv_cmd->add_option("--grid-min", grid_min, "Smallest lambda")->capture_default_str();
  cv_cmd->add_option("--grid-max", grid_max, "Largest lambda")->capture_default_str();

  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap-corrected apparent adjusted AUC");
  int replicates = 200;
  std::string scheme = "stratified";
  add_input(boot_cmd, in);
  add_fit(boot_cmd, fo);
  add_common(boot_cmd, common);
  boot_cmd->add_option("-B,--replicates", replicates, "Bootstrap replicates")->capture_default_str();
  boot_cmd->add_option("--scheme", scheme, "Resampling scheme")
      ->check(CLI::IsMember({"stratified", "by-center"}))
      ->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "Train/test simulation study comparing GLM and SaAUC");
  PopulationSpec spec;
  std::string family = "two_marker_outlier", link = "f", variance = "per-marker";
  int reps = 100;
  std::vector<std::string> methods{"GLM", "SaAUC"};
  std::vector<double> intercept_range, sigma_range, gamma_range;
  double sim_lambda = 0.0;
  add_common(sim_cmd, common);
  sim_cmd->add_option("--family", family, "Population family")
      ->check(CLI::IsMember({"two_marker_outlier", "ten_marker", "four_marker"}))
      ->capture_default_str();
  sim_cmd->add_option("--pi", spec.pi, "Outlier probability (two_marker_outlier)")->capture_default_str();
  sim_cmd->add_option("--reps", reps, "Replications")->capture_default_str();
  sim_cmd->add_option("--M", spec.M, "Population centers")->capture_default_str();
  sim_cmd->add_option("--Nc", spec.N_c, "Observations per population center")->capture_default_str();
  sim_cmd->add_option("--m", spec.m, "Sampled training centers")->capture_default_str();
  sim_cmd->add_option("--nc", spec.n_c, "Sampled observations per training center")->capture_default_str();
  sim_cmd->add_option("--link", link, "Four-marker link: f (logistic) or g (asymmetric)")
      ->check(CLI::IsMember({"f", "g"}))
      ->capture_default_str();
  sim_cmd->add_option("--variance", variance, "Four-marker variance mode")
      ->check(CLI::IsMember({"per-marker", "per-center"}))
      ->capture_default_str();
  sim_cmd->add_option("--intercept-range", intercept_range, "Center intercept Uniform(lo,hi)")->delimiter(',')->expected(2);
  sim_cmd->add_option("--sigma-range", sigma_range, "Four-marker sd Uniform(lo,hi)")->delimiter(',')->expected(2);
  sim_cmd->add_option("--gamma-range", gamma_range, "Four-marker coefficient Uniform(lo,hi)")->delimiter(',')->expected(2);
  sim_cmd->add_option("--methods", methods, "Methods to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"GLM", "SaAUC"}))
      ->capture_default_str();
  sim_cmd->add_option("--lambda", sim_lambda, "Penalty for the SaAUC fits")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ostringstream out;
  try {
    if (*fit_cmd) {
      const auto cfg = make_fit_config(fo, common.seed);
      const auto data = read_input(in);
      write_comment_header(out, "fit", concat({input_config(in), fit_config(fo), common_config(common)}));
      const auto report = fit(data, cfg);
      write_fit_report(out, report, data.marker_names());
    } else if (*eval_cmd) {
      const auto theta = parse_theta(theta_values);
      const auto data = read_input(in);
      KeyValues kv = concat({input_config(in), common_config(common)});
      std::string t;
      for (std::size_t k = 0; k < theta_values.size(); ++k) t += (k ? ";" : "") + format_number(theta_values[k]);
      kv.emplace_back("theta", t);
      kv.emplace_back("reference", reference ? format_number(*reference) : "(none)");
      write_comment_header(out, "evaluate", kv);
      write_performance(out, evaluate(theta, data, reference));
    } else if (*cv_cmd) {
      CvConfig cv;
      cv.fit = make_fit_config(fo, common.seed);
      cv.grid = log_grid(grid_size, grid_min, grid_max);
      cv.seed = common.seed;
      cv.threads = common.threads;
      cv.validate();
      const auto data = read_input(in);
      KeyValues kv = concat({input_config(in), fit_config(fo), common_config(common)});
      kv.emplace_back("grid", std::to_string(grid_size) + " log-spaced values on [" + format_number(grid_min) +
                                  ", " + format_number(grid_max) + "]");
      write_comment_header(out, "cv", kv);
      emit_cv_table(run_lococv(data, cv), out);
    } else if (*boot_cmd) {
      BootstrapConfig bc;
      bc.fit = make_fit_config(fo, common.seed);
      bc.replicates = replicates;
      bc.scheme = scheme == "by-center" ? BootstrapScheme::ByCenter : BootstrapScheme::Stratified;
      bc.seed = common.seed;
      bc.threads = common.threads;
      bc.validate();
      const auto data = read_input(in);
      KeyValues kv = concat({input_config(in), fit_config(fo), common_config(common)});
      kv.emplace_back("replicates", std::to_string(replicates));
      kv.emplace_back("scheme", scheme);
      write_comment_header(out, "bootstrap", kv);
      write_bootstrap(out, bootstrap_corrected_aauc(data, bc));
    } else if (*sim_cmd) {
      if (reps < 1) throw ConfigError("--reps must be >= 1");
      spec.family = parse_family(family);
      spec.link = link == "g" ? Link::G : Link::F;
      spec.variance = variance == "per-center" ? VarianceMode::PerCenter : VarianceMode::PerMarkerPerCenter;
      if (!intercept_range.empty()) spec.intercept = UniformRange{intercept_range[0], intercept_range[1]};
      if (!sigma_range.empty()) spec.sigma = {sigma_range[0], sigma_range[1]};
      if (!gamma_range.empty()) spec.gamma = {gamma_range[0], gamma_range[1]};
      spec.seed = common.seed;
      spec.validate();
      std::vector<Method> ms;
      for (const auto& m : methods) ms.push_back(m == "GLM" ? Method::GLM : Method::SaAUC);
      FitConfig cfg;
      cfg.lambda = sim_lambda;
      cfg.validate();

      const auto ir = spec.intercept_range();
      KeyValues kv{{"family", family},
                   {"pi", format_number(spec.pi)},
                   {"reps", std::to_string(reps)},
                   {"M", std::to_string(spec.M)},
                   {"Nc", std::to_string(spec.N_c)},
                   {"m", std::to_string(spec.m)},
                   {"nc", std::to_string(spec.n_c)},
                   {"link", link},
                   {"variance", variance},
                   {"intercept_range", format_number(ir.lo) + ";" + format_number(ir.hi)},
                   {"sigma_range", format_number(spec.sigma.lo) + ";" + format_number(spec.sigma.hi)},
                   {"gamma_range", format_number(spec.gamma.lo) + ";" + format_number(spec.gamma.hi)},
                   {"lambda", format_number(sim_lambda)}};
      std::string mlist;
      for (std::size_t i = 0; i < methods.size(); ++i) mlist += (i ? ";" : "") + methods[i];
      kv.emplace_back("methods", mlist);
      for (auto& p : common_config(common)) kv.push_back(p);
      write_comment_header(out, "simulate", kv);

      log::silence();
      const auto summary = run_study(spec, reps, ms, cfg, common.threads);
      out << "# completed replications: " << summary.completed << " of " << summary.replications << '\n';
      write_study_summary(out, summary);
    }
    emit(common.output, out.str());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
