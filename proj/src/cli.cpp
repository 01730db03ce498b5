#include "pcluster/cli.hpp"

#include "pcluster/clustering.hpp"
#include "pcluster/error.hpp"
#include "pcluster/io.hpp"
#include "pcluster/methods.hpp"
#include "pcluster/simulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pcluster {

Standardization fit_standardization(const PanelData& panel) {
  auto moments = [](const MatrixXd& w) {
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    return std::pair{mean, std::sqrt(var)};
  };
  Standardization s;
  std::tie(s.y_mean, s.y_sd) = moments(panel.y());
  for (const auto& xk : panel.xs()) {
    const auto [m, sd] = moments(xk);
    s.x_mean.push_back(m);
    s.x_sd.push_back(sd);
  }
  auto positive = [](double sd) { return sd > 0.0 && std::isfinite(sd); };
  if (!positive(s.y_sd) || !std::all_of(s.x_sd.begin(), s.x_sd.end(), positive))
    throw Error(ErrorKind::InvalidInput, "cannot standardize a constant variable");
  return s;
}

PanelData standardize(const PanelData& panel, const Standardization& s) {
  std::vector<MatrixXd> xs;
  for (std::size_t k = 0; k < panel.xs().size(); ++k)
    xs.push_back((panel.xs()[k].array() - s.x_mean[k]) / s.x_sd[k]);
  return PanelData((panel.y().array() - s.y_mean) / s.y_sd, std::move(xs), panel.unit_ids(), panel.time_ids());
}

EstimateResult rescale(EstimateResult r, const Standardization& s) {
  for (Index k = 0; k < r.beta.size(); ++k) {
    const double factor = s.y_sd / s.x_sd[static_cast<std::size_t>(k)];
    r.beta(k) *= factor;
    r.se(k) *= factor;
  }
  r.residuals *= s.y_sd;
  return r;
}

namespace {

constexpr int kPaperApplicationStarts = 10000;

struct CommonOptions {
  std::string input;
  std::string output;
  std::string format = "json";
  std::string units = "auto";
  std::string periods = "auto";
  bool standardize = false;
  std::uint64_t seed = 1;
  int n_starts = kDefaultStarts;
  int threads = 1;
  bool paper_application = false;
};

ClusterCount parse_count(const std::string& s, const char* flag) {
  if (s == "auto") return kAutoClusters;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
    throw Error(ErrorKind::InvalidInput, std::string(flag) + " must be a positive integer or 'auto'");
  return v;
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("PCLUSTER_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw Error(ErrorKind::InvalidInput, "PCLUSTER_SEED is not an unsigned integer");
    return v;
  }
  return flag_seed;
}

// Writes to the file named by `path`, or to `fallback` when path is empty.
template <typename F>
void with_output(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorKind::InvalidInput, "cannot write '" + path + "'");
  write(file);
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

int cmd_estimate(const CommonOptions& o, const std::string& estimator, bool hierarchical, std::ostream& out) {
  const auto method = parse_method(estimator);
  if (!method) throw Error(ErrorKind::InvalidInput, "unknown estimator '" + estimator + "'");
  const PanelData raw = read_panel_csv_file(o.input);
  const std::uint64_t seed = effective_seed(o.seed);

  EstimatorSpec spec;
  spec.method = *method;
  spec.units = parse_count(o.units, "--G");
  spec.periods = parse_count(o.periods, "--C");
  spec.n_starts = o.paper_application && uses_clusters(*method) ? kPaperApplicationStarts : o.n_starts;
  spec.hierarchical = hierarchical;
  const bool standardized = o.standardize || (o.paper_application && *method != Method::Twfe);

  EstimateResult result;
  if (standardized) {
    const Standardization s = fit_standardization(raw);
    result = rescale(run_estimator(spec, standardize(raw, s), Seed(seed)), s);
  } else {
    result = run_estimator(spec, raw, Seed(seed));
  }

  std::vector<double> p(static_cast<std::size_t>(result.beta.size()));
  std::vector<std::string> stars;
  for (Index k = 0; k < result.beta.size(); ++k) {
    p[static_cast<std::size_t>(k)] = normal_p_value(result.beta(k), result.se(k));
    stars.push_back(significance_stars(p[static_cast<std::size_t>(k)]));
  }

  with_output(o.output, out, [&](std::ostream& os) {
    if (o.format == "json") {
      nlohmann::json j = to_json(result);
      j["p_value"] = p;
      j["stars"] = stars;
      j["standardized"] = standardized;
      j["seed"] = seed;
      os << j.dump(2) << '\n';
    } else if (o.format == "csv") {
      char buf[32];
      os << "term,beta,se,p_value,stars,dof,G,C,n_obs\n";
      auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
        return s;
      };
      for (Index k = 0; k < result.beta.size(); ++k) {
        os << 'x' << (k + 1);
        for (double v : {result.beta(k), result.se(k), p[static_cast<std::size_t>(k)]}) {
          std::snprintf(buf, sizeof buf, "%.17g", v);
          os << ',' << buf;
        }
        os << ',' << stars[static_cast<std::size_t>(k)] << ',' << result.dof << ',' << join(result.unit_clusters)
           << ',' << join(result.time_clusters) << ',' << result.n_obs << '\n';
      }
    } else {
      os << "method: " << result.method << "  (n_obs " << result.n_obs << ", dof " << result.dof << ")\n";
      for (Index k = 0; k < result.beta.size(); ++k)
        os << 'x' << (k + 1) << "  " << fixed3(result.beta(k)) << stars[static_cast<std::size_t>(k)] << "  ("
           << fixed3(result.se(k)) << ")\n";
      if (!result.unit_clusters.empty()) {
        os << "G:";
        for (int g : result.unit_clusters) os << ' ' << g;
        os << '\n';
      }
      if (!result.time_clusters.empty()) {
        os << "C:";
        for (int c : result.time_clusters) os << ' ' << c;
        os << '\n';
      }
    }
  });
  return exit_code::ok;
}

nlohmann::json matrix_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

int cmd_cluster(const CommonOptions& o, const std::string& method, std::ostream& out) {
  const PanelData raw = read_panel_csv_file(o.input);
  const PanelData panel = o.standardize || o.paper_application ? standardize(raw, fit_standardization(raw)) : raw;
  const std::uint64_t seed = effective_seed(o.seed);
  const int starts = o.paper_application ? kPaperApplicationStarts : o.n_starts;

  Partition units, periods;
  nlohmann::json diag;
  if (method == "kmeans") {
    const auto cl = two_way_cluster(panel, parse_count(o.units, "--G"), parse_count(o.periods, "--C"),
                                    KMeansOptions{starts, Seed(seed)});
    units = cl.units.partition;
    periods = cl.periods.partition;
    diag["unit_noise"] = cl.inputs.unit_noise;
    diag["period_noise"] = cl.inputs.period_noise;
    diag["unit_objective"] = cl.units.objective / static_cast<double>(panel.num_units());
    diag["period_objective"] = cl.periods.objective / static_cast<double>(panel.num_periods());
    if (cl.unit_selection) diag["unit_objectives"] = cl.unit_selection->objectives;
    if (cl.period_selection) diag["period_objectives"] = cl.period_selection->objectives;
    diag["unit_centers"] = matrix_json(units.centers);
    diag["time_centers"] = matrix_json(periods.centers);
  } else if (method == "hierarchical") {
    const auto du = pseudo_distance_units(panel);
    const auto dt = pseudo_distance_periods(panel);
    units = hierarchical_cluster(du, hierarchical_cluster_cap(panel.num_units())).partition;
    periods = hierarchical_cluster(dt, hierarchical_cluster_cap(panel.num_periods())).partition;
    diag["unit_threshold"] = du.threshold;
    diag["period_threshold"] = dt.threshold;
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown clustering method '" + method + "'");
  }
  diag["method"] = method;
  diag["G"] = units.num_clusters;
  diag["C"] = periods.num_clusters;
  diag["seed"] = seed;

  const std::filesystem::path dir = o.output.empty() ? std::filesystem::path(".") : std::filesystem::path(o.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  with_output((dir / "unit_clusters.csv").string(), out,
              [&](std::ostream& os) { write_partition_csv(os, panel.unit_ids(), units); });
  with_output((dir / "time_clusters.csv").string(), out,
              [&](std::ostream& os) { write_partition_csv(os, panel.time_ids(), periods); });
  out << diag.dump(2) << '\n';
  return exit_code::ok;
}

struct SimulateOptions {
  int dgp = 1;
  double rho = 0.0;
  double kappa = 0.0;
  double beta = 1.0;
  int num_units = 50;
  std::vector<int> periods{50};
  int reps = 100;
  int burn_in = 10000;
  std::vector<std::string> estimators{"baseline"};
  double max_failure_rate = 0.5;
};

int cmd_simulate(const CommonOptions& o, const SimulateOptions& s, std::ostream& out) {
  const std::uint64_t seed = effective_seed(o.seed);
  std::vector<std::string> names = s.estimators;
  if (names.size() == 1 && names.front() == "all")
    names = {"baseline", "crossfit", "twfe", "interactive", "cce", "fa", "blm1", "blm2"};
  std::vector<NamedEstimator> estimators;
  for (const auto& name : names) {
    const auto m = parse_method(name);
    if (!m) throw Error(ErrorKind::InvalidInput, "unknown estimator '" + name + "'");
    EstimatorSpec spec;
    spec.method = *m;
    spec.units = parse_count(o.units, "--G");
    spec.periods = parse_count(o.periods, "--C");
    spec.n_starts = o.n_starts;
    estimators.push_back(named_estimator(spec));
  }

  std::vector<SummaryRow> rows;
  bool too_many_failures = false;
  for (int T : s.periods) {
    DgpConfig cfg;
    cfg.num_units = s.num_units;
    cfg.num_periods = T;
    cfg.dgp = s.dgp;
    cfg.rho = s.rho;
    cfg.kappa = s.kappa;
    cfg.beta = s.beta;
    cfg.burn_in = s.burn_in;
    cfg.seed = seed;
    for (auto& summary : run_monte_carlo(cfg, estimators, s.reps, o.threads)) {
      if (summary.n_failed > s.max_failure_rate * summary.n_reps) too_many_failures = true;
      rows.push_back({T, std::move(summary)});
    }
  }

  with_output(o.output, out, [&](std::ostream& os) {
    if (o.format == "json") {
      nlohmann::json j;
      j["seed"] = seed;
      j["dgp"] = s.dgp;
      j["rho"] = s.rho;
      j["kappa"] = s.kappa;
      j["N"] = s.num_units;
      j["reps"] = s.reps;
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) {
        auto num = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
        arr.push_back({{"estimator", r.summary.estimator},
                       {"T", r.num_periods},
                       {"bias", num(r.summary.bias)},
                       {"variance", num(r.summary.variance)},
                       {"coverage", num(r.summary.coverage)},
                       {"width", num(r.summary.width)},
                       {"G_hat", num(r.summary.mean_unit_clusters)},
                       {"C_hat", num(r.summary.mean_time_clusters)},
                       {"n_reps", r.summary.n_reps},
                       {"n_failed", r.summary.n_failed}});
      }
      j["rows"] = arr;
      os << j.dump(2) << '\n';
    } else {
      os << "# seed=" << seed << " dgp=" << s.dgp << " rho=" << s.rho << " kappa=" << s.kappa
         << " N=" << s.num_units << " reps=" << s.reps << '\n';
      write_summary_csv(os, rows);
    }
  });
  return too_many_failures ? exit_code::estimation_error : exit_code::ok;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--output,-o", o.output, "Output path (stdout when omitted; a directory for `cluster`)");
  cmd->add_option("--G", o.units, "Number of unit clusters or 'auto'");
  cmd->add_option("--C", o.periods, "Number of time clusters or 'auto'");
  cmd->add_option("--seed", o.seed, "Master seed (PCLUSTER_SEED overrides)");
  cmd->add_option("--n-starts", o.n_starts, "k-means random starts")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-way grouped fixed effects estimation for panel data", "pcluster"};
  app.require_subcommand(1);
  CommonOptions o;

  auto* est = app.add_subcommand("estimate", "Estimate the slope of y on x");
  std::string estimator = "baseline";
  std::string cluster_method = "kmeans";
  add_common(est, o);
  est->add_option("--input,-i", o.input, "Panel CSV (unit,time,y,x1..)")->required();
  est->add_option("--estimator", estimator, "baseline|crossfit|blm1|blm2|twfe|interactive|cce|fa");
  est->add_option("--format", o.format, "json|csv|table")->check(CLI::IsMember({"json", "csv", "table"}));
  est->add_flag("--standardize", o.standardize, "Estimate on standardized data and rescale");
  est->add_flag("--paper-application", o.paper_application,
                "10000 k-means starts; standardize for every estimator but twfe");
  est->add_option("--clustering", cluster_method, "kmeans|hierarchical (baseline only)")
      ->check(CLI::IsMember({"kmeans", "hierarchical"}));

  auto* clu = app.add_subcommand("cluster", "Two-way clustering and cluster-count diagnostics");
  add_common(clu, o);
  clu->add_option("--input,-i", o.input, "Panel CSV (unit,time,y,x1..)")->required();
  clu->add_flag("--standardize", o.standardize, "Cluster standardized data");
  clu->add_flag("--paper-application", o.paper_application, "10000 k-means starts on standardized data");
  clu->add_option("--method", cluster_method, "kmeans|hierarchical")->check(CLI::IsMember({"kmeans", "hierarchical"}));

  auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment");
  SimulateOptions s;
  add_common(sim, o);
  sim->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--dgp", s.dgp, "Design 1 or 2")->check(CLI::IsMember({1, 2}));
  sim->add_option("--rho", s.rho, "AR coefficient of the time effect")->check(CLI::Range(0.0, 0.999999));
  sim->add_option("--kappa", s.kappa, "AR coefficient of the errors")->check(CLI::Range(0.0, 0.999999));
  sim->add_option("--beta", s.beta, "True slope");
  sim->add_option("--N", s.num_units, "Number of units")->check(CLI::PositiveNumber);
  sim->add_option("--T", s.periods, "Number of periods (comma list)")->delimiter(',');
  sim->add_option("--reps", s.reps, "Replications")->check(CLI::PositiveNumber);
  sim->add_option("--burn-in", s.burn_in, "Burn-in of the time-effect recursion")->check(CLI::NonNegativeNumber);
  sim->add_option("--estimator", s.estimators, "Comma list of estimators or 'all'")->delimiter(',');
  sim->add_option("--max-failure-rate", s.max_failure_rate, "Exit 3 when a failure share exceeds this");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::input_error;
  }
  if (sim->parsed() && !sim->count("--format")) o.format = "csv";

  try {
    if (est->parsed()) return cmd_estimate(o, estimator, cluster_method == "hierarchical", out);
    if (clu->parsed()) return cmd_cluster(o, cluster_method, out);
    return cmd_simulate(o, s, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? exit_code::input_error : exit_code::estimation_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::estimation_error;
  }
}

}  // namespace pcluster
