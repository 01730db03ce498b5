#include "pcluster/simulation.hpp"

#include "pcluster/error.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace pcluster {

void DgpConfig::check() const {
  if (num_units < 2 || num_periods < 2) throw Error(ErrorKind::InvalidInput, "DGP needs N >= 2 and T >= 2");
  if (dgp != 1 && dgp != 2) throw Error(ErrorKind::InvalidInput, "DGP id must be 1 or 2");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidInput, "rho must lie in [0, 1)");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw Error(ErrorKind::InvalidInput, "kappa must lie in [0, 1)");
  if (burn_in < 0) throw Error(ErrorKind::InvalidInput, "burn-in must be non-negative");
}

std::pair<double, double> gamma_innovation_params(double rho) {
  const double denom = 1.0 - rho * rho;
  return {(1.0 - rho) * (1.0 - rho) / denom, (1.0 - rho) / denom};
}

VectorXd draw_gamma_ar1(Index num_periods, double rho, int burn_in, std::mt19937_64& engine) {
  const auto [shape, scale] = gamma_innovation_params(rho);
  std::gamma_distribution<double> init(1.0, 1.0);
  std::gamma_distribution<double> innovation(shape, scale);
  double g = init(engine);
  for (int s = 0; s < burn_in; ++s) g = rho * g + innovation(engine);
  VectorXd out(num_periods);
  for (Index t = 0; t < num_periods; ++t) {
    g = rho * g + innovation(engine);
    out(t) = g;
  }
  return out;
}

MatrixXd draw_errors_ar1(Index num_units, Index num_periods, double kappa, std::mt19937_64& engine) {
  std::normal_distribution<double> std_normal(0.0, 1.0);
  const double innov_sd = std::sqrt(1.0 - kappa * kappa);
  MatrixXd w(num_units, num_periods);
  for (Index i = 0; i < num_units; ++i) {
    w(i, 0) = std_normal(engine);
    for (Index t = 1; t < num_periods; ++t) w(i, t) = kappa * w(i, t - 1) + innov_sd * std_normal(engine);
  }
  return w;
}

HeterogeneityValues dgp_functions(int dgp, double alpha, double gamma) {
  if (dgp == 1) {
    if (alpha < 0.0 || gamma < 0.0)
      throw Error(ErrorKind::DomainError, "design 1 needs non-negative alpha and gamma");
    const double base = 0.5 * std::pow(alpha, 10.0) + 0.5 * std::pow(gamma, 10.0);
    return {std::pow(base, 0.1), std::pow(base, 0.2)};
  }
  if (dgp == 2) {
    const double ag = alpha * gamma;
    return {alpha * alpha + ag + std::sin(ag), gamma * gamma + ag + std::sin(ag)};
  }
  throw Error(ErrorKind::InvalidInput, "DGP id must be 1 or 2");
}

DgpDraw simulate_panel(const DgpConfig& config, Seed seed) {
  config.check();
  const Index N = config.num_units, T = config.num_periods;

  auto alpha_engine = seed.child(0).engine();
  std::gamma_distribution<double> unit_effect(1.0, 1.0);
  VectorXd alpha(N);
  for (Index i = 0; i < N; ++i) alpha(i) = unit_effect(alpha_engine);

  auto gamma_engine = seed.child(1).engine();
  VectorXd gamma = draw_gamma_ar1(T, config.rho, config.burn_in, gamma_engine);
  auto u_engine = seed.child(2).engine();
  MatrixXd u = draw_errors_ar1(N, T, config.kappa, u_engine);
  auto v_engine = seed.child(3).engine();
  MatrixXd v = draw_errors_ar1(N, T, config.kappa, v_engine);

  MatrixXd f(N, T), h(N, T);
  for (Index i = 0; i < N; ++i)
    for (Index t = 0; t < T; ++t) {
      const auto fh = dgp_functions(config.dgp, alpha(i), gamma(t));
      f(i, t) = fh.f;
      h(i, t) = fh.h;
    }
  MatrixXd x = h + u;
  MatrixXd y = x * config.beta + f + v;
  std::vector<MatrixXd> xs{std::move(x)};
  return DgpDraw{PanelData(std::move(y), std::move(xs)), std::move(alpha), std::move(gamma), std::move(u),
                 std::move(v), std::move(f), std::move(h)};
}

McSummary summarize(std::string estimator, std::span<const RepOutcome> reps, double true_beta) {
  McSummary s;
  s.estimator = std::move(estimator);
  s.n_reps = static_cast<int>(reps.size());
  double sum = 0.0, covered = 0.0, width = 0.0, g = 0.0, c = 0.0;
  int ok = 0;
  for (const auto& r : reps) {
    if (!r.ok) {
      ++s.n_failed;
      continue;
    }
    ++ok;
    sum += r.beta;
    if (std::abs(r.beta - true_beta) <= kNormalQuantile975 * r.se) covered += 1.0;
    width += 2.0 * kNormalQuantile975 * r.se;
    g += r.unit_clusters;
    c += r.time_clusters;
  }
  if (ok == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.bias = s.variance = s.coverage = s.width = s.mean_unit_clusters = s.mean_time_clusters = nan;
    return s;
  }
  const double n = static_cast<double>(ok);
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& r : reps)
    if (r.ok) ss += (r.beta - mean) * (r.beta - mean);
  s.bias = mean - true_beta;
  s.variance = ok > 1 ? ss / (n - 1.0) : 0.0;
  s.coverage = covered / n;
  s.width = width / n;
  s.mean_unit_clusters = g / n;
  s.mean_time_clusters = c / n;
  return s;
}

namespace {

double mean_or_nan(const std::vector<int>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (int x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

NamedEstimator named_estimator(const EstimatorSpec& spec) {
  std::string name(to_string(spec.method));
  if (spec.hierarchical) name += "-hierarchical";
  return {name, [spec](const PanelData& panel, Seed seed) { return run_estimator(spec, panel, seed); }};
}

std::vector<McSummary> run_monte_carlo(const DgpConfig& config, std::span<const NamedEstimator> estimators,
                                       int n_reps, int num_threads) {
  config.check();
  if (n_reps < 1) throw Error(ErrorKind::InvalidInput, "n_reps must be >= 1");
  const std::size_t n_est = estimators.size();
  std::vector<std::vector<RepOutcome>> outcomes(n_est, std::vector<RepOutcome>(static_cast<std::size_t>(n_reps)));
  const Seed master(config.seed);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < n_reps; r = next++) {
      const Seed rep_seed = master.child(static_cast<std::uint64_t>(r));
      const DgpDraw draw = simulate_panel(config, rep_seed.child(0));
      for (std::size_t j = 0; j < n_est; ++j) {
        RepOutcome& out = outcomes[j][static_cast<std::size_t>(r)];
        try {
          const EstimateResult est = estimators[j].fn(draw.panel, rep_seed.child(1));
          out.ok = std::isfinite(est.beta(0)) && std::isfinite(est.se(0));
          out.beta = est.beta(0);
          out.se = est.se(0);
          out.unit_clusters = mean_or_nan(est.unit_clusters);
          out.time_clusters = mean_or_nan(est.time_clusters);
        } catch (const Error& e) {
          out.ok = false;
          out.error = e.what();
        }
      }
    }
  };

  const int threads = std::max(1, std::min(num_threads, n_reps));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<McSummary> out;
  for (std::size_t j = 0; j < n_est; ++j) out.push_back(summarize(estimators[j].name, outcomes[j], config.beta));
  return out;
}

}  // namespace pcluster
