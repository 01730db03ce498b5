#pragma once

#include "pcluster/methods.hpp"
#include "pcluster/panel.hpp"
#include "pcluster/rng.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pcluster {

/// Monte Carlo design: y = x beta + f(alpha_i, gamma_t) + v,
/// x = h(alpha_i, gamma_t) + u, with one regressor.
struct DgpConfig {
  Index num_units = 50;
  Index num_periods = 50;
  int dgp = 1;             // 1: CES-type, 2: polynomial / trigonometric
  double rho = 0.0;        // AR coefficient of gamma_t
  double kappa = 0.0;      // AR coefficient of u and v
  double beta = 1.0;
  int burn_in = 10000;
  std::uint64_t seed = 0;  // master seed for run_monte_carlo

  void check() const;
};

struct DgpDraw {
  PanelData panel;
  VectorXd alpha;  // N
  VectorXd gamma;  // T
  MatrixXd u;      // N x T
  MatrixXd v;
  MatrixXd f;
  MatrixXd h;
};

/// Innovation shape and scale of the gamma_t recursion: ((1-rho)^2/(1-rho^2), (1-rho)/(1-rho^2)).
std::pair<double, double> gamma_innovation_params(double rho);

/// gamma_0 ~ Gamma(1, 1); gamma_t = rho gamma_{t-1} + Gamma(shape, scale).
/// The first burn_in values are discarded; returns the next T.
VectorXd draw_gamma_ar1(Index num_periods, double rho, int burn_in, std::mt19937_64& engine);

/// w_i1 ~ N(0, 1); w_it = kappa w_i,t-1 + N(0, 1 - kappa^2).
MatrixXd draw_errors_ar1(Index num_units, Index num_periods, double kappa, std::mt19937_64& engine);

struct HeterogeneityValues {
  double f = 0.0;
  double h = 0.0;
};

/// Throws DomainError for negative arguments under design 1.
HeterogeneityValues dgp_functions(int dgp, double alpha, double gamma);

/// alpha from seed.child(0), gamma from child(1), u from child(2), v from child(3).
DgpDraw simulate_panel(const DgpConfig& config, Seed seed);

struct McSummary {
  std::string estimator;
  double bias = 0.0;
  double variance = 0.0;
  double coverage = 0.0;
  double width = 0.0;
  double mean_unit_clusters = 0.0;  // NaN when the estimator does not cluster
  double mean_time_clusters = 0.0;
  int n_reps = 0;
  int n_failed = 0;
};

inline constexpr double kNormalQuantile975 = 1.959964;

/// One replication's outcome for the coefficient of interest.
struct RepOutcome {
  bool ok = false;
  double beta = 0.0;
  double se = 0.0;
  double unit_clusters = 0.0;
  double time_clusters = 0.0;
  std::string error;
};

/// Aggregates in replication order. Variance is the n-1 sample variance of
/// the estimates (0 for a single success).
McSummary summarize(std::string estimator, std::span<const RepOutcome> reps, double true_beta);

using EstimatorFn = std::function<EstimateResult(const PanelData&, Seed)>;

struct NamedEstimator {
  std::string name;
  EstimatorFn fn;
};

NamedEstimator named_estimator(const EstimatorSpec& spec);

/// Replication r draws its panel from Seed(config.seed).child(r).child(0) and
/// every estimator receives Seed(config.seed).child(r).child(1). Results are
/// stored per replication and reduced in order, so they do not depend on
/// num_threads.
std::vector<McSummary> run_monte_carlo(const DgpConfig& config, std::span<const NamedEstimator> estimators,
                                       int n_reps, int num_threads = 1);

}  // namespace pcluster
