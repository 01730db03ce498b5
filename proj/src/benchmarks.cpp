#include "pcluster/benchmarks.hpp"

#include "pcluster/error.hpp"
#include "pcluster/estimators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace pcluster {

EstimateResult estimate_twfe(const PanelData& panel) {
  const auto N = static_cast<std::size_t>(panel.num_units());
  const auto T = static_cast<std::size_t>(panel.num_periods());
  const TransformedPanel tp = within_transform(panel, Partition::single(N), Partition::single(T));
  const long dof = static_cast<long>(N * T - N - T + 1);
  return fit_transformed(panel, tp.e_hat, tp.u_hat, dof, "twfe");
}

FactorModelFit principal_components(const MatrixXd& w, int num_factors) {
  const Index T = w.cols();
  FactorModelFit fit;
  fit.num_factors = num_factors;
  if (num_factors <= 0) {
    fit.factors = MatrixXd::Zero(T, 0);
    fit.loadings = MatrixXd::Zero(w.rows(), 0);
    return fit;
  }
  if (num_factors >= std::min(w.rows(), T))
    throw Error(ErrorKind::InvalidInput, "number of factors must be below min(N, T)");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(w.transpose() * w);
  // Eigenvalues ascending: leading components are the last columns.
  const MatrixXd lead = eig.eigenvectors().rightCols(num_factors).rowwise().reverse();
  fit.factors = std::sqrt(static_cast<double>(T)) * lead;
  fit.loadings = w * fit.factors / static_cast<double>(T);
  return fit;
}

namespace {

double regressor_ols_objective(const PanelData& panel, const VectorXd& beta, const MatrixXd& common) {
  MatrixXd r = panel.y() - common;
  for (Index k = 0; k < panel.num_regressors(); ++k) r -= beta(k) * panel.x(k);
  return r.squaredNorm();
}

VectorXd slope_given_common(const PanelData& panel, const MatrixXd& common) {
  std::vector<MatrixXd> xs(panel.xs().begin(), panel.xs().end());
  return pooled_ols(stack_regressors(xs), stack_rows(panel.y() - common));
}

// Projects every row of w (a unit's time series) off the columns of h (T x m).
MatrixXd project_rows_off(const MatrixXd& w, const MatrixXd& h) {
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(h);
  if (cod.rank() < h.cols())
    throw Error(ErrorKind::SingularDesign, "per-unit projection basis is rank deficient");
  const MatrixXd coef = cod.solve(w.transpose());  // m x N
  return w - (h * coef).transpose();
}

EstimateResult fit_projected(const PanelData& panel, const MatrixXd& h, long dof, std::string method) {
  if (dof <= 0)
    throw Error(ErrorKind::InsufficientDof, method + ": no residual degrees of freedom (dof=" +
                                                std::to_string(dof) + ")");
  const MatrixXd e = project_rows_off(panel.y(), h);
  std::vector<MatrixXd> u;
  for (const auto& xk : panel.xs()) u.push_back(project_rows_off(xk, h));
  return fit_transformed(panel, e, u, dof, std::move(method));
}

}  // namespace

InteractiveFeFit fit_interactive_fe(const PanelData& panel, const InteractiveFeOptions& options) {
  const Index N = panel.num_units(), T = panel.num_periods(), K = panel.num_regressors();
  const int R = options.num_factors.value_or(static_cast<int>(std::floor(std::sqrt(static_cast<double>(T)))));
  if (R < 0 || R >= std::min(N, T))
    throw Error(ErrorKind::InvalidInput, "interactive FE needs 0 <= R < min(N, T)");

  InteractiveFeFit out;
  VectorXd beta = estimate_twfe(panel).beta;
  MatrixXd common = MatrixXd::Zero(N, T);
  FactorModelFit factors;
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    MatrixXd w = panel.y();
    for (Index k = 0; k < K; ++k) w -= beta(k) * panel.x(k);
    factors = principal_components(w, R);
    common = factors.loadings * factors.factors.transpose();
    const VectorXd next = slope_given_common(panel, common);
    out.objective_trace.push_back(regressor_ols_objective(panel, next, common));
    const double step = (next - beta).norm();
    beta = next;
    if (step <= options.tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  factors.converged = converged;
  factors.n_iterations = iter;

  // Standard errors on regressors projected off the estimated factors.
  MatrixXd resid = panel.y() - common;
  for (Index k = 0; k < K; ++k) resid -= beta(k) * panel.x(k);
  std::vector<MatrixXd> u;
  for (const auto& xk : panel.xs()) u.push_back(R > 0 ? project_rows_off(xk, factors.factors) : xk);
  const long dof = static_cast<long>(N * T - (N + T) * R - K);
  if (dof <= 0) throw Error(ErrorKind::InsufficientDof, "interactive FE: no residual degrees of freedom");
  const MatrixXd us = stack_regressors(u);
  const VectorXd rs = stack_rows(resid);
  const auto rows = unit_of_rows(N, T);

  EstimateResult& r = out.result;
  r.method = "interactive";
  r.beta = beta;
  r.se = clustered_se(us, rs, rows, std::sqrt(static_cast<double>(N * T) / static_cast<double>(dof)));
  r.dof = dof;
  r.n_obs = N * T;
  r.residuals = resid;
  r.num_factors = R;
  r.converged = converged;
  out.factors = std::move(factors);
  return out;
}

EstimateResult estimate_interactive_fe(const PanelData& panel, const InteractiveFeOptions& options) {
  return fit_interactive_fe(panel, options).result;
}

EstimateResult estimate_cce(const PanelData& panel) {
  const Index N = panel.num_units(), T = panel.num_periods(), K = panel.num_regressors();
  if (N < K + 2) throw Error(ErrorKind::InvalidInput, "CCE needs N >= K + 2");
  MatrixXd h(T, K + 2);
  h.col(0).setOnes();
  h.col(1) = panel.y().colwise().mean().transpose();
  for (Index k = 0; k < K; ++k) h.col(k + 2) = panel.x(k).colwise().mean().transpose();
  return fit_projected(panel, h, static_cast<long>(N * T - N * (K + 2)), "cce");
}

int eigenvalue_ratio_factors(std::span<const double> eigenvalues, int max_factors) {
  if (max_factors < 1 || static_cast<int>(eigenvalues.size()) < max_factors + 1)
    throw Error(ErrorKind::InvalidInput, "eigenvalue ratio needs at least max_factors + 1 eigenvalues");
  int best = 1;
  double best_ratio = -1.0;
  for (int r = 1; r <= max_factors; ++r) {
    const double ratio = eigenvalues[static_cast<std::size_t>(r - 1)] / eigenvalues[static_cast<std::size_t>(r)];
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = r;
    }
  }
  return best;
}

EstimateResult estimate_factor_augmented(const PanelData& panel, const FactorAugmentedOptions& options) {
  const Index N = panel.num_units(), T = panel.num_periods(), K = panel.num_regressors();
  MatrixXd series(T, N * (K + 1));
  for (Index j = 0; j <= K; ++j) series.middleCols(j * N, N) = panel.z(j).transpose();
  series.rowwise() -= series.colwise().mean();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(series * series.transpose() / static_cast<double>(series.size()));
  std::vector<double> values(eig.eigenvalues().data(), eig.eigenvalues().data() + T);
  std::reverse(values.begin(), values.end());
  // Demeaning leaves at most T - 1 non-zero eigenvalues.
  const int usable = static_cast<int>(T) - 1;
  int r_max = options.max_factors.value_or(static_cast<int>(std::floor(std::sqrt(static_cast<double>(T)))));
  r_max = std::clamp(r_max, 1, std::max(1, usable - 1));
  const double floor_value = std::max(values.front(), 0.0) * 1e-14 + 1e-300;
  for (auto& v : values) v = std::max(v, floor_value);
  const int R = eigenvalue_ratio_factors(values, r_max);

  MatrixXd h(T, R + 1);
  h.col(0).setOnes();
  h.rightCols(R) = std::sqrt(static_cast<double>(T)) * eig.eigenvectors().rightCols(R).rowwise().reverse();
  EstimateResult r = fit_projected(panel, h, static_cast<long>(N * T - N * (R + 1)), "fa");
  r.num_factors = R;
  return r;
}

}  // namespace pcluster
