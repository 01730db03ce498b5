#pragma once

#include "pcluster/panel.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pcluster {

/// Classical two-way within estimator. SE dof NT - N - T + 1.
EstimateResult estimate_twfe(const PanelData& panel);

/// Principal-component factor structure. factors'factors / T = I and
/// loadings'loadings is diagonal.
struct FactorModelFit {
  MatrixXd factors;   // T x R
  MatrixXd loadings;  // N x R
  int num_factors = 0;
  bool converged = false;
  int n_iterations = 0;
};

/// Leading-R principal components of an N x T matrix.
FactorModelFit principal_components(const MatrixXd& w, int num_factors);

struct InteractiveFeOptions {
  std::optional<int> num_factors;  // default floor(sqrt(T))
  double tol = 1e-8;
  int max_iter = 1000;
};

struct InteractiveFeFit {
  EstimateResult result;
  FactorModelFit factors;
  std::vector<double> objective_trace;  // sum of squared residuals after each slope update
};

/// Alternates pooled OLS of (y - loadings * factors') on x with principal
/// components of y - x'beta, starting from the TWFE slope. Non-convergence is
/// reported through result.converged rather than thrown.
InteractiveFeFit fit_interactive_fe(const PanelData& panel, const InteractiveFeOptions& options = {});
EstimateResult estimate_interactive_fe(const PanelData& panel, const InteractiveFeOptions& options = {});

/// Pooled CCE: each unit's series is projected off [1, cross-section means
/// of y and x]. SE dof NT - N(K+2).
EstimateResult estimate_cce(const PanelData& panel);

/// argmax over r in 1..max_factors of eig_r / eig_{r+1}; ties keep the smallest r.
int eigenvalue_ratio_factors(std::span<const double> eigenvalues, int max_factors);

struct FactorAugmentedOptions {
  std::optional<int> max_factors;  // default floor(sqrt(T))
};

/// Factors are principal components of the T x N(K+1) matrix of demeaned
/// unit series of y and every x_k; their number comes from the eigenvalue
/// ratio. Each unit's series is projected off [1, factors]. SE dof NT - N(R+1).
EstimateResult estimate_factor_augmented(const PanelData& panel, const FactorAugmentedOptions& options = {});

}  // namespace pcluster
