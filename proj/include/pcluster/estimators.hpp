#pragma once

#include "pcluster/clustering.hpp"
#include "pcluster/panel.hpp"

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pcluster {

/// Two-way grouped within transformation of one outcome and K regressors.
struct TransformedPanel {
  MatrixXd e_hat;               // N x T
  std::vector<MatrixXd> u_hat;  // K matrices, N x T
  long dof = 0;                 // NT - N C - T G
};

/// w_it - mean_{g_i t} - mean_{i c_t} + mean_{g_i c_t}.
MatrixXd grouped_within(const MatrixXd& w, const Partition& units, const Partition& periods);

TransformedPanel within_transform(const PanelData& panel, const Partition& units, const Partition& periods);

/// Rows stacked unit-major, period-minor: row i*T + t.
VectorXd stack_rows(const MatrixXd& w);
MatrixXd stack_regressors(const std::vector<MatrixXd>& u);
MatrixXd unstack_rows(const VectorXd& v, Index num_units, Index num_periods);

/// (sum u u')^{-1} sum u e. Throws SingularDesign when the Gram matrix is
/// rank deficient (condition number above 1e12).
VectorXd pooled_ols(const MatrixXd& u, const VectorXd& e);

/// Cluster-robust standard errors with scores summed within clusters:
/// sqrt(diag(f^2 A^{-1} B A^{-1} / n)), A = U'U/n, B = sum_c s_c s_c' / n.
VectorXd clustered_se(const MatrixXd& u, const VectorXd& residuals, std::span<const Index> cluster_of_row,
                      double dof_factor);

/// Unit index of each stacked row.
std::vector<Index> unit_of_rows(Index num_units, Index num_periods);

struct EstimatorOptions {
  KMeansOptions kmeans{};
};

/// Second step only: within transform, pooled OLS and unit-clustered SE with
/// dof correction sqrt(NT / (NT - NC - TG)).
EstimateResult estimate_with_partitions(const PanelData& panel, const Partition& units,
                                        const Partition& periods);

EstimateResult estimate_baseline(const PanelData& panel, ClusterCount units, ClusterCount periods,
                                 const EstimatorOptions& options = {});

/// (G_d, C_d) for folds 0..3.
using FoldClusterCounts = std::array<std::pair<int, int>, 4>;

/// (unit partition, period partition) of each fold, sized to the fold.
using CrossFitPartitions = std::array<std::pair<Partition, Partition>, 4>;

/// Fold d clusters its units on averages over the periods of the fold with
/// the same units, and its periods on averages over the units of the fold
/// with the same periods. Fold d draws from options.kmeans.seed.child(d).
CrossFitPartitions crossfit_partitions(const PanelData& panel, std::optional<FoldClusterCounts> counts,
                                       const EstimatorOptions& options = {});

/// Fold-wise within transform with the given partitions, then one pooled
/// OLS over all cells.
EstimateResult estimate_crossfit_with_partitions(const PanelData& panel, const CrossFitPartitions& parts);

/// Four-fold cross-fitted estimator: crossfit_partitions followed by
/// estimate_crossfit_with_partitions.
EstimateResult estimate_crossfit(const PanelData& panel, std::optional<FoldClusterCounts> counts,
                                 const EstimatorOptions& options = {});

/// Residualizes by unit-cluster x period means only; SE dof NT - TG.
EstimateResult estimate_blm1(const PanelData& panel, ClusterCount units, const EstimatorOptions& options = {});

/// Residualizes by unit-cluster x period-cluster cell means; SE dof NT - GC.
EstimateResult estimate_blm2(const PanelData& panel, ClusterCount units, ClusterCount periods,
                             const EstimatorOptions& options = {});

/// Shared tail of every estimator: pooled OLS of e on u, residuals, and
/// unit-clustered SE with factor sqrt(NT / dof). Throws InsufficientDof when
/// dof <= 0 and SingularDesign when a transformed regressor vanishes
/// relative to its raw counterpart.
EstimateResult fit_transformed(const PanelData& panel, const MatrixXd& e_hat, const std::vector<MatrixXd>& u_hat,
                               long dof, std::string method);

}  // namespace pcluster
