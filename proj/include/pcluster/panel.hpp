#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pcluster {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Balanced N x T panel with one outcome and K regressors.
///
/// Units and periods are positional after construction: row i of y is the
/// i-th entry of unit_ids, column t the t-th entry of time_ids. Construction
/// validates shapes, finiteness and label uniqueness and throws Error on
/// violation.
class PanelData {
 public:
  PanelData(MatrixXd y, std::vector<MatrixXd> x, std::vector<std::string> unit_ids = {},
            std::vector<std::string> time_ids = {});

  Index num_units() const { return y_.rows(); }
  Index num_periods() const { return y_.cols(); }
  Index num_regressors() const { return static_cast<Index>(x_.size()); }

  const MatrixXd& y() const { return y_; }
  const MatrixXd& x(Index k) const { return x_[static_cast<std::size_t>(k)]; }
  const std::vector<MatrixXd>& xs() const { return x_; }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const std::vector<std::string>& time_ids() const { return time_ids_; }

  // Component j of z_it = (x_it1, ..., x_itK, y_it); j == K is the outcome.
  const MatrixXd& z(Index j) const { return j < num_regressors() ? x(j) : y_; }

  // Panel with units and periods swapped (y' and each x_k').
  PanelData transposed() const;

 private:
  MatrixXd y_;
  std::vector<MatrixXd> x_;
  std::vector<std::string> unit_ids_;
  std::vector<std::string> time_ids_;
};

/// One long-format observation as read from a file.
struct PanelRow {
  std::string unit;
  std::string time;
  double y = 0.0;
  std::vector<double> x;
  std::size_t line = 0;  // source line, 0 when unknown
};

/// Builds a balanced panel from long-format rows. Units and periods are
/// ordered by label: numerically when every label parses as a number,
/// lexicographically otherwise.
PanelData validate_panel(const std::vector<PanelRow>& rows);

/// Assignment of n items to G non-empty clusters. Labels are 0-based.
struct Partition {
  std::vector<int> labels;
  int num_clusters = 0;
  MatrixXd centers;  // G x p, empty when not produced by a centroid method

  std::size_t size() const { return labels.size(); }
  std::vector<Index> cluster_sizes() const;

  // Throws InvalidInput unless every label is in [0, G) and every cluster is used.
  void check() const;

  static Partition single(std::size_t n);
  static Partition singletons(std::size_t n);
  static Partition from_labels(std::vector<int> labels, int num_clusters);
};

struct CellMeans {
  MatrixXd by_group_period;    // G x T: mean over {i : g_i = g} of w_it
  MatrixXd by_unit_tcluster;   // N x C: mean over {t : c_t = c} of w_it
  MatrixXd by_group_tcluster;  // G x C
};

CellMeans cell_means(const MatrixXd& w, const Partition& units, const Partition& periods);

/// Half-open index range [begin, end).
struct IndexRange {
  Index begin = 0;
  Index end = 0;
  Index size() const { return end - begin; }
  bool contains(Index i) const { return i >= begin && i < end; }
};

/// Four-quadrant split of the (unit, period) grid used for cross-fitting.
/// Folds are 0-based: fold 0 = first units x first periods, 1 = first units x
/// last periods, 2 = last units x first periods, 3 = last units x last periods.
struct FoldLayout {
  struct Fold {
    IndexRange units;
    IndexRange periods;
  };
  std::array<Fold, 4> folds;

  // Fold with the same units but the other periods (source of unit clusters).
  static constexpr std::array<int, 4> unit_source{1, 0, 3, 2};
  // Fold with the same periods but the other units (source of time clusters).
  static constexpr std::array<int, 4> period_source{2, 3, 0, 1};

  int fold_of(Index unit, Index period) const;
};

FoldLayout build_fold_layout(Index num_units, Index num_periods);

struct EstimateResult {
  std::string method;
  VectorXd beta;
  VectorXd se;
  long dof = 0;
  Index n_obs = 0;
  // One entry for whole-panel estimators, four (one per fold) for cross-fitting,
  // empty when the estimator does not cluster.
  std::vector<int> unit_clusters;
  std::vector<int> time_clusters;
  MatrixXd residuals;  // N x T, e_hat - u_hat' beta
  std::optional<int> num_factors;
  bool converged = true;
};

}  // namespace pcluster
