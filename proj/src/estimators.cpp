#include "pcluster/estimators.hpp"

#include "pcluster/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace pcluster {

namespace {

constexpr double kMaxCondition = 1e12;
// A transformed regressor whose sum of squares falls below this fraction of
// the raw regressor's centered sum of squares is treated as absorbed.
constexpr double kAbsorbedRatio = 1e-20;

std::vector<int> one(int v) { return {v}; }

}  // namespace

MatrixXd grouped_within(const MatrixXd& w, const Partition& units, const Partition& periods) {
  const CellMeans m = cell_means(w, units, periods);
  MatrixXd out(w.rows(), w.cols());
  for (Index i = 0; i < w.rows(); ++i) {
    const Index g = units.labels[static_cast<std::size_t>(i)];
    for (Index t = 0; t < w.cols(); ++t) {
      const Index c = periods.labels[static_cast<std::size_t>(t)];
      out(i, t) = w(i, t) - m.by_group_period(g, t) - m.by_unit_tcluster(i, c) + m.by_group_tcluster(g, c);
    }
  }
  return out;
}

TransformedPanel within_transform(const PanelData& panel, const Partition& units, const Partition& periods) {
  TransformedPanel out;
  out.e_hat = grouped_within(panel.y(), units, periods);
  for (const auto& xk : panel.xs()) out.u_hat.push_back(grouped_within(xk, units, periods));
  const long N = panel.num_units(), T = panel.num_periods();
  out.dof = N * T - N * periods.num_clusters - T * units.num_clusters;
  return out;
}

VectorXd stack_rows(const MatrixXd& w) {
  VectorXd v(w.size());
  const Index T = w.cols();
  for (Index i = 0; i < w.rows(); ++i)
    for (Index t = 0; t < T; ++t) v(i * T + t) = w(i, t);
  return v;
}

MatrixXd stack_regressors(const std::vector<MatrixXd>& u) {
  if (u.empty()) return {};
  MatrixXd out(u.front().size(), static_cast<Index>(u.size()));
  for (std::size_t k = 0; k < u.size(); ++k) out.col(static_cast<Index>(k)) = stack_rows(u[k]);
  return out;
}

MatrixXd unstack_rows(const VectorXd& v, Index num_units, Index num_periods) {
  MatrixXd w(num_units, num_periods);
  for (Index i = 0; i < num_units; ++i)
    for (Index t = 0; t < num_periods; ++t) w(i, t) = v(i * num_periods + t);
  return w;
}

std::vector<Index> unit_of_rows(Index num_units, Index num_periods) {
  std::vector<Index> out(static_cast<std::size_t>(num_units * num_periods));
  for (Index i = 0; i < num_units; ++i)
    for (Index t = 0; t < num_periods; ++t) out[static_cast<std::size_t>(i * num_periods + t)] = i;
  return out;
}

namespace {

MatrixXd checked_gram_inverse(const MatrixXd& u) {
  const MatrixXd gram = u.transpose() * u;
  Eigen::JacobiSVD<MatrixXd> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double smin = s.size() ? s(s.size() - 1) : 0.0;
  if (!(smax > 0.0) || !(smin > 0.0) || smax / smin > kMaxCondition)
    throw Error(ErrorKind::SingularDesign,
                "Gram matrix is rank deficient (smallest singular value " + std::to_string(smin) + ")");
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

VectorXd pooled_ols(const MatrixXd& u, const VectorXd& e) {
  if (u.rows() != e.size()) throw Error(ErrorKind::InvalidInput, "pooled_ols: row count mismatch");
  return checked_gram_inverse(u) * (u.transpose() * e);
}

VectorXd clustered_se(const MatrixXd& u, const VectorXd& residuals, std::span<const Index> cluster_of_row,
                      double dof_factor) {
  const Index n = u.rows();
  const Index K = u.cols();
  if (residuals.size() != n || static_cast<Index>(cluster_of_row.size()) != n)
    throw Error(ErrorKind::InvalidInput, "clustered_se: row count mismatch");
  Index n_clusters = 0;
  for (Index c : cluster_of_row) n_clusters = std::max(n_clusters, c + 1);

  MatrixXd scores = MatrixXd::Zero(n_clusters, K);
  for (Index r = 0; r < n; ++r) scores.row(cluster_of_row[static_cast<std::size_t>(r)]) += u.row(r) * residuals(r);

  const double nn = static_cast<double>(n);
  const MatrixXd a_inv = checked_gram_inverse(u) * nn;  // (U'U / n)^{-1}
  const MatrixXd b = scores.transpose() * scores / nn;
  const MatrixXd v = dof_factor * dof_factor * a_inv * b * a_inv / nn;
  return v.diagonal().cwiseMax(0.0).cwiseSqrt();
}

EstimateResult fit_transformed(const PanelData& panel, const MatrixXd& e_hat, const std::vector<MatrixXd>& u_hat,
                               long dof, std::string method) {
  const Index N = panel.num_units(), T = panel.num_periods();
  if (dof <= 0)
    throw Error(ErrorKind::InsufficientDof, method + ": no residual degrees of freedom (dof=" +
                                                std::to_string(dof) + ")");
  for (std::size_t k = 0; k < u_hat.size(); ++k) {
    const MatrixXd& xk = panel.x(static_cast<Index>(k));
    const double raw = (xk.array() - xk.mean()).square().sum();
    if (u_hat[k].squaredNorm() <= kAbsorbedRatio * raw)
      throw Error(ErrorKind::SingularDesign, method + ": regressor " + std::to_string(k + 1) +
                                                 " is absorbed by the fixed effects");
  }
  const MatrixXd u = stack_regressors(u_hat);
  const VectorXd e = stack_rows(e_hat);

  EstimateResult r;
  r.method = std::move(method);
  r.beta = pooled_ols(u, e);
  const VectorXd resid = e - u * r.beta;
  r.dof = dof;
  r.n_obs = N * T;
  const auto rows = unit_of_rows(N, T);
  r.se = clustered_se(u, resid, rows, std::sqrt(static_cast<double>(N * T) / static_cast<double>(dof)));
  r.residuals = unstack_rows(resid, N, T);
  return r;
}

EstimateResult estimate_with_partitions(const PanelData& panel, const Partition& units, const Partition& periods) {
  const TransformedPanel tp = within_transform(panel, units, periods);
  EstimateResult r = fit_transformed(panel, tp.e_hat, tp.u_hat, tp.dof, "baseline");
  r.unit_clusters = one(units.num_clusters);
  r.time_clusters = one(periods.num_clusters);
  return r;
}

EstimateResult estimate_baseline(const PanelData& panel, ClusterCount units, ClusterCount periods,
                                 const EstimatorOptions& options) {
  const TwoWayClustering cl = two_way_cluster(panel, units, periods, options.kmeans);
  return estimate_with_partitions(panel, cl.units.partition, cl.periods.partition);
}

namespace {

// Averages of z over the cells of a source fold, with the dispersion of
// those averages.
struct FoldAverages {
  MatrixXd means;
  double noise = 0.0;
};

FoldAverages unit_averages(const PanelData& panel, IndexRange units, IndexRange over) {
  const Index p = panel.num_regressors() + 1;
  FoldAverages out{MatrixXd(units.size(), p), 0.0};
  double ss = 0.0;
  for (Index j = 0; j < p; ++j) {
    const auto block = panel.z(j).block(units.begin, over.begin, units.size(), over.size());
    out.means.col(j) = block.rowwise().mean();
    ss += (block.colwise() - out.means.col(j)).squaredNorm();
  }
  const double n = static_cast<double>(units.size()), t = static_cast<double>(over.size());
  out.noise = ss / (n * t * t);
  return out;
}

FoldAverages period_averages(const PanelData& panel, IndexRange periods, IndexRange over) {
  const Index p = panel.num_regressors() + 1;
  FoldAverages out{MatrixXd(periods.size(), p), 0.0};
  double ss = 0.0;
  for (Index j = 0; j < p; ++j) {
    const auto block = panel.z(j).block(over.begin, periods.begin, over.size(), periods.size());
    out.means.col(j) = block.colwise().mean().transpose();
    ss += (block.rowwise() - out.means.col(j).transpose()).squaredNorm();
  }
  const double n = static_cast<double>(over.size()), t = static_cast<double>(periods.size());
  out.noise = ss / (n * n * t);
  return out;
}

Partition cluster_fold(const FoldAverages& avg, std::optional<int> count, const KMeansOptions& options) {
  int g = 0;
  if (count) {
    g = *count;
  } else {
    g = select_num_clusters(avg.means, avg.noise, default_cluster_cap(avg.means.rows()), options).num_clusters;
  }
  return kmeans_multistart(avg.means, g, options.n_starts, options.seed.child(static_cast<std::uint64_t>(g)))
      .partition;
}

}  // namespace

CrossFitPartitions crossfit_partitions(const PanelData& panel, std::optional<FoldClusterCounts> counts,
                                       const EstimatorOptions& options) {
  const FoldLayout layout = build_fold_layout(panel.num_units(), panel.num_periods());
  CrossFitPartitions parts;
  for (int d = 0; d < 4; ++d) {
    const auto& fold = layout.folds[static_cast<std::size_t>(d)];
    const auto& unit_src = layout.folds[static_cast<std::size_t>(FoldLayout::unit_source[static_cast<std::size_t>(d)])];
    const auto& period_src =
        layout.folds[static_cast<std::size_t>(FoldLayout::period_source[static_cast<std::size_t>(d)])];
    const Seed fold_seed = options.kmeans.seed.child(static_cast<std::uint64_t>(d));
    const KMeansOptions unit_opts{options.kmeans.n_starts, fold_seed.child(0)};
    const KMeansOptions period_opts{options.kmeans.n_starts, fold_seed.child(1)};

    std::optional<int> g_count, c_count;
    if (counts) {
      g_count = (*counts)[static_cast<std::size_t>(d)].first;
      c_count = (*counts)[static_cast<std::size_t>(d)].second;
    }
    parts[static_cast<std::size_t>(d)] = {
        cluster_fold(unit_averages(panel, fold.units, unit_src.periods), g_count, unit_opts),
        cluster_fold(period_averages(panel, fold.periods, period_src.units), c_count, period_opts)};
  }
  return parts;
}

EstimateResult estimate_crossfit_with_partitions(const PanelData& panel, const CrossFitPartitions& parts) {
  const Index N = panel.num_units(), T = panel.num_periods();
  const Index K = panel.num_regressors();
  const FoldLayout layout = build_fold_layout(N, T);

  MatrixXd e_hat(N, T);
  std::vector<MatrixXd> u_hat(static_cast<std::size_t>(K), MatrixXd(N, T));
  long df = 0;
  std::vector<int> gs, cs;
  for (int d = 0; d < 4; ++d) {
    const auto& fold = layout.folds[static_cast<std::size_t>(d)];
    const auto& [gpart, cpart] = parts[static_cast<std::size_t>(d)];
    const Index nd = fold.units.size(), td = fold.periods.size();
    if (gpart.size() != static_cast<std::size_t>(nd) || cpart.size() != static_cast<std::size_t>(td))
      throw Error(ErrorKind::InvalidInput, "fold partition does not match the fold size");
    auto cells = [&](const MatrixXd& w) { return MatrixXd(w.block(fold.units.begin, fold.periods.begin, nd, td)); };
    e_hat.block(fold.units.begin, fold.periods.begin, nd, td) = grouped_within(cells(panel.y()), gpart, cpart);
    for (Index k = 0; k < K; ++k)
      u_hat[static_cast<std::size_t>(k)].block(fold.units.begin, fold.periods.begin, nd, td) =
          grouped_within(cells(panel.x(k)), gpart, cpart);
    df += static_cast<long>(nd * td - nd * cpart.num_clusters - td * gpart.num_clusters);
    gs.push_back(gpart.num_clusters);
    cs.push_back(cpart.num_clusters);
  }

  EstimateResult r = fit_transformed(panel, e_hat, u_hat, df, "crossfit");
  r.unit_clusters = std::move(gs);
  r.time_clusters = std::move(cs);
  return r;
}

EstimateResult estimate_crossfit(const PanelData& panel, std::optional<FoldClusterCounts> counts,
                                 const EstimatorOptions& options) {
  return estimate_crossfit_with_partitions(panel, crossfit_partitions(panel, counts, options));
}

EstimateResult estimate_blm1(const PanelData& panel, ClusterCount units, const EstimatorOptions& options) {
  const TwoWayClustering cl = two_way_cluster(panel, units, 1, options.kmeans);
  const Partition& gpart = cl.units.partition;
  const Partition cpart = Partition::single(static_cast<std::size_t>(panel.num_periods()));
  auto resid = [&](const MatrixXd& w) {
    const CellMeans m = cell_means(w, gpart, cpart);
    MatrixXd out(w.rows(), w.cols());
    for (Index i = 0; i < w.rows(); ++i) out.row(i) = w.row(i) - m.by_group_period.row(gpart.labels[static_cast<std::size_t>(i)]);
    return out;
  };
  std::vector<MatrixXd> u;
  for (const auto& xk : panel.xs()) u.push_back(resid(xk));
  const long N = panel.num_units(), T = panel.num_periods();
  EstimateResult r = fit_transformed(panel, resid(panel.y()), u, N * T - T * gpart.num_clusters, "blm1");
  r.unit_clusters = one(gpart.num_clusters);
  return r;
}

EstimateResult estimate_blm2(const PanelData& panel, ClusterCount units, ClusterCount periods,
                             const EstimatorOptions& options) {
  const TwoWayClustering cl = two_way_cluster(panel, units, periods, options.kmeans);
  const Partition& gpart = cl.units.partition;
  const Partition& cpart = cl.periods.partition;
  auto resid = [&](const MatrixXd& w) {
    const CellMeans m = cell_means(w, gpart, cpart);
    MatrixXd out(w.rows(), w.cols());
    for (Index i = 0; i < w.rows(); ++i)
      for (Index t = 0; t < w.cols(); ++t)
        out(i, t) = w(i, t) - m.by_group_tcluster(gpart.labels[static_cast<std::size_t>(i)],
                                                  cpart.labels[static_cast<std::size_t>(t)]);
    return out;
  };
  std::vector<MatrixXd> u;
  for (const auto& xk : panel.xs()) u.push_back(resid(xk));
  const long dof = panel.num_units() * panel.num_periods() -
                   static_cast<long>(gpart.num_clusters) * static_cast<long>(cpart.num_clusters);
  EstimateResult r = fit_transformed(panel, resid(panel.y()), u, dof, "blm2");
  r.unit_clusters = one(gpart.num_clusters);
  r.time_clusters = one(cpart.num_clusters);
  return r;
}

}  // namespace pcluster
