#include "pcluster/clustering.hpp"

#include "pcluster/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcluster {

ClusterInputs compute_cluster_inputs(const PanelData& panel) {
  const Index N = panel.num_units();
  const Index T = panel.num_periods();
  const Index p = panel.num_regressors() + 1;
  ClusterInputs in;
  in.unit_means.resize(N, p);
  in.period_means.resize(T, p);
  double unit_ss = 0.0, period_ss = 0.0;
  for (Index j = 0; j < p; ++j) {
    const MatrixXd& w = panel.z(j);
    in.unit_means.col(j) = w.rowwise().mean();
    in.period_means.col(j) = w.colwise().mean().transpose();
    unit_ss += (w.colwise() - in.unit_means.col(j)).squaredNorm();
    period_ss += (w.rowwise() - in.period_means.col(j).transpose()).squaredNorm();
  }
  const double n = static_cast<double>(N), t = static_cast<double>(T);
  in.unit_noise = unit_ss / (n * t * t);
  in.period_noise = period_ss / (n * n * t);
  return in;
}

double kmeans_objective_at(const MatrixXd& points, int num_clusters, const KMeansOptions& options) {
  const auto fit = kmeans_multistart(points, num_clusters, options.n_starts, options.seed);
  return fit.objective / static_cast<double>(points.rows());
}

int default_cluster_cap(Index n) { return std::max<int>(1, static_cast<int>((4 * n) / 5)); }

int hierarchical_cluster_cap(Index n) { return std::max<int>(1, static_cast<int>((2 * n) / 5)); }

ClusterSelection select_num_clusters(const MatrixXd& points, double noise, int cap,
                                     const KMeansOptions& options) {
  if (cap < 1) throw Error(ErrorKind::InvalidInput, "cluster cap must be >= 1");
  ClusterSelection sel;
  sel.noise = noise;
  sel.cap = std::min<int>(cap, static_cast<int>(points.rows()));
  for (int g = 1; g <= sel.cap; ++g) {
    const double q =
        kmeans_objective_at(points, g, {options.n_starts, options.seed.child(static_cast<std::uint64_t>(g))});
    sel.objectives.push_back(q);
    if (q <= noise) {
      sel.num_clusters = g;
      return sel;
    }
  }
  sel.num_clusters = sel.cap;
  return sel;
}

namespace {

KMeansResult cluster_rows(const MatrixXd& points, ClusterCount count, double noise,
                          std::optional<ClusterSelection>& selection, const KMeansOptions& options) {
  int g = 0;
  if (count) {
    g = *count;
  } else {
    selection = select_num_clusters(points, noise, default_cluster_cap(points.rows()), options);
    g = selection->num_clusters;
  }
  return kmeans_multistart(points, g, options.n_starts, options.seed.child(static_cast<std::uint64_t>(g)));
}

}  // namespace

TwoWayClustering two_way_cluster(const PanelData& panel, ClusterCount units, ClusterCount periods,
                                 const KMeansOptions& options) {
  TwoWayClustering out;
  out.inputs = compute_cluster_inputs(panel);
  out.units = cluster_rows(out.inputs.unit_means, units, out.inputs.unit_noise, out.unit_selection,
                           {options.n_starts, options.seed.child(0)});
  out.periods = cluster_rows(out.inputs.period_means, periods, out.inputs.period_noise,
                             out.period_selection, {options.n_starts, options.seed.child(1)});
  return out;
}

namespace {

// Smallest half mean squared distance to another row, maximised over rows.
double max_min_half_msd(const MatrixXd& w) {
  const Index n = w.rows();
  const double t = static_cast<double>(w.cols());
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j)
      if (j != i) nearest = std::min(nearest, (w.row(i) - w.row(j)).squaredNorm() / (2.0 * t));
    worst = std::max(worst, nearest);
  }
  return worst;
}

}  // namespace

PseudoDistance pseudo_distance_units(const PanelData& panel) {
  const Index N = panel.num_units();
  const Index T = panel.num_periods();
  const Index K = panel.num_regressors();
  if (N < 3) throw Error(ErrorKind::TooFewUnits, "pseudo-distance needs at least 3 units");

  std::vector<const MatrixXd*> series{&panel.y()};
  for (Index k = 0; k < K; ++k) series.push_back(&panel.x(k));

  PseudoDistance out;
  out.distances = MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; ++i) {
    for (Index j = i + 1; j < N; ++j) {
      double best = 0.0;
      for (Index l = 0; l < N; ++l) {
        if (l == i || l == j) continue;
        double s = 0.0;
        for (const MatrixXd* w : series) {
          double inner = 0.0;
          for (Index t = 0; t < T; ++t) inner += ((*w)(i, t) - (*w)(j, t)) * (*w)(l, t);
          s += std::abs(inner);
        }
        best = std::max(best, s);
      }
      out.distances(i, j) = out.distances(j, i) = best / static_cast<double>(T);
    }
  }

  out.sigma = max_min_half_msd(panel.y());
  for (Index k = 0; k < K; ++k) out.sigma += max_min_half_msd(panel.x(k));
  out.threshold = 1.35 * std::log(static_cast<double>(T)) /
                  (static_cast<double>(K) * std::sqrt(static_cast<double>(std::min(N, T)))) * out.sigma;
  return out;
}

PseudoDistance pseudo_distance_periods(const PanelData& panel) {
  return pseudo_distance_units(panel.transposed());
}

HierarchicalResult hierarchical_cluster(const MatrixXd& distances, double threshold, int cap) {
  const Index n = distances.rows();
  if (n == 0 || distances.cols() != n) throw Error(ErrorKind::InvalidInput, "distance matrix must be square");
  cap = std::max(cap, 1);

  MatrixXd link = distances;
  std::vector<Index> sizes(static_cast<std::size_t>(n), 1);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<Index> owner(static_cast<std::size_t>(n));  // item -> representative cluster slot
  for (Index i = 0; i < n; ++i) owner[static_cast<std::size_t>(i)] = i;

  HierarchicalResult out;
  Index remaining = n;
  while (remaining > 1) {
    Index bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (Index j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (link(i, j) < best) { best = link(i, j); bi = i; bj = j; }
      }
    }
    if (best > threshold && remaining <= cap) break;

    // Average linkage update (Lance-Williams), cluster bj folded into bi.
    const double ni = static_cast<double>(sizes[static_cast<std::size_t>(bi)]);
    const double nj = static_cast<double>(sizes[static_cast<std::size_t>(bj)]);
    for (Index k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == bi || k == bj) continue;
      const double d = (ni * link(k, bi) + nj * link(k, bj)) / (ni + nj);
      link(k, bi) = link(bi, k) = d;
    }
    sizes[static_cast<std::size_t>(bi)] += sizes[static_cast<std::size_t>(bj)];
    active[static_cast<std::size_t>(bj)] = 0;
    for (auto& o : owner)
      if (o == bj) o = bi;
    out.merge_heights.push_back(best);
    --remaining;
  }

  // Labels in order of first appearance.
  std::vector<int> slot_label(static_cast<std::size_t>(n), -1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  int next = 0;
  for (Index i = 0; i < n; ++i) {
    auto& l = slot_label[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])];
    if (l < 0) l = next++;
    labels[static_cast<std::size_t>(i)] = l;
  }
  out.partition = Partition::from_labels(std::move(labels), next);
  return out;
}

HierarchicalResult hierarchical_cluster(const PseudoDistance& d, int cap) {
  return hierarchical_cluster(d.distances, d.threshold, cap);
}

}  // namespace pcluster
