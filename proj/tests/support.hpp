#pragma once

#include "pcluster/panel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace testsupport {

using pcluster::Index;
using pcluster::MatrixXd;
using pcluster::PanelData;
using pcluster::Partition;
using pcluster::VectorXd;

inline MatrixXd normal_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
  return m;
}

inline PanelData random_panel(Index N, Index T, Index K, std::mt19937_64& rng) {
  std::vector<MatrixXd> xs;
  for (Index k = 0; k < K; ++k) xs.push_back(normal_matrix(N, T, rng));
  MatrixXd y = normal_matrix(N, T, rng);
  for (Index k = 0; k < K; ++k) y += (0.5 + static_cast<double>(k)) * xs[static_cast<std::size_t>(k)];
  return PanelData(std::move(y), std::move(xs));
}

inline int uniform_int(int lo, int hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random labels in [0, G) with every cluster used.
inline Partition random_partition(std::size_t n, int G, std::mt19937_64& rng) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i < static_cast<std::size_t>(G) ? static_cast<int>(i) : uniform_int(0, G - 1, rng);
  std::shuffle(labels.begin(), labels.end(), rng);
  return Partition::from_labels(std::move(labels), G);
}

// Slope coefficients from least squares of y on x and a full set of
// unit x period-cluster and unit-cluster x period dummies.
inline VectorXd dummy_regression_beta(const PanelData& p, const Partition& g, const Partition& c) {
  const Index N = p.num_units(), T = p.num_periods(), K = p.num_regressors();
  const Index G = g.num_clusters, C = c.num_clusters;
  MatrixXd design = MatrixXd::Zero(N * T, K + N * C + G * T);
  VectorXd rhs(N * T);
  for (Index i = 0; i < N; ++i) {
    for (Index t = 0; t < T; ++t) {
      const Index r = i * T + t;
      rhs(r) = p.y()(i, t);
      for (Index k = 0; k < K; ++k) design(r, k) = p.x(k)(i, t);
      design(r, K + i * C + c.labels[static_cast<std::size_t>(t)]) = 1.0;
      design(r, K + N * C + g.labels[static_cast<std::size_t>(i)] * T + t) = 1.0;
    }
  }
  const VectorXd coef = design.completeOrthogonalDecomposition().solve(rhs);
  return coef.head(K);
}

// Same regression with every dummy interacted with the fold of the cell.
// parts[d] holds fold-local partitions; units and periods give fold ranges.
template <typename Layout, typename Parts>
VectorXd foldwise_dummy_regression_beta(const PanelData& p, const Layout& layout, const Parts& parts) {
  const Index N = p.num_units(), T = p.num_periods(), K = p.num_regressors();
  std::vector<Index> offset(5, K);
  for (int d = 0; d < 4; ++d) {
    const auto& f = layout.folds[static_cast<std::size_t>(d)];
    const auto& [g, c] = parts[static_cast<std::size_t>(d)];
    offset[static_cast<std::size_t>(d + 1)] =
        offset[static_cast<std::size_t>(d)] + f.units.size() * c.num_clusters + g.num_clusters * f.periods.size();
  }
  MatrixXd design = MatrixXd::Zero(N * T, offset[4]);
  VectorXd rhs(N * T);
  for (Index i = 0; i < N; ++i) {
    for (Index t = 0; t < T; ++t) {
      const Index r = i * T + t;
      rhs(r) = p.y()(i, t);
      for (Index k = 0; k < K; ++k) design(r, k) = p.x(k)(i, t);
      const int d = layout.fold_of(i, t);
      const auto& f = layout.folds[static_cast<std::size_t>(d)];
      const auto& [g, c] = parts[static_cast<std::size_t>(d)];
      const Index li = i - f.units.begin, lt = t - f.periods.begin;
      const Index base = offset[static_cast<std::size_t>(d)];
      design(r, base + li * c.num_clusters + c.labels[static_cast<std::size_t>(lt)]) = 1.0;
      design(r, base + f.units.size() * c.num_clusters + g.labels[static_cast<std::size_t>(li)] * f.periods.size() + lt) =
          1.0;
    }
  }
  const VectorXd coef = design.completeOrthogonalDecomposition().solve(rhs);
  return coef.head(K);
}

struct Enumerated {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<int> labels;
};

// Global k-means optimum by enumerating every labeling that uses all G clusters.
inline Enumerated exhaustive_kmeans(const MatrixXd& points, int G) {
  const Index n = points.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  Enumerated best;
  while (true) {
    std::vector<int> count(static_cast<std::size_t>(G), 0);
    for (int l : labels) ++count[static_cast<std::size_t>(l)];
    if (std::all_of(count.begin(), count.end(), [](int c) { return c > 0; })) {
      MatrixXd centers = MatrixXd::Zero(G, points.cols());
      for (Index i = 0; i < n; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      for (int g = 0; g < G; ++g) centers.row(g) /= count[static_cast<std::size_t>(g)];
      double obj = 0.0;
      for (Index i = 0; i < n; ++i) obj += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
      if (obj < best.objective) best = {obj, labels};
    }
    Index pos = 0;
    while (pos < n && ++labels[static_cast<std::size_t>(pos)] == G) labels[static_cast<std::size_t>(pos++)] = 0;
    if (pos == n) break;
  }
  return best;
}

// D_ij = (1/T) max over l != i,j of sum over series w of |sum_t (w_it - w_jt) w_lt|.
inline MatrixXd brute_pseudo_distance(const PanelData& p) {
  const Index N = p.num_units(), T = p.num_periods();
  std::vector<const MatrixXd*> series{&p.y()};
  for (Index k = 0; k < p.num_regressors(); ++k) series.push_back(&p.x(k));
  MatrixXd D = MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) {
      if (i == j) continue;
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
      D(i, j) = best / static_cast<double>(T);
    }
  return D;
}

// sum over series of max_i min_{j != i} (1/2T) sum_t (w_it - w_jt)^2.
inline double brute_sigma_check(const PanelData& p) {
  const Index N = p.num_units(), T = p.num_periods();
  std::vector<const MatrixXd*> series{&p.y()};
  for (Index k = 0; k < p.num_regressors(); ++k) series.push_back(&p.x(k));
  double total = 0.0;
  for (const MatrixXd* w : series) {
    double worst = 0.0;
    for (Index i = 0; i < N; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < N; ++j) {
        if (j == i) continue;
        double s = 0.0;
        for (Index t = 0; t < T; ++t) s += ((*w)(i, t) - (*w)(j, t)) * ((*w)(i, t) - (*w)(j, t));
        nearest = std::min(nearest, s / (2.0 * static_cast<double>(T)));
      }
      worst = std::max(worst, nearest);
    }
    total += worst;
  }
  return total;
}

// Symmetric block distance matrix: within-block entries in [0.1, 0.2],
// between-block entries in [5, 6].
inline MatrixXd block_distances(const std::vector<int>& block, std::mt19937_64& rng) {
  const Index n = static_cast<Index>(block.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd D = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      D(i, j) = D(j, i) = block[static_cast<std::size_t>(i)] == block[static_cast<std::size_t>(j)] ? 0.1 + 0.1 * u(rng)
                                                                                                 : 5.0 + u(rng);
  return D;
}

// True when two labelings induce the same partition.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

inline double rel_diff(const VectorXd& a, const VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace testsupport
