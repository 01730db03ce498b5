#include "pcluster/kmeans.hpp"

#include "pcluster/error.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace pcluster {

namespace {

void check_inputs(const MatrixXd& points, int num_clusters) {
  if (num_clusters < 1 || points.rows() < num_clusters)
    throw Error(ErrorKind::DegenerateInput, "need 1 <= G <= n (G=" + std::to_string(num_clusters) +
                                                ", n=" + std::to_string(points.rows()) + ")");
  if (!points.allFinite()) throw Error(ErrorKind::NonFinite, "k-means input contains NaN or Inf");
}

MatrixXd centers_of(const MatrixXd& points, const std::vector<int>& labels, int num_clusters,
                    std::vector<Index>& counts) {
  MatrixXd centers = MatrixXd::Zero(num_clusters, points.cols());
  counts.assign(static_cast<std::size_t>(num_clusters), 0);
  for (Index i = 0; i < points.rows(); ++i) {
    const int g = labels[static_cast<std::size_t>(i)];
    centers.row(g) += points.row(i);
    ++counts[static_cast<std::size_t>(g)];
  }
  for (int g = 0; g < num_clusters; ++g)
    if (counts[static_cast<std::size_t>(g)] > 0) centers.row(g) /= static_cast<double>(counts[static_cast<std::size_t>(g)]);
  return centers;
}

double sq_dist(const MatrixXd& a, Index i, const MatrixXd& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
// Returns true when any label changed.
bool repair_empty(const MatrixXd& points, std::vector<int>& labels, int num_clusters) {
  bool changed = false;
  for (;;) {
    std::vector<Index> counts;
    MatrixXd centers = centers_of(points, labels, num_clusters, counts);
    int empty = -1;
    for (int g = 0; g < num_clusters; ++g)
      if (counts[static_cast<std::size_t>(g)] == 0) { empty = g; break; }
    if (empty < 0) return changed;
    Index far = -1;
    double far_d = -1.0;
    for (Index i = 0; i < points.rows(); ++i) {
      const int g = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(g)] < 2) continue;
      const double d = sq_dist(points, i, centers, g);
      if (d > far_d) { far_d = d; far = i; }
    }
    labels[static_cast<std::size_t>(far)] = empty;
    changed = true;
  }
}

}  // namespace

double kmeans_objective(const MatrixXd& points, const std::vector<int>& labels, int num_clusters) {
  std::vector<Index> counts;
  const MatrixXd centers = centers_of(points, labels, num_clusters, counts);
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) total += sq_dist(points, i, centers, labels[static_cast<std::size_t>(i)]);
  return total;
}

KMeansResult kmeans_single(const MatrixXd& points, int num_clusters, std::vector<int> labels) {
  check_inputs(points, num_clusters);
  if (static_cast<Index>(labels.size()) != points.rows())
    throw Error(ErrorKind::InvalidInput, "seed assignment has the wrong length");
  for (int g : labels)
    if (g < 0 || g >= num_clusters) throw Error(ErrorKind::InvalidInput, "seed label out of range");

  repair_empty(points, labels, num_clusters);
  KMeansResult result;
  std::vector<Index> counts;
  MatrixXd centers = centers_of(points, labels, num_clusters, counts);
  result.trace.push_back(kmeans_objective(points, labels, num_clusters));

  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (Index i = 0; i < points.rows(); ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int g = 0; g < num_clusters; ++g) {
        const double d = sq_dist(points, i, centers, g);
        if (d < best_d) { best_d = d; best = g; }
      }
      auto& label = labels[static_cast<std::size_t>(i)];
      if (label != best) {
        // Keep the current label on exact ties so a converged assignment is a fixed point.
        if (sq_dist(points, i, centers, label) > best_d) {
          label = best;
          changed = true;
        }
      }
    }
    changed = repair_empty(points, labels, num_clusters) || changed;
    result.n_iterations = iter + 1;
    if (!changed) break;
    centers = centers_of(points, labels, num_clusters, counts);
    result.trace.push_back(kmeans_objective(points, labels, num_clusters));
  }

  centers = centers_of(points, labels, num_clusters, counts);
  result.objective = kmeans_objective(points, labels, num_clusters);
  result.partition = Partition{std::move(labels), num_clusters, std::move(centers)};
  return result;
}

std::vector<int> kmeanspp_labels(const MatrixXd& points, int num_clusters, std::mt19937_64& engine) {
  check_inputs(points, num_clusters);
  const Index n = points.rows();
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(num_clusters));
  std::uniform_int_distribution<Index> pick(0, n - 1);
  chosen.push_back(pick(engine));

  VectorXd d2(n);
  for (Index i = 0; i < n; ++i) d2(i) = sq_dist(points, i, points, chosen[0]);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (static_cast<int>(chosen.size()) < num_clusters) {
    const double total = d2.sum();
    Index next = -1;
    if (total > 0.0) {
      double u = unif(engine) * total;
      for (Index i = 0; i < n; ++i) {
        if (d2(i) <= 0.0) continue;
        next = i;
        u -= d2(i);
        if (u < 0.0) break;
      }
    } else {
      // All remaining points coincide with a center; take any unchosen one.
      std::vector<Index> rest;
      for (Index i = 0; i < n; ++i)
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) rest.push_back(i);
      std::uniform_int_distribution<std::size_t> pick_rest(0, rest.size() - 1);
      next = rest[pick_rest(engine)];
    }
    chosen.push_back(next);
    for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), sq_dist(points, i, points, next));
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    double best_d = std::numeric_limits<double>::infinity();
    for (int g = 0; g < num_clusters; ++g) {
      const double d = sq_dist(points, i, points, chosen[static_cast<std::size_t>(g)]);
      if (d < best_d) { best_d = d; labels[static_cast<std::size_t>(i)] = g; }
    }
  }
  // Each seed point belongs to its own cluster even when points coincide.
  for (int g = 0; g < num_clusters; ++g) labels[static_cast<std::size_t>(chosen[static_cast<std::size_t>(g)])] = g;
  return labels;
}

KMeansResult kmeans_multistart(const MatrixXd& points, int num_clusters, int n_starts, Seed seed) {
  check_inputs(points, num_clusters);
  if (n_starts < 1) throw Error(ErrorKind::InvalidInput, "n_starts must be >= 1");
  KMeansResult best;
  bool have = false;
  for (int s = 0; s < n_starts; ++s) {
    auto engine = seed.child(static_cast<std::uint64_t>(s)).engine();
    auto run = kmeans_single(points, num_clusters, kmeanspp_labels(points, num_clusters, engine));
    run.start_index = s;
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
    if (best.objective == 0.0) break;
  }
  return best;
}

}  // namespace pcluster
