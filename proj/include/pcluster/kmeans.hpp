#pragma once

#include "pcluster/panel.hpp"
#include "pcluster/rng.hpp"

#include <vector>

namespace pcluster {

struct KMeansResult {
  Partition partition;         // centers filled (G x p)
  double objective = 0.0;      // sum of squared distances to assigned centers
  int n_iterations = 0;
  int start_index = 0;         // which multistart run produced this result
  std::vector<double> trace;   // objective after each center update
};

inline constexpr int kDefaultStarts = 30;
inline constexpr int kMaxLloydIterations = 300;

// Sum of squared distances of each row to the mean of its cluster.
double kmeans_objective(const MatrixXd& points, const std::vector<int>& labels, int num_clusters);

/// Lloyd alternation from a given assignment. Stops when no label changes
/// (or after kMaxLloydIterations). Nearest-center ties go to the lowest
/// cluster index. A cluster that empties is reseeded with the point
/// farthest from its current center, so every cluster stays non-empty.
KMeansResult kmeans_single(const MatrixXd& points, int num_clusters, std::vector<int> seed_labels);

/// k-means++ seeding: returns nearest-seed-center labels.
std::vector<int> kmeanspp_labels(const MatrixXd& points, int num_clusters, std::mt19937_64& engine);

/// Best of n_starts k-means++ / Lloyd runs. Start s draws from seed.child(s);
/// ties on the objective keep the earliest start.
KMeansResult kmeans_multistart(const MatrixXd& points, int num_clusters, int n_starts, Seed seed);

}  // namespace pcluster
