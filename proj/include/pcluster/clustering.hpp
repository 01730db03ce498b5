#pragma once

#include "pcluster/kmeans.hpp"
#include "pcluster/panel.hpp"
#include "pcluster/rng.hpp"

#include <optional>
#include <vector>

namespace pcluster {

/// Fixed cluster count, or nullopt for data-driven selection.
using ClusterCount = std::optional<int>;
inline constexpr std::nullopt_t kAutoClusters = std::nullopt;

/// Unit and period averages of z_it = (x_it, y_it) and the dispersions that
/// measure the noise level of those averages.
struct ClusterInputs {
  MatrixXd unit_means;    // N x (K+1)
  MatrixXd period_means;  // T x (K+1)
  double unit_noise = 0.0;    // (1/(N T^2)) sum_i sum_t |z_it - a_i|^2
  double period_noise = 0.0;  // (1/(N^2 T)) sum_t sum_i |z_it - b_t|^2
};

ClusterInputs compute_cluster_inputs(const PanelData& panel);

struct KMeansOptions {
  int n_starts = kDefaultStarts;
  Seed seed{};
};

/// Per-item k-means approximation error: best multistart objective / n.
double kmeans_objective_at(const MatrixXd& points, int num_clusters, const KMeansOptions& options);

struct ClusterSelection {
  int num_clusters = 1;
  std::vector<double> objectives;  // Q(1), Q(2), ... as evaluated during the search
  double noise = 0.0;
  int cap = 1;
};

/// Smallest G >= 1 with Q(G) <= noise, searched upward from 1; returns cap
/// when no G <= cap qualifies. Q(G) is evaluated with options.seed.child(G).
ClusterSelection select_num_clusters(const MatrixXd& points, double noise, int cap,
                                     const KMeansOptions& options);

/// Data-driven cluster cap for n items: floor(4n/5), at least 1.
int default_cluster_cap(Index n);

struct TwoWayClustering {
  KMeansResult units;
  KMeansResult periods;
  ClusterInputs inputs;
  std::optional<ClusterSelection> unit_selection;
  std::optional<ClusterSelection> period_selection;
};

/// k-means on unit averages and on period averages. Unit clustering draws
/// from options.seed.child(0), period clustering from options.seed.child(1).
TwoWayClustering two_way_cluster(const PanelData& panel, ClusterCount units, ClusterCount periods,
                                 const KMeansOptions& options);

/// Clustering on the pseudo-distance of units' cross-products with third units.
struct PseudoDistance {
  MatrixXd distances;   // symmetric, zero diagonal
  double sigma = 0.0;   // noise scale entering the threshold
  double threshold = 0.0;
};

/// Requires N >= 3. The period version applies the same construction to the
/// transposed panel.
PseudoDistance pseudo_distance_units(const PanelData& panel);
PseudoDistance pseudo_distance_periods(const PanelData& panel);

struct HierarchicalResult {
  Partition partition;
  std::vector<double> merge_heights;  // linkage height of every merge performed
};

/// Average-linkage agglomerative clustering. Merges proceed while the next
/// linkage height is <= threshold; if more than cap clusters remain, merging
/// continues until exactly cap are left.
HierarchicalResult hierarchical_cluster(const MatrixXd& distances, double threshold, int cap);
HierarchicalResult hierarchical_cluster(const PseudoDistance& d, int cap);

/// floor(2n/5), at least 1.
int hierarchical_cluster_cap(Index n);

}  // namespace pcluster
