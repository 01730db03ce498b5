#pragma once

#include "pcluster/clustering.hpp"
#include "pcluster/panel.hpp"
#include "pcluster/rng.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace pcluster {

enum class Method { Baseline, CrossFit, Blm1, Blm2, Twfe, Interactive, Cce, FactorAugmented };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

/// True for methods whose first step is k-means clustering.
bool uses_clusters(Method m);

struct EstimatorSpec {
  Method method = Method::Baseline;
  ClusterCount units = kAutoClusters;
  ClusterCount periods = kAutoClusters;
  int n_starts = kDefaultStarts;
  // Cluster with average-linkage on the pseudo-distance instead of k-means
  // (baseline only).
  bool hierarchical = false;
};

/// Runs one estimator on a panel; k-means streams derive from seed.
EstimateResult run_estimator(const EstimatorSpec& spec, const PanelData& panel, Seed seed);

}  // namespace pcluster
