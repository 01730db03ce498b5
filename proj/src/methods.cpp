#include "pcluster/methods.hpp"

#include "pcluster/benchmarks.hpp"
#include "pcluster/error.hpp"
#include "pcluster/estimators.hpp"

#include <array>
#include <utility>

namespace pcluster {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 8> kNames{{
    {Method::Baseline, "baseline"},
    {Method::CrossFit, "crossfit"},
    {Method::Blm1, "blm1"},
    {Method::Blm2, "blm2"},
    {Method::Twfe, "twfe"},
    {Method::Interactive, "interactive"},
    {Method::Cce, "cce"},
    {Method::FactorAugmented, "fa"},
}};

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [method, name] : kNames)
    if (method == m) return name;
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [method, n] : kNames)
    if (n == name) return method;
  return std::nullopt;
}

bool uses_clusters(Method m) {
  return m == Method::Baseline || m == Method::CrossFit || m == Method::Blm1 || m == Method::Blm2;
}

EstimateResult run_estimator(const EstimatorSpec& spec, const PanelData& panel, Seed seed) {
  const EstimatorOptions opts{KMeansOptions{spec.n_starts, seed}};
  switch (spec.method) {
    case Method::Baseline: {
      if (!spec.hierarchical) return estimate_baseline(panel, spec.units, spec.periods, opts);
      const auto units = hierarchical_cluster(pseudo_distance_units(panel),
                                              hierarchical_cluster_cap(panel.num_units()));
      const auto periods = hierarchical_cluster(pseudo_distance_periods(panel),
                                                hierarchical_cluster_cap(panel.num_periods()));
      EstimateResult r = estimate_with_partitions(panel, units.partition, periods.partition);
      r.method = "baseline-hierarchical";
      return r;
    }
    case Method::CrossFit: {
      std::optional<FoldClusterCounts> counts;
      if (spec.units || spec.periods) {
        if (!spec.units || !spec.periods)
          throw Error(ErrorKind::InvalidInput, "crossfit needs both G and C fixed, or both automatic");
        FoldClusterCounts c;
        c.fill({*spec.units, *spec.periods});
        counts = c;
      }
      return estimate_crossfit(panel, counts, opts);
    }
    case Method::Blm1: return estimate_blm1(panel, spec.units, opts);
    case Method::Blm2: return estimate_blm2(panel, spec.units, spec.periods, opts);
    case Method::Twfe: return estimate_twfe(panel);
    case Method::Interactive: return estimate_interactive_fe(panel);
    case Method::Cce: return estimate_cce(panel);
    case Method::FactorAugmented: return estimate_factor_augmented(panel);
  }
  throw Error(ErrorKind::InvalidInput, "unknown method");
}

}  // namespace pcluster
