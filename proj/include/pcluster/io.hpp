#pragma once

#include "pcluster/panel.hpp"
#include "pcluster/simulation.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace pcluster {

/// Reads `unit,time,y,x1[,x2..]` CSV. Errors carry the offending line number.
PanelData read_panel_csv(std::istream& in);
PanelData read_panel_csv_file(const std::string& path);

/// Long format, 17 significant digits (round-trips doubles exactly).
void write_panel_csv(std::ostream& out, const PanelData& panel);

/// `entity_id,cluster` with 1-based cluster labels.
void write_partition_csv(std::ostream& out, const std::vector<std::string>& ids, const Partition& partition);

/// {method, beta[], se[], dof, G, C, n_obs}. G and C are integers for
/// whole-panel estimators, per-fold arrays for cross-fitting, null otherwise.
nlohmann::json to_json(const EstimateResult& result);

/// Two-sided normal p-value of beta / se.
double normal_p_value(double beta, double se);
/// "***" p < .01, "**" p < .05, "*" p < .10.
std::string significance_stars(double p_value);

struct SummaryRow {
  Index num_periods = 0;
  McSummary summary;
};

/// Header: estimator,T,Bias,Var,Cov,Wid,G_hat,C_hat,n_reps,n_failed.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace pcluster
