#pragma once

#include "pcluster/panel.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pcluster {

/// Full-sample centering and scaling (sample SD, n - 1) of y and every x_k.
struct Standardization {
  double y_mean = 0.0;
  double y_sd = 1.0;
  std::vector<double> x_mean;
  std::vector<double> x_sd;
};

Standardization fit_standardization(const PanelData& panel);
PanelData standardize(const PanelData& panel, const Standardization& s);

/// Maps coefficients and SEs estimated on standardized data back to original
/// units: beta_k * sd(y) / sd(x_k). Residuals are scaled by sd(y).
EstimateResult rescale(EstimateResult result, const Standardization& s);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int input_error = 2;
inline constexpr int estimation_error = 3;
}  // namespace exit_code

/// Entry point of the `pcluster` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcluster
