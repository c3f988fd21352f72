#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nanorotor/linear_analysis.hpp"

namespace nanorotor {

enum class PointStatus { ok, unstable, numerical_failure };

std::string_view to_string(PointStatus s);

struct ScanPoint {
  double value = 0.0;
  PointStatus status = PointStatus::ok;
  std::string message;
  std::optional<CoolingReport> report;
  double max_occupation = 0.0;  // +inf when a mode is unconfined or not cooled
};

/// Largest occupation over all six modes; +inf if any of them is
/// unconfined or heated.
double max_occupation(const CoolingReport& report);

std::vector<double> linear_grid(double from, double to, int points);

using ScanEvaluator = std::function<CoolingReport(double)>;

/// Evaluates every grid point as an independent task. Physics errors mark
/// the point unstable and numerical errors mark it failed; neither aborts
/// the scan. Results keep the grid order.
std::vector<ScanPoint> parameter_scan(const std::vector<double>& grid, const ScanEvaluator& evaluate,
                                      unsigned threads = 0);

std::vector<ScanPoint> ellipticity_scan(const Ellipsoid& particle, const TweezerConfig& tweezer,
                                        const CavityConfig& cavity, const Environment& env,
                                        const std::vector<double>& psi, const AnalysisOptions& options = {});

}  // namespace nanorotor
