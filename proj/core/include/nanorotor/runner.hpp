#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nanorotor/config.hpp"
#include "nanorotor/linear_analysis.hpp"
#include "nanorotor/scan.hpp"
#include "nanorotor/spectrum.hpp"
#include "nanorotor/spinup.hpp"
#include "nanorotor/stochastic_sim.hpp"

namespace nanorotor {

std::string code_version();

/// Command-line overrides applied on top of the config file.
struct RunOptions {
  std::optional<std::string> out;
  std::optional<std::string> axis;
  std::optional<std::string> from;  // values use the file grammar; bare numbers are SI
  std::optional<std::string> to;
  std::optional<int> points;
  std::optional<std::string> pressure;  // e.g. "5e-4mbar"
  std::optional<std::uint64_t> seed;
};

ScenarioConfig apply_overrides(const ScenarioConfig& config, const RunOptions& options);

struct AnalysisResult {
  CoolingReport report;
  LinearModel model;
  HybridModes modes;
  HeatingRates heating;
};

AnalysisResult analyze_scenario(const ScenarioConfig& config);

inline constexpr double peak_threshold_db = 10.0;
inline constexpr double peak_relative_tolerance = 0.015;

struct SimulationResult {
  AnalysisResult analysis;
  SpectrumResult spectrum;
  std::array<std::vector<Peak>, 2> peaks;
  OccupationEstimate occupations;
  double dt = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

/// Steady-state trajectory of the cooled setup started from the
/// linearized steady state, its cavity PSDs and their peaks.
SimulationResult simulate_scenario(const ScenarioConfig& config);

/// Peaks of one channel with the settings used by `simulate`.
std::vector<Peak> spectrum_peaks(const Spectrum& spectrum, double min_db = peak_threshold_db);

std::vector<ScanPoint> scan_scenario(const ScenarioConfig& config);

SpinupResult spinup_scenario(const ScenarioConfig& config);

/// Runs one CLI command and writes its files. Returns the process exit
/// code: 0 success, 2 configuration, 3 physics, 4 numerics.
int run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace nanorotor
