#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nanorotor/linear_analysis.hpp"
#include "nanorotor/optomech_core.hpp"
#include "nanorotor/spinup.hpp"

namespace nanorotor {

/// How Hz-family units of cavity linewidth and detuning are read:
/// `hz` multiplies by 2 pi, `rad/s` takes the number as angular.
enum class FrequencyConvention { hz, angular };

struct RunConfig {
  double dt = 0.0;  // 0 -> largest step resolving the fastest rate; larger values are rejected
  double duration = 2e-3;
  std::uint64_t seed = 1;
  int segments = 16;
  int sample_stride = 1;
  std::string output = ".";
  double vacuum_noise = 1.0;
  ExpansionPoint expansion = ExpansionPoint::tweezer_minimum;
};

struct ScanConfig {
  std::string axis = "tweezer.ellipticity";
  double from = 0.05;
  double to = 0.75;
  int points = 50;
};

struct ScenarioConfig {
  Ellipsoid particle;
  TweezerConfig tweezer;
  CavityConfig cavity;
  FrequencyConvention convention = FrequencyConvention::hz;
  Environment environment;
  RunConfig run;
  ScanConfig scan;
  SpinupOptions spinup;
  std::string source;  // file name or "<string>"

  Setup setup() const { return Setup::create(particle, tweezer, cavity); }
};

/// Parses the line-oriented format
///   # comment
///   section.key = value unit
/// Values may use `pi` with * and /, e.g. `3*pi/8 rad`. Unknown keys,
/// missing units, duplicates and out-of-range values throw ConfigError
/// naming the key and line.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");

ScenarioConfig load_config(const std::filesystem::path& path);

/// Fully explicit SI text of the config (frequencies as rad/s). Parsing
/// it yields an identical canonical text.
std::string canonical_text(const ScenarioConfig& config);

/// SHA-256 (hex) of the canonical text.
std::string config_hash(const ScenarioConfig& config);

/// Returns a copy with one key replaced; `value` uses the file grammar
/// (with unit). Aliases such as `psi` are accepted.
ScenarioConfig with_value(const ScenarioConfig& config, const std::string& key, const std::string& value);

/// Same with an SI number; the key's SI unit is appended.
ScenarioConfig with_si_value(const ScenarioConfig& config, const std::string& key, double value);

/// Full key for an alias (`psi` -> `tweezer.ellipticity`); throws for
/// unknown keys.
std::string resolve_key(const std::string& key);

/// Keys that must appear in every file.
std::vector<std::string> required_keys();

}  // namespace nanorotor
