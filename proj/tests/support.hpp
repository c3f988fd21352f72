#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "nanorotor/config.hpp"

namespace nanorotor::test {

inline ScenarioConfig bundled(const std::string& name) {
  return load_config(std::string(NANOROTOR_CONFIG_DIR) + "/" + name + ".cfg");
}

inline Setup row_setup(int row) { return bundled("table1_row" + std::to_string(row)).setup(); }

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace nanorotor::test
