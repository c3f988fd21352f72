#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nanorotor/config.hpp"
#include "nanorotor/errors.hpp"
#include "support.hpp"

using namespace nanorotor;
using test::relative;

namespace {

const std::string base = R"(# minimal rod
particle.diameters = 25 40 100 nm
tweezer.power = 100 mW
tweezer.waist_x = 1.6 um
tweezer.waist_y = 1.3 um
cavity.length = 3 mm
cavity.waist = 40 um
cavity.linewidth = 2 MHz
cavity.detuning = -11 MHz
cavity.axis_angle = pi/2 rad
cavity.phase = 0 rad
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("units are converted to SI") {
  const ScenarioConfig c = parse_config(base + "environment.pressure = 1e-9 mbar\ntweezer.ellipticity = 30 deg\n");
  CHECK(relative(c.particle.diameters[2], 100e-9) < 1e-15);
  CHECK(relative(c.tweezer.power, 0.1) < 1e-15);
  CHECK(relative(c.environment.pressure, 1e-7) < 1e-12);
  CHECK(relative(c.tweezer.ellipticity, constants::pi / 6.0) < 1e-15);
  CHECK(relative(c.cavity.axis_angle, constants::pi / 2.0) < 1e-15);
}

TEST_CASE("frequency convention decides the factor 2 pi") {
  const ScenarioConfig hz = parse_config(base);
  CHECK(hz.convention == FrequencyConvention::hz);
  CHECK(relative(hz.cavity.linewidth, constants::two_pi * 2e6) < 1e-15);
  CHECK(relative(hz.cavity.detuning, -constants::two_pi * 11e6) < 1e-15);

  const ScenarioConfig ang = parse_config(base + "cavity.frequency_convention = rad/s\n");
  CHECK(relative(ang.cavity.linewidth, 2e6) < 1e-15);
  // explicit angular units never get the factor
  std::string text = base;
  text.replace(text.find("2 MHz"), 5, "3e5 rad/s");
  CHECK(relative(parse_config(text).cavity.linewidth, 3e5) < 1e-15);
}

TEST_CASE("aliases, expressions and attached units") {
  std::string text = base;
  text += "psi = pi/8 rad\n";
  text += "pressure = 5e-4mbar\n";
  const ScenarioConfig c = parse_config(text);
  CHECK(relative(c.tweezer.ellipticity, constants::pi / 8.0) < 1e-15);
  CHECK(relative(c.environment.pressure, 5e-2) < 1e-12);
  CHECK(resolve_key("psi") == "tweezer.ellipticity");
  CHECK(resolve_key("kappa") == "cavity.linewidth");
  CHECK_THROWS_AS(resolve_key("nonsense"), ConfigError);

  text = base;
  text.replace(text.find("pi/2 rad"), 8, "2*pi / 8 rad");
  CHECK(relative(parse_config(text).cavity.axis_angle, constants::pi / 4.0) < 1e-15);
}

TEST_CASE("errors name the key and the line") {
  CHECK(error_of(base + "tweezer.colour = 3 nm\n").find("line 12") != std::string::npos);
  CHECK(error_of(base + "tweezer.colour = 3 nm\n").find("tweezer.colour") != std::string::npos);
  CHECK(error_of(base + "tweezer.power = 1 W\n").find("duplicate key 'tweezer.power'") != std::string::npos);
  CHECK(error_of(base + "environment.pressure = 3\n").find("unit") != std::string::npos);
  CHECK(error_of(base + "environment.pressure = 3 furlongs\n").find("line 12") != std::string::npos);
  CHECK(error_of(base + "environment.pressure =\n").find("missing value") != std::string::npos);
  CHECK(error_of(base + "just words\n").find("line 12") != std::string::npos);

  std::string missing = base;
  missing.erase(missing.find("cavity.length"), std::string("cavity.length = 3 mm\n").size());
  missing.erase(missing.find("tweezer.power"), std::string("tweezer.power = 100 mW\n").size());
  const std::string e = error_of(missing);
  CHECK(e.find("cavity.length") != std::string::npos);
  CHECK(e.find("tweezer.power") != std::string::npos);
}

TEST_CASE("out-of-range values are rejected") {
  CHECK_THROWS_AS(parse_config(base + "psi = 1 rad\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "particle.permittivity = 0.5\n"), ConfigError);
  std::string text = base;
  text.replace(text.find("25 40 100"), 9, "40 25 100");
  CHECK_THROWS_AS(parse_config(text), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "run.segments = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "cavity.frequency_convention = furlongs\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "scan.axis = cavity.frequency_convention\n"), ConfigError);
}

TEST_CASE("canonical text round-trips with the same hash") {
  for (int row = 1; row <= 4; ++row) {
    const ScenarioConfig c = test::bundled("table1_row" + std::to_string(row));
    const ScenarioConfig again = parse_config(canonical_text(c));
    CHECK(canonical_text(again) == canonical_text(c));
    CHECK(config_hash(again) == config_hash(c));
    CHECK(config_hash(c).size() == 64);
  }
  const ScenarioConfig a = test::bundled("table1_row1");
  const ScenarioConfig b = with_value(a, "environment.pressure", "2e-9 mbar");
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("overrides keep the file's convention and reset scan bounds") {
  const ScenarioConfig c = test::bundled("table1_row4");
  CHECK(c.convention == FrequencyConvention::angular);
  const ScenarioConfig k = with_value(c, "kappa", "700 kHz");
  CHECK(relative(k.cavity.linewidth, 7e5) < 1e-15);
  CHECK(relative(with_si_value(c, "psi", 0.3).tweezer.ellipticity, 0.3) < 1e-15);

  CHECK(c.scan.axis == "tweezer.ellipticity");
  CHECK(relative(c.scan.from, 0.05) < 1e-15);
  const ScenarioConfig moved = with_value(c, "scan.from", "0.2 rad");
  CHECK(relative(moved.scan.from, 0.2) < 1e-15);
  const ScenarioConfig p = with_value(moved, "scan.axis", "pressure");
  CHECK(p.scan.axis == "environment.pressure");
  CHECK(p.scan.from != moved.scan.from);
  CHECK_THROWS_AS(with_value(c, "scan.from", "2 mbar"), ConfigError);
}

TEST_CASE("known key list") {
  const auto keys = required_keys();
  CHECK(std::find(keys.begin(), keys.end(), "cavity.detuning") != keys.end());
  CHECK(std::find(keys.begin(), keys.end(), "run.seed") == keys.end());
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}
