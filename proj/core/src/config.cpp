#include "nanorotor/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "nanorotor/errors.hpp"

namespace nanorotor {
namespace {

enum class Dim { length, length_list, power, frequency, pressure, temperature, mass, density, time, angle, velocity,
                 number, integer, text, scan_bound };

struct Unit {
  std::string name;
  double factor;
  bool hz_family = false;
};

const std::vector<Unit>& units(Dim d) {
  static const std::vector<Unit> length = {{"nm", 1e-9}, {"um", 1e-6}, {"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}};
  static const std::vector<Unit> power = {{"uW", 1e-6}, {"mW", 1e-3}, {"W", 1.0}};
  static const std::vector<Unit> frequency = {{"Hz", 1.0, true}, {"kHz", 1e3, true}, {"MHz", 1e6, true},
                                              {"GHz", 1e9, true}, {"rad/s", 1.0},     {"krad/s", 1e3},
                                              {"Mrad/s", 1e6},    {"Grad/s", 1e9}};
  static const std::vector<Unit> pressure = {{"Pa", 1.0}, {"hPa", 100.0}, {"mbar", 100.0}, {"bar", 1e5}};
  static const std::vector<Unit> temperature = {{"uK", 1e-6}, {"mK", 1e-3}, {"K", 1.0}};
  static const std::vector<Unit> mass = {{"u", constants::atomic_mass_unit}, {"kg", 1.0}};
  static const std::vector<Unit> density = {{"kg/m^3", 1.0}, {"g/cm^3", 1e3}};
  static const std::vector<Unit> time = {{"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}};
  static const std::vector<Unit> angle = {{"mrad", 1e-3}, {"rad", 1.0}, {"deg", constants::pi / 180.0}};
  static const std::vector<Unit> velocity = {{"m/s", 1.0}, {"km/s", 1e3}};
  static const std::vector<Unit> none = {};
  switch (d) {
    case Dim::length:
    case Dim::length_list:
      return length;
    case Dim::power:
      return power;
    case Dim::frequency:
      return frequency;
    case Dim::pressure:
      return pressure;
    case Dim::temperature:
      return temperature;
    case Dim::mass:
      return mass;
    case Dim::density:
      return density;
    case Dim::time:
      return time;
    case Dim::angle:
      return angle;
    case Dim::velocity:
      return velocity;
    default:
      return none;
  }
}

std::string si_unit(Dim d) {
  switch (d) {
    case Dim::length:
    case Dim::length_list:
      return "m";
    case Dim::power:
      return "W";
    case Dim::frequency:
      return "rad/s";
    case Dim::pressure:
      return "Pa";
    case Dim::temperature:
      return "K";
    case Dim::mass:
      return "kg";
    case Dim::density:
      return "kg/m^3";
    case Dim::time:
      return "s";
    case Dim::angle:
      return "rad";
    case Dim::velocity:
      return "m/s";
    default:
      return "";
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Parsed {
  double number = 0.0;
  std::vector<double> list;
  std::string text;
  int line = 0;
};

// expr := term (('*' | '/') term)* ; term := ['-' | '+'] (number | 'pi')
double parse_expression(const std::string& s, const std::string& key, int line) {
  std::size_t i = 0;
  auto fail = [&]() -> double {
    throw ConfigError("cannot read number '" + s + "' for key '" + key + "'", line);
  };
  auto skip = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  auto term = [&]() -> double {
    skip();
    double sign = 1.0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
      if (s[i] == '-') sign = -1.0;
      ++i;
      skip();
    }
    if (s.compare(i, 2, "pi") == 0) {
      i += 2;
      return sign * constants::pi;
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (res.ec != std::errc()) return fail();
    i = static_cast<std::size_t>(res.ptr - s.data());
    return sign * v;
  };
  if (trim(s).empty()) return fail();
  double value = term();
  skip();
  while (i < s.size()) {
    const char op = s[i++];
    if (op != '*' && op != '/') return fail();
    const double rhs = term();
    value = op == '*' ? value * rhs : value / rhs;
    skip();
  }
  if (!std::isfinite(value)) return fail();
  return value;
}

std::string unit_list(Dim dim) {
  std::string out;
  for (const auto& u : units(dim)) out += (out.empty() ? "" : ", ") + u.name;
  return out;
}

// Splits "3*pi/8 rad" or "5e-4mbar" into the numeric part and its unit.
std::pair<std::string, const Unit*> split_unit(const std::string& value, Dim dim) {
  const auto& table = units(dim);
  const auto pos = value.find_last_of(" \t");
  if (pos != std::string::npos) {
    const std::string last = value.substr(pos + 1);
    for (const auto& u : table)
      if (u.name == last) return {trim(value.substr(0, pos)), &u};
  }
  const Unit* best = nullptr;
  for (const auto& u : table) {
    if (value.size() <= u.name.size() || value.compare(value.size() - u.name.size(), u.name.size(), u.name) != 0)
      continue;
    const char before = value[value.size() - u.name.size() - 1];
    if (!(std::isdigit(static_cast<unsigned char>(before)) || before == '.')) continue;
    if (!best || u.name.size() > best->name.size()) best = &u;
  }
  if (best) return {trim(value.substr(0, value.size() - best->name.size())), best};
  return {value, nullptr};
}

struct Context {
  FrequencyConvention convention = FrequencyConvention::hz;
};

double parse_quantity(const std::string& value, Dim dim, const std::string& key, int line, const Context& ctx,
                      bool bare_allowed = false) {
  if (dim == Dim::number) return parse_expression(value, key, line);
  auto [expr, unit] = split_unit(value, dim);
  if (!unit) {
    if (bare_allowed) return parse_expression(value, key, line);
    throw ConfigError("missing or unknown unit for key '" + key + "' (expected one of: " + unit_list(dim) + ")",
                      line);
  }
  double factor = unit->factor;
  if (unit->hz_family && ctx.convention == FrequencyConvention::hz) factor *= constants::two_pi;
  return parse_expression(expr, key, line) * factor;
}

struct Field {
  std::string key;
  Dim dim;
  bool required;
  std::string fallback;
  std::function<void(ScenarioConfig&, const Parsed&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

[[noreturn]] void range_error(const std::string& key, const std::string& what, int line) {
  throw ConfigError("value of '" + key + "' out of range: " + what, line);
}

std::string quantity(double v, Dim d) {
  const std::string u = si_unit(d);
  return u.empty() ? fmt(v) : fmt(v) + " " + u;
}

std::string expansion_name(ExpansionPoint p) {
  return p == ExpansionPoint::equilibrium ? "equilibrium" : "tweezer_minimum";
}

std::string rayleigh_name(RayleighConvention c) {
  switch (c) {
    case RayleighConvention::major_axis:
      return "major_axis";
    case RayleighConvention::minor_axis:
      return "minor_axis";
    default:
      return "geometric_mean";
  }
}

// Numeric fields that can serve as scan axes, with their dimension.
Dim dimension_of(const std::string& key);

const std::vector<Field>& schema() {
  using C = ScenarioConfig;
  using P = Parsed;
  auto positive = [](const std::string& key, double v, int line) {
    if (!(v > 0.0)) range_error(key, "must be positive", line);
  };
  auto non_negative = [](const std::string& key, double v, int line) {
    if (!(v >= 0.0)) range_error(key, "must be non-negative", line);
  };
  static const std::vector<Field> fields = {
      {"particle.diameters", Dim::length_list, true, "",
       [](C& c, const P& p) {
         if (p.list.size() != 3) throw ConfigError("particle.diameters needs three lengths", p.line);
         for (double d : p.list)
           if (!(d > 0.0)) range_error("particle.diameters", "diameters must be positive", p.line);
         if (!(p.list[0] <= p.list[1] && p.list[1] <= p.list[2]))
           range_error("particle.diameters", "diameters must be ascending (l_a <= l_b <= l_c)", p.line);
         c.particle.diameters = {p.list[0], p.list[1], p.list[2]};
       },
       [](const C& c) {
         return fmt(c.particle.diameters[0]) + " " + fmt(c.particle.diameters[1]) + " " +
                fmt(c.particle.diameters[2]) + " m";
       }},
      {"particle.density", Dim::density, false, "2329 kg/m^3",
       [=](C& c, const P& p) {
         positive("particle.density", p.number, p.line);
         c.particle.density = p.number;
       },
       [](const C& c) { return quantity(c.particle.density, Dim::density); }},
      {"particle.permittivity", Dim::number, false, "12.1",
       [](C& c, const P& p) {
         if (!(p.number > 1.0)) range_error("particle.permittivity", "must exceed 1", p.line);
         c.particle.permittivity = p.number;
       },
       [](const C& c) { return fmt(c.particle.permittivity); }},
      {"tweezer.power", Dim::power, true, "",
       [=](C& c, const P& p) {
         non_negative("tweezer.power", p.number, p.line);
         c.tweezer.power = p.number;
       },
       [](const C& c) { return quantity(c.tweezer.power, Dim::power); }},
      {"tweezer.wavelength", Dim::length, false, "1550 nm",
       [=](C& c, const P& p) {
         positive("tweezer.wavelength", p.number, p.line);
         c.tweezer.wavelength = p.number;
       },
       [](const C& c) { return quantity(c.tweezer.wavelength, Dim::length); }},
      {"tweezer.waist_x", Dim::length, true, "",
       [=](C& c, const P& p) {
         positive("tweezer.waist_x", p.number, p.line);
         c.tweezer.waist_x = p.number;
       },
       [](const C& c) { return quantity(c.tweezer.waist_x, Dim::length); }},
      {"tweezer.waist_y", Dim::length, true, "",
       [=](C& c, const P& p) {
         positive("tweezer.waist_y", p.number, p.line);
         c.tweezer.waist_y = p.number;
       },
       [](const C& c) { return quantity(c.tweezer.waist_y, Dim::length); }},
      {"tweezer.ellipticity", Dim::angle, false, "pi/6 rad",
       [](C& c, const P& p) {
         if (!(p.number >= 0.0 && p.number <= constants::pi / 4.0 + 1e-15))
           range_error("tweezer.ellipticity", "psi must lie in [0, pi/4]", p.line);
         c.tweezer.ellipticity = p.number;
       },
       [](const C& c) { return quantity(c.tweezer.ellipticity, Dim::angle); }},
      {"tweezer.rotation", Dim::angle, false, "0 rad",
       [](C& c, const P& p) { c.tweezer.rotation = p.number; },
       [](const C& c) { return quantity(c.tweezer.rotation, Dim::angle); }},
      {"tweezer.rayleigh_convention", Dim::text, false, "geometric_mean",
       [](C& c, const P& p) {
         if (p.text == "geometric_mean")
           c.tweezer.rayleigh = RayleighConvention::geometric_mean;
         else if (p.text == "major_axis")
           c.tweezer.rayleigh = RayleighConvention::major_axis;
         else if (p.text == "minor_axis")
           c.tweezer.rayleigh = RayleighConvention::minor_axis;
         else
           throw ConfigError("tweezer.rayleigh_convention must be geometric_mean, major_axis or minor_axis",
                             p.line);
       },
       [](const C& c) { return rayleigh_name(c.tweezer.rayleigh); }},
      {"cavity.length", Dim::length, true, "",
       [=](C& c, const P& p) {
         positive("cavity.length", p.number, p.line);
         c.cavity.length = p.number;
       },
       [](const C& c) { return quantity(c.cavity.length, Dim::length); }},
      {"cavity.waist", Dim::length, true, "",
       [=](C& c, const P& p) {
         positive("cavity.waist", p.number, p.line);
         c.cavity.waist = p.number;
       },
       [](const C& c) { return quantity(c.cavity.waist, Dim::length); }},
      {"cavity.linewidth", Dim::frequency, true, "",
       [=](C& c, const P& p) {
         non_negative("cavity.linewidth", p.number, p.line);
         c.cavity.linewidth = p.number;
       },
       [](const C& c) { return quantity(c.cavity.linewidth, Dim::frequency); }},
      {"cavity.detuning", Dim::frequency, true, "",
       [](C& c, const P& p) { c.cavity.detuning = p.number; },
       [](const C& c) { return quantity(c.cavity.detuning, Dim::frequency); }},
      {"cavity.axis_angle", Dim::angle, true, "",
       [](C& c, const P& p) { c.cavity.axis_angle = p.number; },
       [](const C& c) { return quantity(c.cavity.axis_angle, Dim::angle); }},
      {"cavity.phase", Dim::angle, true, "",
       [](C& c, const P& p) { c.cavity.phase = p.number; },
       [](const C& c) { return quantity(c.cavity.phase, Dim::angle); }},
      {"cavity.frequency_convention", Dim::text, false, "hz",
       [](C& c, const P& p) {
         if (p.text == "hz")
           c.convention = FrequencyConvention::hz;
         else if (p.text == "rad/s")
           c.convention = FrequencyConvention::angular;
         else
           throw ConfigError("cavity.frequency_convention must be hz or rad/s", p.line);
       },
       [](const C& c) { return std::string(c.convention == FrequencyConvention::hz ? "hz" : "rad/s"); }},
      {"environment.pressure", Dim::pressure, false, "1e-9 mbar",
       [=](C& c, const P& p) {
         non_negative("environment.pressure", p.number, p.line);
         c.environment.pressure = p.number;
       },
       [](const C& c) { return quantity(c.environment.pressure, Dim::pressure); }},
      {"environment.gas_temperature", Dim::temperature, false, "300 K",
       [=](C& c, const P& p) {
         positive("environment.gas_temperature", p.number, p.line);
         c.environment.gas_temperature = p.number;
       },
       [](const C& c) { return quantity(c.environment.gas_temperature, Dim::temperature); }},
      {"environment.gas_mass", Dim::mass, false, "4.0026 u",
       [=](C& c, const P& p) {
         positive("environment.gas_mass", p.number, p.line);
         c.environment.gas_mass = p.number;
       },
       [](const C& c) { return quantity(c.environment.gas_mass, Dim::mass); }},
      {"environment.initial_temperature", Dim::temperature, false, "40 K",
       [=](C& c, const P& p) {
         positive("environment.initial_temperature", p.number, p.line);
         c.environment.initial_temperature = p.number;
       },
       [](const C& c) { return quantity(c.environment.initial_temperature, Dim::temperature); }},
      {"environment.translational_gas_factor", Dim::number, false, "1",
       [=](C& c, const P& p) {
         non_negative("environment.translational_gas_factor", p.number, p.line);
         c.environment.translational_gas_factor = p.number;
       },
       [](const C& c) { return fmt(c.environment.translational_gas_factor); }},
      {"run.dt", Dim::time, false, "0 s",
       [=](C& c, const P& p) {
         non_negative("run.dt", p.number, p.line);
         c.run.dt = p.number;
       },
       [](const C& c) { return quantity(c.run.dt, Dim::time); }},
      {"run.duration", Dim::time, false, "2 ms",
       [=](C& c, const P& p) {
         positive("run.duration", p.number, p.line);
         c.run.duration = p.number;
       },
       [](const C& c) { return quantity(c.run.duration, Dim::time); }},
      {"run.seed", Dim::integer, false, "1",
       [](C& c, const P& p) { c.run.seed = static_cast<std::uint64_t>(p.number); },
       [](const C& c) { return std::to_string(c.run.seed); }},
      {"run.segments", Dim::integer, false, "16",
       [](C& c, const P& p) {
         if (p.number < 4) range_error("run.segments", "at least 4 segments", p.line);
         c.run.segments = static_cast<int>(p.number);
       },
       [](const C& c) { return std::to_string(c.run.segments); }},
      {"run.sample_stride", Dim::integer, false, "1",
       [](C& c, const P& p) {
         if (p.number < 1) range_error("run.sample_stride", "must be >= 1", p.line);
         c.run.sample_stride = static_cast<int>(p.number);
       },
       [](const C& c) { return std::to_string(c.run.sample_stride); }},
      {"run.output", Dim::text, false, ".", [](C& c, const P& p) { c.run.output = p.text; },
       [](const C& c) { return c.run.output; }},
      {"run.vacuum_noise", Dim::number, false, "1",
       [=](C& c, const P& p) {
         non_negative("run.vacuum_noise", p.number, p.line);
         c.run.vacuum_noise = p.number;
       },
       [](const C& c) { return fmt(c.run.vacuum_noise); }},
      {"run.expansion_point", Dim::text, false, "tweezer_minimum",
       [](C& c, const P& p) {
         if (p.text == "tweezer_minimum")
           c.run.expansion = ExpansionPoint::tweezer_minimum;
         else if (p.text == "equilibrium")
           c.run.expansion = ExpansionPoint::equilibrium;
         else
           throw ConfigError("run.expansion_point must be tweezer_minimum or equilibrium", p.line);
       },
       [](const C& c) { return expansion_name(c.run.expansion); }},
      {"scan.axis", Dim::text, false, "tweezer.ellipticity",
       [](C& c, const P& p) {
         const std::string key = resolve_key(p.text);
         const Dim d = dimension_of(key);
         if (d == Dim::text || d == Dim::length_list || d == Dim::integer || key.rfind("scan.", 0) == 0)
           throw ConfigError("scan.axis '" + p.text + "' is not a numeric parameter", p.line);
         c.scan.axis = key;
       },
       [](const C& c) { return c.scan.axis; }},
      {"scan.from", Dim::scan_bound, false, "0.05", [](C& c, const P& p) { c.scan.from = p.number; },
       [](const C& c) { return quantity(c.scan.from, dimension_of(c.scan.axis)); }},
      {"scan.to", Dim::scan_bound, false, "0.75", [](C& c, const P& p) { c.scan.to = p.number; },
       [](const C& c) { return quantity(c.scan.to, dimension_of(c.scan.axis)); }},
      {"scan.points", Dim::integer, false, "50",
       [](C& c, const P& p) {
         if (p.number < 1) range_error("scan.points", "must be >= 1", p.line);
         c.scan.points = static_cast<int>(p.number);
       },
       [](const C& c) { return std::to_string(c.scan.points); }},
      {"spinup.power", Dim::power, false, "0.5 W",
       [=](C& c, const P& p) {
         non_negative("spinup.power", p.number, p.line);
         c.spinup.power = p.number;
       },
       [](const C& c) { return quantity(c.spinup.power, Dim::power); }},
      {"spinup.detuning", Dim::frequency, false, "-100 MHz",
       [](C& c, const P& p) { c.spinup.detuning = p.number; },
       [](const C& c) { return quantity(c.spinup.detuning, Dim::frequency); }},
      {"spinup.duration", Dim::time, false, "50 ms",
       [=](C& c, const P& p) {
         positive("spinup.duration", p.number, p.line);
         c.spinup.duration = p.number;
       },
       [](const C& c) { return quantity(c.spinup.duration, Dim::time); }},
      {"spinup.full_dynamics_duration", Dim::time, false, "50 us",
       [=](C& c, const P& p) {
         non_negative("spinup.full_dynamics_duration", p.number, p.line);
         c.spinup.full_dynamics_duration = p.number;
       },
       [](const C& c) { return quantity(c.spinup.full_dynamics_duration, Dim::time); }},
      {"spinup.sound_speed", Dim::velocity, false, "8433 m/s",
       [=](C& c, const P& p) {
         positive("spinup.sound_speed", p.number, p.line);
         c.spinup.sound_speed = p.number;
       },
       [](const C& c) { return quantity(c.spinup.sound_speed, Dim::velocity); }},
      {"spinup.samples", Dim::integer, false, "400",
       [](C& c, const P& p) {
         if (p.number < 2) range_error("spinup.samples", "must be >= 2", p.line);
         c.spinup.samples = static_cast<int>(p.number);
       },
       [](const C& c) { return std::to_string(c.spinup.samples); }},
  };
  return fields;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : schema())
    if (f.key == key) return &f;
  return nullptr;
}

Dim dimension_of(const std::string& key) {
  const Field* f = find_field(key);
  return f ? f->dim : Dim::text;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {
      {"psi", "tweezer.ellipticity"},   {"zeta", "tweezer.rotation"},   {"power", "tweezer.power"},
      {"pressure", "environment.pressure"}, {"kappa", "cavity.linewidth"}, {"detuning", "cavity.detuning"},
      {"theta", "cavity.axis_angle"},   {"phi", "cavity.phase"}};
  return a;
}

struct Entry {
  std::string value;
  int line = 0;
};

std::map<std::string, Entry> read_entries(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value unit', got '" + content + "'", line);
    const std::string written = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    std::string key;
    try {
      key = resolve_key(written);
    } catch (const ConfigError&) {
      throw ConfigError("unknown key '" + written + "'", line);
    }
    if (value.empty()) throw ConfigError("missing value for key '" + key + "'", line);
    if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    entries[key] = {value, line};
  }
  return entries;
}

Parsed parse_value(const Field& f, const Entry& e, const Context& ctx, const ScenarioConfig& partial) {
  Parsed p;
  p.line = e.line;
  switch (f.dim) {
    case Dim::text:
      p.text = e.value;
      break;
    case Dim::integer: {
      std::uint64_t v = 0;
      const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
      if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size())
        throw ConfigError("key '" + f.key + "' needs a non-negative integer, got '" + e.value + "'", e.line);
      p.number = static_cast<double>(v);
      break;
    }
    case Dim::length_list: {
      auto [numbers, unit] = split_unit(e.value, Dim::length);
      if (!unit)
        throw ConfigError("missing or unknown unit for key '" + f.key + "' (expected one of: " +
                              unit_list(Dim::length) + ")",
                          e.line);
      std::istringstream parts(numbers);
      std::string tok;
      while (parts >> tok) p.list.push_back(parse_expression(tok, f.key, e.line) * unit->factor);
      break;
    }
    case Dim::scan_bound:
      // Bounds share the axis dimension; bare numbers are SI.
      p.number = parse_quantity(e.value, dimension_of(partial.scan.axis), f.key, e.line, ctx, true);
      break;
    default:
      p.number = parse_quantity(e.value, f.dim, f.key, e.line, ctx);
  }
  return p;
}

ScenarioConfig build(const std::map<std::string, Entry>& entries, const std::string& source) {
  std::vector<std::string> missing;
  for (const auto& f : schema())
    if (f.required && !entries.count(f.key)) missing.push_back(f.key);
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("missing required keys: " + list);
  }

  ScenarioConfig cfg;
  cfg.source = source;
  Context ctx;
  // The convention and scan axis govern how other values are read.
  for (const char* first : {"cavity.frequency_convention", "scan.axis"}) {
    const Field& f = *find_field(first);
    const auto it = entries.find(first);
    const Entry e = it != entries.end() ? it->second : Entry{f.fallback, 0};
    f.set(cfg, parse_value(f, e, ctx, cfg));
  }
  ctx.convention = cfg.convention;
  for (const auto& f : schema()) {
    if (f.key == "cavity.frequency_convention" || f.key == "scan.axis") continue;
    const auto it = entries.find(f.key);
    if (it == entries.end() && f.fallback.empty()) continue;
    const Entry e = it != entries.end() ? it->second : Entry{f.fallback, 0};
    f.set(cfg, parse_value(f, e, ctx, cfg));
  }
  try {
    cfg.particle.validate();
    cfg.tweezer.validate();
    cfg.cavity.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (" + source + ")");
  }
  return cfg;
}

std::map<std::string, Entry> canonical_entries(const ScenarioConfig& config) {
  std::map<std::string, Entry> out;
  for (const auto& f : schema()) out[f.key] = {f.get(config), 0};
  return out;
}

}  // namespace

std::string resolve_key(const std::string& key) {
  if (find_field(key)) return key;
  const auto it = aliases().find(key);
  if (it != aliases().end()) return it->second;
  throw ConfigError("unknown key '" + key + "'");
}

std::vector<std::string> required_keys() {
  std::vector<std::string> out;
  for (const auto& f : schema())
    if (f.required) out.push_back(f.key);
  return out;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  return build(read_entries(text), source);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.filename().string());
}

std::string canonical_text(const ScenarioConfig& config) {
  std::string out;
  // Where the files go is not part of the scenario.
  for (const auto& f : schema())
    if (f.key != "run.output") out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const ScenarioConfig& config) {
  const std::string text = canonical_text(config);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

ScenarioConfig with_value(const ScenarioConfig& config, const std::string& key, const std::string& value) {
  const std::string full = resolve_key(key);
  auto entries = canonical_entries(config);
  ScenarioConfig probe = config;
  Context ctx;
  ctx.convention = config.convention;
  const Field& f = *find_field(full);
  f.set(probe, parse_value(f, Entry{value, 0}, ctx, config));
  entries[full] = {f.get(probe), 0};
  if (full == "scan.axis") {
    // Bounds of the old axis carry the wrong unit.
    entries.erase("scan.from");
    entries.erase("scan.to");
  }
  return build(entries, config.source);
}

ScenarioConfig with_si_value(const ScenarioConfig& config, const std::string& key, double value) {
  const std::string full = resolve_key(key);
  return with_value(config, full, quantity(value, dimension_of(full)));
}

}  // namespace nanorotor
