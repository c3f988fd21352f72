#include "nanorotor/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "nanorotor/errors.hpp"

#ifndef NANOROTOR_VERSION
#define NANOROTOR_VERSION "0.0.0"
#endif

namespace nanorotor {
namespace {

using json = nlohmann::ordered_json;

const char* mode_names[6] = {"x'", "y'", "z'", "alpha'", "beta'", "gamma'"};

json metadata(const ScenarioConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  j["version"] = code_version();
  j["config_sha256"] = config_hash(cfg);
  j["seed"] = cfg.run.seed;
  j["source"] = cfg.source;
  return j;
}

// Header lines shared by every columnar file; the config lines re-parse
// to the same hash once the "# config: " prefix is stripped.
void write_header(std::ostream& os, const ScenarioConfig& cfg, const std::string& command) {
  os << "# nanorotor " << code_version() << " " << command << "\n";
  os << "# config_sha256 " << config_hash(cfg) << "\n";
  os << "# seed " << cfg.run.seed << "\n";
  std::istringstream canon(canonical_text(cfg));
  std::string line;
  while (std::getline(canon, line)) os << "# config: " << line << "\n";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

json optional_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const CoolingReport& report) {
  json modes = json::array();
  for (const auto& m : report.modes) {
    json jm;
    jm["label"] = m.label;
    jm["block"] = m.block + 1;
    jm["confined"] = m.confined;
    jm["frequency_rad_s"] = m.frequency;
    jm["coupling_rad_s"] = m.coupling;
    jm["cooling_rate"] = m.rates.cooling;
    jm["heating_rate_sideband"] = m.rates.heating;
    jm["recoil_heating"] = m.recoil_heating;
    jm["gas_heating"] = m.gas_heating;
    jm["heating"] = m.heating;
    jm["room_temperature"] = m.room_temperature();
    jm["occupation"] = m.occupation ? json(*m.occupation) : json(nullptr);
    jm["cooling_time_s"] = optional_number(m.cooling_time);
    jm["coherence_time_s"] = optional_number(m.coherence_time);
    jm["weak_coupling"] = m.weak_coupling;
    modes.push_back(jm);
  }
  json j;
  j["modes"] = modes;
  j["torque_sensitivity"] = report.torque_sensitivity;
  j["weak_coupling"] = report.weak_coupling;
  j["warnings"] = report.warnings;
  j["equilibrium"] = {{"position", std::vector<double>(report.equilibrium.position.data(),
                                                        report.equilibrium.position.data() + 6)},
                      {"residual", report.equilibrium.residual},
                      {"iterations", report.equilibrium.iterations}};
  return j;
}

std::string report_table(const CoolingReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "mode" << std::right << std::setw(12) << "w/2pi[kHz]" << std::setw(12)
     << "|g|/2pi[Hz]" << std::setw(12) << "xi[1/s]" << std::setw(12) << "n" << std::setw(12) << "t_cool[ms]"
     << std::setw(12) << "t_coh[ms]" << "\n";
  for (const auto& m : report.modes) {
    os << std::left << std::setw(8) << m.label << std::right << std::fixed << std::setprecision(2) << std::setw(12)
       << m.frequency / constants::two_pi / 1e3 << std::setw(12) << std::setprecision(1)
       << m.coupling / constants::two_pi << std::defaultfloat << std::setprecision(4) << std::setw(12) << m.heating;
    if (m.room_temperature()) {
      os << std::setw(12) << "r.t." << std::setw(12) << "-";
    } else {
      os << std::setw(12) << *m.occupation << std::setw(12) << m.cooling_time * 1e3;
    }
    os << std::setw(12) << m.coherence_time * 1e3 << (m.weak_coupling ? "" : "  (strong coupling)") << "\n";
  }
  os << "torque sensitivity " << report.torque_sensitivity << " N m/sqrt(Hz)\n";
  for (const auto& w : report.warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::filesystem::path output_path(const ScenarioConfig& cfg, const std::string& command, const std::string& ext) {
  std::filesystem::path dir = cfg.run.output;
  std::filesystem::create_directories(dir);
  std::string stem = std::filesystem::path(cfg.source).stem().string();
  if (stem.empty() || stem.front() == '<') stem = "scenario";
  return dir / (stem + "_" + command + ext);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write output file '" + path.string() + "'");
  os << content;
}

int status_code(PointStatus s) { return static_cast<int>(s); }

}  // namespace

std::string code_version() { return NANOROTOR_VERSION; }

ScenarioConfig apply_overrides(const ScenarioConfig& config, const RunOptions& o) {
  ScenarioConfig cfg = config;
  if (o.pressure) cfg = with_value(cfg, "environment.pressure", *o.pressure);
  if (o.seed) cfg = with_value(cfg, "run.seed", std::to_string(*o.seed));
  if (o.axis) cfg = with_value(cfg, "scan.axis", *o.axis);
  if (o.from) cfg = with_value(cfg, "scan.from", *o.from);
  if (o.to) cfg = with_value(cfg, "scan.to", *o.to);
  if (o.points) cfg = with_value(cfg, "scan.points", std::to_string(*o.points));
  if (o.out) cfg.run.output = *o.out;
  return cfg;
}

AnalysisResult analyze_scenario(const ScenarioConfig& cfg) {
  const Setup s = cfg.setup();
  AnalysisResult r;
  const Equilibrium eq = find_equilibrium(s);
  r.model = harmonic_expansion(s, eq, cfg.run.expansion);
  r.modes = hybridize_modes(r.model);
  r.heating = heating_rates(s, cfg.environment, r.model);
  r.report = build_report(s, cfg.environment, r.model, r.modes);
  return r;
}

std::vector<Peak> spectrum_peaks(const Spectrum& spectrum, double min_db) {
  const double bin = constants::two_pi * spectrum.resolution;
  return find_peaks(spectrum, min_db, std::max(40.0 * bin, constants::two_pi * 50e3),
                    std::max(3.0 * bin, constants::two_pi * 3e3));
}

SimulationResult simulate_scenario(const ScenarioConfig& cfg) {
  SimulationResult r;
  r.analysis = analyze_scenario(cfg);
  const Setup s = cfg.setup();
  const auto& a = r.analysis;
  const NoiseModel noise = noise_model(s, cfg.environment, a.model, cfg.run.vacuum_noise);
  const MechanicalState initial = sample_steady_state(s, a.model, a.modes, a.heating, a.report, cfg.run.seed);

  SimulationOptions opt;
  const double limit = max_time_step(s, a.model);
  // The optical potential is bounded, so an unresolved step does not blow
  // up; it heats the particle into free rotation instead.
  if (cfg.run.dt > limit * (1.0 + 1e-12)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "run.dt = %.3g s does not resolve the fastest rate (largest step %.3g s)",
                  cfg.run.dt, limit);
    throw IntegrationError(buf);
  }
  opt.dt = cfg.run.dt > 0.0 ? cfg.run.dt : limit;
  opt.duration = cfg.run.duration;
  opt.seed = cfg.run.seed;
  opt.sample_stride = cfg.run.sample_stride;
  const Trajectory traj = integrate_trajectory(initial, s, noise, opt);
  r.dt = opt.dt;
  r.steps = static_cast<std::size_t>(std::llround(opt.duration / opt.dt));
  r.seed = cfg.run.seed;

  PsdOptions psd;
  psd.segments = cfg.run.segments;
  r.spectrum = estimate_psd(traj, psd);
  for (int c = 0; c < 2; ++c) r.peaks[c] = spectrum_peaks(r.spectrum.channel[c]);
  r.occupations = estimate_occupations(a.model, a.modes, traj);
  return r;
}

std::vector<ScanPoint> scan_scenario(const ScenarioConfig& cfg) {
  const std::string axis = resolve_key(cfg.scan.axis);
  const auto grid = linear_grid(cfg.scan.from, cfg.scan.to, cfg.scan.points);
  // Reject grid values the parser would refuse before spending time.
  for (double v : grid) (void)with_si_value(cfg, axis, v);
  return parameter_scan(grid, [&](double v) { return analyze_scenario(with_si_value(cfg, axis, v)).report; });
}

SpinupResult spinup_scenario(const ScenarioConfig& cfg) {
  const AnalysisResult a = analyze_scenario(cfg);
  return spinup_simulation(cfg.setup(), cfg.environment, a.report, cfg.spinup);
}

namespace {

void run_analyze(const ScenarioConfig& cfg, std::ostream& out) {
  const AnalysisResult a = analyze_scenario(cfg);
  json j = metadata(cfg, "analyze");
  j["report"] = report_json(a.report);
  j["config"] = canonical_text(cfg);
  const std::string table = report_table(a.report);
  const auto jpath = output_path(cfg, "analyze", ".json");
  const auto tpath = output_path(cfg, "analyze", ".txt");
  write_file(jpath, j.dump(2) + "\n");
  std::ostringstream txt;
  txt << "# nanorotor " << code_version() << " analyze " << cfg.source << "\n# config_sha256 " << config_hash(cfg)
      << "\n"
      << table;
  write_file(tpath, txt.str());
  out << table << "wrote " << jpath.string() << " and " << tpath.string() << "\n";
}

void run_scan(const ScenarioConfig& cfg, std::ostream& out) {
  const auto points = scan_scenario(cfg);
  std::ostringstream dat;
  write_header(dat, cfg, "scan");
  dat << "# axis " << cfg.scan.axis << " (SI)\n";
  dat << "# columns: value status(0 ok, 1 unstable, 2 numerical failure) n_x' n_y' n_z' n_alpha' n_beta' n_gamma' "
         "max_n\n";
  dat << "# n = inf marks a mode at room temperature (unconfined or not cooled); nan marks a failed point\n";
  json records = json::array();
  for (const auto& p : points) {
    dat << num(p.value) << " " << status_code(p.status);
    json rec;
    rec["value"] = p.value;
    rec["status"] = std::string(to_string(p.status));
    if (!p.message.empty()) rec["message"] = p.message;
    if (p.report) {
      for (const auto& m : p.report->modes)
        dat << " " << (m.occupation ? num(*m.occupation) : std::string("inf"));
      dat << " " << (std::isfinite(p.max_occupation) ? num(p.max_occupation) : std::string("inf"));
      rec["report"] = report_json(*p.report);
    } else {
      for (int i = 0; i < 7; ++i) dat << " nan";
    }
    dat << "\n";
    records.push_back(rec);
  }
  json j = metadata(cfg, "scan");
  j["axis"] = cfg.scan.axis;
  j["points"] = records;
  j["config"] = canonical_text(cfg);
  const auto dpath = output_path(cfg, "scan", ".dat");
  const auto jpath = output_path(cfg, "scan", ".json");
  write_file(dpath, dat.str());
  write_file(jpath, j.dump(2) + "\n");

  int unstable = 0;
  double best = std::numeric_limits<double>::infinity();
  double best_at = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : points) {
    if (p.status != PointStatus::ok) ++unstable;
    if (p.max_occupation < best) {
      best = p.max_occupation;
      best_at = p.value;
    }
  }
  out << points.size() << " points, " << unstable << " unstable or failed";
  if (std::isfinite(best)) out << "; smallest six-mode maximum n = " << best << " at " << best_at;
  out << "\nwrote " << dpath.string() << " and " << jpath.string() << "\n";
}

void run_simulate(const ScenarioConfig& cfg, std::ostream& out) {
  const SimulationResult r = simulate_scenario(cfg);
  const auto& ch = r.spectrum.channel;
  std::ostringstream dat;
  write_header(dat, cfg, "simulate");
  dat << "# window " << r.spectrum.window << ", segments " << r.spectrum.segments << ", overlap "
      << r.spectrum.overlap << ", resolution " << ch[0].resolution << " Hz, burn-in 0.2\n";
  dat << "# columns: frequency[rad/s] PSD_1[1/Hz] PSD_2[1/Hz]\n";
  for (std::size_t i = 0; i < ch[0].frequency.size(); ++i)
    dat << num(ch[0].frequency[i]) << " " << num(ch[0].psd[i]) << " " << num(ch[1].psd[i]) << "\n";

  std::array<double, 6> freq{};
  for (int q = 0; q < 6; ++q)
    freq[q] = r.analysis.report.modes[q].confined ? r.analysis.report.modes[q].frequency : 0.0;
  const double tolerance = 3.0 * constants::two_pi * ch[0].resolution;
  const double dc = std::max(tolerance, constants::two_pi * 3e3);

  json j = metadata(cfg, "simulate");
  j["dt"] = r.dt;
  j["steps"] = r.steps;
  j["spectrum"] = {{"window", r.spectrum.window},
                   {"segments", r.spectrum.segments},
                   {"overlap", r.spectrum.overlap},
                   {"resolution_hz", ch[0].resolution},
                   {"variance", {ch[0].variance, ch[1].variance}}};
  json peaks = json::array();
  out << "peaks (>= " << peak_threshold_db << " dB above the local floor):\n";
  for (int c = 0; c < 2; ++c)
    for (const auto& p : r.peaks[c]) {
      const PeakAssignment as = classify_peak(p.frequency, freq, tolerance, peak_relative_tolerance);
      std::string label = std::abs(p.frequency) <= dc ? "dc" : "unassigned";
      std::string kind = label;
      if (as.kind == PeakKind::fundamental) {
        label = mode_names[as.first];
        kind = "fundamental";
      }
      if (as.kind == PeakKind::combination) {
        kind = "combination";
        auto term = [&](int order, int q) {
          const int m = std::abs(order);
          return (m == 1 ? std::string() : std::to_string(m) + " ") + mode_names[q];
        };
        label = (as.first_order < 0 ? "-" : "") + term(as.first_order, as.first);
        if (as.second >= 0) label += (as.second_order > 0 ? " + " : " - ") + term(as.second_order, as.second);
      }
      peaks.push_back({{"channel", c + 1},
                       {"frequency_rad_s", p.frequency},
                       {"prominence_db", p.prominence_db},
                       {"kind", kind},
                       {"modes", as.second >= 0 ? json::array({as.first, as.second})
                                 : as.first >= 0 ? json::array({as.first})
                                                 : json::array()},
                       {"assignment", label}});
      out << "  channel " << c + 1 << "  " << std::setw(12) << p.frequency / constants::two_pi / 1e3 << " kHz  "
          << std::setw(6) << std::setprecision(3) << p.prominence_db << " dB  " << label << "\n";
    }
  j["peaks"] = peaks;
  json occ = json::array();
  for (int q = 0; q < 6; ++q) {
    const auto& m = r.analysis.report.modes[q];
    occ.push_back({{"label", m.label},
                   {"simulated", optional_number(r.occupations.mean[q])},
                   {"standard_error", optional_number(r.occupations.error[q])},
                   {"rate_formula", m.occupation ? json(*m.occupation) : json(nullptr)}});
  }
  j["occupations"] = occ;
  j["config"] = canonical_text(cfg);

  const auto dpath = output_path(cfg, "simulate_psd", ".dat");
  const auto jpath = output_path(cfg, "simulate", ".json");
  write_file(dpath, dat.str());
  write_file(jpath, j.dump(2) + "\n");
  out << "wrote " << dpath.string() << " and " << jpath.string() << "\n";
}

void run_spinup(const ScenarioConfig& cfg, std::ostream& out) {
  const SpinupResult r = spinup_scenario(cfg);
  std::ostringstream dat;
  write_header(dat, cfg, "spinup");
  dat << "# columns: time[s] rotation_frequency[Hz]\n";
  for (std::size_t i = 0; i < r.time.size(); ++i) dat << num(r.time[i]) << " " << num(r.frequency[i]) << "\n";
  auto when = [](const std::optional<double>& t) { return t ? json(*t) : json(nullptr); };
  json j = metadata(cfg, "spinup");
  j["temperature_K"] = r.temperature;
  j["torque_N_m"] = r.torque;
  j["gas_damping"] = r.damping;
  j["final_frequency_hz"] = r.final_frequency();
  j["tennis_racket"] = r.tennis_racket();
  j["tennis_racket_time_s"] = when(r.tennis_racket_time);
  j["stretching"] = r.stretching();
  j["stretching_time_s"] = when(r.stretching_time);
  j["gigahertz_time_s"] = when(r.gigahertz_time);
  j["config"] = canonical_text(cfg);
  const auto dpath = output_path(cfg, "spinup", ".dat");
  const auto jpath = output_path(cfg, "spinup", ".json");
  write_file(dpath, dat.str());
  write_file(jpath, j.dump(2) + "\n");
  out << "T = " << r.temperature << " K, torque " << r.torque << " N m, final " << r.final_frequency() / 1e9
      << " GHz\n";
  out << "tennis racket: " << (r.tennis_racket() ? "yes at " + std::to_string(*r.tennis_racket_time * 1e3) + " ms" : "no")
      << "\nstretching: " << (r.stretching() ? "yes at " + std::to_string(*r.stretching_time * 1e3) + " ms" : "no")
      << "\nwrote " << dpath.string() << " and " << jpath.string() << "\n";
}

}  // namespace

int run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options,
                std::ostream& out, std::ostream& err) {
  try {
    if (command != "analyze" && command != "scan" && command != "simulate" && command != "spinup")
      throw ConfigError("unknown command '" + command + "' (expected analyze, scan, simulate or spinup)");
    const ScenarioConfig cfg = apply_overrides(load_config(config_path), options);
    if (command == "analyze") run_analyze(cfg, out);
    if (command == "scan") run_scan(cfg, out);
    if (command == "simulate") run_simulate(cfg, out);
    if (command == "spinup") run_spinup(cfg, out);
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const PhysicsError& e) {
    err << "physics error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "output error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nanorotor
