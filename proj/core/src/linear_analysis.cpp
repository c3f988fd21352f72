#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "finite_difference.hpp"
#include "nanorotor/errors.hpp"
#include "nanorotor/linear_analysis.hpp"

namespace nanorotor {
namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double weak_ratio = 0.1;

std::array<int, 4> block_members(int block, int& count) {
  if (block == 0) {
    count = 4;
    return {x, y, z, alpha};
  }
  count = 2;
  return {beta, gamma, 0, 0};
}

}  // namespace

LinearModel harmonic_expansion(const Setup& s, const Equilibrium& eq, ExpansionPoint point) {
  LinearModel m;
  m.equilibrium = eq;
  m.point = point;
  m.confined = eq.confined;
  const bool at_minimum = point == ExpansionPoint::tweezer_minimum;
  const Vector6d q0 = at_minimum ? eq.tweezer_minimum : eq.position;
  const Eigen::Vector2cd b0 = at_minimum ? eq.tweezer_cavity : eq.cavity;
  m.origin = q0;
  m.cavity_origin = b0;
  const Orientation o0 = orientation_of(q0);

  m.stiffness = potential_hessian(s, q0, b0);
  m.metric = kinetic_metric(s, q0);
  const Matrix6d minv = m.metric.inverse();
  for (int q = 0; q < 6; ++q) {
    m.mass[q] = 1.0 / minv(q, q);
    const double w2 = m.stiffness(q, q) / m.mass[q];
    m.frequency[q] = m.confined[q] && w2 > 0.0 ? std::sqrt(w2) : 0.0;
    m.zero_point[q] = m.frequency[q] > 0.0 ? std::sqrt(constants::hbar / (2.0 * m.mass[q] * m.frequency[q])) : 0.0;
  }

  const double len = 1.0 / s.wavenumber();
  for (int q = 0; q < 6; ++q) {
    const double h = q < 3 ? 0.02 * len : 0.01;
    auto shifted = [&](double d) {
      Vector6d qq = q0;
      qq[q] += d * h;
      return potential_cavity_derivative(s, qq.head<3>(), orientation_of(qq), b0);
    };
    m.cavity_derivative.col(q) = detail::richardson_derivative(shifted, 1.0) / h;
  }

  for (int q = 0; q < 6; ++q) {
    for (int j = 0; j < 2; ++j) m.coupling(j, q) = -m.zero_point[q] * m.cavity_derivative(j, q) / constants::hbar;
    for (int p = 0; p < 6; ++p) {
      m.mechanical_coupling(q, p) =
          q == p ? 0.0 : -m.zero_point[q] * m.zero_point[p] * m.stiffness(q, p) / constants::hbar;
    }
  }

  // Enforce the two-block structure; a sizeable cross term means the
  // tweezer rotation or cavity angle is inconsistent with the block split.
  for (int j = 0; j < 2; ++j) {
    double in_block = 0.0;
    for (int q = 0; q < 6; ++q)
      if (block_of(q) == j) in_block = std::max(in_block, std::abs(m.coupling(j, q)));
    for (int q = 0; q < 6; ++q) {
      // Symmetry zeros only resolved to finite-difference noise.
      if (block_of(q) == j && std::abs(m.coupling(j, q)) < 1e-8 * in_block) {
        m.coupling(j, q) = 0.0;
        m.cavity_derivative(j, q) = 0.0;
      }
      if (block_of(q) == j) continue;
      if (m.confined[q] && std::abs(m.coupling(j, q)) > 1e-6 * in_block && in_block > 0.0) {
        std::ostringstream msg;
        msg << "cavity mode b" << j + 1 << " couples to " << coordinate_names[q] << " (|g| = " << std::abs(m.coupling(j, q))
            << " rad/s); check tweezer rotation and cavity axis angle";
        throw ConventionViolationError(msg.str());
      }
      m.coupling(j, q) = 0.0;
      m.cavity_derivative(j, q) = 0.0;
    }
  }
  for (int q = 0; q < 6; ++q) {
    for (int p = 0; p < 6; ++p) {
      if (block_of(q) == block_of(p)) continue;
      const double scale = std::sqrt(m.frequency[q] * m.frequency[p]);
      if (m.confined[q] && m.confined[p] && std::abs(m.mechanical_coupling(q, p)) > 1e-6 * scale) {
        std::ostringstream msg;
        msg << "mechanical coupling between " << coordinate_names[q] << " and " << coordinate_names[p]
            << " crosses cavity blocks (|g| = " << std::abs(m.mechanical_coupling(q, p)) << " rad/s)";
        throw ConventionViolationError(msg.str());
      }
      m.mechanical_coupling(q, p) = 0.0;
      m.stiffness(q, p) = 0.0;
    }
  }

  const Eigen::Matrix2d detuning = effective_detuning(s, q0.head<3>(), o0);
  m.block_detuning = detuning.diagonal();
  m.linewidth = s.cavity().linewidth;
  return m;
}

HybridModes bare_modes(const LinearModel& model) {
  HybridModes out;
  for (int q = 0; q < 6; ++q) {
    HybridMode& mode = out.modes[q];
    mode.label = std::string(coordinate_names[q]);
    mode.dominant = q;
    mode.block = block_of(q);
    mode.confined = model.confined[q] && model.frequency[q] > 0.0;
    mode.frequency = model.frequency[q];
    mode.coupling = mode.confined ? model.coupling(mode.block, q) : cdouble{};
    mode.shape = Vector6d::Zero();
    mode.shape[q] = 1.0 / std::sqrt(model.mass[q]);
    mode.overlap = 1.0;
  }
  return out;
}

HybridModes hybridize_modes(const LinearModel& model) {
  HybridModes out = bare_modes(model);
  for (auto& mode : out.modes) mode.label += "'";

  for (int block = 0; block < 2; ++block) {
    int count = 0;
    const auto members = block_members(block, count);
    std::vector<int> active;
    for (int i = 0; i < count; ++i)
      if (out.modes[members[i]].confined) active.push_back(members[i]);
    const int n = static_cast<int>(active.size());
    if (n == 0) continue;

    Eigen::MatrixXd k(n, n), mm(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        k(i, j) = model.stiffness(active[i], active[j]);
        mm(i, j) = model.metric(active[i], active[j]);
      }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(k, mm);
    if (ges.info() != Eigen::Success || ges.eigenvalues().minCoeff() <= 0.0) {
      throw DarkModeError("block " + std::to_string(block + 1) + " quadratic form is not positive definite");
    }
    const Eigen::MatrixXd v = ges.eigenvectors();  // columns, v^T M v = 1

    // Mass-weighted overlap of hybrid mode Q with bare coordinate q.
    Eigen::MatrixXd overlap(n, n);
    for (int col = 0; col < n; ++col)
      for (int i = 0; i < n; ++i) overlap(i, col) = v(i, col) * v(i, col) * model.mass[active[i]];
    for (int col = 0; col < n; ++col) overlap.col(col) /= overlap.col(col).sum();

    // Greedy labeling: largest remaining overlap first, ties broken by frequency.
    std::vector<bool> used_mode(n, false), used_coord(n, false);
    for (int step = 0; step < n; ++step) {
      int best_i = -1, best_c = -1;
      double best = -1.0;
      for (int col = 0; col < n; ++col) {
        if (used_mode[col]) continue;
        for (int i = 0; i < n; ++i) {
          if (used_coord[i]) continue;
          if (overlap(i, col) > best + 1e-12 ||
              (std::abs(overlap(i, col) - best) <= 1e-12 && col < best_c)) {
            best = overlap(i, col);
            best_i = i;
            best_c = col;
          }
        }
      }
      used_mode[best_c] = used_coord[best_i] = true;
      const int q = active[best_i];
      HybridMode& mode = out.modes[q];
      mode.frequency = std::sqrt(ges.eigenvalues()[best_c]);
      mode.shape = Vector6d::Zero();
      for (int i = 0; i < n; ++i) mode.shape[active[i]] = v(i, best_c);
      if (mode.shape[q] < 0.0) mode.shape = -mode.shape;
      mode.overlap = best;
      cdouble sum{};
      for (int i = 0; i < n; ++i) sum += mode.shape[active[i]] * model.cavity_derivative(block, active[i]);
      mode.coupling = -std::sqrt(constants::hbar / (2.0 * mode.frequency)) * sum / constants::hbar;
      out.max_mixing_angle = std::max(out.max_mixing_angle, std::acos(std::sqrt(std::clamp(best, 0.0, 1.0))));
    }
    double strongest = 0.0;
    for (int q : active) strongest = std::max(strongest, std::abs(out.modes[q].coupling));
    for (int q : active)
      if (std::abs(out.modes[q].coupling) < 1e-8 * strongest) out.modes[q].coupling = 0.0;
  }
  return out;
}

Vector6d recoil_heating(const Setup& s, const LinearModel& model) {
  const Eigen::Vector3d chi = s.material.susceptibility;
  const double psi = s.tweezer().ellipticity;
  const double c2 = std::cos(psi) * std::cos(psi);
  const double s2 = std::sin(psi) * std::sin(psi);
  const double k = s.wavenumber();
  const double eps2 = s.tweezer_amplitude * s.tweezer_amplitude;
  const double gsc = s.optical.scattering;
  const double u = 5.0 * std::pow(1.0 - 1.0 / (k * s.tweezer().rayleigh_range()), 2);
  const double a = chi[2] * chi[2] * c2 + chi[1] * chi[1] * s2;

  Vector6d xi;
  const double base = gsc * eps2 * k * k / 5.0;
  const Vector6d& zp = model.zero_point;
  xi[x] = base * zp[x] * zp[x] * (2.0 * a - chi[2] * chi[2] * c2);
  xi[y] = base * zp[y] * zp[y] * (2.0 * a - chi[1] * chi[1] * s2);
  xi[z] = base * zp[z] * zp[z] * a * (2.0 + u);
  const Eigen::Vector3d dchi(std::abs(chi[1] - chi[2]), std::abs(chi[0] - chi[2]), std::abs(chi[0] - chi[1]));
  const Eigen::Vector3d factor(1.0, 1.0 - s2, 1.0 - c2);
  for (int i = 0; i < 3; ++i) xi[3 + i] = gsc * eps2 * zp[3 + i] * zp[3 + i] * dchi[i] * dchi[i] * factor[i];
  return xi;
}

double gas_damping_constant(const Setup& s, const Environment& env) {
  const double lb = s.particle.diameters[1];
  return 5.0 * env.pressure * lb * lb * std::sqrt(constants::two_pi * env.gas_mass) /
         (6.0 * s.material.mass * std::sqrt(constants::boltzmann * env.gas_temperature));
}

HeatingRates gas_heating(const Setup& s, const Environment& env, const LinearModel& model) {
  HeatingRates out;
  const double gamma = gas_damping_constant(s, env);
  for (int q = 0; q < 6; ++q) {
    out.gas_damping[q] = q < 3 ? env.translational_gas_factor * gamma : gamma;
    const double w = model.frequency[q];
    out.gas[q] = w > 0.0 ? constants::boltzmann * out.gas_damping[q] * env.gas_temperature / (constants::hbar * w) : 0.0;
  }
  return out;
}

HeatingRates heating_rates(const Setup& s, const Environment& env, const LinearModel& model) {
  HeatingRates out = gas_heating(s, env, model);
  out.recoil = recoil_heating(s, model);
  return out;
}

Vector6d hybrid_heating(const LinearModel& model, const HybridModes& hybrid, const Vector6d& bare_rates) {
  // D_q = hbar m_q omega_q xi_q, xi_Q = sum_q v_Qq^2 D_q / (hbar omega_Q).
  Vector6d out = Vector6d::Zero();
  for (int qq = 0; qq < 6; ++qq) {
    const HybridMode& mode = hybrid.modes[qq];
    if (!mode.confined || mode.frequency <= 0.0) {
      out[qq] = bare_rates[qq];
      continue;
    }
    double sum = 0.0;
    for (int q = 0; q < 6; ++q) {
      if (mode.shape[q] == 0.0) continue;
      sum += mode.shape[q] * mode.shape[q] * model.mass[q] * model.frequency[q] * bare_rates[q];
    }
    out[qq] = sum / mode.frequency;
  }
  return out;
}

SidebandRates cooling_rates(double coupling_magnitude, double frequency, double detuning, double linewidth) {
  const double g2 = coupling_magnitude * coupling_magnitude;
  const double k2 = linewidth * linewidth;
  SidebandRates r;
  r.cooling = 2.0 * g2 * linewidth / (k2 + std::pow(detuning + frequency, 2));
  r.heating = 2.0 * g2 * linewidth / (k2 + std::pow(detuning - frequency, 2));
  return r;
}

std::optional<double> steady_state_occupation(const SidebandRates& rates, double heating) {
  const double net = rates.cooling - rates.heating;
  if (!(net > 0.0)) return std::nullopt;
  return (rates.heating + heating) / net;
}

double cooling_timescale(double initial_temperature, double frequency, double occupation, const SidebandRates& rates) {
  const double net = rates.cooling - rates.heating;
  if (!(net > 0.0) || !(occupation > 0.0)) return nan;
  return std::log(constants::boltzmann * initial_temperature / (constants::hbar * frequency * occupation)) / net;
}

double coherence_time(double heating) {
  return heating > 0.0 ? 1.0 / heating : std::numeric_limits<double>::infinity();
}

double torque_sensitivity(double frequency, double moment_of_inertia, double heating) {
  return std::sqrt(4.0 * constants::hbar * frequency * moment_of_inertia * heating);
}

CoolingReport build_report(const Setup& s, const Environment& env, const LinearModel& model,
                           const HybridModes& hybrid) {
  CoolingReport report;
  report.equilibrium = model.equilibrium;
  const HeatingRates bare = heating_rates(s, env, model);
  const Vector6d recoil = hybrid_heating(model, hybrid, bare.recoil);
  const Vector6d gas = hybrid_heating(model, hybrid, bare.gas);

  for (int q = 0; q < 6; ++q) {
    const HybridMode& mode = hybrid.modes[q];
    ModeReport& r = report.modes[q];
    r.label = mode.label;
    r.block = mode.block;
    r.confined = mode.confined;
    r.frequency = mode.frequency;
    r.coupling = std::abs(mode.coupling);
    r.recoil_heating = recoil[q];
    r.gas_heating = gas[q];
    r.heating = recoil[q] + gas[q];
    r.coherence_time = coherence_time(r.heating);
    r.cooling_time = nan;
    if (!mode.confined) continue;
    r.rates = cooling_rates(r.coupling, r.frequency, model.block_detuning[mode.block], model.linewidth);
    r.occupation = steady_state_occupation(r.rates, r.heating);
    if (r.occupation) r.cooling_time = cooling_timescale(env.initial_temperature, r.frequency, *r.occupation, r.rates);
  }

  // Weak-coupling validity of the sideband picture.
  for (int q = 0; q < 6; ++q) {
    ModeReport& r = report.modes[q];
    if (!r.confined) continue;
    const double kappa = model.linewidth;
    bool ok = r.rates.cooling < weak_ratio * kappa && r.rates.heating < weak_ratio * kappa;
    for (int p = 0; p < 6; ++p) {
      const ModeReport& o = report.modes[p];
      if (p == q || !o.confined || o.block != r.block) continue;
      const double split = std::pow(r.frequency - o.frequency, 2);
      if (r.rates.cooling * o.rates.cooling >= weak_ratio * split ||
          r.rates.heating * o.rates.heating >= weak_ratio * split)
        ok = false;
    }
    r.weak_coupling = ok;
    if (!ok) {
      report.weak_coupling = false;
      report.warnings.push_back("mode " + r.label + ": weak-coupling condition violated; rates are indicative only");
    }
  }

  const ModeReport& g = report.modes[gamma];
  report.torque_sensitivity = g.confined ? torque_sensitivity(g.frequency, s.material.inertia[2], g.heating) : nan;
  if (hybrid.max_mixing_angle > 0.3) {
    std::ostringstream msg;
    msg << "strong mode hybridization (max mixing angle " << hybrid.max_mixing_angle << " rad)";
    report.warnings.push_back(msg.str());
  }
  return report;
}

CoolingReport analyze(const Setup& s, const Environment& env, const AnalysisOptions& options) {
  const Equilibrium eq = find_equilibrium(s);
  const LinearModel model = harmonic_expansion(s, eq, options.point);
  const HybridModes modes = options.hybridize ? hybridize_modes(model) : bare_modes(model);
  return build_report(s, env, model, modes);
}

}  // namespace nanorotor
