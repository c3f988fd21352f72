#include "nanorotor/stochastic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "nanorotor/errors.hpp"

namespace nanorotor {
namespace {

double wrap_angle(double a) { return std::remainder(a, constants::two_pi); }

// Exact OU update over h: p -> e^{-g h} p + sqrt(D (1 - e^{-2 g h}) / g) n.
struct OuKick {
  double decay = 1.0;
  double spread = 0.0;
  OuKick() = default;
  OuKick(double damping, double diffusion, double h) {
    if (damping > 0.0) {
      decay = std::exp(-damping * h);
      spread = std::sqrt(diffusion * -std::expm1(-2.0 * damping * h) / damping);
    } else {
      spread = std::sqrt(2.0 * diffusion * h);
    }
  }
};

class NoiseKicks {
 public:
  NoiseKicks(const NoiseModel& noise, double h) {
    for (int i = 0; i < 3; ++i) {
      trans_[i] = OuKick(noise.translational_damping[i], noise.translational_diffusion[i], h);
      rot_[i] = OuKick(noise.rotational_damping[i], noise.rotational_diffusion[i], h);
    }
    cavity_ = std::sqrt(std::max(noise.cavity_noise, 0.0) * noise.linewidth * h / 2.0);
  }

  template <class Rng>
  void apply(StateVector& x, Rng& rng, std::normal_distribution<double>& normal) const {
    for (int i = 0; i < 3; ++i) {
      x[3 + i] = trans_[i].decay * x[3 + i] + (trans_[i].spread > 0.0 ? trans_[i].spread * normal(rng) : 0.0);
      x[10 + i] = rot_[i].decay * x[10 + i] + (rot_[i].spread > 0.0 ? rot_[i].spread * normal(rng) : 0.0);
    }
    if (cavity_ > 0.0)
      for (int i = 13; i < 17; ++i) x[i] += cavity_ * normal(rng);
  }

 private:
  std::array<OuKick, 3> trans_;
  std::array<OuKick, 3> rot_;
  double cavity_ = 0.0;
};

void renormalize_quaternion(StateVector& x) {
  const double n = std::sqrt(x[6] * x[6] + x[7] * x[7] + x[8] * x[8] + x[9] * x[9]);
  for (int i = 6; i < 10; ++i) x[i] /= n;
}

bool finite(const StateVector& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

NoiseModel noise_model(const Setup& s, const Environment& env, const LinearModel& model, double cavity_noise) {
  NoiseModel n = gas_noise(s, env);
  const Vector6d recoil = recoil_heating(s, model);
  for (int i = 0; i < 3; ++i) {
    n.translational_diffusion[i] += constants::hbar * model.mass[i] * model.frequency[i] * recoil[i];
    n.rotational_diffusion[i] += constants::hbar * model.mass[3 + i] * model.frequency[3 + i] * recoil[3 + i];
  }
  n.linewidth = s.cavity().linewidth;
  n.cavity_noise = cavity_noise;
  return n;
}

NoiseModel gas_noise(const Setup& s, const Environment& env) {
  NoiseModel n;
  const double gamma = gas_damping_constant(s, env);
  const double kt = constants::boltzmann * env.gas_temperature;
  n.translational_damping.setConstant(env.translational_gas_factor * gamma);
  n.rotational_damping.setConstant(gamma);
  n.translational_diffusion = s.material.mass * n.translational_damping * kt;
  n.rotational_diffusion = s.material.inertia.cwiseProduct(n.rotational_damping) * kt;
  return n;
}

double max_time_step(const Setup& s, const LinearModel& model) {
  double fastest = std::max(s.cavity().linewidth, std::abs(s.cavity().detuning));
  fastest = std::max(fastest, model.frequency.maxCoeff());
  fastest = std::max(fastest, model.block_detuning.cwiseAbs().maxCoeff());
  return constants::two_pi / (20.0 * fastest);
}

void integrate(const MechanicalState& initial, const Setup& s, const NoiseModel& noise,
               const SimulationOptions& options, const TrajectoryObserver& observer) {
  if (!(options.dt > 0.0) || !(options.duration >= 0.0)) throw IntegrationError("time step must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(options.duration / options.dt));
  const int stride = std::max(options.sample_stride, 1);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  const NoiseKicks half(noise, 0.5 * options.dt);
  boost::numeric::odeint::runge_kutta4<StateVector> stepper;
  auto system = [&](const StateVector& x, StateVector& dxdt, double) {
    equations_of_motion(s, x, dxdt, options.dynamics);
  };

  StateVector x = pack(initial);
  double t = initial.time;
  observer(t, x);
  for (std::size_t i = 1; i <= steps; ++i) {
    half.apply(x, rng, normal);
    stepper.do_step(system, x, t, options.dt);
    half.apply(x, rng, normal);
    renormalize_quaternion(x);
    t = initial.time + static_cast<double>(i) * options.dt;
    if (!finite(x)) {
      throw IntegrationError("state became non-finite at t = " + std::to_string(t) +
                             " s; reduce the time step below " + std::to_string(options.dt) + " s");
    }
    if (i % static_cast<std::size_t>(stride) == 0) observer(t, x);
  }
}

Trajectory integrate_trajectory(const MechanicalState& initial, const Setup& s, const NoiseModel& noise,
                                const SimulationOptions& options) {
  Trajectory traj;
  traj.dt = options.dt * std::max(options.sample_stride, 1);
  traj.seed = options.seed;
  const auto expected = static_cast<std::size_t>(options.duration / traj.dt) + 2;
  traj.time.reserve(expected);
  traj.states.reserve(expected);
  integrate(initial, s, noise, options, [&](double t, const StateVector& x) {
    traj.time.push_back(t);
    traj.states.push_back(x);
  });
  return traj;
}

ModeCoordinates mode_coordinates(const LinearModel& model, const MechanicalState& state) {
  const Vector6d& q0 = model.equilibrium.position;
  ModeCoordinates c;
  c.dq.head<3>() = state.position - q0.head<3>();
  const Eigen::Vector3d angles = state.orientation.euler();
  for (int i = 0; i < 3; ++i) c.dq[3 + i] = wrap_angle(angles[i] - q0[3 + i]);
  c.p.head<3>() = state.momentum;
  c.p.tail<3>() = euler_rate_jacobian_body(angles).transpose() * state.angular_momentum;
  c.db = state.cavity - model.equilibrium.cavity;
  return c;
}

MechanicalState state_from_modes(const Setup& s, const LinearModel& model, const ModeCoordinates& c) {
  (void)s;
  const Vector6d& q0 = model.equilibrium.position;
  MechanicalState state;
  state.position = q0.head<3>() + c.dq.head<3>();
  const Eigen::Vector3d angles = q0.tail<3>() + c.dq.tail<3>();
  state.orientation = Orientation::from_euler(angles);
  state.momentum = c.p.head<3>();
  state.angular_momentum = euler_rate_jacobian_body(angles).transpose().fullPivLu().solve(Eigen::Vector3d(c.p.tail<3>()));
  state.cavity = model.equilibrium.cavity + c.db;
  return state;
}

std::array<double, 6> phonon_proxy(const LinearModel& model, const HybridModes& modes, const MechanicalState& state) {
  const ModeCoordinates c = mode_coordinates(model, state);
  std::array<double, 6> out{};
  for (int q = 0; q < 6; ++q) {
    const HybridMode& mode = modes.modes[q];
    if (!mode.confined) {
      out[q] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double xq = mode.shape.dot(model.metric * c.dq);
    const double pq = mode.shape.dot(c.p);
    const double w = mode.frequency;
    out[q] = (pq * pq + w * w * xq * xq) / (2.0 * constants::hbar * w) - 0.5;
  }
  return out;
}

MechanicalState sample_steady_state(const Setup& s, const LinearModel& model, const HybridModes& modes,
                                    const HeatingRates& heating, const CoolingReport& report, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ModeCoordinates c;
  for (int block = 0; block < 2; ++block) {
    const LinearSystem sys = linear_system(model, heating, block);
    const int n = sys.mechanical();
    // Keep the cooled coordinates and the cavity quadratures.
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
      if (report.modes[sys.coordinates[i]].occupation) keep.push_back(i);
    if (keep.empty()) continue;
    for (int i : std::vector<int>(keep)) keep.push_back(n + i);
    keep.push_back(2 * n);
    keep.push_back(2 * n + 1);

    const Eigen::MatrixXd full = steady_covariance(sys);
    const int m = static_cast<int>(keep.size());
    Eigen::MatrixXd cov(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) cov(i, j) = full(keep[i], keep[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z[i] = normal(rng);
    const Eigen::VectorXd draw = root * z;

    for (int i = 0; i < m; ++i) {
      const int idx = keep[i];
      const double value = draw[i] * sys.scale[idx];
      if (idx < n) {
        c.dq[sys.coordinates[idx]] = value;
      } else if (idx < 2 * n) {
        c.p[sys.coordinates[idx - n]] = value;
      } else if (idx == 2 * n) {
        c.db[block] += cdouble(value, 0.0);
      } else {
        c.db[block] += cdouble(0.0, value);
      }
    }
  }
  (void)modes;
  return state_from_modes(s, model, c);
}

OccupationEstimate estimate_occupations(const LinearModel& model, const HybridModes& modes, const Trajectory& traj,
                                        double burn_in, int batches) {
  OccupationEstimate est;
  const std::size_t start = static_cast<std::size_t>(burn_in * static_cast<double>(traj.size()));
  const std::size_t count = traj.size() - start;
  if (traj.size() <= start || count < static_cast<std::size_t>(batches)) {
    throw InsufficientDataError("trajectory too short for occupation estimate");
  }
  const std::size_t per_batch = count / static_cast<std::size_t>(batches);
  std::vector<std::array<double, 6>> batch_mean(static_cast<std::size_t>(batches), std::array<double, 6>{});
  for (int b = 0; b < batches; ++b) {
    for (std::size_t k = 0; k < per_batch; ++k) {
      const std::size_t idx = start + static_cast<std::size_t>(b) * per_batch + k;
      const auto proxy = phonon_proxy(model, modes, unpack(traj.states[idx]));
      for (int q = 0; q < 6; ++q) batch_mean[b][q] += proxy[q] / static_cast<double>(per_batch);
    }
  }
  for (int q = 0; q < 6; ++q) {
    double mean = 0.0;
    for (const auto& bm : batch_mean) mean += bm[q] / batches;
    double var = 0.0;
    for (const auto& bm : batch_mean) var += (bm[q] - mean) * (bm[q] - mean);
    est.mean[q] = mean;
    est.error[q] = std::sqrt(var / (batches * (batches - 1.0)));
  }
  return est;
}

Eigen::MatrixXd simulate_linearized_covariance(const LinearSystem& system, double dt, std::size_t steps,
                                               std::uint64_t seed) {
  const int n = system.size();
  // Van Loan: exp([[-A, D], [0, A^T]] dt) = [[., G], [0, F]], Phi = F^T, Q = Phi G.
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = -system.drift;
  big.topRightCorner(n, n) = system.diffusion;
  big.bottomRightCorner(n, n) = system.drift.transpose();
  const Eigen::MatrixXd e = (big * dt).exp();
  // exp(-A dt) grows like exp(kappa dt)
  if (!e.allFinite()) throw IntegrationError("linearized propagator overflows; reduce the sampling step");
  const Eigen::MatrixXd phi = e.bottomRightCorner(n, n).transpose();
  Eigen::MatrixXd q = phi * e.topRightCorner(n, n);
  q = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), z(n);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  const std::size_t skip = steps / 10;
  std::size_t used = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    for (int k = 0; k < n; ++k) z[k] = normal(rng);
    x = phi * x + root * z;
    if (i >= skip) {
      acc.noalias() += x * x.transpose();
      ++used;
    }
  }
  if (used == 0) throw InsufficientDataError("no samples left after burn-in");
  return acc / static_cast<double>(used);
}

}  // namespace nanorotor
