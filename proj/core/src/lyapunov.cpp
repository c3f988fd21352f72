#include "nanorotor/lyapunov.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "nanorotor/errors.hpp"

namespace nanorotor {

LinearSystem linear_system(const LinearModel& model, const HeatingRates& heating, int block) {
  LinearSystem sys;
  sys.block = block;
  for (int q = 0; q < 6; ++q)
    if (block_of(q) == block && model.confined[q] && model.frequency[q] > 0.0) sys.coordinates.push_back(q);
  const int n = sys.mechanical();
  const int dim = 2 * n + 2;
  const double hbar = constants::hbar;

  Eigen::MatrixXd k(n, n), m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      k(i, j) = model.stiffness(sys.coordinates[i], sys.coordinates[j]);
      m(i, j) = model.metric(sys.coordinates[i], sys.coordinates[j]);
    }
  const Eigen::MatrixXd minv = m.inverse();

  sys.scale = Eigen::VectorXd::Ones(dim);
  for (int i = 0; i < n; ++i) {
    const double qzp = model.zero_point[sys.coordinates[i]];
    sys.scale[i] = qzp;
    sys.scale[n + i] = hbar / (2.0 * qzp);
  }

  // Physical drift, then similarity-scaled.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim, dim);
  const int re = 2 * n, im = 2 * n + 1;
  const double delta = model.block_detuning[block];
  const double kappa = model.linewidth;
  a.block(0, n, n, n) = minv;
  a.block(n, 0, n, n) = -k;
  for (int i = 0; i < n; ++i) {
    const int q = sys.coordinates[i];
    const cdouble c = model.cavity_derivative(block, q);
    // dp = -2 Re(c db) = -2 (Re c Re db - Im c Im db)
    a(n + i, re) = -2.0 * c.real();
    a(n + i, im) = 2.0 * c.imag();
    a(n + i, n + i) = -heating.gas_damping[q];
    // d db = -(i / hbar) c* dq
    const cdouble rate = cdouble(0.0, -1.0 / hbar) * std::conj(c);
    a(re, i) = rate.real();
    a(im, i) = rate.imag();
    const double w = model.frequency[q];
    d(n + i, n + i) = 2.0 * hbar * model.mass[q] * w * heating.total()[q];
  }
  a(re, re) = -kappa;
  a(re, im) = -delta;
  a(im, re) = delta;
  a(im, im) = -kappa;
  d(re, re) = 0.5 * kappa;
  d(im, im) = 0.5 * kappa;

  const Eigen::VectorXd inv = sys.scale.cwiseInverse();
  sys.drift = inv.asDiagonal() * a * sys.scale.asDiagonal();
  sys.diffusion = inv.asDiagonal() * d * inv.asDiagonal();
  return sys;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion) {
  const int n = static_cast<int>(drift.rows());
  const Eigen::VectorXcd ev = drift.eigenvalues();
  for (int i = 0; i < n; ++i) {
    if (!(ev[i].real() < 0.0)) {
      throw PhysicsError("linearized dynamics are not damped (eigenvalue with Re >= 0); no steady state");
    }
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd op = Eigen::kroneckerProduct(id, drift) + Eigen::kroneckerProduct(drift, id);
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(diffusion.data(), n * n);
  const Eigen::VectorXd sol = op.partialPivLu().solve(rhs);
  Eigen::MatrixXd cov = Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, n);
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd steady_covariance(const LinearSystem& system) {
  return solve_lyapunov(system.drift, system.diffusion);
}

std::array<std::optional<double>, 6> covariance_occupations(const LinearModel& model, const HybridModes& modes,
                                                            const LinearSystem& system,
                                                            const Eigen::MatrixXd& covariance) {
  std::array<std::optional<double>, 6> out{};
  const int n = system.mechanical();
  if (n == 0) return out;
  const Eigen::MatrixXd cov = system.scale.asDiagonal() * covariance * system.scale.asDiagonal();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = model.metric(system.coordinates[i], system.coordinates[j]);

  for (const HybridMode& mode : modes.modes) {
    if (mode.block != system.block || !mode.confined) continue;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = mode.shape[system.coordinates[i]];
    const Eigen::VectorXd xq = m * v;
    const double x2 = xq.dot(cov.topLeftCorner(n, n) * xq);
    const double p2 = v.dot(cov.block(n, n, n, n) * v);
    const double w = mode.frequency;
    out[mode.dominant] = (p2 + w * w * x2) / (2.0 * constants::hbar * w) - 0.5;
  }
  return out;
}

std::array<std::optional<double>, 6> lyapunov_occupations(const LinearModel& model, const HybridModes& modes,
                                                          const HeatingRates& heating) {
  std::array<std::optional<double>, 6> out{};
  for (int block = 0; block < 2; ++block) {
    const LinearSystem sys = linear_system(model, heating, block);
    if (sys.mechanical() == 0) continue;
    const auto occ = covariance_occupations(model, modes, sys, steady_covariance(sys));
    for (int q = 0; q < 6; ++q)
      if (occ[q]) out[q] = occ[q];
  }
  return out;
}

}  // namespace nanorotor
