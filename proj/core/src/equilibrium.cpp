#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "finite_difference.hpp"
#include "nanorotor/errors.hpp"
#include "nanorotor/linear_analysis.hpp"

namespace nanorotor {
namespace {

// Finite-difference step per coordinate: a fraction of the reduced
// wavelength for translations, of a radian for angles.
Vector6d fd_steps(const Setup& s, double translational, double angular) {
  Vector6d h;
  const double len = 1.0 / s.wavenumber();
  h << translational * len, translational * len, translational * len, angular, angular, angular;
  return h;
}

Vector6d natural_lengths(const Setup& s) {
  Vector6d l;
  const double len = 1.0 / s.wavenumber();
  l << len, len, len, 1.0, 1.0, 1.0;
  return l;
}

}  // namespace

Vector6d tweezer_minimum(const Setup& s) {
  Vector6d q = Vector6d::Zero();
  q[alpha] = -s.tweezer().rotation;
  q[beta] = constants::pi / 2.0;
  return q;
}

Orientation orientation_of(const Vector6d& q) { return Orientation::from_euler(q[alpha], q[beta], q[gamma]); }

Matrix6d kinetic_metric(const Setup& s, const Vector6d& q) {
  Matrix6d m = Matrix6d::Zero();
  m.topLeftCorner<3, 3>() = s.material.mass * Eigen::Matrix3d::Identity();
  m.bottomRightCorner<3, 3>() = rotational_metric(q.tail<3>(), s.material.inertia);
  return m;
}

Vector6d generalized_force(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b, bool radiation) {
  const Eigen::Vector3d r = q.head<3>();
  const Orientation o = orientation_of(q);
  Eigen::Vector3d force = conservative_force(s, r, o, b);
  Eigen::Vector3d torque = conservative_torque(s, r, o, b);
  if (radiation) {
    force += radiation_force(s, r, o, b);
    torque += radiation_torque(s, r, o, b);
  }
  Vector6d out;
  out.head<3>() = force;
  out.tail<3>() = euler_rate_jacobian_space(q.tail<3>()).transpose() * torque;
  return out;
}

double potential_at(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b) {
  return optical_potential(s, q.head<3>(), orientation_of(q), b);
}

Matrix6d potential_hessian(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b) {
  const Vector6d h = fd_steps(s, 0.02, 0.01);
  Matrix6d k;
  for (int j = 0; j < 6; ++j) {
    auto shifted = [&](double d) {
      Vector6d qq = q;
      qq[j] += d * h[j];
      return generalized_force(s, qq, b, false);
    };
    k.col(j) = -detail::richardson_derivative(shifted, 1.0) / h[j];
  }
  return 0.5 * (k + k.transpose());
}

Matrix6d potential_hessian_from_energy(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b) {
  const Vector6d h = fd_steps(s, 0.02, 0.01);
  auto v = [&](int i, double di, int j, double dj) {
    Vector6d qq = q;
    qq[i] += di;
    qq[j] += dj;
    return potential_at(s, qq, b);
  };
  Matrix6d k;
  for (int i = 0; i < 6; ++i) {
    for (int j = i; j < 6; ++j) {
      auto second = [&](double step) {
        const double hi = step * h[i];
        const double hj = step * h[j];
        if (i == j) return (v(i, hi, i, 0.0) - 2.0 * v(i, 0.0, i, 0.0) + v(i, -hi, i, 0.0)) / (hi * hi);
        return (v(i, hi, j, hj) - v(i, hi, j, -hj) - v(i, -hi, j, hj) + v(i, -hi, j, -hj)) / (4.0 * hi * hj);
      };
      // Two Richardson levels on the O(h^2) stencils.
      const double d1 = second(1.0);
      const double d2 = second(0.5);
      const double d4 = second(0.25);
      const double r1 = (4.0 * d2 - d1) / 3.0;
      const double r2 = (4.0 * d4 - d2) / 3.0;
      k(i, j) = k(j, i) = (16.0 * r2 - r1) / 15.0;
    }
  }
  return k;
}

Equilibrium find_equilibrium(const Setup& s, const EquilibriumOptions& options) {
  if (!stability_check(s)) {
    throw PhysicsError("detuning violates Delta < U0 chi_c; the tweezer is not sufficiently red-detuned");
  }

  Equilibrium eq;
  eq.tweezer_minimum = tweezer_minimum(s);
  eq.tweezer_cavity = steady_cavity_amplitudes(s, eq.tweezer_minimum.head<3>(), orientation_of(eq.tweezer_minimum),
                                               options.radiation);

  const Matrix6d k0 = potential_hessian(s, eq.tweezer_minimum, eq.tweezer_cavity);
  const Matrix6d m0 = kinetic_metric(s, eq.tweezer_minimum);
  const Vector6d minv = m0.inverse().diagonal();
  const double omega_min2 = constants::unconfined_frequency * constants::unconfined_frequency;

  std::vector<int> active;
  for (int q = 0; q < 6; ++q) {
    const double w2 = k0(q, q) * minv[q];
    if (w2 < -omega_min2) {
      throw UnstableTrapError("trap is unstable along " + std::string(coordinate_names[q]) +
                              " (negative curvature at the tweezer minimum)");
    }
    eq.confined[q] = w2 >= omega_min2;
    if (eq.confined[q]) active.push_back(q);
  }
  const int n = static_cast<int>(active.size());

  if (n > 0) {
    Eigen::MatrixXd ka(n, n), ma(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        ka(i, j) = k0(active[i], active[j]);
        ma(i, j) = m0(active[i], active[j]);
      }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ka, ma, Eigen::EigenvaluesOnly);
    if (ges.eigenvalues().minCoeff() < omega_min2) {
      throw UnstableTrapError("the coupled trap Hessian is not positive definite at the tweezer minimum");
    }
  }

  const Vector6d len = natural_lengths(s);
  Vector6d scale;
  for (int q = 0; q < 6; ++q) scale[q] = std::max(std::abs(k0(q, q)) * len[q], 1e-300);

  auto residual = [&](const Vector6d& q) {
    const Orientation o = orientation_of(q);
    const Eigen::Vector2cd b = steady_cavity_amplitudes(s, q.head<3>(), o, options.radiation);
    const Vector6d f = generalized_force(s, q, b, options.radiation);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = f[active[i]] / scale[active[i]];
    return r;
  };

  Vector6d q = eq.tweezer_minimum;
  Eigen::VectorXd r = residual(q);
  double norm = n > 0 ? r.lpNorm<Eigen::Infinity>() : 0.0;
  int iter = 0;
  while (norm >= options.tolerance && iter < options.max_iterations) {
    ++iter;
    Eigen::MatrixXd jac(n, n);
    for (int j = 0; j < n; ++j) {
      const double h = 1e-4 * len[active[j]];
      Vector6d qp = q, qm = q;
      qp[active[j]] += h;
      qm[active[j]] -= h;
      jac.col(j) = (residual(qp) - residual(qm)) / (2.0 * h);
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-r);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vector6d trial = q;
      for (int i = 0; i < n; ++i) trial[active[i]] += lambda * step[i];
      const Eigen::VectorXd rt = residual(trial);
      const double nt = rt.lpNorm<Eigen::Infinity>();
      if (std::isfinite(nt) && nt < norm) {
        q = trial;
        r = rt;
        norm = nt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(norm < options.tolerance)) {
    throw EquilibriumNotFoundError("equilibrium search did not converge (scaled residual " + std::to_string(norm) +
                                       " after " + std::to_string(iter) + " iterations)",
                                   norm);
  }

  eq.position = q;
  eq.cavity = steady_cavity_amplitudes(s, q.head<3>(), orientation_of(q), options.radiation);
  eq.residual = norm;
  eq.iterations = iter;
  return eq;
}

}  // namespace nanorotor
