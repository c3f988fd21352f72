#pragma once

#include <type_traits>

// Internal helpers for numerical derivatives.

namespace nanorotor::detail {

/// Five-point central difference of f at step h, improved by one
/// Richardson step (h, h/2): error O(h^6). f may return a scalar or a
/// fixed-size Eigen object.
template <class F>
auto richardson_derivative(F&& f, double h) {
  using R = std::decay_t<decltype(f(0.0))>;
  auto stencil = [&](double step) {
    const R m2 = f(-2.0 * step);
    const R m1 = f(-step);
    const R p1 = f(step);
    const R p2 = f(2.0 * step);
    R d = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step);
    return d;
  };
  const R coarse = stencil(h);
  const R fine = stencil(0.5 * h);
  R out = (16.0 * fine - coarse) / 15.0;
  return out;
}

template <class F>
double richardson_derivative_scalar(F&& f, double h) {
  return richardson_derivative(std::forward<F>(f), h);
}

}  // namespace nanorotor::detail
