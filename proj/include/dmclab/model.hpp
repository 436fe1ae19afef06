#pragma once

// Closed-form quantities of the quartic oscillator
//   H = -1/2 d^2/dx^2 + omega^2 x^2 / 2 + theta x^4
// restricted to odd functions, with importance function
//   psi_I(x) = sqrt(2 omega) (omega/pi)^{1/4} x exp(-omega x^2 / 2).

#include <cmath>
#include <numbers>

#include "dmclab/error.hpp"
#include "dmclab/params.hpp"

namespace dmclab::model {

inline double potential(double x, const ModelParams& p) {
  detail::require_finite(x, "potential");
  const double x2 = x * x;
  return 0.5 * p.omega * p.omega * x2 + p.theta * x2 * x2;
}

/// b(x) = psi_I'/psi_I = 1/x - omega x, defined on (0, inf).
inline double drift(double x, const ModelParams& p) {
  detail::require_finite(x, "drift");
  if (!(x > 0)) throw InvalidArgument("drift: x must be > 0 (walker at or past the node)");
  return 1.0 / x - p.omega * x;
}

/// E_L = H psi_I / psi_I = 3 omega / 2 + theta x^4.
inline double local_energy(double x, const ModelParams& p) {
  detail::require_finite(x, "local_energy");
  const double x2 = x * x;
  return 1.5 * p.omega + p.theta * x2 * x2;
}

inline double importance_function(double x, double omega) {
  detail::require_finite(x, "importance_function");
  return std::sqrt(2.0 * omega) * std::pow(omega / std::numbers::pi, 0.25) * x *
         std::exp(-0.5 * omega * x * x);
}

/// Density of the invariant law 2 psi_I(x)^2 1_{x > 0}.
inline double invariant_density(double x, const ModelParams& p) {
  detail::require_finite(x, "invariant_density");
  if (!(x > 0)) return 0.0;
  const double psi = importance_function(x, p.omega);
  return 2.0 * psi * psi;
}

}  // namespace dmclab::model
