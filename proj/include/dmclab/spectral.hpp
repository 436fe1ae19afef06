#pragma once

// Deterministic reference for E_DMC(T): Galerkin discretization of H on
// the odd Hermite functions {phi_1, phi_3, ..., phi_{2n-1}}, dense
// eigendecomposition, and the eigen-expansion of exp(-tH) psi_I.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <vector>

#include "dmclab/error.hpp"

namespace dmclab::spectral {

inline constexpr int kMaxOrder = 200;

/// Dense symmetric matrix, row-major.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  [[nodiscard]] std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  [[nodiscard]] double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

/// Eigenpairs sorted by ascending eigenvalue; vectors(i, k) is component i
/// of eigenvector k.
struct Eigensystem {
  std::vector<double> values;
  SymmetricMatrix vectors{0};
};

/// Cyclic Jacobi rotations until the off-diagonal mass is at rounding level.
inline Eigensystem eigendecompose(const SymmetricMatrix& input, int max_sweeps = 100) {
  const std::size_t n = input.size();
  if (n == 0) throw InvalidArgument("eigendecompose: empty matrix");
  if (n > static_cast<std::size_t>(kMaxOrder)) throw InvalidArgument("eigendecompose: n > 200");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      detail::require_finite(input(i, j), "eigendecompose");
      if (input(i, j) != input(j, i)) throw InvalidArgument("eigendecompose: matrix not symmetric");
    }
  }
  SymmetricMatrix a = input;
  SymmetricMatrix v(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
  const double scale = input.frobenius_norm();
  const double tol = 1e-17 * scale;

  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= tol || off == 0.0) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300 ||
            std::abs(apq) < 1e-18 * (std::abs(a(p, p)) + std::abs(a(q, q)))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) throw ConvergenceError("eigendecompose: Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  Eigensystem out;
  out.values.resize(n);
  out.vectors = SymmetricMatrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// psi_0(y), ..., psi_{count-1}(y): L2-normalized Hermite functions
/// h_k(y) e^{-y^2/2} / sqrt(2^k k! sqrt(pi)), by the three-term recurrence
///   psi_{k+1} = sqrt(2/(k+1)) y psi_k - sqrt(k/(k+1)) psi_{k-1}.
inline void hermite_functions(double y, std::size_t count, std::vector<double>& out) {
  out.resize(count);
  if (count == 0) return;
  out[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
  if (count > 1) out[1] = std::numbers::sqrt2 * y * out[0];
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * y * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
  }
}

/// Eigenfunction phi_k of the harmonic part H_0 with frequency omega,
/// phi_k(x) = omega^{1/4} psi_k(sqrt(omega) x).
inline double hermite_function(int k, double omega, double x) {
  if (k < 0 || k > kMaxOrder) throw InvalidArgument("hermite_function: order must be in [0, 200]");
  detail::require_finite(x, "hermite_function");
  if (!(omega > 0)) throw InvalidArgument("hermite_function: omega must be > 0");
  std::vector<double> vals;
  hermite_functions(std::sqrt(omega) * x, static_cast<std::size_t>(k) + 1, vals);
  return std::pow(omega, 0.25) * vals.back();
}

/// n-point Gauss-Hermite rule for the weight e^{-x^2}.
///
/// `scaled_weights` are w_k e^{x_k^2}, the weights of the same rule applied
/// to an integrand that already carries its Gaussian decay; they are
/// computed directly as 1 / sum_{j<n} psi_j(x_k)^2 and keep full relative
/// accuracy at the outermost nodes, where w_k itself is tiny.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> scaled_weights;

  template <class F>
  [[nodiscard]] double integrate_weighted(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k]);
    return s;
  }

  template <class F>
  [[nodiscard]] double integrate_decaying(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += scaled_weights[k] * f(nodes[k]);
    return s;
  }
};

/// Nodes from the eigenvalues of the symmetric tridiagonal Jacobi matrix
/// (Golub-Welsch), each polished by Newton steps on psi_n, then symmetrized.
inline Quadrature gauss_hermite(int n) {
  if (n < 1) throw InvalidArgument("gauss_hermite: n must be >= 1");
  if (n > kMaxOrder) throw InvalidArgument("gauss_hermite: n > 200 is not supported");
  const auto un = static_cast<std::size_t>(n);
  SymmetricMatrix jac(un);
  for (std::size_t k = 1; k < un; ++k) {
    jac(k - 1, k) = jac(k, k - 1) = std::sqrt(static_cast<double>(k) / 2.0);
  }
  std::vector<double> nodes = eigendecompose(jac).values;

  std::vector<double> psi;
  for (double& x : nodes) {
    for (int it = 0; it < 3; ++it) {
      hermite_functions(x, un + 1, psi);
      const double f = psi[un];
      const double df = std::sqrt(2.0 * n) * psi[un - 1] - x * psi[un];
      if (df == 0.0) break;
      const double step = f / df;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
  }
  std::sort(nodes.begin(), nodes.end());
  for (std::size_t i = 0; i < un / 2; ++i) {
    const double m = 0.5 * (nodes[un - 1 - i] - nodes[i]);
    nodes[i] = -m;
    nodes[un - 1 - i] = m;
  }
  if (un % 2 == 1) nodes[un / 2] = 0.0;

  Quadrature q;
  q.nodes = nodes;
  q.weights.resize(un);
  q.scaled_weights.resize(un);
  for (std::size_t k = 0; k < un; ++k) {
    hermite_functions(nodes[k], un, psi);
    double s = 0.0;
    for (double v : psi) s += v * v;
    q.scaled_weights[k] = 1.0 / s;
    q.weights[k] = q.scaled_weights[k] * std::exp(-nodes[k] * nodes[k]);
  }
  for (std::size_t i = 0; i < un / 2; ++i) {
    const double w = 0.5 * (q.weights[i] + q.weights[un - 1 - i]);
    const double sw = 0.5 * (q.scaled_weights[i] + q.scaled_weights[un - 1 - i]);
    q.weights[i] = q.weights[un - 1 - i] = w;
    q.scaled_weights[i] = q.scaled_weights[un - 1 - i] = sw;
  }
  return q;
}

/// Largest odd basis whose assembly rule (2n + 8 points) stays within 200 points.
inline constexpr int kMaxBasis = (kMaxOrder - 8) / 2;

/// Galerkin matrix of H on {phi_1, phi_3, ..., phi_{2n-1}}:
///   a_ij = delta_ij omega (2i + 3/2) + theta <x^4 phi_{2i+1}, phi_{2j+1}>.
/// The quartic elements are polynomial of degree <= 4n + 2 times e^{-y^2}
/// after y = sqrt(omega) x, so 2n + 8 Gauss-Hermite points integrate them exactly.
inline SymmetricMatrix assemble_hamiltonian(int n, double omega, double theta) {
  if (n < 1 || n > kMaxBasis) throw InvalidArgument("assemble_hamiltonian: basis size out of range");
  detail::require_finite(omega, "assemble_hamiltonian omega");
  detail::require_finite(theta, "assemble_hamiltonian theta");
  if (!(omega > 0)) throw InvalidArgument("assemble_hamiltonian: omega must be > 0");
  const auto un = static_cast<std::size_t>(n);
  SymmetricMatrix a(un);
  for (std::size_t i = 0; i < un; ++i) a(i, i) = omega * (2.0 * static_cast<double>(i) + 1.5);
  if (theta == 0.0) return a;

  const Quadrature q = gauss_hermite(2 * n + 8);
  SymmetricMatrix quartic(un);
  std::vector<double> psi;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const double y = q.nodes[k];
    hermite_functions(y, 2 * un, psi);
    const double wy4 = q.scaled_weights[k] * y * y * y * y;
    for (std::size_t i = 0; i < un; ++i) {
      for (std::size_t j = i; j < un; ++j) quartic(i, j) += wy4 * psi[2 * i + 1] * psi[2 * j + 1];
    }
  }
  const double factor = theta / (omega * omega);
  for (std::size_t i = 0; i < un; ++i) {
    for (std::size_t j = i; j < un; ++j) {
      const double v = factor * quartic(i, j);
      a(i, j) += v;
      if (i != j) a(j, i) = a(i, j);
    }
  }
  return a;
}

/// Eigen-expansion of the truncated Hamiltonian. psi_I = phi_1 is the first
/// basis vector, so u_k(0) = <psi_I, phi^n_k> and <phi^n_k, phi_1> are both
/// the first component of eigenvector k.
struct SpectralModel {
  int basis_size = 0;
  double omega = 0.0;
  double theta = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> overlaps;
  std::vector<double> projections;
  SymmetricMatrix hamiltonian{0};

  [[nodiscard]] double ground_energy() const { return eigenvalues.front(); }

  [[nodiscard]] double gap() const {
    if (eigenvalues.size() < 2) throw InvalidArgument("spectral gap needs basis_size >= 2");
    return eigenvalues[1] - eigenvalues[0];
  }
};

inline SpectralModel build_spectral_model(int n, double omega, double theta) {
  SpectralModel m;
  m.basis_size = n;
  m.omega = omega;
  m.theta = theta;
  m.hamiltonian = assemble_hamiltonian(n, omega, theta);
  const Eigensystem eig = eigendecompose(m.hamiltonian);
  m.eigenvalues = eig.values;
  m.overlaps.resize(eig.values.size());
  m.projections.resize(eig.values.size());
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    m.overlaps[k] = eig.vectors(0, k);
    m.projections[k] = eig.vectors(0, k);
  }
  return m;
}

/// E_DMC(T) - E_0 with the ground term factored out:
///   sum_{i>=1} c_i (E_i-E_0) e^{-(E_i-E_0)T} / (1 + sum_{i>=1} c_i e^{-(E_i-E_0)T}),
///   c_i = u_i(0) <phi^n_i, phi_1> / (u_0(0) <phi^n_0, phi_1>),
/// free of cancellation against E_0 for large T.
inline double reference_edmc_excess(const SpectralModel& m, double T) {
  detail::require_finite(T, "reference_edmc");
  if (!(T >= 0)) throw InvalidArgument("reference_edmc: T must be >= 0");
  const double lead = m.overlaps[0] * m.projections[0];
  if (!(std::abs(lead) > 1e-300)) throw InvalidArgument("reference_edmc: degenerate ground overlap");
  const double e0 = m.eigenvalues[0];
  double num = 0.0;
  double den = 1.0;
  for (std::size_t i = 1; i < m.eigenvalues.size(); ++i) {
    const double c = m.overlaps[i] * m.projections[i] / lead;
    const double decay = std::exp(-(m.eigenvalues[i] - e0) * T);
    num += c * (m.eigenvalues[i] - e0) * decay;
    den += c * decay;
  }
  return num / den;
}

/// E_DMC(T) = (E_0 + sum_{i>=1} c_i E_i e^{-(E_i-E_0)T}) / (1 + sum_{i>=1} c_i e^{-(E_i-E_0)T}).
inline double reference_edmc(const SpectralModel& m, double T) {
  return m.eigenvalues[0] + reference_edmc_excess(m, T);
}

/// E_DMC(T) = <H psi_I, phi(T)> / <psi_I, phi(T)> evaluated by propagating
/// the coefficient vector of psi_I in the odd basis and applying the
/// Galerkin matrix, without using the eigen-expansion of the numerator.
inline double galerkin_edmc(const SpectralModel& m, double T) {
  const Eigensystem eig = eigendecompose(m.hamiltonian);
  const std::size_t n = eig.values.size();
  std::vector<double> phi(n, 0.0);
  const double e0 = eig.values[0];
  for (std::size_t k = 0; k < n; ++k) {
    const double coef = eig.vectors(0, k) * std::exp(-(eig.values[k] - e0) * T);
    for (std::size_t i = 0; i < n; ++i) phi[i] += coef * eig.vectors(i, k);
  }
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) num += m.hamiltonian(0, i) * phi[i];
  return num / phi[0];
}

inline double reference_edmc(int n, double omega, double theta, double T) {
  return reference_edmc(build_spectral_model(n, omega, theta), T);
}

inline double reference_ground_energy(int n, double omega, double theta) {
  return build_spectral_model(n, omega, theta).ground_energy();
}

}  // namespace dmclab::spectral
