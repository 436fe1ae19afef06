#pragma once

// Walker propagation for dX = (1/X - omega X) dt + dW on (0, inf).
//
// Y = X^2 is a square-root process, dY = (3 - 2 omega Y) dt + 2 sqrt(Y) dW,
// which is a time-changed squared 3-d Bessel process. Its transition is
// sampled exactly from one normal G and one uniform U:
//   X_{s+h} = sqrt( (e^{-omega h} X_s + G sqrt((1 - e^{-2 omega h}) / (2 omega)))^2
//                   - (1 - e^{-2 omega h}) / omega * ln U ).

#include <cmath>
#include <span>
#include <vector>

#include "dmclab/error.hpp"
#include "dmclab/params.hpp"
#include "dmclab/rng.hpp"

namespace dmclab {

/// Positions of one walker over one block: `start` followed by kappa fine
/// steps, the last of which is the block's final position.
struct WalkerBlock {
  double start = 0.0;
  std::vector<double> positions;

  [[nodiscard]] double final_position() const { return positions.back(); }
};

/// Draw from the invariant law 2 psi_I^2 1_{x>0}: (G^2 - 2 ln U)^{1/2} / sqrt(2 omega).
inline double sample_invariant(RngStream& rng, const ModelParams& p) {
  const double g = rng.normal();
  const double u = rng.uniform_pos();
  const double chi2 = g * g - 2.0 * std::log(u);
  if (chi2 > 0) return std::sqrt(chi2 / (2.0 * p.omega));
  // G == 0 and U == 1 simultaneously; resample.
  return sample_invariant(rng, p);
}

/// Exact transition kernel over a fixed increment, with its coefficients
/// precomputed for the inner loop.
class ExactKernel {
 public:
  ExactKernel(double omega, double h) : h_(h) {
    if (!(h >= 0)) throw InvalidArgument("exact transition: dt must be >= 0");
    detail::require_finite(h, "exact transition dt");
    decay_ = std::exp(-omega * h);
    const double v = -std::expm1(-2.0 * omega * h);  // 1 - e^{-2 omega h}
    normal_scale_ = std::sqrt(v / (2.0 * omega));
    log_scale_ = v / omega;
  }

  double operator()(double x, RngStream& rng) const {
    if (h_ == 0.0) return x;
    const double a = decay_ * x + normal_scale_ * rng.normal();
    const double u = rng.uniform_pos();
    return std::sqrt(a * a - log_scale_ * std::log(u));
  }

 private:
  double h_;
  double decay_ = 1.0;
  double normal_scale_ = 0.0;
  double log_scale_ = 0.0;
};

/// One draw of X_{s+dt} given X_s = x_s. Any dt >= 0 is allowed.
inline double exact_transition(double x_s, double dt, RngStream& rng, const ModelParams& p) {
  detail::require_finite(x_s, "exact_transition");
  if (!(x_s > 0)) throw InvalidArgument("exact_transition: x_s must be > 0");
  return ExactKernel(p.omega, dt)(x_s, rng);
}

/// Positivity-preserving explicit step
///   X_{k+1} = ((X_k (1 - omega dt) + dW / (1 - omega dt))^2 + 2 dt)^{1/2}
/// with dt = p.dt. The result is never below sqrt(2 dt).
inline double explicit_step(double x_k, double dW, const ModelParams& p) {
  detail::require_finite(x_k, "explicit_step");
  detail::require_finite(dW, "explicit_step dW");
  if (!(x_k > 0)) throw InvalidArgument("explicit_step: x_k must be > 0");
  const double c = 1.0 - p.omega * p.dt;
  if (!(c > 0)) throw InvalidArgument("explicit_step: requires dt < 1/omega");
  const double a = x_k * c + dW / c;
  return std::sqrt(a * a + 2.0 * p.dt);
}

namespace detail {

/// Runs kappa fine steps from `start`, calling visit(position) after each.
/// Both schemes consume the same stream; the explicit scheme only uses its
/// normal draws, scaled to Brownian increments.
template <class Visit>
double advance_walker(double start, const ModelParams& p, RngStream& rng, Visit&& visit) {
  double x = start;
  if (p.scheme == Scheme::Exact) {
    const ExactKernel step(p.omega, p.dt);
    for (int k = 0; k < p.kappa; ++k) {
      x = step(x, rng);
      visit(x);
    }
  } else {
    const double c = 1.0 - p.omega * p.dt;
    if (!(c > 0)) throw InvalidArgument("explicit_step: requires dt < 1/omega");
    const double sdt = std::sqrt(p.dt);
    for (int k = 0; k < p.kappa; ++k) {
      const double a = x * c + sdt * rng.normal() / c;
      x = std::sqrt(a * a + 2.0 * p.dt);
      visit(x);
    }
  }
  return x;
}

}  // namespace detail

/// Mutation of one walker over one block of kappa fine steps.
inline WalkerBlock simulate_block(double start, const ModelParams& p, RngStream& rng) {
  detail::require_finite(start, "simulate_block");
  if (!(start > 0)) throw InvalidArgument("simulate_block: start must be > 0");
  WalkerBlock block{start, {}};
  block.positions.reserve(static_cast<std::size_t>(p.kappa));
  detail::advance_walker(start, p, rng, [&](double x) { block.positions.push_back(x); });
  return block;
}

/// Mutation stream of walker `walker` in block `n` (1-based block index).
inline RngStream mutation_stream(const ModelParams& p, std::uint64_t n, std::uint64_t walker) {
  return RngStream(p.seed, StreamId{n, walker, Purpose::Mutation});
}

inline RngStream init_stream(const ModelParams& p, std::uint64_t walker) {
  return RngStream(p.seed, StreamId{0, walker, Purpose::Init});
}

}  // namespace dmclab
