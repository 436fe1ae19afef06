#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "dmclab/error.hpp"

namespace dmclab {

/// How walkers are propagated over one fine time step.
enum class Scheme { Exact, Explicit };

/// Selection step algorithm. `None` disables selection and lets the weights
/// accumulate over the whole run.
enum class Resampler {
  Multinomial,
  CorrelatedMultinomial,
  Residual,
  Stratified,
  Systematic,
  StratifiedRemainder,
  None,
};

/// Scale factor of the keep-own-position branch of correlated multinomial
/// selection: the keep probability of walker i is eps * g_i.
enum class KeepRule {
  Zero,        // eps = 0, plain multinomial
  One,         // eps = 1, admissible because g <= 1
  InverseMax,  // eps = 1 / max_i g_i
};

inline constexpr Resampler kAllResamplers[] = {
    Resampler::Multinomial, Resampler::CorrelatedMultinomial, Resampler::Residual,
    Resampler::Stratified,  Resampler::Systematic,            Resampler::StratifiedRemainder,
    Resampler::None,
};

inline std::string_view to_string(Scheme s) {
  return s == Scheme::Exact ? "exact" : "explicit";
}

inline std::string_view to_string(Resampler r) {
  switch (r) {
    case Resampler::Multinomial: return "multinomial";
    case Resampler::CorrelatedMultinomial: return "correlated-multinomial";
    case Resampler::Residual: return "residual";
    case Resampler::Stratified: return "stratified";
    case Resampler::Systematic: return "systematic";
    case Resampler::StratifiedRemainder: return "stratified-remainder";
    case Resampler::None: return "none";
  }
  return "?";
}

inline std::string_view to_string(KeepRule k) {
  switch (k) {
    case KeepRule::Zero: return "zero";
    case KeepRule::One: return "one";
    case KeepRule::InverseMax: return "inverse-max";
  }
  return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view s) {
  if (s == "exact") return Scheme::Exact;
  if (s == "explicit") return Scheme::Explicit;
  return std::nullopt;
}

inline std::optional<Resampler> parse_resampler(std::string_view s) {
  for (Resampler r : kAllResamplers) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

inline std::optional<KeepRule> parse_keep_rule(std::string_view s) {
  for (KeepRule k : {KeepRule::Zero, KeepRule::One, KeepRule::InverseMax}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

/// Physical and numerical constants of one DMC run.
///
/// The fine step `dt` is stored next to (T, nu, kappa) and must satisfy
/// dt * nu * kappa == T up to rounding; build instances through
/// `ModelParams::make` or `ModelParams::from_time_step` and call `validate`
/// after editing fields by hand.
struct ModelParams {
  double omega = 1.0;
  double theta = 2.0;
  double T = 5.0;
  int nu = 31;     // number of blocks; nu - 1 reconfigurations
  int kappa = 32;  // fine steps per block
  std::size_t walkers = 5000;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::Exact;
  Resampler resampler = Resampler::Multinomial;
  KeepRule keep_rule = KeepRule::InverseMax;
  double dt = 5.0 / (31 * 32);

  [[nodiscard]] double block_time() const { return kappa * dt; }
  [[nodiscard]] long total_steps() const { return static_cast<long>(nu) * kappa; }
  [[nodiscard]] int reconfigurations() const { return nu - 1; }

  /// Throws ConfigError / NonFiniteInput when an invariant is broken.
  void validate() const {
    detail::require_finite(omega, "omega");
    detail::require_finite(theta, "theta");
    detail::require_finite(T, "T");
    detail::require_finite(dt, "dt");
    if (!(omega > 0)) throw ConfigError("omega must be > 0");
    if (!(theta >= 0)) throw ConfigError("theta must be >= 0");
    if (!(T > 0)) throw ConfigError("T must be > 0");
    if (nu < 1) throw ConfigError("nu must be >= 1");
    if (kappa < 1) throw ConfigError("kappa must be >= 1");
    if (walkers < 1) throw ConfigError("walkers must be >= 1");
    const double steps = static_cast<double>(nu) * kappa;
    if (std::abs(dt * steps - T) > 4 * std::numeric_limits<double>::epsilon() * T) {
      throw ConfigError("dt * nu * kappa must equal T");
    }
    if (scheme == Scheme::Explicit && !(dt < 1.0 / (2.0 * omega))) {
      throw ConfigError("explicit scheme requires dt < 1/(2 omega)");
    }
  }

  /// Parameters with kappa fine steps per block; dt is derived as T/(nu*kappa).
  static ModelParams make(double omega, double theta, double T, int nu, int kappa,
                          std::size_t walkers, std::uint64_t seed = 0,
                          Resampler resampler = Resampler::Multinomial,
                          Scheme scheme = Scheme::Exact) {
    ModelParams p;
    p.omega = omega;
    p.theta = theta;
    p.T = T;
    p.nu = nu;
    p.kappa = kappa;
    p.walkers = walkers;
    p.seed = seed;
    p.resampler = resampler;
    p.scheme = scheme;
    p.dt = (nu >= 1 && kappa >= 1) ? T / (static_cast<double>(nu) * kappa) : 0.0;
    p.validate();
    return p;
  }

  /// Number of fine steps per block closest to a target time step.
  static int kappa_for(double T, int nu, double dt_target) {
    if (!(dt_target > 0) || nu < 1) throw ConfigError("dt and nu must be positive");
    const long k = std::lround(T / (nu * dt_target));
    return static_cast<int>(k < 1 ? 1 : k);
  }

  /// Parameters whose fine step is the admissible step closest to `dt_target`.
  static ModelParams from_time_step(double omega, double theta, double T, int nu,
                                    double dt_target, std::size_t walkers,
                                    std::uint64_t seed = 0,
                                    Resampler resampler = Resampler::Multinomial,
                                    Scheme scheme = Scheme::Exact) {
    return make(omega, theta, T, nu, kappa_for(T, nu, dt_target), walkers, seed, resampler,
                scheme);
  }
};

}  // namespace dmclab
