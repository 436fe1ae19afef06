#pragma once

// Selection step: maps normalized weights rho to N parent indices, keeping
// the population fixed and each offspring count equal to N rho_j in
// conditional expectation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dmclab/error.hpp"
#include "dmclab/params.hpp"
#include "dmclab/rng.hpp"
#include "dmclab/sampler.hpp"

namespace dmclab {

/// Unnormalized log weights ln g_i and their normalization rho.
struct WeightVector {
  std::vector<double> log_g;
  std::vector<double> rho;

  [[nodiscard]] std::size_t size() const { return rho.size(); }
  [[nodiscard]] double max_log_g() const {
    return *std::max_element(log_g.begin(), log_g.end());
  }
  /// 1 / sum rho_i^2, between 1 and N.
  [[nodiscard]] double effective_sample_size() const {
    double s = 0.0;
    for (double r : rho) s += r * r;
    return 1.0 / s;
  }
};

/// parents[i] is the walker whose final position becomes start i (0-based).
struct SelectionOutcome {
  std::vector<std::size_t> parents;
  std::vector<std::size_t> offspring_counts;
};

/// ln g = -theta dt sum_k y_k^4 over the fine positions of a block.
inline double block_log_weight(std::span<const double> positions, const ModelParams& p) {
  double s = 0.0;
  for (double y : positions) {
    const double y2 = y * y;
    s += y2 * y2;
  }
  return -p.theta * p.dt * s;
}

inline double block_log_weight(const WalkerBlock& block, const ModelParams& p) {
  return block_log_weight(std::span<const double>(block.positions), p);
}

/// Max-shifted exponentiation of log weights.
///
/// NaN or +inf entries are rejected as non-finite input; a -inf entry means
/// some walker's weight underflowed past representability, which only
/// happens when the simulation diverged.
inline WeightVector normalize(std::span<const double> log_g) {
  if (log_g.empty()) throw InvalidArgument("normalize: empty weight vector");
  for (double l : log_g) {
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
      throw NonFiniteInput("normalize: non-finite log weight");
    }
    if (l == -std::numeric_limits<double>::infinity()) {
      throw DivergenceError("normalize: log weight is -inf (diverged walker)");
    }
  }
  WeightVector w;
  w.log_g.assign(log_g.begin(), log_g.end());
  w.rho.resize(log_g.size());
  const double m = *std::max_element(log_g.begin(), log_g.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < log_g.size(); ++i) {
    w.rho[i] = std::exp(log_g[i] - m);
    sum += w.rho[i];
  }
  for (double& r : w.rho) r /= sum;
  return w;
}

namespace detail {

inline SelectionOutcome outcome_from_parents(std::vector<std::size_t> parents, std::size_t n) {
  SelectionOutcome out;
  out.offspring_counts.assign(n, 0);
  for (std::size_t j : parents) ++out.offspring_counts[j];
  out.parents = std::move(parents);
  return out;
}

/// Running sums of `weights`, scaled so that every entry from the last
/// positive weight onward is exactly 1. Zero-weight cells have empty
/// intervals (C_{j-1}, C_j] and can never be hit.
inline std::vector<double> cumulative(std::span<const double> weights) {
  std::vector<double> c(weights.size());
  double s = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    s += weights[j];
    c[j] = s;
    if (weights[j] > 0) last_positive = j;
  }
  if (!(s > 0)) throw DivergenceError("selection: all weights are zero");
  for (std::size_t j = 0; j < weights.size(); ++j) c[j] /= s;
  for (std::size_t j = last_positive; j < weights.size(); ++j) c[j] = 1.0;
  return c;
}

/// Index j with C_{j-1} < u <= C_j, for u in (0, 1].
inline std::size_t invert(const std::vector<double>& c, double u) {
  const auto it = std::lower_bound(c.begin(), c.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - c.begin(),
                                                           static_cast<std::ptrdiff_t>(c.size()) - 1));
}

/// Stratified inversion of m points (i - U_i)/m, i = 1..m, with U_i in [0, 1).
inline void stratified_fill(const std::vector<double>& c, std::size_t m, RngStream& rng,
                            std::vector<std::size_t>& parents) {
  std::size_t j = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double u = rng.uniform();
    const double point = (static_cast<double>(i) - u) / static_cast<double>(m);
    while (j + 1 < c.size() && c[j] < point) ++j;
    parents.push_back(j);
  }
}

/// floor(N rho_j), with values within 1e-10 below an integer snapped up so
/// that uniform weights reproduce exactly one copy each.
inline std::vector<std::size_t> deterministic_copies(const WeightVector& w,
                                                     std::vector<double>& fractions) {
  const std::size_t n = w.size();
  std::vector<std::size_t> copies(n);
  fractions.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(n) * w.rho[j];
    double a = std::floor(x);
    double f = x - a;
    if (1.0 - f <= 1e-10) {
      a += 1.0;
      f = 0.0;
    }
    copies[j] = static_cast<std::size_t>(a);
    fractions[j] = f;
  }
  // Snapping can overshoot N only through accumulated rounding; undo it.
  std::size_t total = 0;
  for (std::size_t c : copies) total += c;
  for (std::size_t j = 0; total > n && j < n; ++j) {
    if (copies[j] > 0 && fractions[j] == 0.0) {
      --copies[j];
      fractions[j] = 1.0;
      --total;
    }
  }
  return copies;
}

}  // namespace detail

/// (S1) with eps = 0: N i.i.d. draws from rho.
inline SelectionOutcome select_multinomial(const WeightVector& w, RngStream& rng) {
  const auto c = detail::cumulative(w.rho);
  std::vector<std::size_t> parents(w.size());
  for (auto& parent : parents) parent = detail::invert(c, rng.uniform_pos());
  return detail::outcome_from_parents(std::move(parents), w.size());
}

/// (S1) with eps > 0: walker i keeps its own final position with probability
/// eps g_i, otherwise draws a parent from rho. With KeepRule::InverseMax the
/// heaviest walker always keeps its position.
inline SelectionOutcome select_correlated_multinomial(const WeightVector& w, RngStream& rng,
                                                      KeepRule rule = KeepRule::InverseMax) {
  const auto c = detail::cumulative(w.rho);
  const double m = w.max_log_g();
  std::vector<std::size_t> parents(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    double keep = 0.0;
    if (rule == KeepRule::InverseMax) keep = std::exp(w.log_g[i] - m);
    if (rule == KeepRule::One) keep = std::min(1.0, std::exp(w.log_g[i]));
    const double u = rng.uniform();
    parents[i] = (u < keep) ? i : detail::invert(c, rng.uniform_pos());
  }
  return detail::outcome_from_parents(std::move(parents), w.size());
}

/// (S2): floor(N rho_j) deterministic copies, the remaining N^R slots drawn
/// i.i.d. proportionally to the fractional parts {N rho_j}.
inline SelectionOutcome select_residual(const WeightVector& w, RngStream& rng) {
  const std::size_t n = w.size();
  std::vector<double> fractions;
  const auto copies = detail::deterministic_copies(w, fractions);
  std::vector<std::size_t> parents;
  parents.reserve(n);
  for (std::size_t j = 0; j < n; ++j) parents.insert(parents.end(), copies[j], j);
  const std::size_t remaining = n - parents.size();
  if (remaining > 0) {
    const auto c = detail::cumulative(fractions);
    for (std::size_t r = 0; r < remaining; ++r) parents.push_back(detail::invert(c, rng.uniform_pos()));
  }
  return detail::outcome_from_parents(std::move(parents), n);
}

/// (S3): one uniform per stratum ((i-1)/N, i/N].
inline SelectionOutcome select_stratified(const WeightVector& w, RngStream& rng) {
  const auto c = detail::cumulative(w.rho);
  std::vector<std::size_t> parents;
  parents.reserve(w.size());
  detail::stratified_fill(c, w.size(), rng, parents);
  return detail::outcome_from_parents(std::move(parents), w.size());
}

/// Stratified inversion with one offset u in [0, 1) shared by all strata;
/// walker j gets floor(N C_j + u) - floor(N C_{j-1} + u) copies.
inline SelectionOutcome select_systematic_with_offset(const WeightVector& w, double u) {
  if (!(u >= 0 && u < 1)) throw InvalidArgument("systematic offset must lie in [0, 1)");
  const auto c = detail::cumulative(w.rho);
  const std::size_t n = w.size();
  std::vector<std::size_t> parents;
  parents.reserve(n);
  std::size_t j = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double point = (static_cast<double>(i) - u) / static_cast<double>(n);
    while (j + 1 < c.size() && c[j] < point) ++j;
    parents.push_back(j);
  }
  return detail::outcome_from_parents(std::move(parents), n);
}

inline SelectionOutcome select_systematic(const WeightVector& w, RngStream& rng) {
  return select_systematic_with_offset(w, rng.uniform());
}

/// Residual copies followed by stratified selection of the N^R remaining
/// slots over the fractional parts.
inline SelectionOutcome select_stratified_remainder(const WeightVector& w, RngStream& rng) {
  const std::size_t n = w.size();
  std::vector<double> fractions;
  const auto copies = detail::deterministic_copies(w, fractions);
  std::vector<std::size_t> parents;
  parents.reserve(n);
  for (std::size_t j = 0; j < n; ++j) parents.insert(parents.end(), copies[j], j);
  const std::size_t remaining = n - parents.size();
  if (remaining > 0) {
    const auto c = detail::cumulative(fractions);
    detail::stratified_fill(c, remaining, rng, parents);
  }
  return detail::outcome_from_parents(std::move(parents), n);
}

inline SelectionOutcome select(Resampler r, const WeightVector& w, RngStream& rng,
                               KeepRule rule = KeepRule::InverseMax) {
  switch (r) {
    case Resampler::Multinomial: return select_multinomial(w, rng);
    case Resampler::CorrelatedMultinomial: return select_correlated_multinomial(w, rng, rule);
    case Resampler::Residual: return select_residual(w, rng);
    case Resampler::Stratified: return select_stratified(w, rng);
    case Resampler::Systematic: return select_systematic(w, rng);
    case Resampler::StratifiedRemainder: return select_stratified_remainder(w, rng);
    case Resampler::None: break;
  }
  throw InvalidArgument("select: resampler 'none' performs no selection");
}

}  // namespace dmclab
