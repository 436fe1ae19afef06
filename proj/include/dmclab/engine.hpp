#pragma once

// Fixed-population DMC: nu blocks of (mutation over kappa fine steps,
// selection), nu - 1 selections in total, followed by the energy estimators
//
//   ratio:                3 omega / 2 + theta sum_i g_i y_i^4 / sum_i g_i
//   mean after selection: 3 omega / 2 + theta / N sum_i (X^i_{nu+1,0})^4
//
// where y_i is the final position of walker i in the last block and g_i
// its block weight exp(-theta dt sum_k y_{i,k}^4).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dmclab/error.hpp"
#include "dmclab/model.hpp"
#include "dmclab/parallel.hpp"
#include "dmclab/params.hpp"
#include "dmclab/resampling.hpp"
#include "dmclab/rng.hpp"
#include "dmclab/sampler.hpp"

namespace dmclab {

struct EngineOptions {
  unsigned threads = 1;
  bool keep_paths = false;  // store every fine position of the last block
};

/// The ensemble between two steps of the algorithm.
///
/// After `block_index` mutation blocks, `finals`/`weights` describe the last
/// block and `starts` hold the initial positions of the next one (the
/// selected final positions, or the finals themselves without selection).
struct EnsembleState {
  int block_index = 0;
  std::vector<double> starts;
  std::vector<double> finals;
  std::vector<double> paths;  // walkers * kappa, row per walker; only with keep_paths
  WeightVector weights;

  [[nodiscard]] std::size_t size() const { return starts.size(); }

  [[nodiscard]] std::span<const double> path(std::size_t walker, int kappa) const {
    return std::span<const double>(paths).subspan(walker * static_cast<std::size_t>(kappa),
                                                  static_cast<std::size_t>(kappa));
  }
};

struct RunResult {
  double e_ratio = 0.0;
  double e_mean_after_selection = 0.0;
  std::vector<double> per_block_trace;         // one entry per block
  std::vector<double> effective_sample_sizes;  // one entry per block
  ModelParams params;
};

inline EnsembleState init_ensemble(const ModelParams& p, const EngineOptions& opt = {}) {
  p.validate();
  EnsembleState s;
  s.starts.resize(p.walkers);
  parallel_for(p.walkers, opt.threads, [&](std::size_t i) {
    auto rng = init_stream(p, i);
    s.starts[i] = sample_invariant(rng, p);
  });
  return s;
}

/// Mutation of every walker over the next block, then block weights.
/// With Resampler::None the log weights accumulate across blocks.
inline void mutate(EnsembleState& s, const ModelParams& p, const EngineOptions& opt = {}) {
  const std::size_t n = s.size();
  const int block = s.block_index + 1;
  std::vector<double> log_g(n);
  s.finals.resize(n);
  if (opt.keep_paths) s.paths.assign(n * static_cast<std::size_t>(p.kappa), 0.0);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    auto rng = mutation_stream(p, static_cast<std::uint64_t>(block), i);
    double sum4 = 0.0;
    double* row = opt.keep_paths ? s.paths.data() + i * static_cast<std::size_t>(p.kappa) : nullptr;
    s.finals[i] = detail::advance_walker(s.starts[i], p, rng, [&](double y) {
      const double y2 = y * y;
      sum4 += y2 * y2;
      if (row != nullptr) *row++ = y;
    });
    log_g[i] = -p.theta * p.dt * sum4;
  });
  if (p.resampler == Resampler::None && s.block_index > 0) {
    for (std::size_t i = 0; i < n; ++i) log_g[i] += s.weights.log_g[i];
  }
  s.weights = normalize(log_g);
  s.block_index = block;
}

/// Replaces the starts by the final positions of the selected parents.
inline SelectionOutcome apply_selection(EnsembleState& s, Resampler r, KeepRule rule,
                                        RngStream& rng) {
  auto outcome = select(r, s.weights, rng, rule);
  for (std::size_t i = 0; i < s.size(); ++i) s.starts[i] = s.finals[outcome.parents[i]];
  return outcome;
}

inline RngStream selection_stream(const ModelParams& p, int block) {
  return RngStream(p.seed, StreamId{static_cast<std::uint64_t>(block), 0, Purpose::Selection});
}

/// One mutation block followed, except after the last block, by a selection
/// with the configured resampler.
inline void step_block(EnsembleState& s, const ModelParams& p, const EngineOptions& opt = {}) {
  if (s.block_index >= p.nu) throw InvalidArgument("step_block: all blocks already done");
  mutate(s, p, opt);
  if (s.block_index < p.nu && p.resampler != Resampler::None) {
    auto rng = selection_stream(p, s.block_index);
    apply_selection(s, p.resampler, p.keep_rule, rng);
  } else {
    s.starts = s.finals;
  }
}

inline double estimator_ratio(const EnsembleState& s, const ModelParams& p) {
  if (s.block_index == 0) throw InvalidArgument("estimator_ratio: no block simulated yet");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y2 = s.finals[i] * s.finals[i];
    acc += s.weights.rho[i] * y2 * y2;
  }
  return 1.5 * p.omega + p.theta * acc;
}

inline double mean_energy_of_starts(const EnsembleState& s, const ModelParams& p) {
  double acc = 0.0;
  for (double x : s.starts) {
    const double x2 = x * x;
    acc += x2 * x2;
  }
  return 1.5 * p.omega + p.theta * acc / static_cast<double>(s.size());
}

/// Performs one extra selection on the final ensemble (multinomial when the
/// run has no resampler) and averages the local energy of the survivors.
inline double estimator_mean_after_selection(EnsembleState& s, const ModelParams& p,
                                             RngStream& rng) {
  if (s.block_index == 0) throw InvalidArgument("estimator_mean_after_selection: no block yet");
  const Resampler r = p.resampler == Resampler::None ? Resampler::Multinomial : p.resampler;
  apply_selection(s, r, p.keep_rule, rng);
  return mean_energy_of_starts(s, p);
}

inline RngStream final_selection_stream(const ModelParams& p) {
  return RngStream(p.seed, StreamId{static_cast<std::uint64_t>(p.nu), 0, Purpose::FinalSelection});
}

/// Full run. The trace holds, for each block, the mean local energy of the
/// walkers right after that block's selection (the last entry uses the
/// extra final selection); without a resampler it holds the weighted ratio
/// at the end of each block.
inline RunResult run_dmc(const ModelParams& p, const EngineOptions& opt = {}) {
  EngineOptions o = opt;
  o.keep_paths = false;
  auto s = init_ensemble(p, o);
  RunResult r;
  r.params = p;
  r.per_block_trace.reserve(static_cast<std::size_t>(p.nu));
  r.effective_sample_sizes.reserve(static_cast<std::size_t>(p.nu));
  for (int n = 1; n <= p.nu; ++n) {
    step_block(s, p, o);
    r.effective_sample_sizes.push_back(s.weights.effective_sample_size());
    if (n < p.nu) {
      r.per_block_trace.push_back(p.resampler == Resampler::None ? estimator_ratio(s, p)
                                                                 : mean_energy_of_starts(s, p));
    }
  }
  r.e_ratio = estimator_ratio(s, p);
  auto rng = final_selection_stream(p);
  r.e_mean_after_selection = estimator_mean_after_selection(s, p, rng);
  r.per_block_trace.push_back(p.resampler == Resampler::None ? r.e_ratio
                                                             : r.e_mean_after_selection);
  return r;
}

/// Checks, for positive a_i, z_i and c >= 0,
///   sum a z^p e^{-c z^4} / sum a e^{-c z^4}  <=  sum a z^p / sum a
/// (reweighting by a decreasing factor of z lowers weighted moments), up to
/// a relative rounding allowance.
inline bool reweighting_inequality_holds(std::span<const double> a, std::span<const double> z,
                                         double power, double c) {
  if (a.size() != z.size() || a.empty()) throw InvalidArgument("reweighting: size mismatch");
  double shift = -std::numeric_limits<double>::infinity();
  for (double zi : z) shift = std::max(shift, -c * zi * zi * zi * zi);
  double num_w = 0.0, den_w = 0.0, num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double zp = std::pow(z[i], power);
    const double e = std::exp(-c * z[i] * z[i] * z[i] * z[i] - shift);
    num_w += a[i] * zp * e;
    den_w += a[i] * e;
    num += a[i] * zp;
    den += a[i];
  }
  const double lhs = num_w / den_w;
  const double rhs = num / den;
  return lhs <= rhs * (1.0 + 1e-12);
}

}  // namespace dmclab
