#pragma once

// Repeated-run studies: error/variance sweeps over (N, dt, nu - 1),
// log-log rate fits, and the no-selection variance curve used to pick the
// number of reconfigurations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmclab/engine.hpp"
#include "dmclab/error.hpp"
#include "dmclab/parallel.hpp"
#include "dmclab/params.hpp"
#include "dmclab/rng.hpp"
#include "dmclab/sampler.hpp"

namespace dmclab {

enum class SweepAxis { Walkers, TimeStep, Reconfigurations };

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Walkers: return "walkers";
    case SweepAxis::TimeStep: return "dt";
    case SweepAxis::Reconfigurations: return "reconfigurations";
  }
  return "?";
}

inline std::optional<SweepAxis> parse_axis(std::string_view s) {
  if (s == "walkers") return SweepAxis::Walkers;
  if (s == "dt") return SweepAxis::TimeStep;
  if (s == "reconfigurations") return SweepAxis::Reconfigurations;
  return std::nullopt;
}

enum class Estimator { Ratio, MeanAfterSelection };

struct SweepSpec {
  ModelParams base;
  SweepAxis axis = SweepAxis::Walkers;
  std::vector<double> values;
  int repetitions = 200;
  double reference = 0.0;
  Estimator estimator = Estimator::Ratio;
  unsigned threads = 1;
};

struct SweepRow {
  double axis_value = 0.0;
  double mean_abs_error = 0.0;      // e
  double error_variance = 0.0;      // v, sample variance of |estimate - reference|
  double estimator_variance = 0.0;  // sample variance of the estimate
  double wall_time = 0.0;           // seconds
  double mean_error = 0.0;          // signed mean of estimate - reference
  double estimator_mean = 0.0;
  int repetitions = 0;
  std::optional<std::string> failure;  // set when a repetition threw
  ModelParams params;                  // effective parameters of the row
};

/// Mean, unbiased variance, and standard errors of both.
struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  std::size_t count = 0;
};

inline SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  if (xs.size() < 2) return s;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  s.variance = m2 / (n - 1.0);
  s.se_mean = std::sqrt(s.variance / n);
  // Var(s^2) ~ (mu_4 - sigma^4 (n - 3)/(n - 1)) / n
  const double mu4 = m4 / n;
  const double var_s2 = (mu4 - s.variance * s.variance * (n - 3.0) / (n - 1.0)) / n;
  s.se_variance = std::sqrt(std::max(0.0, var_s2));
  return s;
}

/// Parameters of one sweep point. On the time-step axis kappa is the
/// integer closest to T/(nu dt) and dt is re-derived from it; on the
/// reconfiguration axis the value is nu - 1 and kappa follows from base.dt.
inline ModelParams params_for_axis(const ModelParams& base, SweepAxis axis, double value) {
  ModelParams p = base;
  switch (axis) {
    case SweepAxis::Walkers:
      if (!(value >= 1)) throw ConfigError("walkers axis values must be >= 1");
      p.walkers = static_cast<std::size_t>(std::llround(value));
      break;
    case SweepAxis::TimeStep:
      p.kappa = ModelParams::kappa_for(base.T, base.nu, value);
      break;
    case SweepAxis::Reconfigurations:
      if (!(value >= 0)) throw ConfigError("reconfiguration axis values must be >= 0");
      p.nu = static_cast<int>(std::llround(value)) + 1;
      p.kappa = ModelParams::kappa_for(base.T, p.nu, base.dt);
      break;
  }
  p.dt = base.T / (static_cast<double>(p.nu) * p.kappa);
  p.validate();
  return p;
}

/// `repetitions` independent runs of p; run r uses the seed derived from
/// (p.seed, group, r).
inline std::vector<RunResult> repeat_runs(const ModelParams& p, int repetitions,
                                          std::uint64_t group, unsigned threads) {
  std::vector<RunResult> out(static_cast<std::size_t>(repetitions));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    ModelParams q = p;
    q.seed = derive_seed(p.seed, group, r);
    out[r] = run_dmc(q);
  });
  return out;
}

inline double pick(const RunResult& r, Estimator e) {
  return e == Estimator::Ratio ? r.e_ratio : r.e_mean_after_selection;
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  if (spec.repetitions < 1) throw ConfigError("sweep: repetitions must be >= 1");
  if (spec.values.empty()) throw ConfigError("sweep: no axis values");
  for (std::size_t i = 1; i < spec.values.size(); ++i) {
    if (!(spec.values[i] > spec.values[i - 1])) {
      throw ConfigError("sweep: axis values must be strictly increasing");
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    SweepRow row;
    row.axis_value = spec.values[v];
    row.params = params_for_axis(spec.base, spec.axis, spec.values[v]);
    row.repetitions = spec.repetitions;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto runs = repeat_runs(row.params, spec.repetitions, v, spec.threads);
      std::vector<double> est, err, abs_err;
      for (const auto& r : runs) {
        est.push_back(pick(r, spec.estimator));
        err.push_back(est.back() - spec.reference);
        abs_err.push_back(std::abs(err.back()));
      }
      const auto se = sample_stats(est);
      const auto sa = sample_stats(abs_err);
      row.mean_abs_error = sa.mean;
      row.error_variance = sa.variance;
      row.estimator_variance = se.variance;
      row.estimator_mean = se.mean;
      row.mean_error = sample_stats(err).mean;
    } catch (const Error& e) {
      row.failure = e.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(row);
  }
  return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidArgument("slope fit: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0)) {
      throw InvalidArgument("slope fit: values must be positive (zero error cannot be fitted)");
    }
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0)) throw InvalidArgument("slope fit: axis values are all equal");
  return (n * sxy - sx * sy) / denom;
}

inline double fit_loglog_slope(const std::vector<SweepRow>& rows) {
  if (rows.size() < 3) throw InvalidArgument("slope fit: need >= 3 rows");
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.failure) throw InvalidArgument("slope fit: row " + std::to_string(r.axis_value) + " failed");
    xs.push_back(r.axis_value);
    ys.push_back(r.mean_abs_error);
  }
  return fit_loglog_slope(xs, ys);
}

/// Variance of the no-selection estimator at one time.
struct VariancePoint {
  double t = 0.0;
  double variance = 0.0;   // across repetitions
  double clt_proxy = 0.0;  // from pooled walkers, already divided by N
  double mean = 0.0;
  bool degenerate = false;  // every repetition returned the same value
};

inline constexpr std::uint64_t kVarianceGroup = 0xFFFFF0;

/// For each grid time t (a multiple of p.dt), the variance across
/// repetitions of 3 omega/2 + theta sum_i g_i(t) X_i(t)^4 / sum_i g_i(t),
/// g_i(t) = exp(-theta dt sum_{k <= t/dt} X_i(k dt)^4), with N independent
/// walkers and no selection. The CLT proxy
///   (1/N) [Var Y/(E Z)^2 - 2 E Y Cov(Y,Z)/(E Z)^3 + (E Y)^2 Var Z/(E Z)^4]
/// with Z = g(t), Y = E_L(X_t) Z is estimated from all walkers of all
/// repetitions pooled together.
inline std::vector<VariancePoint> variance_vs_time_no_selection(const ModelParams& p,
                                                               const std::vector<double>& t_grid,
                                                               int repetitions,
                                                               unsigned threads = 1) {
  if (p.resampler != Resampler::None || p.nu != 1) {
    throw ConfigError("variance_vs_time_no_selection: needs resampler=none and nu=1");
  }
  if (t_grid.empty() || repetitions < 2) throw ConfigError("variance study: empty grid or < 2 repetitions");
  std::vector<long> steps;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const double m = t_grid[g] / p.dt;
    const long k = std::lround(m);
    if (k < 1 || std::abs(m - static_cast<double>(k)) > 1e-6 * std::max(1.0, m)) {
      throw ConfigError("variance study: grid times must be positive multiples of dt");
    }
    if (g > 0 && k <= steps.back()) throw ConfigError("variance study: grid must be increasing");
    steps.push_back(k);
  }
  const std::size_t grid = steps.size();
  const std::size_t n = p.walkers;

  struct Pool {
    double z = 0, y = 0, zz = 0, yy = 0, yz = 0;
  };
  std::vector<std::vector<double>> estimates(static_cast<std::size_t>(repetitions),
                                             std::vector<double>(grid));
  std::vector<std::vector<Pool>> pools(static_cast<std::size_t>(repetitions), std::vector<Pool>(grid));

  parallel_for(static_cast<std::size_t>(repetitions), threads, [&](std::size_t r) {
    ModelParams q = p;
    q.seed = derive_seed(p.seed, kVarianceGroup, r);
    q.kappa = static_cast<int>(steps.back());
    std::vector<double> logw(n * grid), x4(n * grid);
    for (std::size_t i = 0; i < n; ++i) {
      auto init = init_stream(q, i);
      const double x0 = sample_invariant(init, q);
      auto rng = mutation_stream(q, 1, i);
      long k = 0;
      std::size_t g = 0;
      double sum4 = 0.0;
      detail::advance_walker(x0, q, rng, [&](double y) {
        ++k;
        const double y4 = y * y * y * y;
        sum4 += y4;
        if (g < grid && k == steps[g]) {
          logw[i * grid + g] = -q.theta * q.dt * sum4;
          x4[i * grid + g] = y4;
          ++g;
        }
      });
    }
    for (std::size_t g = 0; g < grid; ++g) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) m = std::max(m, logw[i * grid + g]);
      double num = 0, den = 0;
      Pool& pool = pools[r][g];
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(logw[i * grid + g] - m);
        num += w * x4[i * grid + g];
        den += w;
        const double z = std::exp(logw[i * grid + g]);
        const double y = (1.5 * q.omega + q.theta * x4[i * grid + g]) * z;
        pool.z += z;
        pool.y += y;
        pool.zz += z * z;
        pool.yy += y * y;
        pool.yz += y * z;
      }
      estimates[r][g] = 1.5 * q.omega + q.theta * num / den;
    }
  });

  std::vector<VariancePoint> out(grid);
  const double total = static_cast<double>(n) * repetitions;
  for (std::size_t g = 0; g < grid; ++g) {
    std::vector<double> col;
    Pool sum;
    for (int r = 0; r < repetitions; ++r) {
      col.push_back(estimates[static_cast<std::size_t>(r)][g]);
      const Pool& pr = pools[static_cast<std::size_t>(r)][g];
      sum.z += pr.z;
      sum.y += pr.y;
      sum.zz += pr.zz;
      sum.yy += pr.yy;
      sum.yz += pr.yz;
    }
    const auto st = sample_stats(col);
    VariancePoint& pt = out[g];
    pt.t = static_cast<double>(steps[g]) * p.dt;
    pt.variance = st.variance;
    pt.mean = st.mean;
    pt.degenerate = std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); });
    const double ez = sum.z / total;
    const double ey = sum.y / total;
    const double var_z = std::max(0.0, sum.zz / total - ez * ez);
    const double var_y = std::max(0.0, sum.yy / total - ey * ey);
    const double cov = sum.yz / total - ey * ez;
    const double proxy = var_y / (ez * ez) - 2.0 * ey * cov / (ez * ez * ez) +
                         ey * ey * var_z / (ez * ez * ez * ez);
    pt.clt_proxy = std::max(0.0, proxy) / static_cast<double>(n);
  }
  return out;
}

struct OptimalNu {
  double t_star = 0.0;
  int nu_star = 0;
  double min_variance = 0.0;
};

/// t* = grid minimizer of the variance (first one on ties, i.e. the smaller
/// t and larger nu), nu* = round(T / t*). A minimizer at either end of the
/// grid means the curve has no interior minimum.
inline OptimalNu optimal_nu_from_curve(double T, const std::vector<double>& ts,
                                       const std::vector<double>& variances) {
  if (ts.size() != variances.size() || ts.size() < 3) {
    throw InvalidArgument("optimal nu: need >= 3 grid points");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (variances[i] < variances[best]) best = i;
  }
  if (best == 0 || best + 1 == ts.size()) {
    throw DivergenceError("optimal nu: variance curve has no interior minimum");
  }
  OptimalNu o;
  o.t_star = ts[best];
  o.min_variance = variances[best];
  o.nu_star = std::max(1, static_cast<int>(std::lround(T / ts[best])));
  return o;
}

inline OptimalNu estimate_optimal_nu(const ModelParams& p, const std::vector<double>& t_grid,
                                     int repetitions, unsigned threads = 1) {
  const auto curve = variance_vs_time_no_selection(p, t_grid, repetitions, threads);
  std::vector<double> ts, vs;
  for (const auto& pt : curve) {
    ts.push_back(pt.t);
    vs.push_back(pt.variance);
  }
  return optimal_nu_from_curve(p.T, ts, vs);
}

/// Evenly spaced grid dt*stride, 2*dt*stride, ... up to t_max.
inline std::vector<double> time_grid(double dt, double t_max, int stride) {
  std::vector<double> g;
  for (long k = stride; static_cast<double>(k) * dt <= t_max * (1 + 1e-12); k += stride) {
    g.push_back(static_cast<double>(k) * dt);
  }
  return g;
}

}  // namespace dmclab
