// Acceptance checks. `acceptance N` runs criterion N (1..8), no argument runs
// all of them. One PASS/FAIL line per criterion; exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dmclab/engine.hpp"
#include "dmclab/experiments.hpp"
#include "dmclab/resampling.hpp"
#include "dmclab/spectral.hpp"
#include "oracles/fd_dirichlet.hpp"
#include "oracles/moments.hpp"

using namespace dmclab;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const Resampler kSchemes[] = {Resampler::Multinomial, Resampler::CorrelatedMultinomial,
                              Resampler::Residual,    Resampler::Stratified,
                              Resampler::Systematic,  Resampler::StratifiedRemainder};

unsigned threads() { return default_threads(); }

double reference(double omega, double theta, double T) {
  return spectral::reference_edmc(40, omega, theta, T);
}

// 1. theta = 0 is exact for every estimator, resampler and scheme.
void criterion1(Verdict& v) {
  double worst = 0;
  for (double omega : {0.5, 1.0, 2.0}) {
    const double want = 1.5 * omega;
    for (Scheme sc : {Scheme::Exact, Scheme::Explicit}) {
      for (Resampler r : kAllResamplers) {
        for (KeepRule k : {KeepRule::Zero, KeepRule::One, KeepRule::InverseMax}) {
          if (k != KeepRule::InverseMax && r != Resampler::CorrelatedMultinomial) continue;
          auto p = ModelParams::make(omega, 0.0, 2.0, 5, 20, 64, 17, r, sc);
          p.keep_rule = k;
          const auto res = run_dmc(p);
          worst = std::max({worst, std::abs(res.e_ratio - want), std::abs(res.e_mean_after_selection - want)});
          for (double e : res.per_block_trace) worst = std::max(worst, std::abs(e - want));
        }
      }
    }
    const auto m = spectral::build_spectral_model(40, omega, 0.0);
    for (double T : {0.0, 1.0, 5.0}) {
      worst = std::max(worst, std::abs(spectral::reference_edmc(m, T) - want));
      worst = std::max(worst, std::abs(spectral::galerkin_edmc(m, T) - want));
    }
    worst = std::max(worst, std::abs(m.ground_energy() - want));
  }
  v.detail << "max deviation " << worst;
  v.require(worst < 1e-12, "deviation < 1e-12");
}

// 2. Spectral convergence in the basis size and agreement with finite differences.
void criterion2(Verdict& v) {
  for (double theta : {0.5, 2.0}) {
    const double e40 = spectral::reference_ground_energy(40, 1.0, theta);
    const double e60 = spectral::reference_ground_energy(60, 1.0, theta);
    const double fd = oracle::FdDirichlet(1.0, theta).eigenvalue(0);
    v.detail << " theta=" << theta << ": E40=" << std::setprecision(12) << e40 << " |E40-E60|=" << std::abs(e40 - e60)
             << " |E40-FD|=" << std::abs(e40 - fd) << ";";
    v.require(std::abs(e40 - e60) < 1e-8, "basis convergence");
    v.require(std::abs(e40 - fd) < 1e-6, "finite-difference agreement");
  }
}

// 3. Error decays like N^{-1/2}.
void criterion3(Verdict& v) {
  SweepSpec s;
  s.base = ModelParams::from_time_step(1.0, 0.5, 5.0, 51, 5e-3, 250, 3);
  s.axis = SweepAxis::Walkers;
  s.values = {250, 1000, 4000};
  s.repetitions = 200;
  s.reference = reference(1.0, 0.5, 5.0);
  s.threads = threads();
  const auto rows = run_sweep(s);
  for (const auto& r : rows) {
    v.detail << " N=" << r.axis_value << ": e=" << r.mean_abs_error << " bias=" << r.mean_error << ";";
  }
  const double slope = fit_loglog_slope(rows);
  v.detail << " slope=" << slope;
  v.require(slope >= -0.65 && slope <= -0.35, "slope in [-0.65, -0.35]");
}

// 4. Error is first order in the time step. The statistical floor is removed by
// averaging the signed error over repetitions; the slope is fitted to |bias|.
void criterion4(Verdict& v) {
  SweepSpec s;
  s.base = ModelParams::from_time_step(1.0, 2.0, 5.0, 31, 5e-3, 4000, 4);
  s.axis = SweepAxis::TimeStep;
  s.values = {5e-3, 1e-2, 2e-2, 4e-2};
  s.repetitions = 200;
  s.reference = reference(1.0, 2.0, 5.0);
  s.threads = threads();
  const auto rows = run_sweep(s);
  std::vector<double> dts, bias, es;
  bool resolved = true;
  for (const auto& r : rows) {
    if (r.failure) {
      v.require(false, "row failed: " + *r.failure);
      return;
    }
    const double se = std::sqrt(r.estimator_variance / r.repetitions);
    v.detail << " dt=" << r.params.dt << ": bias=" << r.mean_error << "+-" << se << " e=" << r.mean_abs_error << ";";
    resolved = resolved && std::abs(r.mean_error) > 3 * se;
    dts.push_back(r.params.dt);
    bias.push_back(std::abs(r.mean_error));
    es.push_back(r.mean_abs_error);
  }
  v.detail << " slope(e)=" << fit_loglog_slope(dts, es);
  if (resolved) {
    const double slope = fit_loglog_slope(dts, bias);
    v.detail << " slope(|bias|)=" << slope;
    v.require(slope >= 0.6 && slope <= 1.4, "slope in [0.6, 1.4]");
  } else {
    const auto& hi = rows.back();
    const auto& lo = rows.front();
    const double se = std::sqrt((hi.error_variance + lo.error_variance) / hi.repetitions);
    v.detail << " bias not resolved, fallback e(4e-2)-e(5e-3)=" << hi.mean_abs_error - lo.mean_abs_error
             << " 3sigma=" << 3 * se;
    v.require(hi.mean_abs_error - lo.mean_abs_error > 3 * se, "e(4e-2) > e(5e-3) at 3 sigma");
  }
}

// 5. Expected offspring equals N rho for every scheme; correlated multinomial
// also matches its per-slot parent law.
void criterion5(Verdict& v) {
  const std::size_t n = 8;
  const int draws = 100000;
  double worst_z = 0;
  for (Resampler r : kSchemes) {
    for (int vec = 0; vec < 10; ++vec) {
      RngStream g(500 + static_cast<std::uint64_t>(vec), {0, 0, Purpose::Test});
      std::vector<double> lg(n);
      for (auto& x : lg) x = -4.0 * g.uniform();
      const auto w = normalize(lg);
      const double m = w.max_log_g();
      RngStream rng(600 + static_cast<std::uint64_t>(vec), {static_cast<std::uint64_t>(r), 0, Purpose::Selection});
      std::vector<double> s(n, 0.0), s2(n, 0.0);
      std::vector<double> slot(n * n, 0.0);
      for (int d = 0; d < draws; ++d) {
        const auto o = select(r, w, rng);
        for (std::size_t j = 0; j < n; ++j) {
          const auto c = static_cast<double>(o.offspring_counts[j]);
          s[j] += c;
          s2[j] += c * c;
        }
        if (r == Resampler::CorrelatedMultinomial) {
          for (std::size_t i = 0; i < n; ++i) slot[i * n + o.parents[i]] += 1;
        }
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double mean = s[j] / draws;
        const double var = std::max(0.0, s2[j] / draws - mean * mean);
        const double se = std::sqrt(var / draws);
        const double dev = std::abs(mean - static_cast<double>(n) * w.rho[j]);
        if (se == 0.0) {
          v.require(dev < 1e-9, std::string(to_string(r)) + " deterministic count");
        } else {
          worst_z = std::max(worst_z, dev / se);
        }
      }
      if (r == Resampler::CorrelatedMultinomial) {
        for (std::size_t i = 0; i < n; ++i) {
          const double keep = std::exp(w.log_g[i] - m);
          for (std::size_t j = 0; j < n; ++j) {
            const double p = (i == j ? keep : 0.0) + (1 - keep) * w.rho[j];
            const double se = std::sqrt(p * (1 - p) / draws);
            const double dev = std::abs(slot[i * n + j] / draws - p);
            if (se == 0.0) {
              v.require(dev < 1e-12, "correlated deterministic slot");
            } else {
              worst_z = std::max(worst_z, dev / se);
            }
          }
        }
      }
    }
  }
  v.detail << "max |z| over 6 schemes x 10 vectors x 8 indices = " << worst_z;
  v.require(worst_z <= 4.0, "all within 4 standard errors");
}

// 6. Variance of the estimator: systematic and stratified-remainder are not
// worse than multinomial; without resampling the variance explodes.
void criterion6(Verdict& v) {
  const auto base = ModelParams::from_time_step(1.0, 2.0, 5.0, 21, 5e-3, 1000, 6);
  std::vector<std::pair<Resampler, SampleStats>> stats;
  for (Resampler r : kAllResamplers) {
    ModelParams p = base;
    p.resampler = r;
    std::vector<double> est;
    for (const auto& res : repeat_runs(p, 200, static_cast<std::uint64_t>(r), threads())) est.push_back(res.e_ratio);
    stats.emplace_back(r, sample_stats(est));
    v.detail << " " << to_string(r) << "=" << stats.back().second.variance << "+-" << stats.back().second.se_variance
             << ";";
  }
  auto find = [&](Resampler r) {
    for (const auto& [k, s] : stats)
      if (k == r) return s;
    return SampleStats{};
  };
  const auto mult = find(Resampler::Multinomial);
  for (Resampler r : {Resampler::Systematic, Resampler::StratifiedRemainder}) {
    const auto s = find(r);
    const double sigma = std::hypot(s.se_variance, mult.se_variance);
    v.require(s.variance <= mult.variance + 2 * sigma, std::string(to_string(r)) + " <= multinomial within 2 sigma");
  }
  const auto none = find(Resampler::None);
  for (const auto& [r, s] : stats) {
    if (r == Resampler::None) continue;
    v.require(none.variance > s.variance + 2 * std::hypot(none.se_variance, s.se_variance),
              std::string("none > ") + std::string(to_string(r)));
  }
}

// 7. The error is a basin in the number of reconfigurations, and the
// no-selection variance curve points into it.
void criterion7(Verdict& v) {
  SweepSpec s;
  s.base = ModelParams::from_time_step(1.0, 2.0, 5.0, 31, 5e-3, 5000, 7);
  s.axis = SweepAxis::Reconfigurations;
  s.values = {1, 5, 20, 50, 200};
  s.repetitions = 200;
  s.reference = reference(1.0, 2.0, 5.0);
  s.threads = threads();
  const auto rows = run_sweep(s);
  std::vector<double> se;
  for (const auto& r : rows) {
    se.push_back(std::sqrt(r.error_variance / r.repetitions));
    v.detail << " nu-1=" << r.axis_value << ": e=" << r.mean_abs_error << "+-" << se.back() << ";";
    if (r.failure) v.require(false, "row failed");
  }
  std::size_t best = 1;
  for (std::size_t i = 2; i + 1 < rows.size(); ++i)
    if (rows[i].mean_abs_error < rows[best].mean_abs_error) best = i;
  for (std::size_t end : {std::size_t{0}, rows.size() - 1}) {
    const double gap = rows[end].mean_abs_error - rows[best].mean_abs_error;
    v.require(gap > 3 * std::hypot(se[end], se[best]), "endpoint " + std::to_string(end) + " worse at 3 sigma");
  }

  auto p = ModelParams::make(1.0, 2.0, 5.0, 1, 1000, 5000, 8, Resampler::None);
  const auto grid = time_grid(p.dt, 1.5, 10);
  const auto curve = variance_vs_time_no_selection(p, grid, 300, threads());
  std::size_t proxy_min = 0;
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve[i].clt_proxy < curve[proxy_min].clt_proxy) proxy_min = i;
  const auto o = estimate_optimal_nu(p, grid, 300, threads());
  v.detail << " t*=" << o.t_star << " nu*=" << o.nu_star << " (CLT proxy minimum at t=" << curve[proxy_min].t << ")";
  v.require(o.nu_star >= 10 && o.nu_star <= 50, "nu* in [10, 50]");
  v.require(o.t_star >= 0.125 && o.t_star <= 0.5, "t* within a factor 2 of 0.25");
}

// 8. Deterministic and statistical properties of the particle system.
void criterion8(Verdict& v) {
  {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> ua(0.01, 5.0), uz(0.01, 3.0), uc(0.0, 10.0);
    std::uniform_int_distribution<std::size_t> un(1, 20);
    int bad = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const std::size_t n = un(gen);
      std::vector<double> a(n), z(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = ua(gen);
        z[i] = uz(gen);
      }
      bad += !reweighting_inequality_holds(a, z, trial % 2 == 0 ? 4.0 : 8.0, uc(gen));
    }
    v.detail << " reweighting violations=" << bad << ";";
    v.require(bad == 0, "reweighting inequality");
  }
  {
    double lowest = INFINITY;
    EngineOptions opt;
    opt.keep_paths = true;
    for (Scheme sc : {Scheme::Exact, Scheme::Explicit}) {
      for (double omega : {0.5, 3.0}) {
        const auto p = ModelParams::make(omega, 2.0, 3.0, 10, 30, 200, 21, Resampler::Multinomial, sc);
        auto st = init_ensemble(p, opt);
        for (int b = 0; b < p.nu; ++b) {
          step_block(st, p, opt);
          for (double x : st.paths) lowest = std::min(lowest, x);
        }
      }
    }
    v.detail << " min position=" << lowest << ";";
    v.require(lowest > 0, "positivity");
  }
  {
    double worst = 0;
    for (Resampler r : kSchemes) {
      auto p = ModelParams::make(1.0, 2.0, 2.0, 1, 40, 16, 10, r);
      auto frozen = init_ensemble(p);
      mutate(frozen, p);
      const double target = estimator_ratio(frozen, p);
      const int draws = 10000;
      double s = 0, s2 = 0;
      for (int d = 0; d < draws; ++d) {
        EnsembleState copy = frozen;
        RngStream rng(11, {1, static_cast<std::uint64_t>(d), Purpose::Selection});
        const double e = estimator_mean_after_selection(copy, p, rng);
        s += e;
        s2 += e * e;
      }
      const double mean = s / draws;
      const double se = std::sqrt(std::max(0.0, s2 / draws - mean * mean) / draws);
      if (se > 0) worst = std::max(worst, std::abs(mean - target) / se);
      v.require(se > 0 || std::abs(mean - target) < 1e-12, "selection conditional expectation");
    }
    v.detail << " selection |z|=" << worst << ";";
    v.require(worst <= 4, "selection conditional expectation");
  }
  {
    double worst = 0;
    for (Resampler r : kSchemes) {
      auto p = ModelParams::make(1.0, 2.0, 2.0, 2, 50, 16, 12, r);
      auto frozen = init_ensemble(p);
      mutate(frozen, p);
      double predictor = 0;
      for (std::size_t i = 0; i < frozen.size(); ++i) {
        predictor += frozen.weights.rho[i] *
                     oracle::fourth_moment(frozen.finals[i] * frozen.finals[i], p.omega, p.block_time());
      }
      const int draws = 10000;
      double s = 0, s2 = 0;
      for (int d = 0; d < draws; ++d) {
        EnsembleState st = frozen;
        ModelParams q = p;
        q.seed = 1000 + static_cast<std::uint64_t>(d);
        RngStream rng(q.seed, {1, 0, Purpose::Selection});
        apply_selection(st, r, q.keep_rule, rng);
        mutate(st, q);
        double eta = 0;
        for (double y : st.finals) eta += y * y * y * y;
        eta /= static_cast<double>(st.size());
        s += eta;
        s2 += eta * eta;
      }
      const double mean = s / draws;
      const double se = std::sqrt((s2 / draws - mean * mean) / draws);
      worst = std::max(worst, std::abs(mean - predictor) / se);
    }
    v.detail << " predictor |z|=" << worst << ";";
    v.require(worst <= 4, "one-step predictor");
  }
  {
    double worst = 0;
    const auto p = ModelParams::make(1.3, 2.0, 1.0, 1, 10, 1);
    const int draws = 200000;
    for (double x0 : {0.05, 0.7, 2.5}) {
      for (double t : {0.01, 0.3, 2.0}) {
        RngStream rng(31, {static_cast<std::uint64_t>(x0 * 100), static_cast<std::uint64_t>(t * 100), Purpose::Test});
        double s = 0, s2 = 0;
        for (int d = 0; d < draws; ++d) {
          const double x = exact_transition(x0, t, rng, p);
          s += x * x;
          s2 += x * x * x * x;
        }
        const double mean = s / draws;
        const double se = std::sqrt((s2 / draws - mean * mean) / draws);
        worst = std::max(worst, std::abs(mean - oracle::second_moment(x0 * x0, p.omega, t)) / se);
      }
    }
    v.detail << " transition |z|=" << worst << ";";
    v.require(worst <= 4, "exact transition second moment");
  }
  {
    const auto p = ModelParams::make(1.0, 2.0, 2.0, 8, 25, 300, 99, Resampler::Systematic);
    const auto a = run_dmc(p);
    EngineOptions t4;
    t4.threads = 4;
    const auto b = run_dmc(p, t4);
    const bool same = a.e_ratio == b.e_ratio && a.e_mean_after_selection == b.e_mean_after_selection &&
                      a.per_block_trace == b.per_block_trace;
    v.require(same, "seed determinism across thread counts");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Verdict&)>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7, criterion8};
  std::vector<int> which;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  } else {
    for (int i = 1; i <= 8; ++i) which.push_back(i);
  }
  int failures = 0;
  for (int id : which) {
    if (id < 1 || id > 8) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[static_cast<std::size_t>(id - 1)](v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s (%.1f s) %s\n", id, v.pass ? "PASS" : "FAIL", secs, v.detail.str().c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
