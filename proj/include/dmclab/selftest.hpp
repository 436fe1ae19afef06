#pragma once

// Fast invariant checks with exact expected values, run by `dmclab selftest`.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dmclab/config.hpp"
#include "dmclab/engine.hpp"
#include "dmclab/experiments.hpp"
#include "dmclab/resampling.hpp"
#include "dmclab/rng.hpp"
#include "dmclab/spectral.hpp"

namespace dmclab {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline CheckResult check(const std::string& name, const std::function<std::string()>& body) {
  try {
    const std::string failure = body();
    return {name, failure.empty(), failure};
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace detail

inline std::vector<CheckResult> run_selftest() {
  using detail::check;
  std::vector<CheckResult> out;

  out.push_back(check("philox-known-answer", [] {
    const auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
    const std::array<std::uint32_t, 4> want{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u};
    return r == want ? std::string() : std::string("mismatch");
  }));

  out.push_back(check("theta-zero-estimators", [] {
    for (double omega : {0.5, 1.0, 2.0}) {
      for (Scheme sc : {Scheme::Exact, Scheme::Explicit}) {
        for (Resampler r : kAllResamplers) {
          const auto p = ModelParams::make(omega, 0.0, 1.0, 4, 20, 16, 3, r, sc);
          const auto res = run_dmc(p);
          if (res.e_ratio != 1.5 * omega || res.e_mean_after_selection != 1.5 * omega) {
            return "omega=" + std::to_string(omega) + " resampler=" + std::string(to_string(r));
          }
        }
      }
    }
    return std::string();
  }));

  out.push_back(check("theta-zero-spectral", [] {
    const auto m = spectral::build_spectral_model(20, 1.0, 0.0);
    if (std::abs(m.ground_energy() - 1.5) > 1e-12) return std::string("ground energy");
    if (std::abs(spectral::reference_edmc(m, 5.0) - 1.5) > 1e-12) return std::string("edmc");
    return std::string();
  }));

  out.push_back(check("uniform-weights-identity", [] {
    const std::vector<double> lg(64, -0.3);
    const auto w = normalize(lg);
    for (Resampler r : {Resampler::Residual, Resampler::Stratified, Resampler::Systematic,
                        Resampler::StratifiedRemainder}) {
      RngStream rng(1, StreamId{0, 0, Purpose::Test});
      const auto o = select(r, w, rng);
      for (std::size_t c : o.offspring_counts) {
        if (c != 1) return std::string(to_string(r));
      }
    }
    return std::string();
  }));

  out.push_back(check("population-conserved", [] {
    std::vector<double> lg(37);
    RngStream g(2, StreamId{0, 0, Purpose::Test});
    for (auto& v : lg) v = -5.0 * g.uniform();
    const auto w = normalize(lg);
    for (Resampler r : kAllResamplers) {
      if (r == Resampler::None) continue;
      RngStream rng(3, StreamId{0, 0, Purpose::Test});
      const auto o = select(r, w, rng);
      std::size_t total = 0;
      for (std::size_t c : o.offspring_counts) total += c;
      if (total != lg.size() || o.parents.size() != lg.size()) return std::string(to_string(r));
    }
    return std::string();
  }));

  out.push_back(check("effective-sample-size-bounds", [] {
    const auto uni = normalize(std::vector<double>(10, 1.0));
    const auto one = normalize(std::vector<double>{0.0, -800.0, -800.0});
    if (std::abs(uni.effective_sample_size() - 10.0) > 1e-12) return std::string("uniform");
    if (std::abs(one.effective_sample_size() - 1.0) > 1e-12) return std::string("degenerate");
    return std::string();
  }));

  out.push_back(check("seed-determinism", [] {
    const auto p = ModelParams::make(1.0, 2.0, 1.0, 5, 10, 50, 7);
    const auto a = run_dmc(p);
    const auto b = run_dmc(p);
    EngineOptions threaded;
    threaded.threads = 3;
    const auto c = run_dmc(p, threaded);
    if (a.e_ratio != b.e_ratio || a.e_ratio != c.e_ratio ||
        a.e_mean_after_selection != c.e_mean_after_selection) {
      return std::string("runs differ");
    }
    return std::string();
  }));

  out.push_back(check("sweep-theta-zero-error", [] {
    SweepSpec s;
    s.base = ModelParams::make(1.0, 0.0, 1.0, 2, 10, 20, 0);
    s.axis = SweepAxis::Walkers;
    s.values = {5, 10, 20};
    s.repetitions = 1;
    s.reference = 1.5;
    for (const auto& row : run_sweep(s)) {
      if (row.failure || row.mean_abs_error != 0.0) return std::string("nonzero error");
    }
    return std::string();
  }));

  out.push_back(check("slope-fit-exact", [] {
    const std::vector<double> n{250, 1000, 4000, 16000};
    std::vector<double> e;
    for (double x : n) e.push_back(0.3 / std::sqrt(x));
    const double s = fit_loglog_slope(n, e);
    return std::abs(s + 0.5) < 1e-12 ? std::string() : "slope " + std::to_string(s);
  }));

  out.push_back(check("no-selection-variance-theta-zero", [] {
    auto p = ModelParams::make(1.0, 0.0, 0.5, 1, 50, 30, 0, Resampler::None);
    const auto curve = variance_vs_time_no_selection(p, {0.1, 0.2, 0.3}, 4);
    for (const auto& pt : curve) {
      if (pt.variance != 0.0 || pt.clt_proxy != 0.0 || !pt.degenerate) return std::string("nonzero");
    }
    return std::string();
  }));

  out.push_back(check("gauss-hermite-moment", [] {
    const auto q = spectral::gauss_hermite(10);
    const double v = q.integrate_weighted([](double x) { return x * x; });
    return std::abs(v - std::sqrt(std::numbers::pi) / 2) < 1e-13 ? std::string() : std::string("x^2");
  }));

  out.push_back(check("config-defaults-and-guard", [] {
    const auto c = parse_config("");
    if (!(c == RunConfig{})) return std::string("defaults");
    RunConfig bad;
    bad.dt = 0.2;
    bad.omega = 3.0;
    bad.scheme = Scheme::Explicit;
    bad.nu = 1;
    bad.T = 1.0;
    try {
      (void)to_model_params(bad);
    } catch (const ConfigError&) {
      return std::string();
    }
    return std::string("explicit guard not triggered");
  }));

  return out;
}

}  // namespace dmclab
