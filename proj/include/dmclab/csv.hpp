#pragma once

// CSV emission. Every document is a `# config=... seed=...` comment line,
// a header row, then data rows; reals use 17 significant digits.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dmclab/config.hpp"
#include "dmclab/engine.hpp"
#include "dmclab/experiments.hpp"
#include "dmclab/spectral.hpp"

namespace dmclab::csv {

inline constexpr const char* kRunHeader =
    "estimator_ratio,estimator_mean_after_selection,seed,omega,theta,T,dt,nu,kappa,walkers,"
    "resampler,scheme";
inline constexpr const char* kSweepHeader =
    "axis,axis_value,mean_abs_error,error_variance,estimator_variance,repetitions,reference";
inline constexpr const char* kSpectralHeader =
    "basis_size,omega,theta,T,ground_energy,gap,edmc_reference";
inline constexpr const char* kOptimalNuHeader = "t_star,nu_star,grid_min_variance";

inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string comment(const RunConfig& c) {
  return "# config=" + emit_config(c) + " seed=" + std::to_string(c.seed) + "\n";
}

inline std::string run_document(const RunConfig& c, const RunResult& r) {
  const ModelParams& p = r.params;
  std::ostringstream os;
  os << comment(c) << kRunHeader << '\n'
     << real(r.e_ratio) << ',' << real(r.e_mean_after_selection) << ',' << p.seed << ','
     << real(p.omega) << ',' << real(p.theta) << ',' << real(p.T) << ',' << real(p.dt) << ','
     << p.nu << ',' << p.kappa << ',' << p.walkers << ',' << to_string(p.resampler) << ','
     << to_string(p.scheme) << '\n';
  return os.str();
}

/// Failed rows keep their axis value and carry "nan" statistics.
inline std::string sweep_document(const RunConfig& c, SweepAxis axis,
                                  const std::vector<SweepRow>& rows, double reference) {
  std::ostringstream os;
  os << comment(c) << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(axis) << ',' << real(r.axis_value) << ',';
    if (r.failure) {
      os << "nan,nan,nan,";
    } else {
      os << real(r.mean_abs_error) << ',' << real(r.error_variance) << ','
         << real(r.estimator_variance) << ',';
    }
    os << r.repetitions << ',' << real(reference) << '\n';
  }
  return os.str();
}

inline std::string spectral_document(const RunConfig& c, const spectral::SpectralModel& m,
                                     double T, double edmc) {
  std::ostringstream os;
  os << comment(c) << kSpectralHeader << '\n'
     << m.basis_size << ',' << real(m.omega) << ',' << real(m.theta) << ',' << real(T) << ','
     << real(m.ground_energy()) << ',' << real(m.gap()) << ',' << real(edmc) << '\n';
  return os.str();
}

inline std::string optimal_nu_document(const RunConfig& c, const OptimalNu& o) {
  std::ostringstream os;
  os << comment(c) << kOptimalNuHeader << '\n'
     << real(o.t_star) << ',' << o.nu_star << ',' << real(o.min_variance) << '\n';
  return os.str();
}

}  // namespace dmclab::csv
