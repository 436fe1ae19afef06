// dmclab: command-line driver for runs, sweeps, spectral references and the
// optimal-reconfiguration study.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmclab/config.hpp"
#include "dmclab/csv.hpp"
#include "dmclab/engine.hpp"
#include "dmclab/experiments.hpp"
#include "dmclab/plot.hpp"
#include "dmclab/selftest.hpp"
#include "dmclab/spectral.hpp"

namespace {

using namespace dmclab;

enum ExitCode { kOk = 0, kConfig = 2, kDivergence = 3, kInternal = 4 };

struct Flags {
  std::string config_path;
  std::optional<double> omega, theta, T, dt, t_max;
  std::optional<int> nu, reps, basis, grid_stride;
  std::optional<std::size_t> walkers;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> resampler, scheme, keep_rule, axis, estimator, out;
  std::optional<std::vector<double>> values;
  bool plot = false;
};

int fail(ExitCode code, const char* kind, const std::string& message) {
  nlohmann::json line{{"error", kind}, {"exit_code", static_cast<int>(code)}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return code;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig effective_config(const Flags& f) {
  RunConfig c;
  if (!f.config_path.empty()) c = parse_config(read_file(f.config_path));
  nlohmann::json overrides = nlohmann::json::object();
  auto put = [&](const char* key, const auto& v) {
    if (v) overrides[key] = *v;
  };
  put("omega", f.omega);
  put("theta", f.theta);
  put("T", f.T);
  put("dt", f.dt);
  put("nu", f.nu);
  put("walkers", f.walkers);
  put("resampler", f.resampler);
  put("scheme", f.scheme);
  put("keep_rule", f.keep_rule);
  put("seed", f.seed);
  put("reps", f.reps);
  put("threads", f.threads);
  put("out", f.out);
  put("axis", f.axis);
  put("values", f.values);
  put("estimator", f.estimator);
  put("basis", f.basis);
  put("grid_stride", f.grid_stride);
  put("t_max", f.t_max);
  if (f.plot) overrides["plot"] = true;
  return apply_json(c, overrides);
}

void write_output(const RunConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw ConfigError("cannot write '" + c.out + "'");
  os << text;
}

void write_plot(const RunConfig& c, const plot::Chart& chart) {
  if (!c.plot) return;
  const std::string path = (c.out.empty() ? std::string("dmclab") : c.out) + ".svg";
  std::ofstream os(path);
  if (!os) {
    std::cerr << "warning: cannot write plot '" << path << "'\n";
    return;
  }
  os << plot::svg(chart);
}

int cmd_run(const RunConfig& c) {
  const ModelParams p = to_model_params(c);
  EngineOptions opt;
  opt.threads = c.threads;
  const RunResult r = run_dmc(p, opt);
  write_output(c, csv::run_document(c, r));
  plot::Chart chart{"energy after each block", "block", "energy", false, false, {}};
  plot::Series s{"trace", {}, r.per_block_trace};
  for (std::size_t i = 0; i < r.per_block_trace.size(); ++i) s.x.push_back(static_cast<double>(i + 1));
  chart.series.push_back(s);
  write_plot(c, chart);
  return kOk;
}

std::vector<double> default_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Walkers: return {250, 1000, 4000};
    case SweepAxis::TimeStep: return {5e-3, 1e-2, 2e-2, 4e-2};
    case SweepAxis::Reconfigurations: return {1, 5, 20, 50, 200};
  }
  return {};
}

int cmd_sweep(const RunConfig& c) {
  SweepSpec spec;
  spec.base = to_model_params(c);
  spec.axis = c.axis;
  spec.values = c.values.empty() ? default_values(c.axis) : c.values;
  spec.repetitions = c.reps;
  spec.estimator = c.estimator;
  spec.threads = c.threads;
  spec.reference = spectral::reference_edmc(std::max(40, c.basis), c.omega, c.theta, c.T);
  const auto rows = run_sweep(spec);
  write_output(c, csv::sweep_document(c, spec.axis, rows, spec.reference));
  plot::Chart chart{"mean absolute error", std::string(to_string(spec.axis)), "e", true, true, {}};
  plot::Series s{"e", {}, {}};
  for (const auto& r : rows) {
    if (r.failure) continue;
    s.x.push_back(r.axis_value);
    s.y.push_back(r.mean_abs_error);
  }
  chart.series.push_back(s);
  write_plot(c, chart);
  for (const auto& r : rows) {
    if (r.failure) throw DivergenceError("sweep row " + csv::real(r.axis_value) + ": " + *r.failure);
  }
  return kOk;
}

int cmd_spectral(const RunConfig& c) {
  if (!(c.T >= 0)) throw ConfigError("T must be >= 0");
  if (c.basis < 2 || c.basis > spectral::kMaxBasis) {
    throw ConfigError("basis must lie in [2, " + std::to_string(spectral::kMaxBasis) + "]");
  }
  if (!(c.omega > 0) || !(c.theta >= 0)) throw ConfigError("need omega > 0 and theta >= 0");
  const auto m = spectral::build_spectral_model(c.basis, c.omega, c.theta);
  write_output(c, csv::spectral_document(c, m, c.T, spectral::reference_edmc(m, c.T)));
  return kOk;
}

int cmd_optimal_nu(const RunConfig& c) {
  RunConfig v = c;
  v.nu = 1;
  v.resampler = Resampler::None;
  ModelParams p = to_model_params(v);
  // The curve is sampled on multiples of the requested step, not of T.
  p.dt = c.dt;
  if (c.grid_stride < 1) throw ConfigError("grid_stride must be >= 1");
  const auto grid = time_grid(c.dt, c.t_max, c.grid_stride);
  const auto curve = variance_vs_time_no_selection(p, grid, c.reps, c.threads);
  std::vector<double> ts, vs, proxy;
  for (const auto& pt : curve) {
    ts.push_back(pt.t);
    vs.push_back(pt.variance);
    proxy.push_back(pt.clt_proxy);
  }
  plot::Chart chart{"variance without selection", "t", "variance", false, false, {}};
  chart.series.push_back({"repetitions", ts, vs});
  chart.series.push_back({"CLT proxy", ts, proxy});
  write_plot(c, chart);
  const auto o = optimal_nu_from_curve(c.T, ts, vs);
  write_output(c, csv::optimal_nu_document(c, o));
  return kOk;
}

int cmd_selftest() {
  int failed = 0;
  for (const auto& r : run_selftest()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) {
      std::cout << ": " << r.detail;
      ++failed;
    }
    std::cout << '\n';
  }
  if (failed > 0) return fail(kInternal, "selftest", std::to_string(failed) + " check(s) failed");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion Monte Carlo for the quartic oscillator on odd functions"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config_path, "flat JSON config file");
  app.add_option("--omega", f.omega);
  app.add_option("--theta", f.theta);
  app.add_option("--T", f.T, "final time");
  app.add_option("--dt", f.dt, "time step");
  app.add_option("--nu", f.nu, "number of blocks (reconfigurations + 1)");
  app.add_option("--walkers", f.walkers);
  app.add_option("--resampler", f.resampler,
                 "multinomial|correlated-multinomial|residual|stratified|systematic|"
                 "stratified-remainder|none");
  app.add_option("--scheme", f.scheme, "exact|explicit");
  app.add_option("--keep-rule", f.keep_rule, "zero|one|inverse-max");
  app.add_option("--seed", f.seed);
  app.add_option("--reps", f.reps, "repetitions per sweep point");
  app.add_option("--out", f.out, "output CSV path (default stdout)");
  app.add_flag("--plot", f.plot, "also write <out>.svg");
  app.add_option("--threads", f.threads);
  app.add_option("--axis", f.axis, "walkers|dt|reconfigurations");
  app.add_option("--values", f.values, "sweep axis values");
  app.add_option("--estimator", f.estimator, "ratio|mean-after-selection");
  app.add_option("--basis", f.basis, "spectral basis size");
  app.add_option("--t-max", f.t_max, "horizon of the variance curve");
  app.add_option("--grid-stride", f.grid_stride, "variance grid spacing in steps");

  auto* run = app.add_subcommand("run", "one DMC run");
  auto* sweep = app.add_subcommand("sweep", "error and variance along one axis");
  auto* spec = app.add_subcommand("spectral", "spectral reference energies");
  auto* opt = app.add_subcommand("optimal-nu", "variance curve without selection and nu*");
  auto* self = app.add_subcommand("selftest", "fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfig, "config", e.what());
  }

  try {
    if (self->parsed()) return cmd_selftest();
    const RunConfig c = effective_config(f);
    if (run->parsed()) return cmd_run(c);
    if (sweep->parsed()) return cmd_sweep(c);
    if (spec->parsed()) return cmd_spectral(c);
    if (opt->parsed()) return cmd_optimal_nu(c);
    return fail(kConfig, "config", "unknown subcommand");
  } catch (const ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const DivergenceError& e) {
    return fail(kDivergence, "divergence", e.what());
  } catch (const NonFiniteInput& e) {
    return fail(kDivergence, "divergence", e.what());
  } catch (const ConvergenceError& e) {
    return fail(kDivergence, "divergence", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
}
