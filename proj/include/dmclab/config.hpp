#pragma once

// Flat JSON run configuration shared by every CLI subcommand.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmclab/error.hpp"
#include "dmclab/experiments.hpp"
#include "dmclab/params.hpp"

namespace dmclab {

struct RunConfig {
  double omega = 1.0;
  double theta = 2.0;
  double T = 5.0;
  double dt = 5e-3;
  int nu = 31;
  std::size_t walkers = 5000;
  Resampler resampler = Resampler::Multinomial;
  Scheme scheme = Scheme::Exact;
  KeepRule keep_rule = KeepRule::InverseMax;
  std::uint64_t seed = 0;
  int reps = 200;
  unsigned threads = 1;
  std::string out;  // empty: standard output
  bool plot = false;
  // sweep
  SweepAxis axis = SweepAxis::Walkers;
  std::vector<double> values;
  Estimator estimator = Estimator::Ratio;
  // spectral
  int basis = 40;
  // optimal-nu: grid stride (in fine steps) and horizon of the variance curve
  int grid_stride = 10;
  double t_max = 1.5;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <class E, class Parse>
E parse_enum(const nlohmann::json& v, const char* key, Parse parse) {
  if (!v.is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
  const auto s = v.get<std::string>();
  const auto e = parse(s);
  if (!e) throw ConfigError(std::string("config key '") + key + "': invalid value '" + s + "'");
  return *e;
}

inline double get_number(const nlohmann::json& v, const char* key) {
  if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

inline long long get_integer(const nlohmann::json& v, const char* key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    const double d = get_number(v, key);
    if (d != std::floor(d)) throw ConfigError(std::string("config key '") + key + "' must be an integer");
    return static_cast<long long>(d);
  }
  return v.get<long long>();
}

inline std::optional<Estimator> parse_estimator(std::string_view s) {
  if (s == "ratio") return Estimator::Ratio;
  if (s == "mean-after-selection") return Estimator::MeanAfterSelection;
  return std::nullopt;
}

inline std::string_view to_string(Estimator e) {
  return e == Estimator::Ratio ? "ratio" : "mean-after-selection";
}

}  // namespace detail

/// Applies the keys of a flat JSON object on top of `base`. Unknown keys are
/// rejected by name.
inline RunConfig apply_json(RunConfig c, const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& [key, v] : doc.items()) {
    const char* k = key.c_str();
    if (key == "omega") c.omega = get_number(v, k);
    else if (key == "theta") c.theta = get_number(v, k);
    else if (key == "T") c.T = get_number(v, k);
    else if (key == "dt") c.dt = get_number(v, k);
    else if (key == "nu") c.nu = static_cast<int>(get_integer(v, k));
    else if (key == "walkers") {
      const auto w = get_integer(v, k);
      if (w < 1) throw ConfigError("config key 'walkers' must be >= 1");
      c.walkers = static_cast<std::size_t>(w);
    } else if (key == "resampler") c.resampler = parse_enum<Resampler>(v, k, parse_resampler);
    else if (key == "scheme") c.scheme = parse_enum<Scheme>(v, k, parse_scheme);
    else if (key == "keep_rule") c.keep_rule = parse_enum<KeepRule>(v, k, parse_keep_rule);
    else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("config key 'seed' must be a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "reps") c.reps = static_cast<int>(get_integer(v, k));
    else if (key == "threads") c.threads = static_cast<unsigned>(std::max(1LL, get_integer(v, k)));
    else if (key == "out") {
      if (!v.is_string()) throw ConfigError("config key 'out' must be a string");
      c.out = v.get<std::string>();
    } else if (key == "plot") {
      if (!v.is_boolean()) throw ConfigError("config key 'plot' must be a boolean");
      c.plot = v.get<bool>();
    } else if (key == "axis") c.axis = parse_enum<SweepAxis>(v, k, parse_axis);
    else if (key == "values") {
      if (!v.is_array()) throw ConfigError("config key 'values' must be an array");
      c.values.clear();
      for (const auto& x : v) c.values.push_back(get_number(x, k));
    } else if (key == "estimator") c.estimator = parse_enum<Estimator>(v, k, parse_estimator);
    else if (key == "basis") c.basis = static_cast<int>(get_integer(v, k));
    else if (key == "grid_stride") c.grid_stride = static_cast<int>(get_integer(v, k));
    else if (key == "t_max") c.t_max = get_number(v, k);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

inline RunConfig parse_config(const std::string& text, const RunConfig& base = {}) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return base;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return apply_json(base, doc);
}

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{
      {"omega", c.omega},
      {"theta", c.theta},
      {"T", c.T},
      {"dt", c.dt},
      {"nu", c.nu},
      {"walkers", c.walkers},
      {"resampler", std::string(to_string(c.resampler))},
      {"scheme", std::string(to_string(c.scheme))},
      {"keep_rule", std::string(to_string(c.keep_rule))},
      {"seed", c.seed},
      {"reps", c.reps},
      {"threads", c.threads},
      {"out", c.out},
      {"plot", c.plot},
      {"axis", std::string(to_string(c.axis))},
      {"values", c.values},
      {"estimator", std::string(detail::to_string(c.estimator))},
      {"basis", c.basis},
      {"grid_stride", c.grid_stride},
      {"t_max", c.t_max},
  };
}

inline std::string emit_config(const RunConfig& c) { return to_json(c).dump(); }

/// ModelParams with kappa = round(T/(nu dt)) and dt re-derived from it.
/// Rejects a re-derived step more than 1% away from the requested one.
inline ModelParams to_model_params(const RunConfig& c) {
  detail::require_finite(c.dt, "dt");
  detail::require_finite(c.T, "T");
  if (!(c.dt > 0)) throw ConfigError("dt must be > 0");
  if (!(c.T > 0)) throw ConfigError("T must be > 0");
  if (c.nu < 1) throw ConfigError("nu must be >= 1");
  if (c.scheme == Scheme::Explicit && !(c.dt < 1.0 / (2.0 * c.omega))) {
    throw ConfigError("explicit scheme requires dt < 1/(2 omega)");
  }
  const int kappa = ModelParams::kappa_for(c.T, c.nu, c.dt);
  const double eff = c.T / (static_cast<double>(c.nu) * kappa);
  if (std::abs(eff - c.dt) > 0.01 * c.dt) {
    throw ConfigError("T, dt and nu are inconsistent: effective dt " + std::to_string(eff) +
                      " differs from dt by more than 1%");
  }
  ModelParams p = ModelParams::make(c.omega, c.theta, c.T, c.nu, kappa, c.walkers, c.seed,
                                    c.resampler, c.scheme);
  p.keep_rule = c.keep_rule;
  return p;
}

}  // namespace dmclab
