#pragma once

// Strict JSON run configuration. Every object rejects keys it does not know,
// parse errors carry line and column, and semantic checks name the violated
// invariant. Missing optional fields are filled with defaults and the
// effective configuration can be serialized back.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fhn/epsilon_study.hpp"
#include "fhn/error.hpp"
#include "fhn/grid.hpp"
#include "fhn/integrator.hpp"
#include "fhn/model.hpp"
#include "fhn/pullback.hpp"

namespace fhn {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Strict field access
// ---------------------------------------------------------------------------

namespace cfg {

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

inline void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  expect_object(j, path);
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + path);
  }
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline double number(const json& j, const std::string& path, const char* key, std::optional<double> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw ConfigError("missing required field " + join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
  return v.get<double>();
}

inline std::int64_t integer(const json& j, const std::string& path, const char* key, std::optional<std::int64_t> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw ConfigError("missing required field " + join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::string string(const json& j, const std::string& path, const char* key, std::optional<std::string> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw ConfigError("missing required field " + join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

inline bool boolean(const json& j, const std::string& path, const char* key, bool def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
  return v.get<bool>();
}

inline std::vector<double> numbers(const json& j, const std::string& path, const char* key,
                                   std::optional<std::vector<double>> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw ConfigError("missing required field " + join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(join(path, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(join(path, key) + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// Re-throws library validation errors as configuration errors with context.
template <class Fn>
auto checked(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Model types <-> JSON
// ---------------------------------------------------------------------------

inline json to_json_value(const Parameters& p) { return params_to_json(p); }

inline Parameters parameters_from_json(const json& j, const std::string& path = "parameters") {
  cfg::allow_keys(j, path, {"nu", "lambda", "epsilon", "gamma"});
  const double nu = cfg::number(j, path, "nu", 1.0);
  const double lambda = cfg::number(j, path, "lambda", 1.0);
  const double eps = cfg::number(j, path, "epsilon", 0.1);
  const double gamma = cfg::number(j, path, "gamma", 1.0);
  return cfg::checked(path, [&] { return Parameters::make(nu, lambda, eps, gamma); });
}

inline json to_json_value(const NonlinearitySpec& h) {
  json j = {{"kind", to_string(h.kind())},
            {"lower_derivative_bound", h.lower_derivative_bound()},
            {"growth_constant", h.growth_constant()},
            {"growth_exponent", h.growth_exponent()}};
  if (h.kind() == NonlinearityKind::scaled_cubic) j["scale"] = h.odd_coefficients().at(1);
  if (h.kind() == NonlinearityKind::odd_polynomial) j["coefficients"] = h.odd_coefficients();
  return j;
}

inline NonlinearitySpec nonlinearity_from_json(const json& j, int dim, const std::string& path = "nonlinearity") {
  cfg::allow_keys(j, path,
                  {"kind", "scale", "coefficients", "lower_derivative_bound", "growth_constant", "growth_exponent"});
  const std::string kind = cfg::string(j, path, "kind", std::string("cubic"));
  NonlinearitySpec::Declared d;
  if (j.contains("lower_derivative_bound")) d.lower_derivative_bound = cfg::number(j, path, "lower_derivative_bound");
  if (j.contains("growth_constant")) d.growth_constant = cfg::number(j, path, "growth_constant");
  if (j.contains("growth_exponent")) d.growth_exponent = cfg::number(j, path, "growth_exponent");
  return cfg::checked(path, [&] {
    if (kind == "zero") return NonlinearitySpec::make(NonlinearityKind::zero, {}, d, dim);
    if (kind == "cubic") return NonlinearitySpec::make(NonlinearityKind::cubic, {0.0, 1.0}, d, dim);
    if (kind == "scaled_cubic") {
      const double c = cfg::number(j, path, "scale");
      if (!(c > 0.0)) throw DomainError("scaled_cubic requires scale > 0");
      return NonlinearitySpec::make(NonlinearityKind::scaled_cubic, {0.0, c}, d, dim);
    }
    if (kind == "odd_polynomial") {
      return NonlinearitySpec::make(NonlinearityKind::odd_polynomial, cfg::numbers(j, path, "coefficients"), d, dim);
    }
    throw ConfigError(path + ".kind: unknown nonlinearity '" + kind + "'");
  });
}

inline json to_json_value(const TimeProfile& t) {
  switch (t.kind()) {
    case TimeProfileKind::constant: return {{"kind", "constant"}, {"value", t.p0()}};
    case TimeProfileKind::sqrt_abs_t: return {{"kind", "sqrt_abs_t"}};
    case TimeProfileKind::exp_sigma_frac: return {{"kind", "exp_sigma_frac"}, {"c", t.p0()}};
    case TimeProfileKind::sinusoidal: return {{"kind", "sinusoidal"}, {"amplitude", t.p0()}, {"frequency", t.p1()}};
  }
  return {};
}

inline TimeProfile time_profile_from_json(const json& j, const std::string& path) {
  cfg::allow_keys(j, path, {"kind", "value", "c", "amplitude", "frequency"});
  const std::string kind = cfg::string(j, path, "kind");
  auto only = [&](std::initializer_list<const char*> keys) { cfg::allow_keys(j, path, keys); };
  return cfg::checked(path, [&] {
    if (kind == "constant") {
      only({"kind", "value"});
      return TimeProfile::constant(cfg::number(j, path, "value", 1.0));
    }
    if (kind == "sqrt_abs_t") {
      only({"kind"});
      return TimeProfile::sqrt_abs_t();
    }
    if (kind == "exp_sigma_frac") {
      only({"kind", "c"});
      const TimeProfile tp = TimeProfile::exp_sigma_frac(cfg::number(j, path, "c"));
      if (!tp.admissible()) {
        throw ConfigError(path + ": exp_sigma_frac requires c < 1/2 for a finite history integral");
      }
      return tp;
    }
    if (kind == "sinusoidal") {
      only({"kind", "amplitude", "frequency"});
      return TimeProfile::sinusoidal(cfg::number(j, path, "amplitude", 1.0), cfg::number(j, path, "frequency", 1.0));
    }
    throw ConfigError(path + ".kind: unknown time profile '" + kind + "'");
  });
}

inline json to_json_value(const SpaceProfile& s) {
  if (s.kind() == SpaceProfileKind::gaussian) return {{"kind", "gaussian"}, {"amplitude", s.amplitude()}, {"width", s.scale()}};
  return {{"kind", "compact_bump"}, {"amplitude", s.amplitude()}, {"radius", s.scale()}};
}

inline SpaceProfile space_profile_from_json(const json& j, const std::string& path) {
  cfg::allow_keys(j, path, {"kind", "amplitude", "width", "radius"});
  const std::string kind = cfg::string(j, path, "kind");
  return cfg::checked(path, [&] {
    if (kind == "gaussian") {
      cfg::allow_keys(j, path, {"kind", "amplitude", "width"});
      return SpaceProfile::gaussian(cfg::number(j, path, "amplitude", 1.0), cfg::number(j, path, "width", 1.0));
    }
    if (kind == "compact_bump") {
      cfg::allow_keys(j, path, {"kind", "amplitude", "radius"});
      return SpaceProfile::compact_bump(cfg::number(j, path, "amplitude", 1.0), cfg::number(j, path, "radius", 1.0));
    }
    throw ConfigError(path + ".kind: unknown space profile '" + kind + "'");
  });
}

inline json to_json_value(const ForcingSpec& f) {
  return {{"time_profile", to_json_value(f.time_profile())},
          {"space_profile", to_json_value(f.space_profile())},
          {"role", to_string(f.role())}};
}

inline ForcingSpec forcing_from_json(const json& j, ForcingRole role, const std::string& path) {
  if (j.is_null()) return ForcingSpec::none(role);
  cfg::allow_keys(j, path, {"time_profile", "space_profile", "role"});
  if (j.contains("role")) {
    const std::string r = cfg::string(j, path, "role");
    if (r != to_string(role)) throw ConfigError(path + ".role: expected '" + std::string(to_string(role)) + "'");
  }
  if (!j.contains("time_profile")) throw ConfigError("missing required field " + path + ".time_profile");
  if (!j.contains("space_profile")) throw ConfigError("missing required field " + path + ".space_profile");
  const TimeProfile tp = time_profile_from_json(j.at("time_profile"), path + ".time_profile");
  const SpaceProfile sp = space_profile_from_json(j.at("space_profile"), path + ".space_profile");
  return cfg::checked(path, [&] { return ForcingSpec::make(tp, sp, role); });
}

inline json to_json_value(const BasinFamily& b) {
  return {{"amplitude", b.amplitude()}, {"backward_rate", b.backward_rate()}};
}

inline BasinFamily basin_from_json(const json& j, double sigma, const std::string& path) {
  cfg::allow_keys(j, path, {"amplitude", "backward_rate"});
  const double a = cfg::number(j, path, "amplitude");
  const double b = cfg::number(j, path, "backward_rate", 0.0);
  return cfg::checked(path, [&] { return BasinFamily::make(a, b, sigma); });
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

// Initial data given by two space profiles (absent = zero field).
struct InitialSpec {
  std::optional<SpaceProfile> u = SpaceProfile::gaussian(2.0, 3.0);
  std::optional<SpaceProfile> v = SpaceProfile::gaussian(-1.0, 2.0);

  State build(const Grid& g, double t0) const {
    State s = State::zeros(g, t0);
    if (u) s.u = sample_space_profile(*u, g);
    if (v) s.v = sample_space_profile(*v, g);
    return s;
  }
};

struct SimulateOptions {
  double t0 = 0.0;
  double t_end = 10.0;
  int stride = 10;
  InitialSpec initial;
};

struct VerifyOptions {
  double t0 = 0.0;
  double t_end = 20.0;
  std::vector<double> dt_list = {1e-2, 5e-3, 2.5e-3};
  double ratio_max = 0.6;
  InitialSpec initial;
};

struct TailsOptions {
  std::vector<double> k_list;
  double window_start = 0.0;
  double window_end = 10.0;
  double depth = 60.0;
  int bundle_size = 32;
  std::optional<BasinFamily> basin;
  int stride = 10;
  double eta = 1e-4;
};

struct PullbackRunOptions {
  double tau = 0.0;
  std::vector<double> depths = {1, 2, 3, 4, 6, 8, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
  int bundle_size = 32;
  InitialSampling sampling = InitialSampling::absorbing;
  std::optional<BasinFamily> basin;
  bool split = false;
  double slack = 0.05;
  std::optional<double> invariance_t;
  bool archive = true;
};

struct SweepRunOptions {
  SweepScenario scenario = SweepScenario::bounded;
  std::vector<double> epsilons = {0.05, 0.1, 0.2, 0.4};
  std::vector<double> depths_relax = {20.0, 25.0};
  int bundle_size = 8;
  double basin_amplitude = 2.0;
};

using Experiment = std::variant<SimulateOptions, VerifyOptions, TailsOptions, PullbackRunOptions, SweepRunOptions>;

inline const char* experiment_name(const Experiment& e) {
  static const char* names[] = {"simulate", "verify", "tails", "pullback", "sweep"};
  return names[e.index()];
}

struct RunConfig {
  Parameters parameters = Parameters::make(1.0, 1.0, 0.1, 1.0);
  NonlinearitySpec nonlinearity = NonlinearitySpec::cubic();
  ForcingSpec forcing_f = ForcingSpec::none(ForcingRole::f);
  ForcingSpec forcing_g = ForcingSpec::none(ForcingRole::g);
  Grid grid = Grid::make(1, 20.0, 400);
  StepConfig step = StepConfig::make(1e-2);
  Experiment experiment = SimulateOptions{};
  std::string output_dir;
  std::uint64_t seed = 0;
  int threads = 1;

  Model model() const { return Model{parameters, nonlinearity, forcing_f, forcing_g}; }
};

namespace cfg {

inline InitialSpec initial_from_json(const json& j, const std::string& path) {
  allow_keys(j, path, {"u", "v"});
  InitialSpec s;
  if (j.contains("u")) s.u = j.at("u").is_null() ? std::nullopt : std::optional(space_profile_from_json(j.at("u"), path + ".u"));
  if (j.contains("v")) s.v = j.at("v").is_null() ? std::nullopt : std::optional(space_profile_from_json(j.at("v"), path + ".v"));
  return s;
}

inline json initial_to_json(const InitialSpec& s) {
  return {{"u", s.u ? to_json_value(*s.u) : json(nullptr)}, {"v", s.v ? to_json_value(*s.v) : json(nullptr)}};
}

inline bool on_dt_grid(double span, double dt) {
  const double q = span / dt;
  return std::abs(q - std::round(q)) <= 1e-6;
}

inline void require_aligned(double span, double dt, const std::string& what) {
  if (!on_dt_grid(span, dt)) throw ConfigError(what + " is not a multiple of step.dt");
}

inline int positive_int(const json& j, const std::string& path, const char* key, std::int64_t def, std::int64_t min = 1) {
  const auto v = integer(j, path, key, def);
  if (v < min) throw ConfigError(join(path, key) + " must be >= " + std::to_string(min));
  return static_cast<int>(v);
}

}  // namespace cfg

inline Experiment experiment_from_json(const json& j, const RunConfig& rc) {
  const std::string path = "experiment";
  cfg::expect_object(j, path);
  if (j.size() != 1) {
    throw ConfigError("experiment must contain exactly one of simulate, verify, tails, pullback, sweep");
  }
  const auto& [name, body] = *j.items().begin();
  const std::string p = path + "." + name;
  const double dt = rc.step.dt;
  const double sigma = rc.parameters.sigma();

  if (name == "simulate") {
    cfg::allow_keys(body, p, {"t0", "t_end", "stride", "initial"});
    SimulateOptions o;
    o.t0 = cfg::number(body, p, "t0", o.t0);
    o.t_end = cfg::number(body, p, "t_end", o.t_end);
    o.stride = cfg::positive_int(body, p, "stride", o.stride);
    if (body.contains("initial")) o.initial = cfg::initial_from_json(body.at("initial"), p + ".initial");
    if (!(o.t_end >= o.t0)) throw ConfigError(p + ": t_end must be >= t0");
    cfg::require_aligned(o.t_end - o.t0, dt, p + ": t_end - t0");
    return o;
  }
  if (name == "verify") {
    cfg::allow_keys(body, p, {"t0", "t_end", "dt_list", "ratio_max", "initial"});
    VerifyOptions o;
    o.t0 = cfg::number(body, p, "t0", o.t0);
    o.t_end = cfg::number(body, p, "t_end", o.t_end);
    o.dt_list = cfg::numbers(body, p, "dt_list", o.dt_list);
    o.ratio_max = cfg::number(body, p, "ratio_max", o.ratio_max);
    if (body.contains("initial")) o.initial = cfg::initial_from_json(body.at("initial"), p + ".initial");
    if (o.dt_list.size() < 2) throw ConfigError(p + ".dt_list needs at least two step sizes");
    for (std::size_t i = 0; i < o.dt_list.size(); ++i) {
      if (!(o.dt_list[i] > 0.0)) throw ConfigError(p + ".dt_list entries must be positive");
      if (i > 0 && !(o.dt_list[i] < o.dt_list[i - 1])) throw ConfigError(p + ".dt_list must be decreasing");
      cfg::require_aligned(o.t_end - o.t0, o.dt_list[i], p + ": t_end - t0");
    }
    return o;
  }
  if (name == "tails") {
    cfg::allow_keys(body, p, {"k_list", "window_start", "window_end", "depth", "bundle_size", "basin", "stride", "eta"});
    TailsOptions o;
    o.k_list = cfg::numbers(body, p, "k_list", std::vector<double>{rc.grid.half_length() / 2.0});
    o.window_start = cfg::number(body, p, "window_start", o.window_start);
    o.window_end = cfg::number(body, p, "window_end", o.window_end);
    o.depth = cfg::number(body, p, "depth", o.depth);
    o.bundle_size = cfg::positive_int(body, p, "bundle_size", o.bundle_size);
    o.stride = cfg::positive_int(body, p, "stride", o.stride);
    o.eta = cfg::number(body, p, "eta", o.eta);
    o.basin = body.contains("basin") ? basin_from_json(body.at("basin"), sigma, p + ".basin")
                                     : cfg::checked(p, [&] { return BasinFamily::make(2.0, 0.0, sigma); });
    for (double k : o.k_list) {
      if (!(k > 0.0)) throw ConfigError(p + ".k_list entries must be positive");
      if (k > rc.grid.half_length() / 2.0) {
        throw ConfigError(p + ".k_list: tail radius " + format_double(k) + " exceeds half of grid.half_length (" +
                          format_double(rc.grid.half_length()) + "); the truncated domain must satisfy L >= 2k");
      }
    }
    if (!(o.window_end >= o.window_start)) throw ConfigError(p + ": window_end must be >= window_start");
    if (!(o.depth >= 0.0)) throw ConfigError(p + ".depth must be >= 0");
    if (!(o.eta > 0.0)) throw ConfigError(p + ".eta must be positive");
    cfg::require_aligned(o.depth, dt, p + ".depth");
    cfg::require_aligned(o.window_end - o.window_start, dt, p + ": window length");
    return o;
  }
  if (name == "pullback") {
    cfg::allow_keys(body, p,
                    {"tau", "depths", "bundle_size", "sampling", "basin", "split", "slack", "invariance_t", "archive"});
    PullbackRunOptions o;
    o.tau = cfg::number(body, p, "tau", o.tau);
    o.depths = cfg::numbers(body, p, "depths", o.depths);
    o.bundle_size = cfg::positive_int(body, p, "bundle_size", o.bundle_size, 2);
    const std::string sampling = cfg::string(body, p, "sampling", std::string("absorbing"));
    if (sampling == "basin") {
      o.sampling = InitialSampling::basin;
    } else if (sampling == "absorbing") {
      o.sampling = InitialSampling::absorbing;
    } else {
      throw ConfigError(p + ".sampling: expected 'basin' or 'absorbing'");
    }
    if (body.contains("basin")) o.basin = basin_from_json(body.at("basin"), sigma, p + ".basin");
    if (o.sampling == InitialSampling::basin && !o.basin) throw ConfigError(p + ": sampling 'basin' requires a basin");
    o.split = cfg::boolean(body, p, "split", o.split);
    o.slack = cfg::number(body, p, "slack", o.slack);
    if (body.contains("invariance_t")) o.invariance_t = cfg::number(body, p, "invariance_t");
    o.archive = cfg::boolean(body, p, "archive", o.archive);
    cfg::checked(p, [&] { return PullbackSchedule::make(o.tau, o.depths, o.bundle_size, 0); });
    for (double d : o.depths) cfg::require_aligned(d, dt, p + ".depths entry " + format_double(d));
    if (o.invariance_t) {
      if (!(*o.invariance_t > 0.0)) throw ConfigError(p + ".invariance_t must be positive");
      cfg::require_aligned(*o.invariance_t, dt, p + ".invariance_t");
    }
    if (!(o.slack >= 0.0)) throw ConfigError(p + ".slack must be >= 0");
    return o;
  }
  if (name == "sweep") {
    cfg::allow_keys(body, p, {"scenario", "epsilons", "depths_relax", "bundle_size", "basin_amplitude"});
    SweepRunOptions o;
    const std::string sc = cfg::string(body, p, "scenario", std::string("bounded"));
    if (sc == "bounded") {
      o.scenario = SweepScenario::bounded;
    } else if (sc == "unbounded_sqrt") {
      o.scenario = SweepScenario::unbounded_sqrt;
    } else {
      throw ConfigError(p + ".scenario: expected 'bounded' or 'unbounded_sqrt'");
    }
    o.epsilons = cfg::numbers(body, p, "epsilons", o.epsilons);
    o.depths_relax = cfg::numbers(body, p, "depths_relax", o.depths_relax);
    o.bundle_size = cfg::positive_int(body, p, "bundle_size", o.bundle_size, 2);
    o.basin_amplitude = cfg::number(body, p, "basin_amplitude", o.basin_amplitude);
    if (o.epsilons.empty()) throw ConfigError(p + ".epsilons must not be empty");
    for (double e : o.epsilons) {
      cfg::checked(p + ".epsilons", [&] {
        return Parameters::make(rc.parameters.nu(), rc.parameters.lambda(), e, rc.parameters.gamma());
      });
    }
    cfg::checked(p + ".depths_relax", [&] { return PullbackSchedule::make(0.0, o.depths_relax, 2, 0); });
    if (!(o.basin_amplitude >= 0.0)) throw ConfigError(p + ".basin_amplitude must be >= 0");
    return o;
  }
  throw ConfigError("unknown experiment '" + name + "'; expected simulate, verify, tails, pullback or sweep");
}

inline json experiment_to_json(const Experiment& e) {
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, SimulateOptions>) {
          return {{"simulate",
                   {{"t0", o.t0}, {"t_end", o.t_end}, {"stride", o.stride}, {"initial", cfg::initial_to_json(o.initial)}}}};
        } else if constexpr (std::is_same_v<T, VerifyOptions>) {
          return {{"verify",
                   {{"t0", o.t0},
                    {"t_end", o.t_end},
                    {"dt_list", o.dt_list},
                    {"ratio_max", o.ratio_max},
                    {"initial", cfg::initial_to_json(o.initial)}}}};
        } else if constexpr (std::is_same_v<T, TailsOptions>) {
          return {{"tails",
                   {{"k_list", o.k_list},
                    {"window_start", o.window_start},
                    {"window_end", o.window_end},
                    {"depth", o.depth},
                    {"bundle_size", o.bundle_size},
                    {"basin", to_json_value(*o.basin)},
                    {"stride", o.stride},
                    {"eta", o.eta}}}};
        } else if constexpr (std::is_same_v<T, PullbackRunOptions>) {
          json b = {{"tau", o.tau},
                    {"depths", o.depths},
                    {"bundle_size", o.bundle_size},
                    {"sampling", o.sampling == InitialSampling::basin ? "basin" : "absorbing"},
                    {"split", o.split},
                    {"slack", o.slack},
                    {"archive", o.archive}};
          if (o.basin) b["basin"] = to_json_value(*o.basin);
          if (o.invariance_t) b["invariance_t"] = *o.invariance_t;
          return {{"pullback", b}};
        } else {
          return {{"sweep",
                   {{"scenario", to_string(o.scenario)},
                    {"epsilons", o.epsilons},
                    {"depths_relax", o.depths_relax},
                    {"bundle_size", o.bundle_size},
                    {"basin_amplitude", o.basin_amplitude}}}};
        }
      },
      e);
}

inline json config_to_json(const RunConfig& rc) {
  return {{"parameters", to_json_value(rc.parameters)},
          {"nonlinearity", to_json_value(rc.nonlinearity)},
          {"forcing_f", to_json_value(rc.forcing_f)},
          {"forcing_g", to_json_value(rc.forcing_g)},
          {"grid", grid_to_json(rc.grid)},
          {"step", {{"dt", rc.step.dt}, {"scheme", to_string(rc.step.scheme)}, {"v_update", to_string(rc.step.v_update)}}},
          {"experiment", experiment_to_json(rc.experiment)},
          {"output_dir", rc.output_dir},
          {"seed", rc.seed},
          {"threads", rc.threads}};
}

inline RunConfig config_from_json(const json& root) {
  cfg::allow_keys(root, "config",
                  {"parameters", "nonlinearity", "forcing_f", "forcing_g", "grid", "step", "experiment", "output_dir",
                   "seed", "threads"});
  RunConfig rc;
  if (root.contains("parameters")) rc.parameters = parameters_from_json(root.at("parameters"));

  if (root.contains("grid")) {
    const json& g = root.at("grid");
    cfg::allow_keys(g, "grid", {"dim", "half_length", "points_per_axis"});
    const auto dim = cfg::integer(g, "grid", "dim", 1);
    const double L = cfg::number(g, "grid", "half_length", 20.0);
    const auto m = cfg::integer(g, "grid", "points_per_axis", 400);
    rc.grid = cfg::checked("grid", [&] { return Grid::make(static_cast<int>(dim), L, static_cast<int>(m)); });
  }
  if (root.contains("nonlinearity")) rc.nonlinearity = nonlinearity_from_json(root.at("nonlinearity"), rc.grid.dim());
  if (root.contains("forcing_f")) rc.forcing_f = forcing_from_json(root.at("forcing_f"), ForcingRole::f, "forcing_f");
  if (root.contains("forcing_g")) rc.forcing_g = forcing_from_json(root.at("forcing_g"), ForcingRole::g, "forcing_g");

  if (root.contains("step")) {
    const json& s = root.at("step");
    cfg::allow_keys(s, "step", {"dt", "scheme", "v_update"});
    const double dt = cfg::number(s, "step", "dt", 1e-2);
    const std::string scheme = cfg::string(s, "step", "scheme", std::string("imex_cn"));
    const std::string vu = cfg::string(s, "step", "v_update", std::string("exact_integrating_factor"));
    Scheme sc;
    if (scheme == "imex_cn") {
      sc = Scheme::imex_cn;
    } else if (scheme == "imex_euler") {
      sc = Scheme::imex_euler;
    } else {
      throw ConfigError("step.scheme: expected 'imex_euler' or 'imex_cn'");
    }
    VUpdate v;
    if (vu == "exact_integrating_factor") {
      v = VUpdate::exact_integrating_factor;
    } else if (vu == "same_scheme") {
      v = VUpdate::same_scheme;
    } else {
      throw ConfigError("step.v_update: expected 'exact_integrating_factor' or 'same_scheme'");
    }
    rc.step = cfg::checked("step", [&] { return StepConfig::make(dt, sc, v); });
  }

  rc.output_dir = cfg::string(root, "", "output_dir", std::string());
  const auto seed = cfg::integer(root, "", "seed", 0);
  if (seed < 0) throw ConfigError("seed must be >= 0");
  rc.seed = static_cast<std::uint64_t>(seed);
  rc.threads = cfg::positive_int(root, "", "threads", 1);

  if (!root.contains("experiment")) throw ConfigError("missing required field experiment");
  rc.experiment = experiment_from_json(root.at("experiment"), rc);
  return rc;
}

// Parses JSON text; syntax errors report line and column.
inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON parse error: " + e.what());
  }
}

inline RunConfig load_config_text(const std::string& text, const std::string& source = "<config>") {
  return config_from_json(parse_json_text(text, source));
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return load_config_text(ss.str(), path);
}

}  // namespace fhn
