#pragma once

// Experiment orchestration: resolves the output directory, runs one
// experiment, writes numeric artifacts plus a manifest, and maps failures to
// exit codes.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhn/analysis.hpp"
#include "fhn/config.hpp"
#include "fhn/epsilon_study.hpp"
#include "fhn/error.hpp"
#include "fhn/format.hpp"
#include "fhn/pullback.hpp"

namespace fhn {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3, exit_check_failed = 4 };

struct RunOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> checkpoint;  // resume only
};

struct RunResult {
  int exit_code = exit_ok;
  std::filesystem::path out_dir;
  json summary;
  std::vector<std::string> files;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Hash of the numeric content of a config: output_dir and threads are left
// out since neither may change results.
inline std::string config_hash(const RunConfig& rc) {
  json j = config_to_json(rc);
  j.erase("output_dir");
  j.erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

inline std::filesystem::path resolve_output_dir(const RunConfig& rc, const RunOverrides& ov) {
  if (ov.out) return *ov.out;
  if (!rc.output_dir.empty()) return rc.output_dir;
  if (const char* root = std::getenv("FHN_OUTPUT_ROOT"); root && *root) {
    return std::filesystem::path(root) / experiment_name(rc.experiment);
  }
  return std::filesystem::path("fhn_out") / experiment_name(rc.experiment);
}

namespace detail {

inline void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open " + p.string());
  os << j.dump(2) << '\n';
}

class RunContext {
 public:
  RunContext(const RunConfig& rc, std::filesystem::path dir) : rc_(rc), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  std::string path(const std::string& name) {
    files_.push_back(name);
    return (dir_ / name).string();
  }
  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  const RunConfig& rc_;
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline void write_final_state(RunContext& ctx, const State& s, const RunConfig& rc) {
  write_checkpoint(ctx.path("final.ckpt"), s, rc.step, rc.parameters);
  write_field_csv(ctx.path("final_u.csv"), s.u);
  write_field_csv(ctx.path("final_v.csv"), s.v);
}

inline int run_simulate_from(RunContext& ctx, const RunConfig& rc, const SimulateOptions& o, const State& start,
                             json& summary) {
  if (!(o.t_end >= start.t)) throw ConfigError("simulate.t_end precedes the starting time");
  if (!cfg::on_dt_grid(o.t_end - start.t, rc.step.dt)) throw ConfigError("simulate: t_end - t is not a multiple of step.dt");
  const Trajectory tr = simulate(start, o.t_end, rc.step, rc.model(), o.stride);
  const ResidualReport rep = energy_inequality_residual(tr, rc.parameters, rc.forcing_f, rc.forcing_g);
  write_energy_csv(ctx.path("energy.csv"), tr, rep, rc.parameters.epsilon());
  write_final_state(ctx, tr.states.back(), rc);
  summary = {{"t_start", start.t},
             {"t_end", tr.states.back().t},
             {"samples", tr.states.size()},
             {"final_energy", energy(tr.states.back(), rc.parameters.epsilon())},
             {"max_residual", rep.residual.empty() ? json(nullptr) : json(rep.max_residual)}};
  return exit_ok;
}

inline int run_verify(RunContext& ctx, const RunConfig& rc, const VerifyOptions& o, json& summary) {
  const Model model = rc.model();
  std::vector<double> maxima;
  bool decay_ok = true;
  const bool forcing_free = rc.forcing_f.is_zero() && rc.forcing_g.is_zero();
  for (std::size_t i = 0; i < o.dt_list.size(); ++i) {
    StepConfig sc = rc.step;
    sc.dt = o.dt_list[i];
    const Trajectory tr = simulate(o.initial.build(rc.grid, o.t0), o.t_end, sc, model, 1);
    const ResidualReport rep = energy_inequality_residual(tr, rc.parameters, rc.forcing_f, rc.forcing_g);
    write_energy_csv(ctx.path("residual_" + std::to_string(i) + ".csv"), tr, rep, rc.parameters.epsilon());
    maxima.push_back(rep.max_residual);
    if (forcing_free) {
      const double e0 = energy(tr.states.front(), rc.parameters.epsilon());
      for (const State& s : tr.states) {
        const double lim = e0 * std::exp(-2.0 * rc.parameters.sigma() * (s.t - o.t0)) * (1.0 + 1e-3);
        if (energy(s, rc.parameters.epsilon()) > lim) decay_ok = false;
      }
    }
  }
  // C calibrated on the coarsest step; the finer steps must respect C*dt.
  const double C = std::max(maxima.front(), 0.0) / o.dt_list.front();
  bool linear_ok = true;
  bool ratio_ok = true;
  for (std::size_t i = 0; i < maxima.size(); ++i) {
    if (maxima[i] > C * o.dt_list[i]) linear_ok = false;
    if (i > 0 && maxima[i] > o.ratio_max * maxima[i - 1]) ratio_ok = false;
  }
  const bool pass = linear_ok && ratio_ok && decay_ok;
  summary = {{"dt_list", o.dt_list},
             {"max_residual", maxima},
             {"C", C},
             {"residual_le_C_dt", linear_ok},
             {"halving_ratio_ok", ratio_ok},
             {"forcing_free_decay_ok", forcing_free ? json(decay_ok) : json(nullptr)},
             {"pass", pass}};
  return pass ? exit_ok : exit_check_failed;
}

inline int run_tails(RunContext& ctx, const RunConfig& rc, const TailsOptions& o, json& summary) {
  const Model model = rc.model();
  const double t_start = o.window_start - o.depth;
  const auto init = sample_initial_family(rc.grid, *o.basin, t_start, o.bundle_size, rc.seed);
  std::vector<TailReport> reps(init.size());
  parallel_for(init.size(), rc.threads, [&](std::size_t j) {
    Stepper st(rc.grid, model, rc.step);
    Trajectory tr;
    tr.dt = rc.step.dt;
    tr.stride = o.stride;
    tr.scheme = rc.step.scheme;
    State s = init[j];
    st.advance(s, o.window_start);
    st.advance(s, o.window_end, [&](const State& x) { tr.states.push_back(x); }, o.stride);
    reps[j] = tail_report(tr, o.k_list, rc.parameters.epsilon(), o.window_start);
  });
  // Worst member per (k, t) row; rows are aligned across members.
  TailReport worst = reps.front();
  std::vector<double> sup(o.k_list.size(), 0.0);
  for (const auto& r : reps) {
    for (std::size_t i = 0; i < worst.rows.size(); ++i) worst.rows[i].tail = std::max(worst.rows[i].tail, r.rows[i].tail);
    for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], r.sup_tail[i]);
  }
  write_tail_csv(ctx.path("tails.csv"), worst);
  bool pass = true;
  for (double s : sup) pass = pass && s <= o.eta;
  summary = {{"k_list", o.k_list}, {"sup_tail", sup}, {"eta", o.eta}, {"window", {o.window_start, o.window_end}},
             {"depth", o.depth}, {"pass", pass}};
  return pass ? exit_ok : exit_check_failed;
}

inline int run_pullback(RunContext& ctx, const RunConfig& rc, const PullbackRunOptions& o, json& summary) {
  const Model model = rc.model();
  const auto schedule = PullbackSchedule::make(o.tau, o.depths, o.bundle_size, rc.seed);
  const SamplerSpec sampler{o.sampling, o.basin};
  PullbackOptions opt;
  opt.threads = rc.threads;
  opt.split = o.split;
  opt.slack = o.slack;
  opt.dim = rc.grid.dim();
  const AttractorCloud cloud = approximate_attractor(schedule, sampler, rc.grid, model, rc.step, opt);
  write_cloud_csv(ctx.path("pullback.csv"), cloud);
  if (o.archive) {
    write_cloud_archive(ctx.dir() / "cloud", cloud, schedule, rc.step, rc.parameters);
    ctx.path("cloud/manifest.json");
  }
  const auto slot = cloud.absorption_slot();
  const auto diag = cloud.diagnostics();
  int increases = 0;
  if (slot) increases = count_increases(diag, *slot > 0 ? *slot - 1 : 0);
  bool failures = false;
  for (const auto& d : cloud.depths) failures = failures || !d.failures.empty();
  summary = {{"absorption_slot", slot ? json(*slot) : json(nullptr)},
             {"absorption_depth", slot ? json(o.depths[*slot]) : json(nullptr)},
             {"cauchy_increases", increases},
             {"final_diagnostic", diag.empty() ? json(nullptr) : json(diag.back())},
             {"member_failures", failures},
             {"covering_number_at_final_diagnostic",
              diag.empty() || !(diag.back() > 0.0) ? json(nullptr) : json(covering_number(cloud.points(), diag.back()))},
             {"bounds", bound_registry_json(*cloud.bounds)}};
  bool pass = slot.has_value() && increases <= 1 && !failures;
  if (o.invariance_t) {
    const auto later = PullbackSchedule::make(o.tau + *o.invariance_t, o.depths, o.bundle_size, rc.seed);
    const AttractorCloud cloud2 = approximate_attractor(later, sampler, rc.grid, model, rc.step, opt);
    const double defect = invariance_defect(cloud, cloud2, *o.invariance_t, model, rc.step, rc.threads);
    summary["invariance_defect"] = defect;
    if (!diag.empty()) pass = pass && defect <= 2.0 * diag.back();
  }
  summary["pass"] = pass;
  return pass ? exit_ok : exit_check_failed;
}

inline int run_sweep_experiment(RunContext& ctx, const RunConfig& rc, const SweepRunOptions& o, json& summary) {
  SweepBase base;
  base.grid = rc.grid;
  base.nu = rc.parameters.nu();
  base.lambda = rc.parameters.lambda();
  base.gamma = rc.parameters.gamma();
  base.h = rc.nonlinearity;
  base.f1 = rc.forcing_f.space_profile();
  base.g1 = rc.forcing_g.space_profile();
  base.step = rc.step;
  base.depths_relax = o.depths_relax;
  base.bundle_size = o.bundle_size;
  base.basin_amplitude = o.basin_amplitude;
  base.seed = rc.seed;
  base.threads = rc.threads;
  const SweepResult res = run_sweep(o.epsilons, o.scenario, base);
  write_sweep_csv(ctx.path("sweep.csv"), res);
  bool any_failed = false;
  for (const auto& r : res.records) any_failed = any_failed || !r.ok;
  json verdict;
  try {
    verdict = verdict_json(res, uniform_bound_report(res));
  } catch (const InsufficientData& e) {
    verdict = {{"scenario", to_string(res.scenario)}, {"verdict", "insufficient_data"}, {"reason", e.what()}};
  }
  write_json(ctx.path("verdict.json"), verdict);
  summary = verdict;
  return any_failed ? exit_numeric : exit_ok;
}

}  // namespace detail

// Runs the configured experiment. With overrides.checkpoint set, a simulate
// experiment resumes from that checkpoint instead of its initial data.
inline RunResult run(RunConfig rc, const RunOverrides& ov = {}) {
  if (ov.seed) rc.seed = *ov.seed;
  if (ov.threads) rc.threads = *ov.threads;
  RunResult res;
  res.out_dir = resolve_output_dir(rc, ov);
  detail::RunContext ctx(rc, res.out_dir);
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();

  detail::write_json(ctx.path("effective_config.json"), config_to_json(rc));
  json summary;
  int code = exit_ok;
  if (const auto* o = std::get_if<SimulateOptions>(&rc.experiment)) {
    State start = o->initial.build(rc.grid, o->t0);
    if (ov.checkpoint) {
      Checkpoint cp = read_checkpoint(*ov.checkpoint);
      if (!(cp.state.grid() == rc.grid)) throw ConfigError("checkpoint grid differs from the configured grid");
      start = std::move(cp.state);
    }
    code = detail::run_simulate_from(ctx, rc, *o, start, summary);
  } else if (ov.checkpoint) {
    throw ConfigError("resume requires a simulate experiment");
  } else if (const auto* o = std::get_if<VerifyOptions>(&rc.experiment)) {
    code = detail::run_verify(ctx, rc, *o, summary);
  } else if (const auto* o = std::get_if<TailsOptions>(&rc.experiment)) {
    code = detail::run_tails(ctx, rc, *o, summary);
  } else if (const auto* o = std::get_if<PullbackRunOptions>(&rc.experiment)) {
    code = detail::run_pullback(ctx, rc, *o, summary);
  } else if (const auto* o = std::get_if<SweepRunOptions>(&rc.experiment)) {
    code = detail::run_sweep_experiment(ctx, rc, *o, summary);
  }
  detail::write_json(ctx.path("summary.json"), summary);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::time_t stamp = std::chrono::system_clock::to_time_t(started);
  char when[32];
  std::strftime(when, sizeof when, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&stamp));
  json manifest = {{"version", kVersion},
                   {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"compiler", __VERSION__},
                   {"experiment", experiment_name(rc.experiment)},
                   {"config_hash", config_hash(rc)},
                   {"seed", rc.seed},
                   {"threads", rc.threads},
                   {"started_at", when},
                   {"wall_time_s", wall},
                   {"exit_code", code},
                   {"files", ctx.files()}};
  if (ov.checkpoint) manifest["resumed_from"] = *ov.checkpoint;
  detail::write_json(res.out_dir / "manifest.json", manifest);

  res.exit_code = code;
  res.summary = summary;
  res.files = ctx.files();
  return res;
}

// Maps exceptions to exit codes and prints a structured error report.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err) {
  auto report = [&](const char* kind, const std::exception& e, int code) {
    err << json{{"error", kind}, {"message", e.what()}, {"exit_code", code}}.dump() << '\n';
    return code;
  };
  try {
    return fn();
  } catch (const ConfigError& e) {
    return report("config", e, exit_config);
  } catch (const ConstraintError& e) {
    return report("config", e, exit_config);
  } catch (const DomainError& e) {
    return report("config", e, exit_config);
  } catch (const GridMismatch& e) {
    return report("config", e, exit_config);
  } catch (const DivergenceError& e) {
    return report("config", e, exit_config);
  } catch (const NumericError& e) {
    return report("numeric", e, exit_numeric);
  } catch (const std::exception& e) {
    return report("runtime", e, exit_numeric);
  }
}

}  // namespace fhn
