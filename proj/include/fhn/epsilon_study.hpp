#pragma once

// Sweeps over epsilon contrasting an unbounded sqrt(|t|) forcing, whose
// attractor v-bound grows like 1/epsilon, with bounded forcing, for which the
// attractor H^1 norms stay uniform.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhn/error.hpp"
#include "fhn/format.hpp"
#include "fhn/grid.hpp"
#include "fhn/integrator.hpp"
#include "fhn/model.hpp"
#include "fhn/pullback.hpp"

namespace fhn {

// (8/(gamma^2 eps)) (||f1||^2/lambda + ||g1||^2/gamma)
inline double blowup_bound(const Parameters& p, double f1_norm_sq, double g1_norm_sq) {
  return 8.0 / (p.gamma() * p.gamma() * p.epsilon()) * (f1_norm_sq / p.lambda() + g1_norm_sq / p.gamma());
}

enum class SweepScenario { unbounded_sqrt, bounded };

inline const char* to_string(SweepScenario s) { return s == SweepScenario::unbounded_sqrt ? "unbounded_sqrt" : "bounded"; }

struct SweepBase {
  Grid grid;
  double nu = 1.0;
  double lambda = 1.0;
  double gamma = 1.0;
  NonlinearitySpec h = NonlinearitySpec::cubic();
  SpaceProfile f1 = SpaceProfile::gaussian(1.0, 2.0);
  SpaceProfile g1 = SpaceProfile::gaussian(0.5, 1.0);
  StepConfig step = StepConfig::make(1e-2);
  // Pullback depths in relaxation units 1/(eps*gamma).
  std::vector<double> depths_relax = {20.0, 25.0};
  int bundle_size = 8;
  double basin_amplitude = 2.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SweepRecord {
  double epsilon = 0.0;
  bool ok = false;
  std::string error;
  double u_h1 = 0.0;         // max ||u||_H1 over the cloud
  double v_l2 = 0.0;         // max ||v||
  double v_h1 = 0.0;         // max ||v2||_H1 + ||v1||_H1
  double v1_fraction = 0.0;  // max ||v1|| / ||v||
  double theoretical_v_bound = 0.0;
  double final_diagnostic = 0.0;
};

struct SweepResult {
  SweepScenario scenario = SweepScenario::bounded;
  std::vector<double> epsilon_list;
  std::vector<SweepRecord> records;
};

inline Model sweep_model(const SweepBase& base, SweepScenario scenario, double epsilon) {
  const Parameters p = Parameters::make(base.nu, base.lambda, epsilon, base.gamma);
  const TimeProfile tp = scenario == SweepScenario::unbounded_sqrt ? TimeProfile::sqrt_abs_t() : TimeProfile::constant(1.0);
  return Model{p, base.h, ForcingSpec::make(tp, base.f1, ForcingRole::f), ForcingSpec::make(tp, base.g1, ForcingRole::g)};
}

// Depths rounded to the dt grid.
inline std::vector<double> sweep_depths(const SweepBase& base, double epsilon) {
  const double relax = 1.0 / (epsilon * base.gamma);
  std::vector<double> d;
  for (double r : base.depths_relax) {
    const double steps = std::round(r * relax / base.step.dt);
    d.push_back(steps * base.step.dt);
  }
  return d;
}

inline SweepRecord sweep_one(const SweepBase& base, SweepScenario scenario, double epsilon) {
  SweepRecord rec;
  rec.epsilon = epsilon;
  try {
    const Model model = sweep_model(base, scenario, epsilon);
    const Grid& g = base.grid;
    const SamplerSpec sampler{InitialSampling::basin, BasinFamily::make(base.basin_amplitude, 0.0, model.params.sigma())};
    PullbackOptions opt;
    opt.split = true;
    opt.threads = base.threads;
    opt.dim = g.dim();
    const auto schedule = PullbackSchedule::make(0.0, sweep_depths(base, epsilon), base.bundle_size, base.seed);
    const AttractorCloud cloud = approximate_attractor(schedule, sampler, g, model, base.step, opt);
    for (const auto& d : cloud.depths) {
      if (!d.failures.empty()) throw NumericError(d.failures.front());
    }
    for (const State& s : cloud.points()) {
      rec.u_h1 = std::max(rec.u_h1, std::sqrt(h1_norm_sq(g, s.u)));
      const double vn = l2_norm(g, s.v);
      rec.v_l2 = std::max(rec.v_l2, vn);
      const double vh1 = std::sqrt(h1_norm_sq(g, s.split->v2)) + std::sqrt(h1_norm_sq(g, s.split->v1));
      rec.v_h1 = std::max(rec.v_h1, vh1);
      if (vn > 0.0) rec.v1_fraction = std::max(rec.v1_fraction, l2_norm(g, s.split->v1) / vn);
    }
    const auto diag = cloud.diagnostics();
    rec.final_diagnostic = diag.empty() ? 0.0 : diag.back();
    if (scenario == SweepScenario::unbounded_sqrt) {
      rec.theoretical_v_bound =
          std::sqrt(blowup_bound(model.params, base.f1.norm_sq(g.dim()), base.g1.norm_sq(g.dim())));
    } else {
      rec.theoretical_v_bound = cloud.bounds->v_l2_bound;
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

// Per-epsilon failures are recorded and the sweep continues.
inline SweepResult run_sweep(const std::vector<double>& epsilon_list, SweepScenario scenario, const SweepBase& base) {
  SweepResult r;
  r.scenario = scenario;
  r.epsilon_list = epsilon_list;
  for (double eps : epsilon_list) r.records.push_back(sweep_one(base, scenario, eps));
  return r;
}

struct TrendFit {
  double slope = 0.0;
  double spread = 1.0;  // max / min
  bool uniform = false;
};

// Least-squares slope of log(value) against log(1/eps).
inline TrendFit fit_trend(const std::vector<double>& eps, const std::vector<double>& values, double spread_max = 3.0,
                          double slope_max = 0.2) {
  if (eps.size() != values.size()) throw ConstraintError("epsilon and value lists differ in length");
  if (eps.size() < 3) throw InsufficientData("uniformity verdict needs at least 3 epsilon values");
  const std::size_t n = eps.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(values[i] > 0.0)) throw DomainError("trend fit needs positive epsilon and values");
    mx += std::log(1.0 / eps[i]);
    my += std::log(values[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(1.0 / eps[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw InsufficientData("trend fit needs distinct epsilon values");
  TrendFit t;
  t.slope = sxy / sxx;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  t.spread = *hi / *lo;
  t.uniform = t.spread <= spread_max && t.slope < slope_max;
  return t;
}

struct UniformityVerdict {
  bool uniform = false;
  TrendFit u_h1;
  TrendFit v_h1;
  TrendFit v_l2_sq;
  std::vector<std::string> failed_epsilons;
};

// Uniform iff both H^1 series pass the spread and slope tests.
inline UniformityVerdict uniform_bound_report(const SweepResult& r, double spread_max = 3.0, double slope_max = 0.2) {
  std::vector<double> eps, uh1, vh1, vl2sq;
  UniformityVerdict v;
  for (const auto& rec : r.records) {
    if (!rec.ok) {
      v.failed_epsilons.push_back(format_double(rec.epsilon) + ": " + rec.error);
      continue;
    }
    eps.push_back(rec.epsilon);
    uh1.push_back(rec.u_h1);
    vh1.push_back(rec.v_h1);
    vl2sq.push_back(rec.v_l2 * rec.v_l2);
  }
  v.u_h1 = fit_trend(eps, uh1, spread_max, slope_max);
  v.v_h1 = fit_trend(eps, vh1, spread_max, slope_max);
  v.v_l2_sq = fit_trend(eps, vl2sq, spread_max, slope_max);
  v.uniform = v.u_h1.uniform && v.v_h1.uniform;
  return v;
}

inline void write_sweep_csv(const std::string& path, const SweepResult& r) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "epsilon,u_h1,v_l2,v_h1,theoretical_v_bound\n";
  for (const auto& rec : r.records) {
    os << format_double(rec.epsilon) << ',';
    if (rec.ok) {
      os << format_double(rec.u_h1) << ',' << format_double(rec.v_l2) << ',' << format_double(rec.v_h1) << ','
         << format_double(rec.theoretical_v_bound);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
}

inline nlohmann::json verdict_json(const SweepResult& r, const UniformityVerdict& v) {
  auto fit = [](const TrendFit& t) { return nlohmann::json{{"slope", t.slope}, {"spread", t.spread}, {"uniform", t.uniform}}; };
  return {{"scenario", to_string(r.scenario)},
          {"verdict", v.uniform ? "uniform" : "non-uniform"},
          {"u_h1", fit(v.u_h1)},
          {"v_h1", fit(v.v_h1)},
          {"v_l2_sq", fit(v.v_l2_sq)},
          {"failed_epsilons", v.failed_epsilons}};
}

}  // namespace fhn
