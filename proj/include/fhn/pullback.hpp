#pragma once

// Pullback attractor approximation: bundles of initial states sampled at
// tau - t_n are evolved to tau for increasing depths t_n; the cloud at the
// deepest t_N approximates A(tau). Consecutive-depth Hausdorff distances,
// absorption flags and covering numbers serve as convergence diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhn/analysis.hpp"
#include "fhn/error.hpp"
#include "fhn/format.hpp"
#include "fhn/grid.hpp"
#include "fhn/integrator.hpp"
#include "fhn/model.hpp"
#include "fhn/parallel.hpp"

namespace fhn {

struct PullbackSchedule {
  double tau = 0.0;
  std::vector<double> depths;
  int bundle_size = 32;
  std::uint64_t seed = 0;

  static PullbackSchedule make(double tau, std::vector<double> depths, int bundle_size, std::uint64_t seed) {
    if (!std::isfinite(tau)) throw DomainError("tau must be finite");
    if (depths.empty()) throw ConstraintError("pullback schedule needs at least one depth");
    for (std::size_t i = 0; i < depths.size(); ++i) {
      if (!(depths[i] > 0.0) || !std::isfinite(depths[i])) throw ConstraintError("pullback depths must be positive");
      if (i > 0 && !(depths[i] > depths[i - 1])) throw ConstraintError("pullback depths must be strictly increasing");
    }
    if (bundle_size < 2) throw ConstraintError("bundle_size must be >= 2");
    return PullbackSchedule{tau, std::move(depths), bundle_size, seed};
  }
};

// ---------------------------------------------------------------------------
// Deterministic sampling
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t member_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t member) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ member);
}

// Uniform [0,1) from the top 53 bits; avoids library-specific distributions.
inline double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Random combination of low sine modes with coefficients ~ U[-1,1]/k,
// normalized to unit L^2 norm.
inline Field random_direction(const Grid& g, std::mt19937_64& rng) {
  Field f = Field::zeros(g);
  const int m = g.points_per_axis();
  const double c = std::numbers::pi / (m + 1);
  constexpr int K = 8;
  if (g.dim() == 1) {
    for (int k = 1; k <= std::min(K, m); ++k) {
      const double a = (2.0 * u01(rng) - 1.0) / k;
      for (int i = 0; i < m; ++i) f[i] += a * std::sin(k * c * (i + 1));
    }
  } else {
    constexpr int K2 = 4;
    for (int kx = 1; kx <= std::min(K2, m); ++kx)
      for (int ky = 1; ky <= std::min(K2, m); ++ky) {
        const double a = (2.0 * u01(rng) - 1.0) / (kx + ky - 1);
        for (int ix = 0; ix < m; ++ix) {
          const double sx = a * std::sin(kx * c * (ix + 1));
          for (int iy = 0; iy < m; ++iy) f[static_cast<std::size_t>(ix) * m + iy] += sx * std::sin(ky * c * (iy + 1));
        }
      }
  }
  const double n = l2_norm(g, f);
  if (n > 0.0)
    for (double& x : f.values) x /= n;
  return f;
}

}  // namespace detail

// count states at t_start with ||(u, v)|| <= A e^{beta t_start}; the joint
// norm is radius * (0.5 + 0.5 U). `stream` separates independent bundles
// drawn from one seed (the schedule uses the depth index).
inline std::vector<State> sample_initial_family(const Grid& g, const BasinFamily& basin, double t_start, int count,
                                                std::uint64_t seed, std::uint64_t stream = 0) {
  const double radius = basin.radius(t_start);
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int j = 0; j < count; ++j) {
    State s = State::zeros(g, t_start);
    if (radius > 0.0) {
      std::mt19937_64 rng(detail::member_seed(seed, stream, static_cast<std::uint64_t>(j)));
      const Field du = detail::random_direction(g, rng);
      const Field dv = detail::random_direction(g, rng);
      const double angle = 0.5 * std::numbers::pi * detail::u01(rng);
      const double r = radius * (0.5 + 0.5 * detail::u01(rng));
      const double cu = r * std::cos(angle);
      const double cv = r * std::sin(angle);
      for (std::size_t i = 0; i < g.size(); ++i) {
        s.u[i] = cu * du[i];
        s.v[i] = cv * dv[i];
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Samples inside the absorbing ball at t_start: ||u|| <= ru, ||v|| <= rv.
inline std::vector<State> sample_absorbing_family(const Grid& g, double ru, double rv, double t_start, int count,
                                                  std::uint64_t seed, std::uint64_t stream = 0) {
  std::vector<State> out;
  for (int j = 0; j < count; ++j) {
    std::mt19937_64 rng(detail::member_seed(seed, stream, static_cast<std::uint64_t>(j)));
    State s = State::zeros(g, t_start);
    const Field du = detail::random_direction(g, rng);
    const Field dv = detail::random_direction(g, rng);
    const double cu = ru * (0.5 + 0.5 * detail::u01(rng));
    const double cv = rv * (0.5 + 0.5 * detail::u01(rng));
    for (std::size_t i = 0; i < g.size(); ++i) {
      s.u[i] = cu * du[i];
      s.v[i] = cv * dv[i];
    }
    out.push_back(std::move(s));
  }
  return out;
}

enum class InitialSampling { basin, absorbing };

struct SamplerSpec {
  InitialSampling mode = InitialSampling::absorbing;
  std::optional<BasinFamily> basin;
};

// Evolves init from tau - depth to tau.
inline State pullback_endpoint(double tau, double depth, const State& init, Stepper& stepper) {
  if (std::abs(init.t - (tau - depth)) > 1e-9 * std::max(1.0, std::abs(tau - depth))) {
    throw ConstraintError("initial state time must equal tau - depth");
  }
  State s = init;
  if (depth == 0.0) return s;
  stepper.advance(s, tau);
  return s;
}

inline State pullback_endpoint(double tau, double depth, const State& init, const StepConfig& cfg,
                               const Model& model) {
  Stepper st(init.grid(), model, cfg);
  return pullback_endpoint(tau, depth, init, st);
}

// ---------------------------------------------------------------------------
// Cloud metrics (L^2 x L^2)
// ---------------------------------------------------------------------------

inline double state_distance(const State& a, const State& b) {
  detail::require_same_grid(a.grid(), b.grid());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    const double du = a.u[i] - b.u[i];
    const double dv = a.v[i] - b.v[i];
    acc += du * du + dv * dv;
  }
  return std::sqrt(acc * a.grid().cell_volume());
}

namespace detail {

inline void require_comparable(const std::vector<State>& a, const std::vector<State>& b) {
  if (a.empty() || b.empty()) throw DomainError("Hausdorff distance of an empty cloud");
  require_same_grid(a.front().grid(), b.front().grid());
  const double ta = a.front().t;
  const double tb = b.front().t;
  if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta))) {
    throw ConstraintError("clouds are at different times");
  }
}

}  // namespace detail

// d(Y, Z) = max_y min_z ||y - z||
inline double hausdorff_semi(const std::vector<State>& Y, const std::vector<State>& Z) {
  detail::require_comparable(Y, Z);
  double worst = 0.0;
  for (const State& y : Y) {
    double best = std::numeric_limits<double>::infinity();
    for (const State& z : Z) best = std::min(best, state_distance(y, z));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff_distance(const std::vector<State>& A, const std::vector<State>& B) {
  return std::max(hausdorff_semi(A, B), hausdorff_semi(B, A));
}

// Greedy cover by closed eta-balls, lowest uncovered index first.
inline int covering_number(const std::vector<State>& cloud, double eta) {
  if (!(eta > 0.0)) throw DomainError("covering radius must be positive");
  std::vector<bool> covered(cloud.size(), false);
  int balls = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (covered[i]) continue;
    ++balls;
    for (std::size_t j = i; j < cloud.size(); ++j)
      if (!covered[j] && state_distance(cloud[i], cloud[j]) <= eta) covered[j] = true;
  }
  return balls;
}

// ---------------------------------------------------------------------------
// Attractor approximation
// ---------------------------------------------------------------------------

struct DepthCloud {
  double depth = 0.0;
  std::vector<State> points;
  double hausdorff_to_prev = std::numeric_limits<double>::quiet_NaN();
  double max_norm_u = 0.0;
  double max_norm_v = 0.0;
  std::size_t absorbed_count = 0;
  std::vector<std::string> failures;

  bool all_absorbed() const { return failures.empty() && absorbed_count == points.size(); }
};

struct AttractorCloud {
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::vector<DepthCloud> depths;
  std::optional<BoundSet> bounds;

  const std::vector<State>& points() const { return depths.back().points; }
  double depth() const { return depths.back().depth; }

  // Hausdorff distance of each depth-cloud to its predecessor (from slot 1 on).
  std::vector<double> diagnostics() const {
    std::vector<double> d;
    for (std::size_t i = 1; i < depths.size(); ++i) d.push_back(depths[i].hausdorff_to_prev);
    return d;
  }

  // First slot after which every depth-cloud is fully absorbed.
  std::optional<std::size_t> absorption_slot() const {
    std::optional<std::size_t> slot;
    for (std::size_t i = depths.size(); i-- > 0;) {
      if (!depths[i].all_absorbed()) break;
      slot = i;
    }
    return slot;
  }
};

struct PullbackOptions {
  int threads = 1;
  bool split = false;
  double slack = 0.05;
  int dim = 1;
};

namespace detail {

// Keeps the largest exponent e^{c sigma |t|} well inside double range.
inline void check_depth_cap(const Model& model, double t_start) {
  for (const ForcingSpec* fs : {&model.f, &model.g}) {
    const TimeProfile& tp = fs->time_profile();
    if (tp.kind() == TimeProfileKind::exp_sigma_frac && !fs->is_zero()) {
      if (tp.p0() * model.params.sigma() * std::abs(t_start) > 690.0) {
        throw ConstraintError("pullback depth too large for the exponential forcing profile");
      }
    }
  }
}

}  // namespace detail

inline AttractorCloud approximate_attractor(const PullbackSchedule& schedule, const SamplerSpec& sampler,
                                            const Grid& g, const Model& model, const StepConfig& cfg,
                                            const PullbackOptions& opt = {}) {
  AttractorCloud cloud;
  cloud.tau = schedule.tau;
  cloud.seed = schedule.seed;
  cloud.bounds = absorbing_bounds(model.params, model.h, model.f, model.g, schedule.tau, g.dim());
  const std::size_t bundle = static_cast<std::size_t>(schedule.bundle_size);

  for (std::size_t n = 0; n < schedule.depths.size(); ++n) {
    const double depth = schedule.depths[n];
    const double t_start = schedule.tau - depth;
    detail::check_depth_cap(model, t_start);
    std::vector<State> init;
    if (sampler.mode == InitialSampling::basin) {
      if (!sampler.basin) throw ConstraintError("basin sampling requires a basin family");
      init = sample_initial_family(g, *sampler.basin, t_start, schedule.bundle_size, schedule.seed, n);
    } else {
      const BoundSet b = absorbing_bounds(model.params, model.h, model.f, model.g, t_start, g.dim());
      init = sample_absorbing_family(g, b.u_l2_bound, b.v_l2_bound, t_start, schedule.bundle_size, schedule.seed, n);
    }

    std::vector<std::optional<State>> out(bundle);
    std::vector<std::string> errors(bundle);
    parallel_for(bundle, opt.threads, [&](std::size_t j) {
      try {
        Stepper st(g, model, cfg);
        State s = opt.split ? init[j].with_split() : init[j];
        out[j] = pullback_endpoint(schedule.tau, depth, s, st);
      } catch (const NumericError& e) {
        errors[j] = e.what();
      }
    });

    DepthCloud dc;
    dc.depth = depth;
    for (std::size_t j = 0; j < bundle; ++j) {
      if (!out[j]) {
        dc.failures.push_back("member " + std::to_string(j) + ": " + errors[j]);
        continue;
      }
      const AbsorptionReport r = check_absorption(*out[j], *cloud.bounds, opt.slack);
      dc.max_norm_u = std::max(dc.max_norm_u, r.u_norm);
      dc.max_norm_v = std::max(dc.max_norm_v, r.v_norm);
      if (r.absorbed()) ++dc.absorbed_count;
      dc.points.push_back(std::move(*out[j]));
    }
    if (n > 0 && !dc.points.empty() && !cloud.depths.back().points.empty()) {
      dc.hausdorff_to_prev = hausdorff_distance(dc.points, cloud.depths.back().points);
    }
    cloud.depths.push_back(std::move(dc));
  }
  return cloud;
}

// Symmetric Hausdorff distance between evolve(A(tau), t) and A(tau + t).
inline double invariance_defect(const AttractorCloud& at_tau, const AttractorCloud& at_tau_plus_t, double t,
                                const Model& model, const StepConfig& cfg, int threads = 1) {
  if (std::abs(at_tau_plus_t.tau - (at_tau.tau + t)) > 1e-9 * std::max(1.0, std::abs(at_tau.tau + t))) {
    throw ConstraintError("second cloud is not at tau + t");
  }
  const auto& pts = at_tau.points();
  if (pts.empty()) throw DomainError("invariance defect of an empty cloud");
  std::vector<State> moved(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t j) {
    Stepper st(pts[j].grid(), model, cfg);
    State s = pts[j];
    st.advance(s, pts[j].t + t);
    moved[j] = std::move(s);
  });
  return hausdorff_distance(moved, at_tau_plus_t.points());
}

// Number of increases in seq[from..]; the Cauchy diagnostic tolerates one.
inline int count_increases(const std::vector<double>& seq, std::size_t from = 0) {
  int c = 0;
  for (std::size_t i = from + 1; i < seq.size(); ++i)
    if (seq[i] > seq[i - 1]) ++c;
  return c;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

// Columns depth,hausdorff_to_prev,max_norm_u,max_norm_v (empty distance on
// the first row).
inline void write_cloud_csv(const std::string& path, const AttractorCloud& c) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "depth,hausdorff_to_prev,max_norm_u,max_norm_v\n";
  for (const auto& d : c.depths) {
    os << format_double(d.depth) << ',';
    if (!std::isnan(d.hausdorff_to_prev)) os << format_double(d.hausdorff_to_prev);
    os << ',' << format_double(d.max_norm_u) << ',' << format_double(d.max_norm_v) << '\n';
  }
}

inline nlohmann::json cloud_manifest(const AttractorCloud& c, const PullbackSchedule& s) {
  nlohmann::json depths = nlohmann::json::array();
  for (const auto& d : c.depths) {
    nlohmann::json e = {{"depth", d.depth},
                        {"max_norm_u", d.max_norm_u},
                        {"max_norm_v", d.max_norm_v},
                        {"absorbed", d.absorbed_count},
                        {"members", d.points.size()},
                        {"failures", d.failures}};
    e["hausdorff_to_prev"] = std::isnan(d.hausdorff_to_prev) ? nlohmann::json(nullptr) : nlohmann::json(d.hausdorff_to_prev);
    depths.push_back(e);
  }
  nlohmann::json j = {{"tau", c.tau},
                      {"depths", s.depths},
                      {"bundle_size", s.bundle_size},
                      {"seed", s.seed},
                      {"diagnostics", depths}};
  const auto slot = c.absorption_slot();
  j["absorption_slot"] = slot ? nlohmann::json(*slot) : nlohmann::json(nullptr);
  if (c.bounds) j["bounds"] = bound_registry_json(*c.bounds);
  return j;
}

// Directory with one checkpoint per deepest-cloud member and manifest.json.
inline void write_cloud_archive(const std::filesystem::path& dir, const AttractorCloud& c, const PullbackSchedule& s,
                                const StepConfig& cfg, const Parameters& p) {
  std::filesystem::create_directories(dir);
  nlohmann::json man = cloud_manifest(c, s);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t j = 0; j < c.points().size(); ++j) {
    const std::string name = "member_" + std::to_string(j) + ".ckpt";
    write_checkpoint((dir / name).string(), c.points()[j], cfg, p);
    files.push_back(name);
  }
  man["files"] = files;
  std::ofstream os(dir / "manifest.json");
  os << man.dump(2) << '\n';
}

}  // namespace fhn
