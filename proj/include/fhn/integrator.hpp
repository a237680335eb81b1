#pragma once

// IMEX method of lines for
//   u' = nu*Lap(u) - lambda*u - h(u) - v + f(t)
//   v' = -eps*gamma*v + eps*(u + g(t))
// Diffusion and linear damping are implicit; h(u), v and f are explicit.
// The v equation is linear and is advanced with the updated u frozen over
// the step (Euler: u^{n+1}; CN: the trapezoidal average).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhn/error.hpp"
#include "fhn/grid.hpp"
#include "fhn/model.hpp"

namespace fhn {

enum class Scheme { imex_euler, imex_cn };
enum class VUpdate { exact_integrating_factor, same_scheme };

inline const char* to_string(Scheme s) { return s == Scheme::imex_euler ? "imex_euler" : "imex_cn"; }
inline const char* to_string(VUpdate v) {
  return v == VUpdate::exact_integrating_factor ? "exact_integrating_factor" : "same_scheme";
}

struct StepConfig {
  double dt = 1e-2;
  Scheme scheme = Scheme::imex_cn;
  VUpdate v_update = VUpdate::exact_integrating_factor;
  double split_tolerance = 1e-8;

  static StepConfig make(double dt, Scheme scheme = Scheme::imex_cn,
                         VUpdate v_update = VUpdate::exact_integrating_factor) {
    if (!std::isfinite(dt) || !(dt > 0.0)) throw DomainError("dt must be positive and finite");
    return StepConfig{dt, scheme, v_update, 1e-8};
  }
};

struct SplitFields {
  Field v1;
  Field v2;
};

struct State {
  double t = 0.0;
  Field u;
  Field v;
  std::optional<SplitFields> split;

  const Grid& grid() const { return u.grid; }

  static State zeros(const Grid& g, double t = 0.0) { return State{t, Field::zeros(g), Field::zeros(g), std::nullopt}; }

  // Attach the split v1 = v, v2 = 0 at the current time.
  State with_split() const {
    State s = *this;
    s.split = SplitFields{v, Field::zeros(v.grid)};
    return s;
  }
};

// Solves (alpha*I - beta*Lap) x = b on the grid with Dirichlet closure.
class ImplicitSolver {
 public:
  ImplicitSolver(const Grid& g, double alpha, double beta) : grid_(g), alpha_(alpha), beta_(beta) {
    const int m = g.points_per_axis();
    if (g.dim() == 1) {
      // Constant-coefficient Thomas factorization.
      const double h2 = g.spacing() * g.spacing();
      off_ = -beta / h2;
      const double diag = alpha + 2.0 * beta / h2;
      cprime_.resize(m);
      inv_denom_.resize(m);
      double c_prev = 0.0;
      for (int i = 0; i < m; ++i) {
        const double denom = diag - off_ * c_prev;
        if (!(std::abs(denom) > 0.0)) throw NumericError("singular tridiagonal system");
        inv_denom_[i] = 1.0 / denom;
        c_prev = off_ * inv_denom_[i];
        cprime_[i] = c_prev;
      }
      return;
    }
    // Fast diagonalization with the orthonormal DST-I basis (symmetric, S*S = I).
    const double norm = std::sqrt(2.0 / (m + 1));
    basis_.resize(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        basis_[static_cast<std::size_t>(i) * m + j] = norm * std::sin(std::numbers::pi * (i + 1) * (j + 1) / (m + 1));
    inv_eig_.resize(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double e = alpha - beta * (laplacian_eigenvalue_1d(g, i + 1) + laplacian_eigenvalue_1d(g, j + 1));
        if (!(std::abs(e) > 0.0)) throw NumericError("singular implicit operator");
        inv_eig_[static_cast<std::size_t>(i) * m + j] = 1.0 / e;
      }
    tmp_.resize(static_cast<std::size_t>(m) * m);
  }

  // In place: x holds b on entry and the solution on exit.
  void solve(std::span<double> x) {
    const int m = grid_.points_per_axis();
    if (grid_.dim() == 1) {
      x[0] *= inv_denom_[0];
      for (int i = 1; i < m; ++i) x[i] = (x[i] - off_ * x[i - 1]) * inv_denom_[i];
      for (int i = m - 2; i >= 0; --i) x[i] -= cprime_[i] * x[i + 1];
      return;
    }
    sandwich(x);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] *= inv_eig_[k];
    sandwich(x);
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  // x <- S * X * S for an m-by-m row-major X.
  void sandwich(std::span<double> x) {
    const std::size_t m = static_cast<std::size_t>(grid_.points_per_axis());
    std::fill(tmp_.begin(), tmp_.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k) {
        const double s = basis_[i * m + k];
        const double* row = &x[k * m];
        double* out = &tmp_[i * m];
        for (std::size_t j = 0; j < m; ++j) out[j] += s * row[j];
      }
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = &tmp_[i * m];
      for (std::size_t j = 0; j < m; ++j) {
        const double* col = &basis_[j * m];
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) acc += row[k] * col[k];
        x[i * m + j] = acc;
      }
    }
  }

  Grid grid_;
  double alpha_;
  double beta_;
  double off_ = 0.0;
  std::vector<double> cprime_;
  std::vector<double> inv_denom_;
  std::vector<double> basis_;
  std::vector<double> inv_eig_;
  std::vector<double> tmp_;
};

// Coefficients of v^{n+1} = P v^n + Q * source for v' = -eps*gamma*v + eps*source.
struct VPropagator {
  double P;
  double Q;
};

inline VPropagator v_propagator(const Parameters& p, const StepConfig& cfg) {
  const double k = p.epsilon() * p.gamma();
  const double dt = cfg.dt;
  if (cfg.v_update == VUpdate::exact_integrating_factor) {
    return {std::exp(-k * dt), -std::expm1(-k * dt) / p.gamma()};
  }
  if (cfg.scheme == Scheme::imex_euler) {
    return {1.0 / (1.0 + dt * k), dt * p.epsilon() / (1.0 + dt * k)};
  }
  return {(1.0 - 0.5 * dt * k) / (1.0 + 0.5 * dt * k), dt * p.epsilon() / (1.0 + 0.5 * dt * k)};
}

using Observer = std::function<void(const State&)>;

// Owns the factorized implicit operator and scratch buffers; one per thread.
class Stepper {
 public:
  Stepper(const Grid& g, Model model, StepConfig cfg)
      : grid_(g),
        model_(std::move(model)),
        cfg_(cfg),
        solver_(g, 1.0 + theta() * cfg.dt * model_.params.lambda(), theta() * cfg.dt * model_.params.nu()),
        prop_(v_propagator(model_.params, cfg)),
        wf_(sample_space_profile(model_.f.space_profile(), g)),
        wg_(sample_space_profile(model_.g.space_profile(), g)),
        n0_(g.size()),
        rhs_(g.size()),
        lap_(g.size()),
        ustar_(g.size()),
        vstar_(g.size()) {
    if (!std::isfinite(cfg.dt) || !(cfg.dt > 0.0)) throw DomainError("dt must be positive and finite");
    f_zero_ = model_.f.is_zero();
    g_zero_ = model_.g.is_zero();
  }

  const Grid& grid() const { return grid_; }
  const Model& model() const { return model_; }
  const StepConfig& config() const { return cfg_; }

  void step(State& s) {
    detail::require_on_grid(grid_, s.u);
    detail::require_on_grid(grid_, s.v);
    if (cfg_.scheme == Scheme::imex_euler) {
      step_euler(s);
    } else {
      step_cn(s);
    }
    check_finite(s);
  }

  // Number of dt steps from t to t_end; t_end must lie on the dt grid.
  std::int64_t steps_between(double t, double t_end) const {
    if (!(t_end >= t)) throw ConstraintError("t_end must not precede the state time");
    const double q = (t_end - t) / cfg_.dt;
    const auto n = static_cast<std::int64_t>(std::llround(q));
    if (std::abs(q - static_cast<double>(n)) > 1e-6) {
      throw ConstraintError("t_end - t is not a multiple of dt");
    }
    return n;
  }

  // Advances s to t_end. The observer sees the state after every stride-th
  // step, counting the initial state as step 0.
  void advance(State& s, double t_end, const Observer& observer = {}, int stride = 1) {
    if (stride < 1) throw DomainError("observer stride must be >= 1");
    const std::int64_t n = steps_between(s.t, t_end);
    if (observer) observer(s);
    for (std::int64_t k = 1; k <= n; ++k) {
      step(s);
      if (observer && k % stride == 0) observer(s);
    }
  }

 private:
  double theta() const { return cfg_.scheme == Scheme::imex_euler ? 1.0 : 0.5; }

  double af(double t) const { return f_zero_ ? 0.0 : model_.f.time_factor(t, model_.params.sigma()); }
  double ag(double t) const { return g_zero_ ? 0.0 : model_.g.time_factor(t, model_.params.sigma()); }

  // out = -h(u) - v + a_f * w_f
  void explicit_terms(std::span<const double> u, std::span<const double> v, double a_f, std::span<double> out) const {
    const auto& h = model_.h;
    const bool hz = h.is_zero();
    const double* wf = wf_.values.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double hu = hz ? 0.0 : h.value(u[i]);
      out[i] = -hu - v[i] + a_f * wf[i];
    }
  }

  void update_v(State& s, std::span<const double> u_eff, double g_eff) {
    const double P = prop_.P;
    const double Q = prop_.Q;
    const double* wg = wg_.values.data();
    for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] = P * s.v[i] + Q * (u_eff[i] + g_eff * wg[i]);
    if (s.split) {
      auto& sp = *s.split;
      for (std::size_t i = 0; i < s.v.size(); ++i) {
        sp.v1[i] = P * sp.v1[i];
        sp.v2[i] = P * sp.v2[i] + Q * (u_eff[i] + g_eff * wg[i]);
      }
    }
  }

  void step_euler(State& s) {
    const double dt = cfg_.dt;
    const double t0 = s.t;
    const double t1 = t0 + dt;
    explicit_terms(s.u.values, s.v.values, af(t0), n0_);
    for (std::size_t i = 0; i < rhs_.size(); ++i) rhs_[i] = s.u[i] + dt * n0_[i];
    solver_.solve(rhs_);
    s.u.values.swap(rhs_);
    update_v(s, s.u.values, ag(t1));
    s.t = t1;
  }

  void step_cn(State& s) {
    const double dt = cfg_.dt;
    const double half = 0.5 * dt;
    const double t0 = s.t;
    const double t1 = t0 + dt;
    const double nu = model_.params.nu();
    const double lambda = model_.params.lambda();
    const double g_avg = 0.5 * (ag(t0) + ag(t1));

    explicit_terms(s.u.values, s.v.values, af(t0), n0_);
    laplacian_into(grid_, s.u.values, lap_);
    // lap_ <- u + dt/2 * (nu*Lap u - lambda*u), shared by predictor and corrector
    for (std::size_t i = 0; i < lap_.size(); ++i) lap_[i] = s.u[i] + half * (nu * lap_[i] - lambda * s.u[i]);

    // predictor
    for (std::size_t i = 0; i < ustar_.size(); ++i) ustar_[i] = lap_[i] + dt * n0_[i];
    solver_.solve(ustar_);
    const double P = prop_.P;
    const double Q = prop_.Q;
    const double* wg = wg_.values.data();
    for (std::size_t i = 0; i < vstar_.size(); ++i) {
      vstar_[i] = P * s.v[i] + Q * (0.5 * (s.u[i] + ustar_[i]) + g_avg * wg[i]);
    }
    // corrector: rhs_ <- N(u*, v*, t1)
    explicit_terms(ustar_, vstar_, af(t1), rhs_);
    for (std::size_t i = 0; i < rhs_.size(); ++i) rhs_[i] = lap_[i] + half * (n0_[i] + rhs_[i]);
    solver_.solve(rhs_);
    // ustar_ <- trapezoidal average of u for the v update
    for (std::size_t i = 0; i < ustar_.size(); ++i) ustar_[i] = 0.5 * (s.u[i] + rhs_[i]);
    s.u.values.swap(rhs_);
    update_v(s, ustar_, g_avg);
    s.t = t1;
  }

  void check_finite(const State& s) const {
    if (!s.u.all_finite() || !s.v.all_finite()) {
      throw NumericError("non-finite values at t = " + format_double(s.t) +
                         "; dt may be too large for the explicit reaction term");
    }
  }

  Grid grid_;
  Model model_;
  StepConfig cfg_;
  ImplicitSolver solver_;
  VPropagator prop_;
  Field wf_;
  Field wg_;
  bool f_zero_ = false;
  bool g_zero_ = false;
  std::vector<double> n0_;
  std::vector<double> rhs_;
  std::vector<double> lap_;
  std::vector<double> ustar_;
  std::vector<double> vstar_;
};

inline State step(const State& s, const StepConfig& cfg, const Model& model) {
  Stepper st(s.grid(), model, cfg);
  State out = s;
  st.step(out);
  return out;
}

inline State evolve(const State& initial, double t_end, const StepConfig& cfg, const Model& model,
                    const Observer& observer = {}, int stride = 1) {
  Stepper st(initial.grid(), model, cfg);
  State s = initial;
  st.advance(s, t_end, observer, stride);
  return s;
}

// Starts the split v1 = v, v2 = 0 at initial.t when not already present.
inline State evolve_split(const State& initial, double t_end, const StepConfig& cfg, const Model& model,
                          const Observer& observer = {}, int stride = 1) {
  State s = initial.split ? initial : initial.with_split();
  Stepper st(s.grid(), model, cfg);
  st.advance(s, t_end, observer, stride);
  return s;
}

// ||v - (v1 + v2)|| in L^2; zero when no split is attached.
inline double split_defect(const State& s) {
  if (!s.split) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    const double d = s.v[i] - (s.split->v1[i] + s.split->v2[i]);
    acc += d * d;
  }
  return std::sqrt(acc * s.grid().cell_volume());
}

// ---------------------------------------------------------------------------
// Checkpoints: one JSON header line, then u, v (and v1, v2) as raw doubles.
// ---------------------------------------------------------------------------

struct Checkpoint {
  State state;
  StepConfig config;
  nlohmann::json params;
};

inline nlohmann::json params_to_json(const Parameters& p) {
  return {{"nu", p.nu()}, {"lambda", p.lambda()}, {"epsilon", p.epsilon()}, {"gamma", p.gamma()}};
}

inline void write_checkpoint(const std::string& path, const State& s, const StepConfig& cfg, const Parameters& p) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  nlohmann::json header = {{"t", s.t},
                           {"grid", grid_to_json(s.grid())},
                           {"params", params_to_json(p)},
                           {"scheme", to_string(cfg.scheme)},
                           {"v_update", to_string(cfg.v_update)},
                           {"dt", cfg.dt},
                           {"split", s.split.has_value()}};
  os << header.dump() << '\n';
  auto put = [&](const Field& f) {
    os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  };
  put(s.u);
  put(s.v);
  if (s.split) {
    put(s.split->v1);
    put(s.split->v2);
  }
  if (!os) throw std::runtime_error("failed writing " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(is, line);
  const auto h = nlohmann::json::parse(line);
  const Grid g = grid_from_json(h.at("grid"));
  auto get = [&]() {
    Field f = Field::zeros(g);
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated checkpoint payload in " + path);
    return f;
  };
  Checkpoint c;
  c.state.t = h.at("t").get<double>();
  c.state.u = get();
  c.state.v = get();
  if (h.at("split").get<bool>()) {
    Field v1 = get();
    Field v2 = get();
    c.state.split = SplitFields{std::move(v1), std::move(v2)};
  }
  c.config.dt = h.at("dt").get<double>();
  c.config.scheme = h.at("scheme").get<std::string>() == "imex_euler" ? Scheme::imex_euler : Scheme::imex_cn;
  c.config.v_update = h.at("v_update").get<std::string>() == "same_scheme" ? VUpdate::same_scheme
                                                                            : VUpdate::exact_integrating_factor;
  c.params = h.at("params");
  return c;
}

}  // namespace fhn
