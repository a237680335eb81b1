#pragma once

// Functionals and constant-explicit bounds evaluated along trajectories:
// energy E = eps*||u||^2 + ||v||^2, its differential inequality
//   dE/dt + 2 sigma E + 2 eps nu ||grad u||^2 <= (eps/lambda)||f||^2 + (eps/gamma)||g||^2,
// pullback absorbing radii and tail masses.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhn/error.hpp"
#include "fhn/format.hpp"
#include "fhn/grid.hpp"
#include "fhn/integrator.hpp"
#include "fhn/model.hpp"

namespace fhn {

inline double energy(const State& s, double epsilon) {
  const Grid& g = s.grid();
  return epsilon * l2_norm_sq(g, s.u) + l2_norm_sq(g, s.v);
}

// States recorded at a uniform stride of the step grid.
struct Trajectory {
  std::vector<State> states;
  double dt = 0.0;
  int stride = 1;
  Scheme scheme = Scheme::imex_cn;

  double sample_spacing() const { return dt * stride; }
};

inline Trajectory simulate(const State& initial, double t_end, const StepConfig& cfg, const Model& model,
                           int stride = 1) {
  Trajectory tr;
  tr.dt = cfg.dt;
  tr.stride = stride;
  tr.scheme = cfg.scheme;
  evolve(initial, t_end, cfg, model, [&](const State& s) { tr.states.push_back(s); }, stride);
  return tr;
}

struct ResidualReport {
  std::vector<double> t;
  std::vector<double> residual;
  double max_residual = -std::numeric_limits<double>::infinity();
  double dt = 0.0;

  // Nonpositive max means the inequality held at every recorded interval.
  bool holds() const { return max_residual <= 0.0; }
};

// r_j = (E_{j+1}-E_j)/dt + 2 sigma E_j + 2 eps nu ||grad u_j||^2
//       - (eps/lambda)||f(t*)||^2 - (eps/gamma)||g(t*)||^2
// with t* = t_j for imex_euler and the interval midpoint for imex_cn.
// Forcing norms are grid norms of the sampled forcing.
inline ResidualReport energy_inequality_residual(const Trajectory& tr, const Parameters& p, const ForcingSpec& f,
                                                 const ForcingSpec& g) {
  ResidualReport rep;
  rep.dt = tr.sample_spacing();
  if (tr.states.size() < 2) return rep;
  const Grid& grid = tr.states.front().grid();
  const double wf = l2_norm_sq(grid, sample_space_profile(f.space_profile(), grid));
  const double wg = l2_norm_sq(grid, sample_space_profile(g.space_profile(), grid));
  const double eps = p.epsilon();
  const double sigma = p.sigma();
  const double h = rep.dt;
  for (std::size_t j = 0; j + 1 < tr.states.size(); ++j) {
    const State& a = tr.states[j];
    const State& b = tr.states[j + 1];
    const double spacing = b.t - a.t;
    if (std::abs(spacing - h) > 1e-9 * std::max(1.0, std::abs(h)) + 1e-9 * std::abs(a.t)) {
      throw ConstraintError("trajectory samples are not at a uniform stride");
    }
    const double ts = tr.scheme == Scheme::imex_euler ? a.t : a.t + 0.5 * h;
    const double af = f.is_zero() ? 0.0 : f.time_factor(ts, sigma);
    const double ag = g.is_zero() ? 0.0 : g.time_factor(ts, sigma);
    const double Ea = energy(a, eps);
    const double Eb = energy(b, eps);
    const double r = (Eb - Ea) / h + 2.0 * sigma * Ea + 2.0 * eps * p.nu() * h1_seminorm_sq(grid, a.u) -
                     (eps / p.lambda()) * af * af * wf - (eps / p.gamma()) * ag * ag * wg;
    rep.t.push_back(a.t);
    rep.residual.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Absorbing bounds
// ---------------------------------------------------------------------------

struct BoundTerm {
  std::string name;
  std::string formula;
  double value = 0.0;  // the bound itself (not squared)
  nlohmann::json constants;
};

struct BoundSet {
  double u_l2_bound = 0.0;
  double v_l2_bound = 0.0;
  double u_h1_bound = 0.0;
  double v2_h1_bound = 0.0;
  double tau = 0.0;
  std::vector<BoundTerm> registry;
};

// Squared radii at time tau, with J = (eps/lambda) I_f + (eps/gamma) I_g:
//   ||v||^2     <= 2 J e^{-sigma tau}
//   ||u||^2     <= 2 J e^{-sigma tau} / eps
//   ||u||_H1^2  <= e^{-sigma tau} { 2J/eps + e^{kappa+} [ J/(eps nu) + 4J/(nu sigma) + (2/nu) I_f ] }
//   ||v2||_H1^2 <= ||v||^2 + e^{-sigma tau} [ 4J/(gamma nu) + (4 eps/gamma) I_grad_g ]
// where kappa = 2C - 2 lambda + sigma and C is the declared lower bound of h'.
inline BoundSet absorbing_bounds(const Parameters& p, const NonlinearitySpec& h, const ForcingSpec& f,
                                 const ForcingSpec& g, double tau, int dim = 1) {
  const double eps = p.epsilon();
  const double sigma = p.sigma();
  const double nu = p.nu();
  const double lambda = p.lambda();
  const double gamma = p.gamma();
  const double If = f.history_integral(sigma, tau, dim);
  const double Ig = g.history_integral(sigma, tau, dim);
  const double Igg = g.grad_history_integral(sigma, tau, dim);
  const double J = (eps / lambda) * If + (eps / gamma) * Ig;
  const double decay = std::exp(-sigma * tau);
  const double kappa = 2.0 * h.lower_derivative_bound() - 2.0 * lambda + sigma;
  const double gronwall = std::exp(std::max(kappa, 0.0));

  const double v2 = 2.0 * J * decay;
  const double u2 = v2 / eps;
  const double uh1 = decay * (2.0 * J / eps + gronwall * (J / (eps * nu) + 4.0 * J / (nu * sigma) + 2.0 / nu * If));
  const double v2h1 = v2 + decay * (4.0 * J / (gamma * nu) + 4.0 * eps / gamma * Igg);

  BoundSet b;
  b.tau = tau;
  b.v_l2_bound = std::sqrt(v2);
  b.u_l2_bound = std::sqrt(u2);
  b.u_h1_bound = std::sqrt(uh1);
  b.v2_h1_bound = std::sqrt(v2h1);
  const nlohmann::json base = {{"epsilon", eps}, {"sigma", sigma}, {"nu", nu},       {"lambda", lambda},
                               {"gamma", gamma}, {"tau", tau},     {"I_f", If},      {"I_g", Ig},
                               {"J", J}};
  auto with = [&](nlohmann::json extra) {
    nlohmann::json c = base;
    c.update(extra);
    return c;
  };
  b.registry = {
      {"v_l2", "||v||^2 <= e^{-sigma tau} (2 eps/lambda I_f + 2 eps/gamma I_g)", b.v_l2_bound, base},
      {"u_l2", "||u||^2 <= e^{-sigma tau} (2/lambda I_f + 2/gamma I_g)", b.u_l2_bound, base},
      {"u_h1",
       "||u||_H1^2 <= e^{-sigma tau} {2J/eps + e^{max(kappa,0)} [J/(eps nu) + 4J/(nu sigma) + (2/nu) I_f]}, "
       "kappa = 2C - 2 lambda + sigma",
       b.u_h1_bound,
       with({{"C", h.lower_derivative_bound()}, {"kappa", kappa}, {"gronwall_factor", gronwall}})},
      {"v2_h1", "||v2||_H1^2 <= ||v||^2 bound + e^{-sigma tau} [4J/(gamma nu) + (4 eps/gamma) I_grad_g]",
       b.v2_h1_bound, with({{"I_grad_g", Igg}})},
  };
  return b;
}

inline nlohmann::json bound_registry_json(const BoundSet& b) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : b.registry) {
    arr.push_back({{"name", t.name}, {"formula", t.formula}, {"value", t.value}, {"constants", t.constants}});
  }
  return {{"tau", b.tau}, {"bounds", arr}};
}

struct AbsorptionReport {
  double u_norm = 0.0;
  double v_norm = 0.0;
  bool u_absorbed = true;
  bool v_absorbed = true;

  bool absorbed() const { return u_absorbed && v_absorbed; }
};

inline AbsorptionReport check_absorption(const State& endpoint, const BoundSet& bounds, double slack = 0.05) {
  AbsorptionReport r;
  const Grid& g = endpoint.grid();
  r.u_norm = l2_norm(g, endpoint.u);
  r.v_norm = l2_norm(g, endpoint.v);
  r.u_absorbed = r.u_norm <= bounds.u_l2_bound * (1.0 + slack);
  r.v_absorbed = r.v_norm <= bounds.v_l2_bound * (1.0 + slack);
  return r;
}

// ---------------------------------------------------------------------------
// Tails
// ---------------------------------------------------------------------------

struct TailReport {
  std::vector<double> k_list;
  std::vector<double> sup_tail;  // per k, over samples with t >= window_start
  struct Row {
    double k;
    double t;
    double tail;
  };
  std::vector<Row> rows;
};

inline TailReport tail_report(const Trajectory& tr, const std::vector<double>& k_list, double epsilon,
                              double window_start = -std::numeric_limits<double>::infinity()) {
  TailReport rep;
  if (tr.states.empty()) return rep;
  const Grid& g = tr.states.front().grid();
  for (double k : k_list) {
    if (!(k > 0.0)) throw DomainError("tail radius must be positive");
    if (k > g.half_length()) {
      throw DomainError("tail radius " + format_double(k) + " exceeds the grid half-length " +
                        format_double(g.half_length()));
    }
  }
  rep.k_list = k_list;
  rep.sup_tail.assign(k_list.size(), 0.0);
  for (const State& s : tr.states) {
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      const double m = tail_mass(g, s.u, s.v, k_list[i], epsilon);
      rep.rows.push_back({k_list[i], s.t, m});
      if (s.t >= window_start) rep.sup_tail[i] = std::max(rep.sup_tail[i], m);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

// Columns t,E,u_l2_sq,v_l2_sq,grad_u_sq,residual; the last sample has no
// forward difference and leaves residual empty.
inline void write_energy_csv(const std::string& path, const Trajectory& tr, const ResidualReport& rep,
                             double epsilon) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "t,E,u_l2_sq,v_l2_sq,grad_u_sq,residual\n";
  for (std::size_t j = 0; j < tr.states.size(); ++j) {
    const State& s = tr.states[j];
    const Grid& g = s.grid();
    const double u2 = l2_norm_sq(g, s.u);
    const double v2 = l2_norm_sq(g, s.v);
    os << format_double(s.t) << ',' << format_double(epsilon * u2 + v2) << ',' << format_double(u2) << ','
       << format_double(v2) << ',' << format_double(h1_seminorm_sq(g, s.u)) << ',';
    if (j < rep.residual.size()) os << format_double(rep.residual[j]);
    os << '\n';
  }
}

inline void write_tail_csv(const std::string& path, const TailReport& rep) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "k,t,tail\n";
  for (const auto& r : rep.rows) os << format_double(r.k) << ',' << format_double(r.t) << ',' << format_double(r.tail) << '\n';
}

}  // namespace fhn
