#pragma once

// Parameters, nonlinearity class, forcing families and basin families of the
// non-autonomous FitzHugh-Nagumo system
//
//   u_t - nu*Lap(u) + lambda*u + h(u) + v = f(x, t)
//   v_t - epsilon*(u - gamma*v)          = epsilon*g(x, t)
//
// All types here are immutable after construction.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "fhn/error.hpp"

namespace fhn {

namespace detail {

inline std::string fmt_num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(name) + " must be finite");
  }
}

inline void require_dimension(int dim) {
  if (dim != 1 && dim != 2) {
    throw DomainError("spatial dimension must be 1 or 2, got " + std::to_string(dim));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

class Parameters {
 public:
  // Throws DomainError for non-finite or non-positive inputs and
  // ConstraintError when epsilon > min(1, lambda/gamma).
  static Parameters make(double nu, double lambda, double epsilon, double gamma) {
    detail::require_finite(nu, "nu");
    detail::require_finite(lambda, "lambda");
    detail::require_finite(epsilon, "epsilon");
    detail::require_finite(gamma, "gamma");
    if (nu <= 0.0) throw DomainError("nu must be positive, got " + detail::fmt_num(nu));
    if (lambda <= 0.0) throw DomainError("lambda must be positive, got " + detail::fmt_num(lambda));
    if (epsilon <= 0.0) throw DomainError("epsilon must be positive, got " + detail::fmt_num(epsilon));
    if (gamma <= 0.0) throw DomainError("gamma must be positive, got " + detail::fmt_num(gamma));
    const double ratio = lambda / gamma;
    const double eps0 = std::min(1.0, ratio);
    if (epsilon > eps0) {
      const char* active = ratio < 1.0 ? "lambda/gamma" : "1";
      throw ConstraintError("epsilon exceeds min(1, lambda/gamma): epsilon = " + detail::fmt_num(epsilon) +
                            " > " + detail::fmt_num(eps0) + " (active bound: " + active + ")");
    }
    return Parameters(nu, lambda, epsilon, gamma);
  }

  double nu() const { return nu_; }
  double lambda() const { return lambda_; }
  double epsilon() const { return epsilon_; }
  double gamma() const { return gamma_; }
  double sigma() const { return sigma_; }
  double epsilon0() const { return std::min(1.0, lambda_ / gamma_); }

  Parameters with_epsilon(double epsilon) const { return make(nu_, lambda_, epsilon, gamma_); }

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  Parameters(double nu, double lambda, double epsilon, double gamma)
      : nu_(nu), lambda_(lambda), epsilon_(epsilon), gamma_(gamma), sigma_(epsilon * gamma / 2.0) {}

  double nu_;
  double lambda_;
  double epsilon_;
  double gamma_;
  double sigma_;
};

inline Parameters make_parameters(double nu, double lambda, double epsilon, double gamma) {
  return Parameters::make(nu, lambda, epsilon, gamma);
}

// ---------------------------------------------------------------------------
// Nonlinearity h
// ---------------------------------------------------------------------------

enum class NonlinearityKind { zero, cubic, scaled_cubic, odd_polynomial };

inline const char* to_string(NonlinearityKind k) {
  switch (k) {
    case NonlinearityKind::zero: return "zero";
    case NonlinearityKind::cubic: return "cubic";
    case NonlinearityKind::scaled_cubic: return "scaled_cubic";
    case NonlinearityKind::odd_polynomial: return "odd_polynomial";
  }
  return "?";
}

// Every supported family is an odd polynomial h(s) = sum_k a_k s^(2k+1), so
// h(0) = 0 holds by construction. Admissibility (s*h(s) >= 0, h' >= -C,
// |h'| <= G(1+|s|^r)) is checked on a deterministic sample grid.
class NonlinearitySpec {
 public:
  struct Declared {
    std::optional<double> lower_derivative_bound;
    std::optional<double> growth_constant;
    std::optional<double> growth_exponent;
  };

  static NonlinearitySpec make(NonlinearityKind kind, std::vector<double> odd_coefficients,
                               Declared declared = {}, int dim = 1) {
    detail::require_dimension(dim);
    for (double a : odd_coefficients) detail::require_finite(a, "nonlinearity coefficient");
    while (!odd_coefficients.empty() && odd_coefficients.back() == 0.0) odd_coefficients.pop_back();

    NonlinearitySpec spec(kind, std::move(odd_coefficients));
    spec.growth_exponent_ = declared.growth_exponent.value_or(spec.default_growth_exponent());
    spec.growth_constant_ = declared.growth_constant.value_or(spec.default_growth_constant());
    spec.lower_bound_ = declared.lower_derivative_bound.value_or(spec.sampled_lower_bound());
    spec.validate();
    return spec;
  }

  static NonlinearitySpec zero() { return make(NonlinearityKind::zero, {}); }
  static NonlinearitySpec cubic() { return make(NonlinearityKind::cubic, {0.0, 1.0}); }
  static NonlinearitySpec scaled_cubic(double c) {
    if (!(c > 0.0)) throw DomainError("scaled_cubic requires c > 0, got " + detail::fmt_num(c));
    return make(NonlinearityKind::scaled_cubic, {0.0, c});
  }
  static NonlinearitySpec odd_polynomial(std::vector<double> coefficients, Declared declared = {}) {
    return make(NonlinearityKind::odd_polynomial, std::move(coefficients), declared);
  }

  double value(double s) const {
    const double q = s * s;
    double p = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) p = p * q + *it;
    return s * p;
  }

  double derivative(double s) const {
    // h'(s) = sum_k (2k+1) a_k q^k with q = s^2
    const double q = s * s;
    double p = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) p = p * q + static_cast<double>(2 * k + 1) * coeffs_[k];
    return p;
  }

  std::pair<double, double> eval(double s) const { return {value(s), derivative(s)}; }

  NonlinearityKind kind() const { return kind_; }
  const std::vector<double>& odd_coefficients() const { return coeffs_; }
  double lower_derivative_bound() const { return lower_bound_; }
  double growth_constant() const { return growth_constant_; }
  double growth_exponent() const { return growth_exponent_; }
  bool is_zero() const { return coeffs_.empty(); }

  // Deterministic admissibility sample: dense uniform scan of [-100, 100]
  // plus a geometric cluster around the origin.
  static std::vector<double> sample_points() {
    std::vector<double> s;
    constexpr int n = 20001;
    s.reserve(n + 64);
    for (int i = 0; i < n; ++i) s.push_back(-100.0 + 200.0 * i / (n - 1));
    for (int e = -12; e <= 0; ++e) {
      const double x = std::pow(10.0, e);
      s.push_back(x);
      s.push_back(-x);
      s.push_back(2.5 * x);
      s.push_back(-2.5 * x);
    }
    return s;
  }

 private:
  NonlinearitySpec(NonlinearityKind kind, std::vector<double> coeffs) : kind_(kind), coeffs_(std::move(coeffs)) {}

  double default_growth_exponent() const {
    return coeffs_.empty() ? 0.0 : 2.0 * static_cast<double>(coeffs_.size() - 1);
  }

  double default_growth_constant() const {
    double g = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) g += static_cast<double>(2 * k + 1) * std::abs(coeffs_[k]);
    return g;
  }

  // Scan minimum of h', polished by Brent's method around every interior
  // local minimum of the uniform part of the scan.
  double sampled_lower_bound() const {
    const auto pts = sample_points();
    double lo = 0.0;
    for (double s : pts) lo = std::min(lo, derivative(s));
    constexpr int n = 20001;
    auto f = [this](double s) { return derivative(s); };
    for (int i = 1; i + 1 < n; ++i) {
      const double d = derivative(pts[i]);
      if (d < 0.0 && d <= derivative(pts[i - 1]) && d <= derivative(pts[i + 1])) {
        const auto r = boost::math::tools::brent_find_minima(f, pts[i - 1], pts[i + 1], std::numeric_limits<double>::digits / 2);
        lo = std::min(lo, r.second);
      }
    }
    return -lo;
  }

  void validate() const {
    if (!(lower_bound_ >= 0.0) || !std::isfinite(lower_bound_)) {
      throw DomainError("lower_derivative_bound must be finite and >= 0");
    }
    if (!(growth_constant_ >= 0.0) || !std::isfinite(growth_constant_)) {
      throw DomainError("growth_constant must be finite and >= 0");
    }
    if (!(growth_exponent_ >= 0.0) || !std::isfinite(growth_exponent_)) {
      throw DomainError("growth_exponent must be finite and >= 0");
    }
    constexpr double rel = 1e-12;
    for (double s : sample_points()) {
      const double h = value(s);
      const double dh = derivative(s);
      if (!std::isfinite(h) || !std::isfinite(dh)) {
        throw ConstraintError("nonlinearity is not finite at s = " + detail::fmt_num(s));
      }
      if (s * h < 0.0) {
        throw ConstraintError("nonlinearity violates s*h(s) >= 0 at s = " + detail::fmt_num(s));
      }
      if (dh < -lower_bound_ * (1.0 + rel) - 1e-300) {
        throw ConstraintError("nonlinearity violates h'(s) >= -C at s = " + detail::fmt_num(s) +
                              " (h' = " + detail::fmt_num(dh) + ", C = " + detail::fmt_num(lower_bound_) + ")");
      }
      const double cap = growth_constant_ * (1.0 + std::pow(std::abs(s), growth_exponent_));
      if (std::abs(dh) > cap * (1.0 + rel)) {
        throw ConstraintError("nonlinearity violates |h'(s)| <= C(1+|s|^r) at s = " + detail::fmt_num(s));
      }
    }
  }

  NonlinearityKind kind_;
  std::vector<double> coeffs_;
  double lower_bound_ = 0.0;
  double growth_constant_ = 0.0;
  double growth_exponent_ = 0.0;
};

inline std::pair<double, double> eval_nonlinearity(const NonlinearitySpec& spec, double s) { return spec.eval(s); }

// ---------------------------------------------------------------------------
// Forcing a(t) * w(x)
// ---------------------------------------------------------------------------

enum class TimeProfileKind { constant, sqrt_abs_t, exp_sigma_frac, sinusoidal };
enum class SpaceProfileKind { gaussian, compact_bump };
enum class ForcingRole { f, g };

inline const char* to_string(TimeProfileKind k) {
  switch (k) {
    case TimeProfileKind::constant: return "constant";
    case TimeProfileKind::sqrt_abs_t: return "sqrt_abs_t";
    case TimeProfileKind::exp_sigma_frac: return "exp_sigma_frac";
    case TimeProfileKind::sinusoidal: return "sinusoidal";
  }
  return "?";
}

inline const char* to_string(SpaceProfileKind k) {
  switch (k) {
    case SpaceProfileKind::gaussian: return "gaussian";
    case SpaceProfileKind::compact_bump: return "compact_bump";
  }
  return "?";
}

inline const char* to_string(ForcingRole r) { return r == ForcingRole::f ? "f" : "g"; }

// Time factor a(t). The exp family is e^{c*sigma*|t|}, so it depends on the
// decay rate sigma of the parameter set it is paired with.
class TimeProfile {
 public:
  static TimeProfile constant(double value = 1.0) {
    detail::require_finite(value, "constant time profile value");
    return TimeProfile(TimeProfileKind::constant, value, 0.0, 0.0);
  }
  static TimeProfile sqrt_abs_t() { return TimeProfile(TimeProfileKind::sqrt_abs_t, 0.0, 0.0, 0.0); }
  static TimeProfile exp_sigma_frac(double c) {
    detail::require_finite(c, "exp_sigma_frac c");
    if (!(c > 0.0)) throw DomainError("exp_sigma_frac requires c > 0, got " + detail::fmt_num(c));
    return TimeProfile(TimeProfileKind::exp_sigma_frac, c, 0.0, 0.0);
  }
  static TimeProfile sinusoidal(double amplitude, double frequency) {
    detail::require_finite(amplitude, "sinusoidal amplitude");
    detail::require_finite(frequency, "sinusoidal frequency");
    return TimeProfile(TimeProfileKind::sinusoidal, amplitude, frequency, 0.0);
  }

  TimeProfileKind kind() const { return kind_; }
  // constant: value; exp_sigma_frac: c; sinusoidal: amplitude.
  double p0() const { return p0_; }
  // sinusoidal: frequency.
  double p1() const { return p1_; }

  double value(double t, double sigma) const {
    switch (kind_) {
      case TimeProfileKind::constant: return p0_;
      case TimeProfileKind::sqrt_abs_t: return std::sqrt(std::abs(t));
      case TimeProfileKind::exp_sigma_frac: return std::exp(p0_ * sigma * std::abs(t));
      case TimeProfileKind::sinusoidal: return p0_ * std::sin(p1_ * t);
    }
    return 0.0;
  }

  bool bounded() const { return kind_ == TimeProfileKind::constant || kind_ == TimeProfileKind::sinusoidal; }

  // The exp family is square-integrable against e^{sigma*xi} on (-inf, tau]
  // iff 2c < 1; every other family is admissible for any sigma > 0.
  bool admissible() const { return kind_ != TimeProfileKind::exp_sigma_frac || p0_ < 0.5; }

  // int_{-inf}^{tau} e^{sigma xi} a(xi)^2 d xi in closed form.
  double history_integral(double sigma, double tau) const {
    if (!(sigma > 0.0)) throw DomainError("history integral requires sigma > 0");
    switch (kind_) {
      case TimeProfileKind::constant:
        return p0_ * p0_ * std::exp(sigma * tau) / sigma;
      case TimeProfileKind::sqrt_abs_t: {
        const double s2 = sigma * sigma;
        if (tau <= 0.0) return std::exp(sigma * tau) * (1.0 / s2 - tau / sigma);
        return 2.0 / s2 + std::exp(sigma * tau) * (tau / sigma - 1.0 / s2);
      }
      case TimeProfileKind::exp_sigma_frac: {
        const double c = p0_;
        if (!admissible()) {
          throw DivergenceError("history integral of e^{c sigma |t|} diverges for c >= 1/2 (c = " +
                                detail::fmt_num(c) + ")");
        }
        const double lo = (1.0 - 2.0 * c) * sigma;
        if (tau <= 0.0) return std::exp(lo * tau) / lo;
        const double hi = (1.0 + 2.0 * c) * sigma;
        return 1.0 / lo + std::expm1(hi * tau) / hi;
      }
      case TimeProfileKind::sinusoidal: {
        const double w2 = 2.0 * p1_;
        const double e = std::exp(sigma * tau);
        const double osc = e * (sigma * std::cos(w2 * tau) + w2 * std::sin(w2 * tau)) / (sigma * sigma + w2 * w2);
        return 0.5 * p0_ * p0_ * (e / sigma - osc);
      }
    }
    return 0.0;
  }

  // Same integral by adaptive quadrature: exp-sinh on the half line up to
  // min(tau, 0), Gauss-Kronrod on [0, tau] when tau > 0.
  double history_integral_numeric(double sigma, double tau) const {
    if (!(sigma > 0.0)) throw DomainError("history integral requires sigma > 0");
    if (!admissible()) {
      throw DivergenceError("history integral of e^{c sigma |t|} diverges for c >= 1/2");
    }
    const double head = std::min(tau, 0.0);
    auto body = [&](double xi) {
      const double a = value(xi, sigma);
      return std::exp(sigma * xi) * a * a;
    };
    // The weighted integrand decays like e^{(1-2c) sigma xi}; past 60 e-folds
    // the remainder is below double precision. Chunking keeps oscillatory
    // profiles resolved where a single half-line map would not.
    const double c = kind_ == TimeProfileKind::exp_sigma_frac ? p0_ : 0.0;
    const double cut = 60.0 / ((1.0 - 2.0 * c) * sigma);
    const int chunks = static_cast<int>(std::ceil(cut / 2.0));
    const double h = cut / chunks;
    double total = 0.0;
    for (int i = 0; i < chunks; ++i) {
      const double a = head - cut + i * h;
      total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(body, a, a + h, 10, 1e-13);
    }
    if (tau > 0.0) {
      total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(body, 0.0, tau, 20, 1e-13);
    }
    return total;
  }

  friend bool operator==(const TimeProfile&, const TimeProfile&) = default;

 private:
  TimeProfile(TimeProfileKind kind, double p0, double p1, double p2) : kind_(kind), p0_(p0), p1_(p1), p2_(p2) {}

  TimeProfileKind kind_;
  double p0_;
  double p1_;
  double p2_;
};

// Spatial factor w(x), radially symmetric; closed-form norms on R^n, n = 1, 2.
//   gaussian:     A exp(-|x|^2 / width^2)
//   compact_bump: A (1 - |x|^2 / R^2)^2 for |x| < R, 0 outside (C^1, in H^1)
class SpaceProfile {
 public:
  static SpaceProfile gaussian(double amplitude, double width) {
    detail::require_finite(amplitude, "gaussian amplitude");
    detail::require_finite(width, "gaussian width");
    if (!(width > 0.0)) throw DomainError("gaussian width must be positive");
    return SpaceProfile(SpaceProfileKind::gaussian, amplitude, width);
  }
  static SpaceProfile compact_bump(double amplitude, double radius) {
    detail::require_finite(amplitude, "bump amplitude");
    detail::require_finite(radius, "bump radius");
    if (!(radius > 0.0)) throw DomainError("bump radius must be positive");
    return SpaceProfile(SpaceProfileKind::compact_bump, amplitude, radius);
  }

  SpaceProfileKind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  // width for gaussian, radius for compact_bump
  double scale() const { return scale_; }

  double value_at_radius_sq(double r2) const {
    if (kind_ == SpaceProfileKind::gaussian) return amplitude_ * std::exp(-r2 / (scale_ * scale_));
    const double q = r2 / (scale_ * scale_);
    if (q >= 1.0) return 0.0;
    const double b = 1.0 - q;
    return amplitude_ * b * b;
  }

  double norm_sq(int dim) const {
    detail::require_dimension(dim);
    const double a2 = amplitude_ * amplitude_;
    const double w = scale_;
    if (kind_ == SpaceProfileKind::gaussian) return a2 * std::pow(std::numbers::pi * w * w / 2.0, dim / 2.0);
    return dim == 1 ? a2 * 256.0 * w / 315.0 : a2 * std::numbers::pi * w * w / 5.0;
  }

  double grad_norm_sq(int dim) const {
    detail::require_dimension(dim);
    const double a2 = amplitude_ * amplitude_;
    const double w = scale_;
    if (kind_ == SpaceProfileKind::gaussian) return norm_sq(dim) * dim / (w * w);
    return dim == 1 ? a2 * 256.0 / (105.0 * w) : a2 * 4.0 * std::numbers::pi / 3.0;
  }

  // int_{|x| >= k} |w|^2 dx
  double tail_norm_sq(double k, int dim) const {
    detail::require_dimension(dim);
    if (k <= 0.0) return norm_sq(dim);
    const double a2 = amplitude_ * amplitude_;
    const double w = scale_;
    if (kind_ == SpaceProfileKind::gaussian) {
      if (dim == 1) return a2 * w * std::sqrt(std::numbers::pi / 2.0) * std::erfc(std::sqrt(2.0) * k / w);
      return a2 * std::numbers::pi * w * w / 2.0 * std::exp(-2.0 * k * k / (w * w));
    }
    if (k >= w) return 0.0;
    if (dim == 1) {
      auto prim = [](double s) {
        const double s2 = s * s;
        return s * (1.0 + s2 * (-4.0 / 3.0 + s2 * (6.0 / 5.0 + s2 * (-4.0 / 7.0 + s2 / 9.0))));
      };
      return 2.0 * a2 * w * (prim(1.0) - prim(k / w));
    }
    const double q0 = (k * k) / (w * w);
    return a2 * std::numbers::pi * w * w * std::pow(1.0 - q0, 5) / 5.0;
  }

  bool in_h1() const { return true; }

  friend bool operator==(const SpaceProfile&, const SpaceProfile&) = default;

 private:
  SpaceProfile(SpaceProfileKind kind, double amplitude, double scale)
      : kind_(kind), amplitude_(amplitude), scale_(scale) {}

  SpaceProfileKind kind_;
  double amplitude_;
  double scale_;
};

class ForcingSpec {
 public:
  static ForcingSpec make(TimeProfile time, SpaceProfile space, ForcingRole role) {
    if (role == ForcingRole::g && !space.in_h1()) {
      throw ConstraintError("forcing g requires an H^1 space profile");
    }
    return ForcingSpec(time, space, role);
  }

  static ForcingSpec none(ForcingRole role) {
    return ForcingSpec(TimeProfile::constant(0.0), SpaceProfile::gaussian(0.0, 1.0), role);
  }

  const TimeProfile& time_profile() const { return time_; }
  const SpaceProfile& space_profile() const { return space_; }
  ForcingRole role() const { return role_; }
  bool is_zero() const {
    return space_.amplitude() == 0.0 || (time_.kind() == TimeProfileKind::constant && time_.p0() == 0.0) ||
           (time_.kind() == TimeProfileKind::sinusoidal && time_.p0() == 0.0);
  }

  double time_factor(double t, double sigma) const { return time_.value(t, sigma); }

  // ||f(t)||^2 = a(t)^2 ||w||^2 on R^n
  double norm_sq(double t, double sigma, int dim) const {
    const double a = time_factor(t, sigma);
    return a * a * space_.norm_sq(dim);
  }

  double history_integral(double sigma, double tau, int dim) const {
    if (is_zero()) return 0.0;
    return time_.history_integral(sigma, tau) * space_.norm_sq(dim);
  }

  double history_integral_numeric(double sigma, double tau, int dim) const {
    if (is_zero()) return 0.0;
    return time_.history_integral_numeric(sigma, tau) * space_.norm_sq(dim);
  }

  // int_{-inf}^{tau} e^{sigma xi} ||grad f(xi)||^2 d xi
  double grad_history_integral(double sigma, double tau, int dim) const {
    if (is_zero()) return 0.0;
    return time_.history_integral(sigma, tau) * space_.grad_norm_sq(dim);
  }

  friend bool operator==(const ForcingSpec&, const ForcingSpec&) = default;

 private:
  ForcingSpec(TimeProfile time, SpaceProfile space, ForcingRole role) : time_(time), space_(space), role_(role) {}

  TimeProfile time_;
  SpaceProfile space_;
  ForcingRole role_;
};

inline double forcing_history_integral(const ForcingSpec& spec, double sigma, double tau, int dim = 1) {
  return spec.history_integral(sigma, tau, dim);
}

// ---------------------------------------------------------------------------
// Basin families D(t) with ||D(t)|| = A e^{beta t}
// ---------------------------------------------------------------------------

class BasinFamily {
 public:
  // Membership in D_sigma: e^{sigma t} ||D(t)||^2 -> 0 as t -> -inf,
  // i.e. sigma + 2 beta > 0.
  static bool in_collection(double backward_rate, double sigma) { return sigma + 2.0 * backward_rate > 0.0; }

  static BasinFamily make(double amplitude, double backward_rate, double sigma) {
    detail::require_finite(amplitude, "basin amplitude");
    detail::require_finite(backward_rate, "basin backward_rate");
    if (amplitude < 0.0) throw DomainError("basin amplitude must be >= 0");
    if (!in_collection(backward_rate, sigma)) {
      throw ConstraintError("basin family not in D_sigma: sigma + 2*beta = " +
                            detail::fmt_num(sigma + 2.0 * backward_rate) + " <= 0");
    }
    return BasinFamily(amplitude, backward_rate);
  }

  double amplitude() const { return amplitude_; }
  double backward_rate() const { return backward_rate_; }
  double radius(double t) const { return amplitude_ * std::exp(backward_rate_ * t); }

  friend bool operator==(const BasinFamily&, const BasinFamily&) = default;

 private:
  BasinFamily(double amplitude, double backward_rate) : amplitude_(amplitude), backward_rate_(backward_rate) {}

  double amplitude_;
  double backward_rate_;
};

// Everything the evolution needs besides the grid and the step rule.
struct Model {
  Parameters params;
  NonlinearitySpec h;
  ForcingSpec f;
  ForcingSpec g;
};

}  // namespace fhn
