#include <cmath>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "fhn/grid.hpp"
#include "fhn/model.hpp"
#include "oracles.hpp"

using namespace fhn;

TEST(Parameters, AcceptsAdmissibleSetAndCachesSigma) {
  const auto p = make_parameters(1.0, 1.0, 0.5, 1.0);
  EXPECT_EQ(p.sigma(), 0.25);
  EXPECT_EQ(p.epsilon0(), 1.0);
}

TEST(Parameters, EpsilonAboveOneIsRejected) {
  try {
    make_parameters(1.0, 1.0, 2.0, 1.0);
    FAIL() << "expected ConstraintError";
  } catch (const ConstraintError& e) {
    EXPECT_NE(std::string(e.what()).find("epsilon exceeds min(1, lambda/gamma)"), std::string::npos);
  }
}

TEST(Parameters, RatioBoundIsTheActiveOne) {
  const auto p = make_parameters(1.0, 2.0, 0.1, 4.0);
  EXPECT_DOUBLE_EQ(p.sigma(), 0.2);
  EXPECT_DOUBLE_EQ(p.epsilon0(), 0.5);
  EXPECT_THROW(make_parameters(1.0, 2.0, 0.6, 4.0), ConstraintError);
  EXPECT_NO_THROW(make_parameters(1.0, 2.0, 0.5, 4.0));
}

TEST(Parameters, NonPositiveOrNonFiniteInputsAreDomainErrors) {
  EXPECT_THROW(make_parameters(0.0, 1.0, 0.1, 1.0), DomainError);
  EXPECT_THROW(make_parameters(1.0, -1.0, 0.1, 1.0), DomainError);
  EXPECT_THROW(make_parameters(1.0, 1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(make_parameters(1.0, 1.0, 0.1, 0.0), DomainError);
  EXPECT_THROW(make_parameters(NAN, 1.0, 0.1, 1.0), DomainError);
  EXPECT_THROW(make_parameters(1.0, INFINITY, 0.1, 1.0), DomainError);
}

TEST(Parameters, SigmaIsExactProductOverTwo) {
  for (double eps : {0.01, 0.037, 0.1, 0.33}) {
    for (double gamma : {0.5, 1.0, 1.7}) {
      const auto p = make_parameters(1.0, 2.0, eps, gamma);
      EXPECT_EQ(p.sigma(), eps * gamma / 2.0);
    }
  }
}

TEST(Nonlinearity, CubicAndZeroValues) {
  const auto cubic = NonlinearitySpec::cubic();
  EXPECT_EQ(eval_nonlinearity(cubic, 2.0), std::make_pair(8.0, 12.0));
  EXPECT_EQ(eval_nonlinearity(cubic, 0.0), std::make_pair(0.0, 0.0));
  EXPECT_EQ(eval_nonlinearity(NonlinearitySpec::zero(), 7.3), std::make_pair(0.0, 0.0));
  EXPECT_EQ(cubic.growth_exponent(), 2.0);
  EXPECT_EQ(cubic.lower_derivative_bound(), 0.0);
}

TEST(Nonlinearity, DerivativeMatchesCentralDifference) {
  const auto q = NonlinearitySpec::odd_polynomial({0.3, -1.0, 1.0});
  for (double s : {-2.3, -0.7, 0.0, 0.4, 1.9}) {
    const double h = 1e-5;
    const double fd = (q.value(s + h) - q.value(s - h)) / (2 * h);
    EXPECT_NEAR(q.derivative(s), fd, 1e-7 * (1 + std::abs(fd)));
  }
  const auto sc = NonlinearitySpec::scaled_cubic(2.5);
  EXPECT_DOUBLE_EQ(sc.value(2.0), 20.0);
  EXPECT_DOUBLE_EQ(sc.derivative(2.0), 30.0);
}

TEST(Nonlinearity, SignConditionViolationsAreRejected) {
  EXPECT_THROW(NonlinearitySpec::odd_polynomial({-1.0}), ConstraintError);
  EXPECT_THROW(NonlinearitySpec::odd_polynomial({1.0, -1.0}), ConstraintError);
  EXPECT_THROW(NonlinearitySpec::scaled_cubic(-1.0), DomainError);
}

TEST(Nonlinearity, DeclaredLowerBoundIsChecked) {
  // h = s^5 - s^3 + 0.3 s: s h >= 0 but min h' = -0.15 at s^2 = 0.3.
  const std::vector<double> c = {0.3, -1.0, 1.0};
  const auto sampled = NonlinearitySpec::odd_polynomial(c);
  EXPECT_NEAR(sampled.lower_derivative_bound(), 0.15, 1e-6);
  EXPECT_THROW(NonlinearitySpec::odd_polynomial(c, {.lower_derivative_bound = 0.1}), ConstraintError);
  EXPECT_NO_THROW(NonlinearitySpec::odd_polynomial(c, {.lower_derivative_bound = 0.2}));
}

TEST(Nonlinearity, DeclaredGrowthIsChecked) {
  EXPECT_THROW(NonlinearitySpec::make(NonlinearityKind::cubic, {0.0, 1.0}, {.growth_constant = 1.0}), ConstraintError);
  EXPECT_THROW(NonlinearitySpec::make(NonlinearityKind::cubic, {0.0, 1.0}, {.growth_exponent = 1.0}), ConstraintError);
  EXPECT_NO_THROW(NonlinearitySpec::make(NonlinearityKind::cubic, {0.0, 1.0}, {.growth_constant = 3.0}));
}

TEST(Nonlinearity, DimensionThreeIsRejected) {
  EXPECT_THROW(NonlinearitySpec::make(NonlinearityKind::cubic, {0.0, 1.0}, {}, 3), DomainError);
  EXPECT_NO_THROW(NonlinearitySpec::make(NonlinearityKind::cubic, {0.0, 1.0}, {}, 2));
}

TEST(NonlinearityProperty, AcceptedSpecsSatisfySignConditionOnDenseScan) {
  const NonlinearitySpec specs[] = {NonlinearitySpec::zero(), NonlinearitySpec::cubic(), NonlinearitySpec::scaled_cubic(0.1),
                                    NonlinearitySpec::odd_polynomial({0.3, -1.0, 1.0}),
                                    NonlinearitySpec::odd_polynomial({1.0, 0.0, 0.0, 2.0})};
  for (const auto& h : specs) {
    EXPECT_EQ(h.value(0.0), 0.0);
    for (int i = 0; i <= 200000; ++i) {
      const double s = -100.0 + 200.0 * i / 200000.0;
      ASSERT_GE(s * h.value(s), 0.0) << "s = " << s;
      ASSERT_GE(h.derivative(s), -h.lower_derivative_bound() * (1 + 1e-12)) << "s = " << s;
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Forcing, ValueExamples) {
  const auto g = Grid::make(1, 20.0, 400);
  const double sigma = 0.05;
  const auto w = SpaceProfile::gaussian(1.0, 1.0);

  const auto sq = ForcingSpec::make(TimeProfile::sqrt_abs_t(), w, ForcingRole::f);
  for (double x : forcing_value(sq, 0.0, g, sigma).values) EXPECT_EQ(x, 0.0);

  const auto cst = ForcingSpec::make(TimeProfile::constant(), w, ForcingRole::f);
  EXPECT_EQ(forcing_value(cst, 5.0, g, sigma).values, forcing_value(cst, -5.0, g, sigma).values);

  const auto ex = ForcingSpec::make(TimeProfile::exp_sigma_frac(0.25), w, ForcingRole::g);
  const auto base = sample_space_profile(w, g);
  for (double t : {-7.0, 3.0}) {
    const auto f = forcing_value(ex, t, g, sigma);
    const double scale = std::exp(sigma * std::abs(t) / 4.0);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(f[i], scale * base[i], 1e-15 * scale);
  }
}

TEST(Forcing, HistoryIntegralExamples) {
  const auto w1 = SpaceProfile::gaussian(1.0, std::sqrt(2.0 / std::numbers::pi));  // ||w||^2 = 1 in 1-D
  ASSERT_NEAR(w1.norm_sq(1), 1.0, 1e-14);
  const auto sq = ForcingSpec::make(TimeProfile::sqrt_abs_t(), w1, ForcingRole::f);
  EXPECT_NEAR(forcing_history_integral(sq, 0.1, 0.0), 100.0, 1e-12);
  const auto cst = ForcingSpec::make(TimeProfile::constant(), w1, ForcingRole::f);
  EXPECT_NEAR(forcing_history_integral(cst, 0.5, 0.0), 2.0, 1e-14);
}

TEST(Forcing, ExpHistoryAgainstQuadratureOracle) {
  // a(t) = e^{sigma |t| / 4}, so the integrand is e^{sigma xi} e^{-sigma xi / 2} on xi < 0.
  const double sigma = 0.2, tau = -3.0;
  const TimeProfile tp = TimeProfile::exp_sigma_frac(0.25);
  const double expected = 10.0 * std::exp(-0.3);
  EXPECT_NEAR(tp.history_integral(sigma, tau), expected, 1e-12);
  const double q = oracle::simpson_half_line([&](double xi) { return std::exp(sigma * xi) * std::exp(-sigma * xi / 2.0); }, tau);
  EXPECT_NEAR(q, expected, 1e-8 * expected);
  EXPECT_NEAR(tp.history_integral(sigma, tau), 7.40818, 1e-5);
}

TEST(Forcing, DivergentExpProfileIsReported) {
  EXPECT_THROW(TimeProfile::exp_sigma_frac(0.5).history_integral(0.1, 0.0), DivergenceError);
  EXPECT_THROW(TimeProfile::exp_sigma_frac(1.0).history_integral(0.1, 0.0), DivergenceError);
  EXPECT_THROW(TimeProfile::exp_sigma_frac(1.5).history_integral_numeric(0.1, 0.0), DivergenceError);
  EXPECT_THROW(TimeProfile::exp_sigma_frac(0.0), DomainError);
}

namespace {

std::vector<TimeProfile> all_time_profiles() {
  return {TimeProfile::constant(1.3), TimeProfile::sqrt_abs_t(), TimeProfile::exp_sigma_frac(0.25),
          TimeProfile::exp_sigma_frac(0.45), TimeProfile::sinusoidal(0.7, 1.1), TimeProfile::sinusoidal(2.0, 0.2)};
}

}  // namespace

TEST(Forcing, ClosedFormMatchesBoostFallbackAndSimpsonOracle) {
  for (const auto& tp : all_time_profiles()) {
    for (double sigma : {0.05, 0.2, 0.5}) {
      for (double tau : {-12.0, -1.5, 0.0, 0.7, 6.0}) {
        const double closed = tp.history_integral(sigma, tau);
        const double boost_q = tp.history_integral_numeric(sigma, tau);
        EXPECT_NEAR(boost_q, closed, 1e-8 * std::abs(closed))
            << to_string(tp.kind()) << " sigma=" << sigma << " tau=" << tau;
        auto integrand = [&](double xi) {
          const double a = tp.value(xi, sigma);
          return std::exp(sigma * xi) * a * a;
        };
        // e^{sigma xi} a(xi)^2 decays at least like e^{(1-2c) sigma xi}; cut
        // the half-line where the remainder is far below the tolerance.
        const double c = tp.kind() == TimeProfileKind::exp_sigma_frac ? tp.p0() : 0.0;
        const double cut = 60.0 / ((1.0 - 2.0 * c) * sigma);
        const double head = std::min(tau, 0.0);
        double ref = oracle::simpson(integrand, head - cut, head, 1e-10 * std::max(1.0, std::abs(closed)), 4096);
        if (tau > 0.0) ref += oracle::simpson(integrand, 0.0, tau, 1e-13);
        EXPECT_NEAR(ref, closed, 1e-8 * std::abs(closed)) << to_string(tp.kind()) << " sigma=" << sigma << " tau=" << tau;
      }
    }
  }
}

TEST(ForcingProperty, HistoryIntegralIsNondecreasingInTau) {
  for (const auto& tp : all_time_profiles()) {
    const double sigma = 0.1;
    double prev = tp.history_integral(sigma, -60.0);
    for (double tau = -60.0; tau <= 30.0; tau += 0.05) {
      const double cur = tp.history_integral(sigma, tau);
      ASSERT_GE(cur, prev * (1 - 1e-13)) << to_string(tp.kind()) << " tau=" << tau;
      prev = cur;
    }
  }
}

namespace {

double grid_norm_error(const SpaceProfile& w, int dim, double L, int m) {
  const auto g = Grid::make(dim, L, m);
  return std::abs(l2_norm_sq(g, sample_space_profile(w, g)) - w.norm_sq(dim)) / w.norm_sq(dim);
}

}  // namespace

TEST(ForcingProperty, ClosedFormNormMatchesGridQuadrature) {
  const SpaceProfile profiles[] = {SpaceProfile::gaussian(1.0, 2.0), SpaceProfile::gaussian(0.5, 1.0),
                                   SpaceProfile::compact_bump(1.0, 3.0), SpaceProfile::compact_bump(2.0, 1.5)};
  for (const auto& w : profiles) {
    EXPECT_LT(grid_norm_error(w, 1, 20.0, 400), 1e-3);
    EXPECT_LT(grid_norm_error(w, 2, 10.0, 100), 1e-3);
    const auto ft = ForcingSpec::make(TimeProfile::sinusoidal(1.5, 1.0), w, ForcingRole::f);
    const auto g = Grid::make(1, 20.0, 400);
    const double t = 0.8;
    EXPECT_NEAR(l2_norm_sq(g, forcing_value(ft, t, g, 0.1)), ft.norm_sq(t, 0.1, 1), 1e-3 * ft.norm_sq(t, 0.1, 1));
  }
}

TEST(ForcingProperty, GridQuadratureConvergesAtLeastSecondOrder) {
  // Coarse grids so the quadrature error is visible above round-off;
  // m+1 doubles, so dx halves.
  const SpaceProfile profiles[] = {SpaceProfile::compact_bump(1.0, 3.0), SpaceProfile::gaussian(1.0, 0.6)};
  for (const auto& w : profiles) {
    for (int dim : {1, 2}) {
      for (int m : {15, 31}) {
        const double e1 = grid_norm_error(w, dim, 4.0, m);
        const double e2 = grid_norm_error(w, dim, 4.0, 2 * m + 1);
        if (e1 < 1e-13) continue;
        EXPECT_TRUE(e2 <= e1 / 3.0 || e2 < 1e-13)
            << to_string(w.kind()) << " dim=" << dim << " m=" << m << " e1=" << e1 << " e2=" << e2;
      }
    }
  }
}

TEST(Forcing, GradientAndTailClosedFormsAgainstQuadrature) {
  const SpaceProfile profiles[] = {SpaceProfile::gaussian(1.3, 2.0), SpaceProfile::compact_bump(0.8, 3.0)};
  for (const auto& w : profiles) {
    const double s = w.scale();
    const double a = w.amplitude();
    // 1-D radial profile and its derivative.
    auto val = [&](double x) { return w.value_at_radius_sq(x * x); };
    auto dval = [&](double x) {
      if (w.kind() == SpaceProfileKind::gaussian) return -2.0 * x / (s * s) * val(x);
      if (std::abs(x) >= s) return 0.0;
      return a * 2.0 * (1.0 - x * x / (s * s)) * (-2.0 * x / (s * s));
    };
    const double lim = 12.0 * s;
    EXPECT_NEAR(oracle::simpson([&](double x) { return val(x) * val(x); }, -lim, lim), w.norm_sq(1), 1e-9 * w.norm_sq(1));
    EXPECT_NEAR(oracle::simpson([&](double x) { return dval(x) * dval(x); }, -lim, lim), w.grad_norm_sq(1),
                1e-9 * w.grad_norm_sq(1));
    // 2-D radial: int 2 pi r f(r)^2 dr
    EXPECT_NEAR(oracle::simpson([&](double r) { return 2 * std::numbers::pi * r * val(r) * val(r); }, 0.0, lim),
                w.norm_sq(2), 1e-9 * w.norm_sq(2));
    EXPECT_NEAR(oracle::simpson([&](double r) { return 2 * std::numbers::pi * r * dval(r) * dval(r); }, 0.0, lim),
                w.grad_norm_sq(2), 1e-9 * w.grad_norm_sq(2));
    for (double k : {0.5 * s, 0.9 * s, 2.0 * s}) {
      const double t1 = 2.0 * oracle::simpson([&](double x) { return val(x) * val(x); }, k, lim);
      EXPECT_NEAR(w.tail_norm_sq(k, 1), t1, 1e-9 * w.norm_sq(1));
      const double t2 = oracle::simpson([&](double r) { return 2 * std::numbers::pi * r * val(r) * val(r); }, k, lim);
      EXPECT_NEAR(w.tail_norm_sq(k, 2), t2, 1e-9 * w.norm_sq(2));
    }
  }
}

TEST(Forcing, ZeroForcingHasZeroHistory) {
  const auto none = ForcingSpec::none(ForcingRole::g);
  EXPECT_TRUE(none.is_zero());
  EXPECT_EQ(none.history_integral(0.1, 3.0, 1), 0.0);
  EXPECT_EQ(none.grad_history_integral(0.1, 3.0, 2), 0.0);
}

// ---------------------------------------------------------------------------

TEST(Basin, AcceptanceIffSigmaPlusTwoBetaPositive) {
  const double sigma = 0.1;
  EXPECT_NO_THROW(BasinFamily::make(1.0, -0.04, sigma));
  EXPECT_NO_THROW(BasinFamily::make(1.0, 0.3, sigma));
  EXPECT_THROW(BasinFamily::make(1.0, -0.05, sigma), ConstraintError);
  EXPECT_THROW(BasinFamily::make(1.0, -0.06, sigma), ConstraintError);
  for (double beta = -0.2; beta <= 0.2; beta += 0.00625) {
    EXPECT_EQ(BasinFamily::in_collection(beta, sigma), sigma + 2 * beta > 0.0) << beta;
  }
  EXPECT_THROW(BasinFamily::make(-1.0, 0.0, sigma), DomainError);
}

TEST(Basin, RadiusFollowsExponentialFamily) {
  const auto b = BasinFamily::make(3.0, -0.02, 0.1);
  EXPECT_DOUBLE_EQ(b.radius(0.0), 3.0);
  EXPECT_DOUBLE_EQ(b.radius(-50.0), 3.0 * std::exp(1.0));
  // e^{sigma t} ||D(t)||^2 -> 0 backward in time
  EXPECT_LT(std::exp(0.1 * -2000.0) * b.radius(-2000.0) * b.radius(-2000.0), 1e-30);
}
