#include <cmath>

#include <gtest/gtest.h>

#include "fhn/epsilon_study.hpp"

using namespace fhn;

namespace {

SweepBase small_base() {
  SweepBase b;
  b.grid = Grid::make(1, 10.0, 60);
  b.step = StepConfig::make(0.02);
  b.depths_relax = {2.0, 3.0};
  b.bundle_size = 3;
  b.seed = 5;
  return b;
}

std::vector<double> power_law(const std::vector<double>& eps, double p) {
  std::vector<double> out;
  for (double e : eps) out.push_back(3.0 * std::pow(e, -p));
  return out;
}

}  // namespace

TEST(Blowup, Examples) {
  const auto p = Parameters::make(1.0, 1.0, 0.1, 1.0);
  EXPECT_NEAR(blowup_bound(p, 1.0, 1.0), 160.0, 1e-12);
  EXPECT_EQ(blowup_bound(p, 0.0, 0.0), 0.0);
}

TEST(Trend, SyntheticSlopes) {
  const std::vector<double> eps = {0.05, 0.1, 0.2, 0.4};
  const auto flat = fit_trend(eps, {2.0, 2.0, 2.0, 2.0});
  EXPECT_NEAR(flat.slope, 0.0, 1e-12);
  EXPECT_TRUE(flat.uniform);
  const auto inv = fit_trend(eps, power_law(eps, 1.0));
  EXPECT_NEAR(inv.slope, 1.0, 1e-12);
  EXPECT_FALSE(inv.uniform);
  const auto half = fit_trend(eps, power_law(eps, 0.5));
  EXPECT_NEAR(half.slope, 0.5, 1e-12);
  EXPECT_FALSE(half.uniform);
  // Large spread alone fails even with no trend.
  EXPECT_FALSE(fit_trend(eps, {1.0, 10.0, 1.0, 1.0}).uniform);
}

TEST(Trend, Errors) {
  EXPECT_THROW(fit_trend({0.1, 0.2}, {1.0, 1.0}), InsufficientData);
  EXPECT_THROW(fit_trend({0.1, 0.1, 0.1}, {1.0, 2.0, 3.0}), InsufficientData);
  EXPECT_THROW(fit_trend({0.1, 0.2, 0.3}, {1.0, 2.0}), ConstraintError);
  EXPECT_THROW(fit_trend({0.1, 0.2, 0.3}, {1.0, 0.0, 3.0}), DomainError);
}

TEST(Sweep, DepthsAreInRelaxationUnitsOnTheStepGrid) {
  const auto b = small_base();
  const auto d = sweep_depths(b, 0.3);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_NEAR(d[0], 2.0 / 0.3, 0.5 * b.step.dt);
  const double q = d[0] / b.step.dt;
  EXPECT_NEAR(q, std::round(q), 1e-9);
}

TEST(Sweep, SingletonMatchesDirectPullback) {
  const auto b = small_base();
  const double eps = 0.5;
  const auto r = run_sweep({eps}, SweepScenario::bounded, b);
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_TRUE(r.records[0].ok) << r.records[0].error;

  const Model m = sweep_model(b, SweepScenario::bounded, eps);
  const SamplerSpec sp{InitialSampling::basin, BasinFamily::make(b.basin_amplitude, 0.0, m.params.sigma())};
  PullbackOptions opt;
  opt.split = true;
  const auto cloud = approximate_attractor(PullbackSchedule::make(0.0, sweep_depths(b, eps), b.bundle_size, b.seed),
                                           sp, b.grid, m, b.step, opt);
  double u_h1 = 0.0, v_l2 = 0.0;
  for (const State& s : cloud.points()) {
    u_h1 = std::max(u_h1, std::sqrt(h1_norm_sq(b.grid, s.u)));
    v_l2 = std::max(v_l2, l2_norm(b.grid, s.v));
  }
  EXPECT_EQ(r.records[0].u_h1, u_h1);
  EXPECT_EQ(r.records[0].v_l2, v_l2);
  EXPECT_EQ(r.records[0].theoretical_v_bound, cloud.bounds->v_l2_bound);
  EXPECT_EQ(r.records[0].final_diagnostic, cloud.diagnostics().back());
}

TEST(Sweep, FailuresAreIsolated) {
  auto b = small_base();
  b.lambda = 0.5;  // epsilon_0 = 0.5
  const auto r = run_sweep({0.2, 0.9, 0.4}, SweepScenario::unbounded_sqrt, b);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_TRUE(r.records[0].ok);
  EXPECT_FALSE(r.records[1].ok);
  EXPECT_NE(r.records[1].error.find("epsilon exceeds min(1, lambda/gamma)"), std::string::npos);
  EXPECT_TRUE(r.records[2].ok);
  EXPECT_NEAR(r.records[0].theoretical_v_bound * r.records[0].theoretical_v_bound,
              blowup_bound(Parameters::make(1.0, 0.5, 0.2, 1.0), b.f1.norm_sq(1), b.g1.norm_sq(1)), 1e-9);
  // Two successes are not enough for a verdict.
  EXPECT_THROW(uniform_bound_report(r), InsufficientData);
}

TEST(Sweep, VerdictJsonShape) {
  SweepResult r;
  r.scenario = SweepScenario::bounded;
  for (double e : {0.1, 0.2, 0.4}) {
    SweepRecord rec;
    rec.epsilon = e;
    rec.ok = true;
    rec.u_h1 = 1.0;
    rec.v_h1 = 2.0;
    rec.v_l2 = 1.0 / e;
    r.records.push_back(rec);
  }
  const auto v = uniform_bound_report(r);
  EXPECT_TRUE(v.uniform);
  EXPECT_FALSE(v.v_l2_sq.uniform);
  EXPECT_NEAR(v.v_l2_sq.slope, 2.0, 1e-12);
  const auto j = verdict_json(r, v);
  EXPECT_EQ(j.at("verdict"), "uniform");
  EXPECT_EQ(j.at("scenario"), "bounded");
}
