#include <gtest/gtest.h>

#include <cmath>

#include "dmclab/experiments.hpp"

using namespace dmclab;

TEST(SampleStats, Basics) {
  const auto s = sample_stats({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.se_mean, std::sqrt(5.0 / 12.0));
  EXPECT_EQ(s.count, 4u);
  EXPECT_EQ(sample_stats({7.0}).variance, 0.0);
}

TEST(AxisParams, Walkers) {
  const auto base = ModelParams::from_time_step(1, 0.5, 5, 51, 5e-3, 100);
  const auto p = params_for_axis(base, SweepAxis::Walkers, 250);
  EXPECT_EQ(p.walkers, 250u);
  EXPECT_EQ(p.kappa, base.kappa);
}

TEST(AxisParams, TimeStep) {
  const auto base = ModelParams::from_time_step(1, 2, 5, 31, 5e-3, 100);
  const auto p = params_for_axis(base, SweepAxis::TimeStep, 4e-2);
  EXPECT_EQ(p.kappa, 4);
  EXPECT_NEAR(p.dt, 5.0 / 124, 1e-15);
  EXPECT_NO_THROW(p.validate());
}

TEST(AxisParams, Reconfigurations) {
  const auto base = ModelParams::from_time_step(1, 2, 5, 31, 5e-3, 100);
  const auto p = params_for_axis(base, SweepAxis::Reconfigurations, 200);
  EXPECT_EQ(p.nu, 201);
  EXPECT_EQ(p.kappa, 5);
  EXPECT_THROW(params_for_axis(base, SweepAxis::Reconfigurations, -1), ConfigError);
}

TEST(AxisNames, RoundTrip) {
  for (SweepAxis a : {SweepAxis::Walkers, SweepAxis::TimeStep, SweepAxis::Reconfigurations})
    EXPECT_EQ(parse_axis(to_string(a)), a);
  EXPECT_FALSE(parse_axis("nu").has_value());
}

TEST(Sweep, ThetaZeroHasZeroError) {
  for (SweepAxis axis : {SweepAxis::Walkers, SweepAxis::TimeStep, SweepAxis::Reconfigurations}) {
    SweepSpec s;
    s.base = ModelParams::from_time_step(1.0, 0.0, 1.0, 5, 1e-2, 30);
    s.axis = axis;
    s.values = axis == SweepAxis::TimeStep ? std::vector<double>{0.01, 0.02, 0.05}
                                           : std::vector<double>{2, 4, 8};
    s.repetitions = 1;
    s.reference = 1.5;
    for (const auto& row : run_sweep(s)) {
      ASSERT_FALSE(row.failure);
      EXPECT_EQ(row.mean_abs_error, 0.0);
      EXPECT_EQ(row.error_variance, 0.0);
      EXPECT_EQ(row.estimator_variance, 0.0);
      EXPECT_GE(row.wall_time, 0.0);
    }
  }
}

TEST(Sweep, DeterministicAndThreadIndependent) {
  SweepSpec s;
  s.base = ModelParams::from_time_step(1.0, 2.0, 1.0, 5, 1e-2, 50, 3);
  s.axis = SweepAxis::Walkers;
  s.values = {20, 40, 80};
  s.repetitions = 6;
  s.reference = 3.3;
  const auto a = run_sweep(s);
  s.threads = 3;
  const auto b = run_sweep(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean_abs_error, b[i].mean_abs_error);
    EXPECT_EQ(a[i].error_variance, b[i].error_variance);
    EXPECT_EQ(a[i].estimator_variance, b[i].estimator_variance);
    EXPECT_GE(a[i].mean_abs_error, 0.0);
    EXPECT_GE(a[i].error_variance, 0.0);
  }
  // different axis values never share streams
  EXPECT_NE(a[0].estimator_mean, a[1].estimator_mean);
}

TEST(Sweep, RejectsBadSpecs) {
  SweepSpec s;
  s.base = ModelParams::from_time_step(1.0, 2.0, 1.0, 5, 1e-2, 50);
  s.values = {40, 20};
  EXPECT_THROW(run_sweep(s), ConfigError);
  s.values = {};
  EXPECT_THROW(run_sweep(s), ConfigError);
  s.values = {20};
  s.repetitions = 0;
  EXPECT_THROW(run_sweep(s), ConfigError);
}

TEST(Sweep, ErrorDecreasesWithWalkers) {
  SweepSpec s;
  s.base = ModelParams::from_time_step(1.0, 0.5, 5.0, 51, 5e-3, 100, 21);
  s.axis = SweepAxis::Walkers;
  s.values = {250, 4000};
  s.repetitions = 40;
  s.reference = 2.3244062;  // long-time limit, finite-difference value
  s.threads = default_threads();
  const auto rows = run_sweep(s);
  EXPECT_GT(rows[0].mean_abs_error, rows[1].mean_abs_error);
}

TEST(Sweep, ConfidenceIntervalShrinksWithRepetitions) {
  auto base = ModelParams::from_time_step(1.0, 2.0, 1.0, 5, 1e-2, 100, 5);
  std::vector<double> se;
  for (int reps : {100, 400}) {
    std::vector<double> err;
    for (const auto& r : repeat_runs(base, reps, 0, default_threads())) err.push_back(std::abs(r.e_ratio - 3.3));
    se.push_back(sample_stats(err).se_mean);
  }
  EXPECT_GT(se[0] / se[1], 1.5);
  EXPECT_LT(se[0] / se[1], 2.7);
}

TEST(SlopeFit, SyntheticRates) {
  std::vector<SweepRow> rows;
  for (double n : {250.0, 1000.0, 4000.0, 16000.0}) {
    SweepRow r;
    r.axis_value = n;
    r.mean_abs_error = 0.7 / std::sqrt(n);
    rows.push_back(r);
  }
  EXPECT_NEAR(fit_loglog_slope(rows), -0.5, 1e-12);
  std::vector<double> dt{5e-3, 1e-2, 2e-2, 4e-2}, e;
  for (double d : dt) e.push_back(3.1 * d);
  EXPECT_NEAR(fit_loglog_slope(dt, e), 1.0, 1e-12);
}

TEST(SlopeFit, RejectsDegenerateInput) {
  std::vector<SweepRow> rows(3);
  for (std::size_t i = 0; i < 3; ++i) rows[i].axis_value = static_cast<double>(i + 1);
  EXPECT_THROW(fit_loglog_slope(rows), InvalidArgument);  // zero errors
  rows.pop_back();
  EXPECT_THROW(fit_loglog_slope(rows), InvalidArgument);  // fewer than 3 rows
  EXPECT_THROW(fit_loglog_slope(std::vector<double>{1, 1}, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(VarianceCurve, ThetaZeroIsDegenerate) {
  const auto p = ModelParams::make(1.0, 0.0, 0.5, 1, 100, 40, 0, Resampler::None);
  const auto curve = variance_vs_time_no_selection(p, {0.05, 0.1, 0.25}, 5);
  ASSERT_EQ(curve.size(), 3u);
  for (const auto& pt : curve) {
    EXPECT_EQ(pt.variance, 0.0);
    EXPECT_EQ(pt.clt_proxy, 0.0);
    EXPECT_TRUE(pt.degenerate);
    EXPECT_EQ(pt.mean, 1.5);
  }
}

TEST(VarianceCurve, Preconditions) {
  const auto sel = ModelParams::make(1.0, 2.0, 0.5, 1, 100, 40, 0, Resampler::Multinomial);
  EXPECT_THROW(variance_vs_time_no_selection(sel, {0.1}, 5), ConfigError);
  const auto blocks = ModelParams::make(1.0, 2.0, 0.5, 2, 50, 40, 0, Resampler::None);
  EXPECT_THROW(variance_vs_time_no_selection(blocks, {0.1}, 5), ConfigError);
  const auto p = ModelParams::make(1.0, 2.0, 0.5, 1, 100, 40, 0, Resampler::None);
  EXPECT_THROW(variance_vs_time_no_selection(p, {0.1234}, 5), ConfigError);
  EXPECT_THROW(variance_vs_time_no_selection(p, {0.2, 0.1}, 5), ConfigError);
  EXPECT_THROW(variance_vs_time_no_selection(p, {}, 5), ConfigError);
}

TEST(VarianceCurve, MatchesNoSelectionRuns) {
  // the curve at t equals run_dmc with nu = 1 and horizon t
  const auto p = ModelParams::make(1.0, 2.0, 1.0, 1, 200, 30, 9, Resampler::None);
  const auto curve = variance_vs_time_no_selection(p, {0.25, 0.5}, 3);
  std::vector<double> est;
  for (int r = 0; r < 3; ++r) {
    auto q = ModelParams::make(1.0, 2.0, 0.5, 1, 100, 30, derive_seed(9, kVarianceGroup, static_cast<std::uint64_t>(r)),
                               Resampler::None);
    est.push_back(run_dmc(q).e_ratio);
  }
  EXPECT_NEAR(curve[1].mean, sample_stats(est).mean, 1e-12);
  EXPECT_NEAR(curve[1].variance, sample_stats(est).variance, 1e-12);
}

TEST(VarianceCurve, CltProxyTracksRepetitionVariance) {
  const auto p = ModelParams::make(1.0, 2.0, 0.3, 1, 60, 400, 10, Resampler::None);
  const auto curve = variance_vs_time_no_selection(p, {0.1, 0.3}, 400, default_threads());
  for (const auto& pt : curve) {
    EXPECT_NEAR(pt.variance / pt.clt_proxy, 1.0, 0.3) << pt.t;
  }
}

TEST(OptimalNu, UniqueMinimum) {
  std::vector<double> ts, vs;
  for (int k = 1; k <= 30; ++k) {
    const double t = 0.05 * k;
    ts.push_back(t);
    vs.push_back((t - 0.25) * (t - 0.25) + 1.0);
  }
  const auto o = optimal_nu_from_curve(5.0, ts, vs);
  EXPECT_NEAR(o.t_star, 0.25, 1e-12);
  EXPECT_EQ(o.nu_star, 20);
  EXPECT_DOUBLE_EQ(o.min_variance, 1.0);
}

TEST(OptimalNu, TiesGoToSmallerTime) {
  const std::vector<double> ts{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<double> vs{3.0, 1.0, 2.0, 2.5, 2.0, 1.0, 3.0};
  const auto o = optimal_nu_from_curve(5.0, ts, vs);
  EXPECT_DOUBLE_EQ(o.t_star, 0.2);
  EXPECT_EQ(o.nu_star, 25);
}

TEST(OptimalNu, MonotoneCurveIsAnError) {
  const std::vector<double> ts{0.1, 0.2, 0.3, 0.4};
  EXPECT_THROW(optimal_nu_from_curve(5.0, ts, {4, 3, 2, 1}), DivergenceError);
  EXPECT_THROW(optimal_nu_from_curve(5.0, ts, {1, 2, 3, 4}), DivergenceError);
  EXPECT_THROW(optimal_nu_from_curve(5.0, {0.1, 0.2}, {1, 2}), InvalidArgument);
}

TEST(TimeGrid, Multiples) {
  const auto g = time_grid(5e-3, 0.1, 4);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.02);
  EXPECT_DOUBLE_EQ(g.back(), 0.1);
}
