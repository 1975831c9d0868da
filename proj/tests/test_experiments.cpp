#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "randinfo/experiments.hpp"

using namespace randinfo;

TEST(FitLogLog, ExactPowerLaws) {
  const auto f = fit_loglog({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625});
  EXPECT_NEAR(f.slope, -2.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  const auto c = fit_loglog({1, 10, 100}, {7, 7, 7});
  EXPECT_NEAR(c.slope, 0.0, 1e-14);
  EXPECT_EQ(c.r_squared, 1.0);
  std::vector<double> xs{2, 5, 11, 40};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 / std::sqrt(x));
  const auto h = fit_loglog(xs, ys);
  EXPECT_NEAR(h.slope, -0.5, 1e-12);
  EXPECT_NEAR(h.intercept, std::log(3.0), 1e-12);
}

TEST(FitLogLog, Errors) {
  EXPECT_THROW(fit_loglog({1, 2}, {1, 2}), DomainError);
  EXPECT_THROW(fit_loglog({1, 2, 3}, {1, 0, 2}), DomainError);
  EXPECT_THROW(fit_loglog({2, 2, 2}, {1, 2, 3}), DomainError);
  EXPECT_THROW(fit_loglog({1, 2, 3}, {1, 2}), DomainError);
}

TEST(Quantile, NearestRank) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto q = quantiles(v);
  EXPECT_EQ(q.q05, 5.0);
  EXPECT_EQ(q.q50, 50.0);
  EXPECT_EQ(q.q95, 95.0);
  EXPECT_EQ(quantile({3.0}, 0.05), 3.0);
}

TEST(Oversampling, SampleCounts) {
  EXPECT_EQ(OversamplingRule::log_linear(5.0).samples(16), 222u);
  EXPECT_EQ(OversamplingRule::log_linear(5.0).samples(32), 555u);
  EXPECT_EQ(OversamplingRule::log_linear(0.5, true).samples(64), 133u);
  EXPECT_EQ(OversamplingRule::log_linear(5.0, true).samples(64), 1330u);
  EXPECT_EQ(OversamplingRule::linear(2.0).samples(7), 14u);
  EXPECT_EQ(OversamplingRule::fixed(9).samples(1000), 9u);
  EXPECT_EQ(OversamplingRule::log_linear(5.0).samples(1), 0u);
}

TEST(Oversampling, DefaultTruncation) {
  EXPECT_EQ(default_truncation(32, 555), 4440u);
  EXPECT_EQ(default_truncation(4, 10), 512u);
  EXPECT_EQ(default_truncation(400, 10), 1600u);
}

TEST(FourierRadius, Examples) {
  const auto s = Spectrum::power_law(1.0, 8);
  const std::vector<std::size_t> some{1, 2, 4};
  const auto r = fourier_radius(some, s, 2);
  EXPECT_EQ(r.min_missing, 3u);
  EXPECT_NEAR(r.radius, 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(r.covers_head);
  EXPECT_FALSE(r.truncated);

  const auto none = fourier_radius(std::span<const std::size_t>{}, s, 2);
  EXPECT_EQ(none.radius, 1.0);
  EXPECT_FALSE(none.covers_head);

  std::vector<std::size_t> all(8);
  std::iota(all.begin(), all.end(), std::size_t{1});
  const auto t = fourier_radius(all, s, 8);
  EXPECT_TRUE(t.truncated);
  EXPECT_NEAR(t.radius, 1.0 / 9.0, 1e-15);

  const std::vector<std::size_t> bad{9};
  EXPECT_THROW(fourier_radius(bad, s, 2), OutOfRange);
}

TEST(Coupon, LargeBudgetCoversHeadAndSmallBudgetMisses) {
  const auto s = Spectrum::power_law(1.0);
  const auto big = run_coupon(s, 8, 2000, 30, 1, 1);
  EXPECT_EQ(big.coverage_probability, 1.0);
  EXPECT_EQ(big.p_radius_le_sigma_n1, 1.0);
  const auto tiny = run_coupon(s, 64, 3, 30, 1, 1);
  EXPECT_EQ(tiny.coverage_probability, 0.0);
  EXPECT_EQ(tiny.p_radius_ge_sigma_n, 1.0);
  EXPECT_EQ(tiny.radii.size(), 30u);
}

TEST(Coupon, RadiusAndCoverageAreDual) {
  const auto rep = run_coupon(Spectrum::power_law(1.0), 16, 60, 200, 4, 1);
  // Strictly decreasing spectrum: radius <= sigma_{n+1} iff 1..n all observed.
  EXPECT_EQ(rep.coverage_probability, rep.p_radius_le_sigma_n1);
  EXPECT_NEAR(rep.coverage_probability + rep.p_radius_ge_sigma_n, 1.0, 1e-15);
  EXPECT_THROW(run_coupon(Spectrum::power_law(0.5), 4, 10, 2, 1), DivergentSpectrum);
}

TEST(WceTrials, OptimalInformationHitsSigma) {
  TrialConfig c;
  c.spectrum = Spectrum::power_law(1.0);
  c.n_grid = {4, 9};
  c.optimal_info = true;
  c.trials = 3;
  c.threads = 1;
  const auto s = run_wce_trials(c);
  ASSERT_EQ(s.rows.size(), 6u);
  for (const auto& r : s.rows)
    EXPECT_NEAR(r.report.wce_exact, c.spectrum.sigma(r.report.n + 1), 1e-12);
  EXPECT_EQ(s.groups[0].N, 4u);
}

TEST(WceTrials, DeterministicAndThreadInvariant) {
  TrialConfig c;
  c.channel = Channel::point;
  c.spectrum = Spectrum::power_law(1.5);
  c.n_grid = {4, 6};
  c.oversampling = OversamplingRule::fixed(40);
  c.truncation = 64;
  c.trials = 6;
  c.seed = 99;
  c.threads = 1;
  const auto a = run_wce_trials(c);
  c.threads = 3;
  const auto b = run_wce_trials(c);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].report.wce_exact, b.rows[i].report.wce_exact);
    EXPECT_EQ(a.rows[i].report.alpha_hat, b.rows[i].report.alpha_hat);
  }
  c.trials = 1;
  const auto one = run_wce_trials(c);
  EXPECT_EQ(one.rows[0].report.wce_exact, a.rows[0].report.wce_exact);
}

TEST(WceTrials, BoundMultiplierIsMonotone) {
  TrialConfig c;
  c.channel = Channel::fourier;
  c.spectrum = Spectrum::power_law(1.0);
  c.n_grid = {8};
  c.trials = 20;
  c.seed = 5;
  c.threads = 1;
  double prev = -1.0;
  for (double mult : {0.5, 1.0, 2.0, 5.0}) {
    c.bound_multiplier = mult;
    const double f = run_wce_trials(c).groups[0].pass_fraction;
    EXPECT_GE(f, prev);
    prev = f;
  }
}

TEST(WceTrials, RefusesDivergentSpectrum) {
  TrialConfig c;
  c.spectrum = Spectrum::power_law(0.4);
  c.trials = 1;
  EXPECT_THROW(run_wce_trials(c), DivergentSpectrum);
}

TEST(WceTrials, Validation) {
  TrialConfig c;
  c.trials = 0;
  EXPECT_THROW(run_wce_trials(c), DomainError);
  c.trials = 1;
  c.n_grid = {};
  EXPECT_THROW(run_wce_trials(c), DomainError);
  c.n_grid = {4};
  c.channel = Channel::point;
  c.optimal_info = true;
  EXPECT_THROW(run_wce_trials(c), DomainError);
}

TEST(GaussianTheorem, ZeroTailIsExact) {
  const auto s = run_gaussian_theorem(Spectrum::explicit_values({1.0, 0.5, 0.25}), 3, 5, 2, 1);
  for (const auto& r : s.rows) EXPECT_NEAR(r.report.wce_exact, 0.0, 1e-12);
  EXPECT_EQ(s.groups[0].N, 6u);
  EXPECT_EQ(s.groups[0].pass_fraction, 1.0);
}

TEST(Concentration, LargeBudgetConcentrates) {
  TrialConfig c;
  c.spectrum = Spectrum::power_law(1.0);
  c.n_grid = {4};
  c.oversampling = OversamplingRule::fixed(20000);
  c.trials = 10;
  c.seed = 3;
  c.threads = 1;
  const auto s = run_concentration(c);
  EXPECT_EQ(s.groups[0].fraction_within, 1.0);
  EXPECT_LT(s.groups[0].statistic.q95, 0.2);
}

TEST(Concentration, FewSamplesConcentrateWorse) {
  TrialConfig c;
  c.spectrum = Spectrum::power_law(1.0);
  c.n_grid = {16};
  c.trials = 20;
  c.seed = 3;
  c.threads = 1;
  c.oversampling = OversamplingRule::fixed(16);
  const double few = run_concentration(c).groups[0].statistic.q50;
  c.oversampling = OversamplingRule::log_linear(5.0);
  const double many = run_concentration(c).groups[0].statistic.q50;
  EXPECT_LT(many, few);
}

TEST(Concentration, NeedsRhoDensity) {
  TrialConfig c;
  c.density = DensityKind::uniform;
  c.channel = Channel::point;
  EXPECT_THROW(run_concentration(c), DomainError);
}

TEST(SobolevRates, SlopeNearMinusOneInOneDimension) {
  const auto r = run_sobolev_rates(1, {1.0, 2.0}, {64, 256, 1024}, 40, 1, kDefaultDistGrid, 1);
  EXPECT_NEAR(r.covering_fit.slope, -1.0, 0.2);
  EXPECT_NEAR(r.dist_fits.at(1.0).slope, -1.0, 0.1);
  EXPECT_EQ(r.method, "exact-1d");
  for (const auto& row : r.rows) EXPECT_LE(row.mean_dist_norm.at(2.0), row.mean_covering_radius);
  EXPECT_THROW(run_sobolev_rates(3, {}, {8, 16, 32}, 2, 1), DomainError);
  EXPECT_THROW(run_sobolev_rates(1, {}, {8, 16}, 2, 1), DomainError);
}

TEST(SobolevRates, SinglePointMeanDistance) {
  const auto r = run_sobolev_rates(1, {1.0}, {1, 2, 4}, 4000, 12, kDefaultDistGrid, 1);
  // x ~ U: integral |t - x| dt = x^2/2 + (1-x)^2/2, mean 1/3.
  EXPECT_NEAR(r.rows[0].mean_dist_norm.at(1.0), 1.0 / 3.0, 0.01);
}

TEST(MlsRates, PolynomialSeriesSitsAtNoiseFloor) {
  const auto r = run_mls_rates(2, 1.0, {TestFunction::polynomial, TestFunction::sine}, {32, 64, 128}, 3, 8,
                               256, kDefaultWindowMultiplier, 1);
  ASSERT_EQ(r.series.size(), 2u);
  EXPECT_FALSE(r.series[0].fit.has_value());
  for (double e : r.series[0].mean_error) EXPECT_LE(e, kNoiseFloor);
  ASSERT_TRUE(r.series[1].fit.has_value());
  EXPECT_LT(r.series[1].fit->slope, -1.5);
  EXPECT_EQ(to_string(TestFunction::sine), "sin2pi");
}

TEST(ParallelMap, OrderAndExceptions) {
  const auto v = parallel_map(50, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(v[i], i * i);
  EXPECT_THROW(parallel_map(10, 3,
                            [](std::size_t i) -> int {
                              if (i == 7) throw DomainError("boom");
                              return 0;
                            }),
               DomainError);
  EXPECT_EQ(trial_stream(1, 2), (std::uint64_t{1} << 32) | 2u);
}
