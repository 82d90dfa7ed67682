#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sharpcal/calibration.hpp"
#include "sharpcal/errors.hpp"
#include "sharpcal/scenarios.hpp"

using namespace sharpcal;

TEST(Calibration, IdealNormalsHaveZeroResidual) {
  std::vector<Distribution> g{normal(1, 1), normal(2, 1), normal(3, 1)};
  const auto r = finite_calibration_residual(make_ideal(g));
  EXPECT_LE(r.max_abs_residual, 1e-12);
  EXPECT_TRUE(r.calibrated);
  EXPECT_EQ(r.p_grid.size(), 512u);
  EXPECT_DOUBLE_EQ(r.p_grid.front(), 1.0 / 513.0);
  EXPECT_DOUBLE_EQ(r.tolerance, 1e-9);
}

TEST(Calibration, SingleShiftedNormalMatchesPhiOracle) {
  const Scenario s({normal(0.5, 1)}, {normal(0, 1)});
  CalibrationOptions o;
  o.grid_size = 3;  // p = 1/4, 1/2, 3/4
  const auto r = finite_calibration_residual(s, o);
  EXPECT_NEAR(r.residuals[1], oracle::Phi(0.5) - 0.5, 1e-12);
  EXPECT_NEAR(r.residuals[1], 0.191462, 1e-6);
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = r.p_grid[k];
    EXPECT_NEAR(r.residuals[k], oracle::Phi(oracle::Phi_inv(p) + 0.5) - p, 1e-9);
  }
  EXPECT_FALSE(r.calibrated);
}

TEST(Calibration, CompensatedPairWithinTabulatedTolerance) {
  const auto s = make_compensated_pair(0.1, 2048);
  const auto r = finite_calibration_residual(s);
  EXPECT_LE(r.max_abs_residual, 1e-6);
  EXPECT_DOUBLE_EQ(r.tolerance, 1e-6);
  EXPECT_TRUE(r.calibrated);
}

TEST(Calibration, GridSizeBelowTwoRejected) {
  const auto s = make_ideal(std::vector<Distribution>{uniform(0, 1)});
  CalibrationOptions o;
  o.grid_size = 1;
  EXPECT_THROW(finite_calibration_residual(s, o), ArgumentError);
}

TEST(CalibrationTrend, CompensatedBlocksStayCalibrated) {
  const auto base = make_compensated_pair(0.1);
  const std::vector<std::size_t> cps{2, 8, 32};
  const auto t = asymptotic_calibration_trend([&](std::size_t T) { return make_block_repeat(base, T); }, cps);
  ASSERT_EQ(t.points.size(), 3u);
  for (const auto& p : t.points) EXPECT_LE(p.max_abs_residual, 1e-6);
  EXPECT_TRUE(t.asymptotically_calibrated);
}

TEST(CalibrationTrend, IdealUniformIsExact) {
  const std::vector<std::size_t> cps{1, 4, 16};
  const auto t = asymptotic_calibration_trend(
      [](std::size_t T) { return make_ideal(std::vector<Distribution>(T, uniform(0, 1))); }, cps);
  for (const auto& p : t.points) EXPECT_LE(p.max_abs_residual, 1e-15);
  EXPECT_TRUE(t.asymptotically_calibrated);
}

TEST(CalibrationTrend, UncompensatedShiftFlagged) {
  const std::vector<std::size_t> cps{1, 4, 16};
  CalibrationOptions o;
  o.grid_size = 3;
  const auto t = asymptotic_calibration_trend(
      [](std::size_t T) {
        std::vector<Distribution> g(T, normal(0, 1));
        std::vector<Distribution> f(T, translate(normal(0, 1), -0.3));
        return Scenario(f, g);
      },
      cps, o);
  for (const auto& p : t.points) EXPECT_NEAR(p.max_abs_residual, std::fabs(oracle::Phi(0.3) - 0.5), 1e-9);
  EXPECT_NEAR(std::fabs(oracle::Phi(0.3) - 0.5), 0.117911, 1e-6);
  EXPECT_FALSE(t.asymptotically_calibrated);
}

TEST(CalibrationTrend, RejectsNonIncreasingCheckpoints) {
  const std::vector<std::size_t> cps{4, 2};
  EXPECT_THROW(asymptotic_calibration_trend(
                   [](std::size_t T) { return make_ideal(std::vector<Distribution>(T, uniform(0, 1))); }, cps),
               ArgumentError);
}

TEST(Pit, SingleDrawShape) {
  const auto s = make_ideal(std::vector<Distribution>{normal(0, 1)});
  const auto p = sample_randomized_pit(s, 1, 9);
  ASSERT_EQ(p.values.size(), 1u);
  EXPECT_GT(p.values[0], 0.0);
  EXPECT_LT(p.values[0], 1.0);
  EXPECT_NEAR(p.ks_threshold, 1.358, 1e-15);
}

TEST(Pit, DeterministicForSeed) {
  const auto s = make_compensated_pair(0.1);
  const auto a = sample_randomized_pit(s, 20000, 123);
  const auto b = sample_randomized_pit(s, 20000, 123);
  const auto c = sample_randomized_pit(s, 20000, 124);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(Pit, KsStatisticMatchesDefinition) {
  std::vector<double> v{0.9, 0.1, 0.5, 0.3};
  // sorted 0.1,0.3,0.5,0.9: max(k/n - x_k, x_k - (k-1)/n) = max(.15,.2,.25,.1 ; .1,.05,0,.15)
  EXPECT_NEAR(ks_statistic_uniform(v), 0.25, 1e-15);
}

TEST(Pit, IdealSampleUniformHistogram) {
  std::vector<Distribution> g{normal(0, 1), uniform(2, 5), normal(-1, 3)};
  const auto p = sample_randomized_pit(make_ideal(g), 100000, 7);
  EXPECT_FALSE(p.reject);
  const auto h = pit_histogram(p, 20);
  EXPECT_EQ(std::accumulate(h.begin(), h.end(), std::size_t{0}), 100000u);
  for (auto c : h) EXPECT_NEAR(static_cast<double>(c), 5000.0, 300.0);
}

TEST(Pit, HistogramEdgeCases) {
  PitSample s;
  s.n = 10;
  s.values.assign(10, 0.05);
  const auto h = pit_histogram(s, 10);
  EXPECT_EQ(h[0], 10u);
  EXPECT_EQ(std::accumulate(h.begin() + 1, h.end(), std::size_t{0}), 0u);
  EXPECT_EQ(pit_histogram(s, 1), std::vector<std::size_t>{10});
  EXPECT_THROW(pit_histogram(s, 0), ArgumentError);
  EXPECT_EQ(histogram_csv(std::vector<std::size_t>{1}).substr(0, 18), "bin_lo,bin_hi,coun");
}

TEST(Pit, OverdispersedForecastRejected) {
  const Scenario s(std::vector<Distribution>(4, normal(0, 2)), std::vector<Distribution>(4, normal(0, 1)));
  EXPECT_TRUE(sample_randomized_pit(s, 100000, 3).reject);
}
