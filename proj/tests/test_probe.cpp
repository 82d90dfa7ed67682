#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sharpcal/errors.hpp"
#include "sharpcal/probe.hpp"
#include "sharpcal/scenarios.hpp"

using namespace sharpcal;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

Distribution from_quantile(std::function<double(double)> q) {
  FunctionalSpec spec;
  spec.quantile = q;
  spec.cdf = [q](double x) {
    if (x <= q(0.0)) return 0.0;
    if (x >= q(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (q(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  spec.support = {q(0.0), q(1.0)};
  return from_functions(spec);
}

}  // namespace

TEST(CompleteCalibration, RecoversCompensatedPartner) {
  const std::vector<Distribution> truths(2, uniform(0, 1));
  const std::vector<Distribution> partial{from_quantile([](double p) { return p + 0.1 * std::sin(kTwoPi * p); })};
  const auto s = complete_calibration(partial, truths, 2047);
  const auto& f2 = s.forecast(1);
  for (std::size_t k = 1; k <= 2047; k += 37) {
    const double p = k / 2048.0;
    EXPECT_NEAR(f2.quantile(p), p - 0.1 * std::sin(kTwoPi * p), 1e-10);
  }
  EXPECT_TRUE(finite_calibration_residual(s).calibrated);
}

TEST(CompleteCalibration, SquareIsFeasible) {
  const std::vector<Distribution> truths(2, uniform(0, 1));
  const std::vector<Distribution> partial{from_quantile([](double p) { return p * p; })};
  const auto s = complete_calibration(partial, truths);
  for (double p : interior_grid(512)) EXPECT_NEAR(s.forecast(1).quantile(p), 2 * p - p * p, 1e-12);
  EXPECT_TRUE(finite_calibration_residual(s).calibrated);
}

TEST(CompleteCalibration, SquareRootIsInfeasible) {
  const std::vector<Distribution> truths(2, uniform(0, 1));
  const std::vector<Distribution> partial{from_quantile([](double p) { return std::sqrt(p); })};
  try {
    complete_calibration(partial, truths);
    FAIL();
  } catch (const InfeasibleCompletion& e) {
    EXPECT_LT(e.offending_p(), 1.0 / 16.0);
  }
}

TEST(CompleteCalibration, RejectsWrongShapes) {
  const std::vector<Distribution> truths(2, uniform(0, 1));
  EXPECT_THROW(complete_calibration(truths, truths), ArgumentError);
}

TEST(MinimizeSharpness, UniformTruthsApproachIdeal) {
  const std::vector<Distribution> truths(2, uniform(0, 1));
  ProbeOptions o;
  o.seed = 2024;
  o.budget = 500;
  const auto r = minimize_sharpness(truths, o);
  EXPECT_TRUE(r.all_candidates_calibrated);
  EXPECT_GE(r.margin_vs_avg_var_g, -1e-6);
  EXPECT_LE(r.margin_vs_avg_var_g, 1e-3);
  EXPECT_EQ(r.gap_violations, 0u);
  ASSERT_TRUE(r.best_scenario.has_value());
  EXPECT_TRUE(finite_calibration_residual(*r.best_scenario).calibrated);
  EXPECT_EQ(r.feasible + r.infeasible, 500u);
}

TEST(MinimizeSharpness, NormalTruthsRespectInequality) {
  const std::vector<Distribution> truths(2, normal(0, 1));
  ProbeOptions o;
  o.seed = 5;
  o.budget = 200;
  const auto r = minimize_sharpness(truths, o);
  EXPECT_GE(r.min_gap, -1e-6);
  for (const auto& c : r.candidates) EXPECT_GE(c.gap, -1e-6);
}

TEST(MinimizeSharpness, DeterministicAcrossExecutionModes) {
  const auto truths = random_normal_truths(3, 8);
  ProbeOptions o;
  o.seed = 99;
  o.budget = 60;
  o.execution = Execution::serial;
  const auto a = minimize_sharpness(truths, o);
  o.execution = Execution::parallel;
  const auto b = minimize_sharpness(truths, o);
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(MinimizeSharpness, ArgumentChecks) {
  const std::vector<Distribution> truths(2, uniform(0, 1));
  ProbeOptions o;
  o.budget = 0;
  EXPECT_THROW(minimize_sharpness(truths, o), ArgumentError);
  o.budget = 10;
  EXPECT_THROW(minimize_sharpness(std::vector<Distribution>{uniform(0, 1)}, o), ArgumentError);
}

TEST(McOracle, IdealUniformPair) {
  const auto s = make_ideal(std::vector<Distribution>{uniform(0, 1), uniform(1, 2)});
  const auto r = mc_oracle(s, 200000, 20, 4);
  EXPECT_NEAR(r.var_h_mc, 1.0 / 3.0, 4 * r.var_h_mc_se);
  for (std::size_t b = 0; b < 20; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      sum += r.conditional_z_given_u[b][i];
      EXPECT_NEAR(r.conditional_z_given_u[b][i], 0.5, 4 * r.conditional_se[b][i] + 1e-12);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(McOracle, SingleIndexIsDegenerate) {
  const auto s = make_ideal(std::vector<Distribution>{uniform(0, 1)});
  const auto r = mc_oracle(s, 10000, 5, 1);
  for (const auto& row : r.conditional_z_given_u) EXPECT_EQ(row[0], 1.0);
  EXPECT_NE(r.conditional_csv().find("bin_lo,bin_hi,count,p_1"), std::string::npos);
}

TEST(McOracle, Preconditions) {
  const auto s = make_ideal(std::vector<Distribution>{uniform(0, 1)});
  EXPECT_THROW(mc_oracle(s, 9999, 5, 1), ArgumentError);
  EXPECT_THROW(mc_oracle(make_shifted_negative(std::vector<Distribution>{uniform(0, 1)}, 0.2), 10000, 5, 1),
               NotCalibrated);
}

TEST(EqualityScan, Examples) {
  std::vector<std::pair<std::string, Scenario>> items{
      {"ideal", make_ideal(std::vector<Distribution>{uniform(0, 1), uniform(1, 2)})},
      {"clim", make_climatological(std::vector<Distribution>{uniform(0, 1), uniform(1, 2)})},
      {"comp", make_compensated_pair(0.1)},
      {"clim_eq", make_climatological(std::vector<Distribution>{normal(0, 1), normal(0, 2)})}};
  const auto t = equality_gap_scan(items);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_TRUE(t.rows[0].equality_condition_met);
  EXPECT_NEAR(t.rows[0].gap, 0.0, 1e-10);
  EXPECT_FALSE(t.rows[1].equality_condition_met);
  EXPECT_NEAR(t.rows[1].gap, 0.25, 1e-9);
  EXPECT_TRUE(t.rows[2].equality_condition_met);
  EXPECT_NEAR(t.rows[2].gap, 0.005, 1e-5);
  EXPECT_TRUE(t.rows[2].tension);
  EXPECT_FALSE(t.rows[0].tension || t.rows[1].tension || t.rows[3].tension);
  EXPECT_TRUE(t.rows[3].equality_condition_met);
  EXPECT_NEAR(t.rows[3].gap, 0.0, 1e-6);

  EXPECT_TRUE(equality_gap_scan({}).rows.empty());
}
