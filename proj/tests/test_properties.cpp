#include <cmath>

#include <gtest/gtest.h>

#include "battery.hpp"
#include "sharpcal/sharpness.hpp"

using namespace sharpcal;

TEST(Properties, DecompositionIdentitiesHoldEverywhere) {
  for (const auto& [id, s] : battery::full()) {
    const auto r = decompose(s);
    EXPECT_NEAR(r.z.var_h_z, r.z.avg_var_g + r.z.mu_dispersion, 1e-10) << id;
    EXPECT_NEAR(r.u.var_h_u_formula, r.u.avg_var_f + r.u.alpha_dispersion, 1e-10) << id;
  }
}

TEST(Properties, BatteryIsCalibratedAndSharpnessInequalityHolds) {
  for (const auto& [id, s] : battery::full()) {
    const auto r = verify_sharpness(s);
    EXPECT_GE(r.gap, -1e-9) << id;
    EXPECT_TRUE(r.inequality_holds) << id;
  }
}

TEST(Properties, RecenteringIsInvariant) {
  for (const auto& [id, s] : battery::full()) {
    const auto c = recenter(s);
    const auto a = finite_calibration_residual(s);
    const auto b = finite_calibration_residual(c);
    for (std::size_t k = 0; k < a.residuals.size(); ++k) ASSERT_NEAR(a.residuals[k], b.residuals[k], 1e-10) << id;
    const auto ra = decompose(s), rb = decompose(c);
    EXPECT_NEAR(ra.u.avg_var_f, rb.u.avg_var_f, 1e-10) << id;
    EXPECT_NEAR(ra.z.avg_var_g, rb.z.avg_var_g, 1e-10) << id;
    EXPECT_NEAR(ra.gap, rb.gap, 1e-10) << id;
    for (const auto& f : c.forecasts()) EXPECT_NEAR(mean(f), 0.0, 1e-9) << id;
  }
}

TEST(Properties, BlockRepeatPreservesEverything) {
  for (const auto& [id, base] : battery::compensated()) {
    if (base.horizon() != 2) continue;
    const auto big = make_block_repeat(base, 10);
    EXPECT_NEAR(finite_calibration_residual(big).max_abs_residual, finite_calibration_residual(base).max_abs_residual,
                1e-12)
        << id;
    EXPECT_NEAR(decompose(big).gap, decompose(base).gap, 1e-12) << id;
    const auto ref = theta_profile(base);
    EXPECT_LE(*theta_profile(big, kDefaultThetaGrid, &ref).sup_deviation, 1e-12) << id;
  }
}

TEST(Properties, ClimatologicalGapIsMeanDispersion) {
  for (const auto& [id, s] : battery::climatological()) {
    const auto r = decompose(s);
    EXPECT_NEAR(r.gap, r.z.mu_dispersion, 1e-9) << id;
  }
}
