#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sharpcal/quadrature.hpp"

using sharpcal::QuadratureRule;

TEST(Quadrature, IntegratesPolynomialsExactly) {
  const QuadratureRule rule(16);
  // 16 nodes are exact through degree 31.
  EXPECT_NEAR(rule.integrate([](double x) { return std::pow(x, 31); }, 0.0, 1.0), 1.0 / 32.0, 1e-15);
  EXPECT_NEAR(rule.integrate([](double x) { return 3 * x * x - 1; }, -1.0, 2.0), 6.0, 1e-13);
}

TEST(Quadrature, DefaultRuleMatchesSimpsonOnSmoothIntegrand) {
  auto f = [](double p) { return std::exp(std::sin(7.0 * p)); };
  EXPECT_NEAR(sharpcal::default_rule().integrate(f, 0.0, 1.0), oracle::simpson(f, 0.0, 1.0), 1e-12);
}

TEST(Quadrature, NodesAreSymmetricInsideUnitInterval) {
  const auto& rule = sharpcal::default_rule();
  ASSERT_EQ(rule.size(), sharpcal::kDefaultQuadratureNodes);
  const auto n = rule.size();
  double wsum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_GT(rule.nodes()[k], 0.0);
    EXPECT_LT(rule.nodes()[k], 1.0);
    EXPECT_NEAR(rule.nodes()[k] + rule.nodes()[n - 1 - k], 1.0, 1e-15);
    wsum += rule.weights()[k];
  }
  EXPECT_NEAR(wsum, 1.0, 1e-14);
}
