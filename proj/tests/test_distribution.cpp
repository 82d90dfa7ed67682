#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sharpcal/distribution.hpp"
#include "sharpcal/errors.hpp"
#include "sharpcal/kernels.hpp"

using namespace sharpcal;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

Distribution perturbed_uniform(double eps, std::size_t knots = 2048) {
  return tabulate([eps](double u) { return u + eps * std::sin(kTwoPi * u); }, knots);
}

std::vector<Distribution> zoo() {
  std::vector<Distribution> out{uniform(-1.0, 3.0), normal(0.3, 1.7), perturbed_uniform(0.1)};
  std::vector<Distribution> comps{normal(-1.0, 0.5), uniform(0.0, 2.0)};
  out.push_back(mixture_of(comps));
  out.push_back(translate(normal(2.0, 0.7), 1.3));
  out.push_back(warped(uniform(0.0, 1.0), {0.0, 0.3, 1.0}, {0.0, 0.5, 1.0}));
  return out;
}

}  // namespace

TEST(Distribution, MeanExamples) {
  EXPECT_DOUBLE_EQ(mean(uniform(0.0, 1.0)), 0.5);
  EXPECT_DOUBLE_EQ(mean(normal(3.0, 2.0)), 3.0);
  EXPECT_NEAR(mean(perturbed_uniform(0.1)), 0.5, 1e-6);
}

TEST(Distribution, VarianceExamples) {
  EXPECT_NEAR(variance(uniform(0.0, 1.0)), 1.0 / 12.0, 1e-15);
  EXPECT_DOUBLE_EQ(variance(normal(0.0, 1.5)), 2.25);
  const double closed = 1.0 / 12.0 - 0.1 / std::numbers::pi + 0.005;
  EXPECT_NEAR(variance(perturbed_uniform(0.1)), closed, 1e-5);
  const auto trap = oracle::quantile_moments([](double u) { return u + 0.1 * std::sin(kTwoPi * u); });
  EXPECT_NEAR(trap.variance, closed, 1e-10);
}

TEST(Distribution, TabulatedMomentsMatchSimpsonOfInterpolant) {
  const auto d = perturbed_uniform(0.07, 64);
  const auto ref = oracle::quantile_moments([&](double u) { return d.quantile(u); }, 64 * 4000);
  EXPECT_NEAR(mean(d), ref.mean, 1e-9);
  EXPECT_NEAR(variance(d), ref.variance, 1e-9);
}

TEST(Distribution, NormalQuantileAgreesWithSeriesOracle) {
  const auto d = normal(1.0, 2.0);
  for (double p : {1e-8, 0.01, 0.2, 0.5, 0.77, 0.999}) {
    EXPECT_NEAR(d.quantile(p), 1.0 + 2.0 * oracle::Phi_inv(p), 1e-9) << p;
  }
  for (double x : {-6.0, -1.0, 0.0, 2.5, 9.0}) {
    EXPECT_NEAR(d.cdf(x), oracle::Phi((x - 1.0) / 2.0), 1e-15) << x;
  }
}

TEST(Distribution, TranslateExamples) {
  const auto t = translate(uniform(0.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(t.support().lo, -0.5);
  EXPECT_DOUBLE_EQ(t.support().hi, 0.5);
  EXPECT_NEAR(mean(t), 0.0, 1e-15);

  const auto n = translate(normal(3.0, 2.0), 3.0);
  ASSERT_NE(n.as<Normal>(), nullptr);
  EXPECT_DOUBLE_EQ(n.as<Normal>()->mu(), 0.0);
  EXPECT_DOUBLE_EQ(n.as<Normal>()->sigma(), 2.0);

  const auto base = perturbed_uniform(0.05);
  const auto same = translate(base, 0.0);
  for (int k = 0; k < 100; ++k) {
    const double x = -0.2 + 1.4 * k / 99.0;
    EXPECT_EQ(same.cdf(x), base.cdf(x));
  }
}

TEST(Distribution, TranslatePreservesVariance) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> c(-10.0, 10.0);
  for (const auto& d : zoo()) {
    const double v = variance(d);
    for (int k = 0; k < 20; ++k) {
      const double shift = c(gen);
      const auto t = translate(d, shift);
      EXPECT_NEAR(variance(t), v, 1e-12);
      EXPECT_NEAR(mean(t), mean(d) - shift, 1e-12);
    }
  }
}

TEST(Distribution, MixtureExamples) {
  const std::vector<Distribution> comps{uniform(0.0, 1.0), uniform(1.0, 2.0)};
  const auto m = mixture_of(comps);
  const auto u02 = uniform(0.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const double x = -0.5 + 3.0 * k / 99.0;
    EXPECT_NEAR(m.cdf(x), u02.cdf(x), 1e-10);
  }
  EXPECT_NEAR(variance(m), 1.0 / 3.0, 1e-9);

  const std::vector<Distribution> single{normal(0.0, 1.0)};
  EXPECT_TRUE(same_model(mixture_of(single), single[0]));

  EXPECT_THROW(mixture_of(std::span<const Distribution>{}), ArgumentError);
}

TEST(Distribution, MixtureCdfIsAverageOfComponents) {
  const std::vector<Distribution> comps{normal(-2.0, 1.0), uniform(0.0, 3.0), perturbed_uniform(0.1)};
  const auto m = mixture_of(comps);
  for (int k = 0; k <= 200; ++k) {
    const double x = -6.0 + 10.0 * k / 200.0;
    const double avg = (comps[0].cdf(x) + comps[1].cdf(x) + comps[2].cdf(x)) / 3.0;
    EXPECT_NEAR(m.cdf(x), avg, 1e-12);
  }
}

TEST(Distribution, RoundTripOnInteriorGrid) {
  const auto grid = interior_grid(512);
  for (const auto& d : zoo()) {
    double worst = 0.0;
    for (double p : grid) worst = std::max(worst, std::fabs(d.cdf(d.quantile(p)) - p));
    EXPECT_LE(worst, 1e-10) << to_string(d.kind());
  }
}

TEST(Distribution, QuantileStrictlyIncreasing) {
  const auto grid = interior_grid(1000);
  for (const auto& d : zoo()) {
    for (std::size_t k = 1; k < grid.size(); ++k) EXPECT_LT(d.quantile(grid[k - 1]), d.quantile(grid[k]));
  }
}

TEST(Distribution, TabulatedRejectsNonMonotoneValues) {
  try {
    tabulated_quantile({0.1, 0.5, 0.9}, {0.0, 2.0, 1.0});
    FAIL() << "expected InvariantViolation";
  } catch (const InvariantViolation& e) {
    EXPECT_NE(std::string(e.what()).find("non-monotone values at knot"), std::string::npos) << e.what();
  }
  EXPECT_THROW(tabulated_quantile({0.1, 0.5}, {1.0, 1.0}), InvariantViolation);
  EXPECT_THROW(tabulated_quantile({0.5, 0.1}, {1.0, 2.0}), InvariantViolation);
}

TEST(Distribution, TabulatedExtendsEndSegmentsLinearly) {
  const auto d = tabulated_quantile({0.25, 0.75}, {1.0, 2.0});
  EXPECT_DOUBLE_EQ(d.support().lo, 0.5);
  EXPECT_DOUBLE_EQ(d.support().hi, 2.5);
  EXPECT_NEAR(mean(d), 1.5, 1e-14);
  EXPECT_NEAR(variance(d), 4.0 / 12.0, 1e-14);
}

TEST(Distribution, UnboundedWithoutMomentsIsUnsupported) {
  FunctionalSpec spec;
  spec.cdf = [](double x) { return oracle::Phi(x); };
  spec.quantile = [](double p) { return oracle::Phi_inv(p); };
  spec.support = {-INFINITY, INFINITY};
  EXPECT_THROW(mean(from_functions(spec)), UnsupportedDistribution);
  spec.moments = Moments{0.0, 1.0};
  EXPECT_DOUBLE_EQ(variance(from_functions(spec)), 1.0);
}

TEST(Distribution, PartialMomentsMatchSimpson) {
  for (const auto& d : zoo()) {
    // Exact piecewise integrals exist for these kinds; the rest fall back to quadrature.
    if (d.kind() == DistributionKind::mixture || d.kind() == DistributionKind::warped) continue;
    const double a = 0.13, b = 0.61;
    const auto pm = d.partial_moments(a, b);
    const double q1 = oracle::simpson([&](double p) { return d.quantile(p); }, a, b, 20000);
    const double q2 = oracle::simpson([&](double p) { return std::pow(d.quantile(p), 2); }, a, b, 20000);
    EXPECT_NEAR(pm.first, q1, 1e-9) << to_string(d.kind());
    EXPECT_NEAR(pm.second, q2, 1e-9) << to_string(d.kind());
  }
}

TEST(Distribution, WarpedMomentsMatchSimpson) {
  const auto d = warped(normal(0.5, 1.0), {0.0, 0.2, 0.7, 1.0}, {0.0, 0.1, 0.8, 1.0});
  // On the middle segment phi is linear from 0.1 to 0.8, so the integral is a
  // rescaled partial moment of the base law.
  const double q1 = oracle::simpson([&](double p) { return d.quantile(p); }, 0.2, 0.7, 20000);
  const auto pm = normal(0.5, 1.0).partial_moments(0.1, 0.8);
  EXPECT_NEAR(q1, pm.first * (0.5 / 0.7), 1e-9);
}

TEST(Distribution, JsonRoundTrip) {
  for (const auto& d : zoo()) {
    const auto back = distribution_from_json(d.to_json());
    for (double p : interior_grid(50)) EXPECT_NEAR(back.quantile(p), d.quantile(p), 1e-12);
  }
  EXPECT_THROW(distribution_from_json({{"type", "cauchy"}}), ParseError);
}
