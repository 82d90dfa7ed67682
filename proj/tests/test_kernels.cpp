#include <gtest/gtest.h>

#include "sharpcal/kernels.hpp"
#include "sharpcal/probe.hpp"
#include "sharpcal/rng.hpp"
#include "sharpcal/scenarios.hpp"

using namespace sharpcal;

// The OpenMP paths must reproduce the serial reference bit for bit.

TEST(Kernels, PitDrawsSerialEqualsParallel) {
  const auto s = make_climatological(random_truths(5, 3));
  // Straddle several chunks with a ragged tail.
  const std::size_t n = 3 * kChunkSize + 17;
  const auto a = draw_randomized_pit(s, n, 11, Execution::serial);
  const auto b = draw_randomized_pit(s, n, 11, Execution::parallel);
  EXPECT_EQ(a.index, b.index);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.u, b.u);
}

TEST(Kernels, ResidualsAndThetaSerialEqualsParallel) {
  const auto s = make_block_repeat(make_compensated_pair(0.07), 6);
  const auto grid = interior_grid(1000);
  EXPECT_EQ(calibration_residuals(s, grid, Execution::serial), calibration_residuals(s, grid, Execution::parallel));
  EXPECT_EQ(theta_values(s, grid, Execution::serial), theta_values(s, grid, Execution::parallel));
}

TEST(Kernels, McOracleSerialEqualsParallel) {
  const auto s = make_compensated_pair(0.1);
  const auto a = mc_oracle(s, 50000, 10, 3, Execution::serial);
  const auto b = mc_oracle(s, 50000, 10, 3, Execution::parallel);
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Kernels, MapIndexedRethrowsLowestFailure) {
  auto task = [](std::size_t j) -> int {
    if (j == 7 || j == 3) throw std::runtime_error("fail " + std::to_string(j));
    return static_cast<int>(j);
  };
  for (auto exec : {Execution::serial, Execution::parallel}) {
    try {
      map_indexed<int>(10, task, exec);
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "fail 3");
    }
  }
}

TEST(Kernels, InteriorGrid) {
  const auto g = interior_grid(3);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 0.25);
  EXPECT_DOUBLE_EQ(g[2], 0.75);
}

TEST(Rng, StreamsAreIndependentAndOpen) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  RandomStream r(5, 0);
  for (int k = 0; k < 10000; ++k) {
    const double u = r.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.index(3), 3u);
  }
}
