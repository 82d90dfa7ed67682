#include "sharpcal/kernels.hpp"

#include <exception>

#include "sharpcal/rng.hpp"

namespace sharpcal {

namespace {

// Runs body(k) for k in [0, count) either serially or under OpenMP and
// rethrows the first (lowest-index) exception afterwards.
template <typename Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<double> interior_grid(std::size_t m) {
  std::vector<double> grid(m);
  const double denom = static_cast<double>(m + 1);
  for (std::size_t k = 0; k < m; ++k) grid[k] = static_cast<double>(k + 1) / denom;
  return grid;
}

PitDraws draw_randomized_pit(const Scenario& s, std::size_t n, std::uint64_t seed, Execution exec) {
  PitDraws draws;
  draws.index.resize(n);
  draws.x.resize(n);
  draws.u.resize(n);
  const auto horizon = static_cast<std::uint64_t>(s.horizon());
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;

  for_each_index(chunks, exec, [&](std::size_t c) {
    RandomStream rng(seed, c);
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(n, begin + kChunkSize);
    for (std::size_t k = begin; k < end; ++k) {
      const auto i = static_cast<std::size_t>(rng.index(horizon));
      const double x = s.truth(i).quantile(rng.uniform_open());
      draws.index[k] = static_cast<std::uint32_t>(i);
      draws.x[k] = x;
      draws.u[k] = s.forecast(i).cdf(x);
    }
  });
  return draws;
}

std::vector<double> calibration_residuals(const Scenario& s, std::span<const double> grid, Execution exec) {
  std::vector<double> r(grid.size());
  const auto t = static_cast<double>(s.horizon());
  for_each_index(grid.size(), exec, [&](std::size_t k) {
    const double p = grid[k];
    double sum = 0.0;
    for (std::size_t i = 0; i < s.horizon(); ++i) sum += s.truth(i).cdf(s.forecast(i).quantile(p));
    r[k] = sum / t - p;
  });
  return r;
}

std::vector<double> theta_values(const Scenario& s, std::span<const double> grid, Execution exec) {
  std::vector<double> theta(grid.size());
  const auto t = static_cast<double>(s.horizon());
  for_each_index(grid.size(), exec, [&](std::size_t k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.horizon(); ++i) {
      const double q = s.forecast(i).quantile(grid[k]);
      sum += q * q;
    }
    theta[k] = sum / t;
  });
  return theta;
}

}  // namespace sharpcal
