#pragma once

// Data-parallel inner loops. Each kernel has a serial reference path and an
// OpenMP path; both walk the same fixed chunk decomposition with per-chunk
// random substreams, so their outputs are bit-identical.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <functional>
#include <span>
#include <vector>

#include "sharpcal/scenario.hpp"

namespace sharpcal {

enum class Execution { serial, parallel };

/// Samples per random substream.
inline constexpr std::size_t kChunkSize = 4096;

/// Draws of the randomized PIT: index I uniform on {0..T-1}, X ~ G_I by
/// inverse transform, U = F_I(X).
struct PitDraws {
  std::vector<std::uint32_t> index;
  std::vector<double> x;
  std::vector<double> u;
};

PitDraws draw_randomized_pit(const Scenario& s, std::size_t n, std::uint64_t seed,
                             Execution exec = Execution::parallel);

/// r(p) = (1/T) sum_i G_i(F_i^{-1}(p)) - p at each grid point.
std::vector<double> calibration_residuals(const Scenario& s, std::span<const double> grid,
                                          Execution exec = Execution::parallel);

/// theta_T(u) = (1/T) sum_i F_i^{-1}(u)^2 at each grid point.
std::vector<double> theta_values(const Scenario& s, std::span<const double> grid,
                                 Execution exec = Execution::parallel);

/// out[j] = task(j) for j in [0, count); used for independent candidate
/// evaluations. The task must be safe to call concurrently.
template <typename Result>
std::vector<Result> map_indexed(std::size_t count, const std::function<Result(std::size_t)>& task,
                                Execution exec = Execution::parallel) {
  std::vector<std::optional<Result>> staged(count);
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t j) {
    try {
      staged[j].emplace(task(j));
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };
  if (exec == Execution::serial) {
    for (std::size_t j = 0; j < count; ++j) run(j);
  } else {
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t j = 0; j < n; ++j) run(static_cast<std::size_t>(j));
  }
  std::vector<Result> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    if (errors[j]) std::rethrow_exception(errors[j]);
    out.push_back(std::move(*staged[j]));
  }
  return out;
}

/// Interior grid k/(m+1), k = 1..m.
std::vector<double> interior_grid(std::size_t m);

}  // namespace sharpcal
