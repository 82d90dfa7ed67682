#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpcal/errors.hpp"
#include "sharpcal/kernels.hpp"
#include "sharpcal/scenario.hpp"

namespace sharpcal {

inline constexpr double kAnalyticCalibrationTolerance = 1e-9;
inline constexpr double kTabulatedCalibrationTolerance = 1e-6;
inline constexpr std::size_t kDefaultCalibrationGrid = 512;
/// Asymptotic 5% critical value of the Kolmogorov-Smirnov statistic (times sqrt(n)).
inline constexpr double kKsCritical5Percent = 1.358;
/// Relative slack allowed between successive checkpoint residuals.
inline constexpr double kTrendSlack = 0.10;

/// 1e-6 when any law in the scenario is tabulated, 1e-9 otherwise.
double default_calibration_tolerance(const Scenario& s);

struct CalibrationOptions {
  std::size_t grid_size = kDefaultCalibrationGrid;
  std::optional<double> tolerance;  // default_calibration_tolerance when unset
  Execution execution = Execution::parallel;
};

struct CalibrationReport {
  std::vector<double> p_grid;
  std::vector<double> residuals;
  double max_abs_residual = 0.0;
  double worst_p = 0.0;
  double tolerance = 0.0;
  bool calibrated = false;

  nlohmann::json to_json() const;
};

/// Residuals of the finite calibration condition on p_k = k/(grid+1).
CalibrationReport finite_calibration_residual(const Scenario& s, const CalibrationOptions& options = {});

/// Raised by operations whose hypothesis is finite calibration.
class NotCalibrated : public Error {
 public:
  explicit NotCalibrated(CalibrationReport report);
  const CalibrationReport& report() const noexcept { return report_; }

 private:
  CalibrationReport report_;
};

/// Builds the horizon-T member of a scenario family.
using ScenarioGenerator = std::function<Scenario(std::size_t)>;

struct TrendPoint {
  std::size_t horizon = 0;
  double max_abs_residual = 0.0;
};

struct CalibrationTrend {
  std::vector<TrendPoint> points;
  double tolerance = 0.0;
  bool nonincreasing = false;
  bool asymptotically_calibrated = false;

  nlohmann::json to_json() const;
};

/// One residual summary per checkpoint. Flags the generator as calibrated when
/// residuals are nonincreasing within 10% (values under the tolerance count
/// as equal) and the last one is within tolerance.
CalibrationTrend asymptotic_calibration_trend(const ScenarioGenerator& generator,
                                              std::span<const std::size_t> checkpoints,
                                              const CalibrationOptions& options = {});

struct PitSample {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
  double ks_statistic = 0.0;
  double ks_threshold = 0.0;
  bool reject = false;

  nlohmann::json to_json(bool include_values = true) const;
};

/// sup_x |F_n(x) - x| of the empirical CDF against Uniform(0,1).
double ks_statistic_uniform(std::span<const double> values);

/// Seeded draws of U(T) = F_I(X_I) with the KS uniformity summary.
PitSample sample_randomized_pit(const Scenario& s, std::size_t n, std::uint64_t seed,
                                Execution exec = Execution::parallel,
                                double ks_critical = kKsCritical5Percent);

/// Counts over equal-width bins of (0,1); values at 1 fall in the last bin.
std::vector<std::size_t> pit_histogram(const PitSample& sample, std::size_t bins);

/// "bin_lo,bin_hi,count" rows.
std::string histogram_csv(std::span<const std::size_t> counts);

}  // namespace sharpcal
