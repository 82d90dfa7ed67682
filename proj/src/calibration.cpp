#include "sharpcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sharpcal {

double default_calibration_tolerance(const Scenario& s) {
  return s.is_tabulated() ? kTabulatedCalibrationTolerance : kAnalyticCalibrationTolerance;
}

nlohmann::json CalibrationReport::to_json() const {
  return {{"p_grid", p_grid},
          {"residuals", residuals},
          {"max_abs_residual", max_abs_residual},
          {"worst_p", worst_p},
          {"tolerance", tolerance},
          {"calibrated", calibrated}};
}

CalibrationReport finite_calibration_residual(const Scenario& s, const CalibrationOptions& options) {
  if (options.grid_size < 2) throw ArgumentError("calibration grid size must be >= 2");
  CalibrationReport report;
  report.p_grid = interior_grid(options.grid_size);
  report.residuals = calibration_residuals(s, report.p_grid, options.execution);
  for (std::size_t k = 0; k < report.residuals.size(); ++k) {
    const double r = report.residuals[k];
    if (!std::isfinite(r)) throw NumericError("non-finite calibration residual at p = " + std::to_string(report.p_grid[k]));
    if (std::abs(r) > report.max_abs_residual) {
      report.max_abs_residual = std::abs(r);
      report.worst_p = report.p_grid[k];
    }
  }
  report.tolerance = options.tolerance.value_or(default_calibration_tolerance(s));
  report.calibrated = report.max_abs_residual <= report.tolerance;
  return report;
}

NotCalibrated::NotCalibrated(CalibrationReport report)
    : Error([&] {
        std::ostringstream os;
        os << "scenario is not calibrated: max |r(p)| = " << report.max_abs_residual << " at p = "
           << report.worst_p << " exceeds tolerance " << report.tolerance;
        return os.str();
      }()),
      report_(std::move(report)) {}

nlohmann::json CalibrationTrend::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"T", p.horizon}, {"max_abs_residual", p.max_abs_residual}});
  return {{"checkpoints", std::move(pts)},
          {"tolerance", tolerance},
          {"nonincreasing", nonincreasing},
          {"asymptotically_calibrated", asymptotically_calibrated}};
}

CalibrationTrend asymptotic_calibration_trend(const ScenarioGenerator& generator,
                                              std::span<const std::size_t> checkpoints,
                                              const CalibrationOptions& options) {
  if (checkpoints.empty()) throw ArgumentError("at least one checkpoint is required");
  for (std::size_t k = 1; k < checkpoints.size(); ++k) {
    if (checkpoints[k] <= checkpoints[k - 1]) throw ArgumentError("checkpoints must be strictly increasing");
  }
  CalibrationTrend trend;
  trend.nonincreasing = true;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const Scenario s = generator(checkpoints[k]);
    const auto report = finite_calibration_residual(s, options);
    // The strictest tolerance seen governs the verdict.
    trend.tolerance = k == 0 ? report.tolerance : std::min(trend.tolerance, report.tolerance);
    if (k > 0) {
      const double prev = trend.points.back().max_abs_residual;
      const double cur = report.max_abs_residual;
      if (cur > (1.0 + kTrendSlack) * prev && cur > report.tolerance) trend.nonincreasing = false;
    }
    trend.points.push_back({checkpoints[k], report.max_abs_residual});
  }
  trend.asymptotically_calibrated =
      trend.nonincreasing && trend.points.back().max_abs_residual <= trend.tolerance;
  return trend;
}

nlohmann::json PitSample::to_json(bool include_values) const {
  nlohmann::json j{{"n", n},
                   {"seed", seed},
                   {"ks_statistic", ks_statistic},
                   {"ks_threshold", ks_threshold},
                   {"reject", reject}};
  if (include_values) j["values"] = values;
  return j;
}

double ks_statistic_uniform(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double x = std::clamp(sorted[i], 0.0, 1.0);
    const double above = static_cast<double>(i + 1) / n - x;
    const double below = x - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

PitSample sample_randomized_pit(const Scenario& s, std::size_t n, std::uint64_t seed, Execution exec,
                                double ks_critical) {
  if (n < 1) throw ArgumentError("PIT sample size must be >= 1");
  PitSample sample;
  sample.n = n;
  sample.seed = seed;
  sample.values = draw_randomized_pit(s, n, seed, exec).u;
  sample.ks_statistic = ks_statistic_uniform(sample.values);
  sample.ks_threshold = ks_critical / std::sqrt(static_cast<double>(n));
  sample.reject = sample.ks_statistic > sample.ks_threshold;
  return sample;
}

std::vector<std::size_t> pit_histogram(const PitSample& sample, std::size_t bins) {
  if (bins < 1) throw ArgumentError("histogram needs at least one bin");
  std::vector<std::size_t> counts(bins, 0);
  const auto b = static_cast<double>(bins);
  for (double v : sample.values) {
    const double pos = std::floor(v * b);
    std::size_t k = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
    counts[std::min(k, bins - 1)] += 1;
  }
  return counts;
}

std::string histogram_csv(std::span<const std::size_t> counts) {
  std::ostringstream os;
  os.precision(17);
  os << "bin_lo,bin_hi,count\n";
  const auto b = static_cast<double>(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    os << static_cast<double>(k) / b << ',' << static_cast<double>(k + 1) / b << ',' << counts[k] << '\n';
  }
  return os.str();
}

}  // namespace sharpcal
