#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpcal/calibration.hpp"
#include "sharpcal/kernels.hpp"
#include "sharpcal/scenario.hpp"
#include "sharpcal/sharpness.hpp"

namespace sharpcal {

inline constexpr std::size_t kMinOracleSamples = 10'000;
inline constexpr std::size_t kDefaultUBins = 20;
inline constexpr std::size_t kDefaultBasisSize = 3;
inline constexpr std::size_t kDefaultCompletionGrid = 512;
/// Candidates with gap below this count as violations of the variance inequality.
inline constexpr double kProbeGapTolerance = 1e-6;

// ---------------------------------------------------------------------------
// Monte Carlo oracle for H(Z,U)

struct McOracleReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t u_bins = 0;
  std::size_t horizon = 0;

  double mean_h_mc = 0.0;
  double var_h_mc = 0.0;
  double var_h_mc_se = 0.0;

  std::vector<std::size_t> bin_counts;
  /// P(Z = i | U in bin b), indexed [b][i], with binomial standard errors.
  std::vector<std::vector<double>> conditional_z_given_u;
  std::vector<std::vector<double>> conditional_se;
  /// E(H | U in bin b) with standard errors.
  std::vector<double> e_h_given_u;
  std::vector<double> e_h_given_u_se;

  /// Analytic reference values from the two decompositions.
  double var_h_z = 0.0;
  double var_h_u_formula = 0.0;

  nlohmann::json to_json() const;
  /// "bin_lo,bin_hi,count,p_1,...,p_T" rows.
  std::string conditional_csv() const;
};

/// Samples (I, X_I) as the randomized PIT does, records H = X_I and
/// U = F_I(X_I), and estimates Var H plus the conditional law of the index
/// given U. Requires a calibrated scenario and n >= 10^4.
McOracleReport mc_oracle(const Scenario& s, std::size_t n, std::size_t u_bins, std::uint64_t seed,
                         Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Calibration completion and sharpness search

/// Solves the finite calibration condition for the last forecast:
///   F_T^{-1}(p) = G_T^{-1}(T p - sum_{i<T} G_i(F_i^{-1}(p)))
/// tabulated on p_k = k/(m+1) as a probability warp of G_T. Throws
/// InfeasibleCompletion (with the offending p) when the argument leaves (0,1)
/// or the warp is not strictly increasing.
Scenario complete_calibration(std::span<const Distribution> partial_forecasts,
                              std::span<const Distribution> truths,
                              std::size_t grid_size = kDefaultCompletionGrid);

struct ProbeOptions {
  std::size_t budget = 500;
  std::uint64_t seed = 0;
  std::size_t basis_size = kDefaultBasisSize;
  std::size_t grid_size = kDefaultCompletionGrid;
  Execution execution = Execution::parallel;
};

struct ProbeCandidate {
  std::size_t index = 0;
  double avg_var_f = 0.0;
  double gap = 0.0;
  double max_abs_residual = 0.0;
};

struct ProbeResult {
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::size_t basis_size = 0;
  std::size_t feasible = 0;
  std::size_t infeasible = 0;
  double avg_var_g = 0.0;
  double best_avg_var_f = 0.0;
  double margin_vs_avg_var_g = 0.0;
  double min_gap = 0.0;
  std::size_t gap_violations = 0;
  bool all_candidates_calibrated = true;
  std::size_t best_index = 0;
  /// Sine coefficients of the best candidate, [forecast][basis term].
  std::vector<std::vector<double>> best_coefficients;
  std::optional<Scenario> best_scenario;
  std::vector<ProbeCandidate> candidates;

  nlohmann::json to_json() const;
};

/// Seeded random search over sine perturbations of the ideal quantiles of the
/// first T-1 forecasts, each completed to an exactly calibrated scenario.
/// Candidate j draws from substream j, so serial and parallel runs agree.
ProbeResult minimize_sharpness(std::span<const Distribution> truths, const ProbeOptions& options);

// ---------------------------------------------------------------------------
// Equality-condition scan

struct ScanRow {
  std::string id;
  bool calibrated = false;
  bool equality_condition_met = false;
  double gap = 0.0;
  bool tension = false;  // equal mean shifts together with gap > 1e-4
  double max_abs_residual = 0.0;
};

struct ScanTable {
  std::vector<ScanRow> rows;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

ScanTable equality_gap_scan(std::span<const std::pair<std::string, Scenario>> scenarios,
                            const SharpnessOptions& options = {});

}  // namespace sharpcal
