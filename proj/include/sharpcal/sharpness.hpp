#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpcal/calibration.hpp"
#include "sharpcal/scenario.hpp"

namespace sharpcal {

inline constexpr double kEqualityTolerance = 1e-9;
inline constexpr double kInequalityTolerance = 1e-9;
/// Gap above which "equal mean shifts" and "positive gap" are reported together.
inline constexpr double kTensionGap = 1e-4;
inline constexpr double kAsymptoticSlack = 1e-6;
inline constexpr std::size_t kDefaultThetaGrid = 512;

/// H(z, u) for z = e_i: the quantile F_i^{-1}(u). `i` is zero-based.
double h_eval(const Scenario& s, std::size_t i, double u);

/// Conditioning on the index: Var H = avg Var(G_i) + dispersion of the means.
struct ZDecomposition {
  double var_h_z = 0.0;
  double avg_var_g = 0.0;
  double mu_dispersion = 0.0;
  std::vector<double> mu;
  double mu_bar = 0.0;
};

/// Conditioning on the PIT level with Y_i = F_i^{-1}(U), U uniform.
struct UDecomposition {
  double var_h_u_formula = 0.0;  // (1/T) sum E Y_i^2 - ((1/T) sum E Y_i)^2
  double avg_var_f = 0.0;
  double alpha_dispersion = 0.0;
  std::vector<double> alpha;
  double alpha_bar = 0.0;
};

ZDecomposition z_decomposition(const Scenario& s, const QuadratureRule& rule = default_rule());
UDecomposition u_decomposition(const Scenario& s, const QuadratureRule& rule = default_rule());

struct DecompositionReport {
  ZDecomposition z;
  UDecomposition u;
  double gap = 0.0;  // avg_var_f - avg_var_g
  std::vector<double> mean_shifts;  // E(G_i) - E(F_i)
  double max_shift_spread = 0.0;    // max_i |shift_i - shift_1|
  bool inequality_holds = false;
  bool equality_condition_met = false;
  double max_abs_residual = 0.0;
  double calibration_tolerance = 0.0;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

struct SharpnessOptions {
  CalibrationOptions calibration;
  double equality_tolerance = kEqualityTolerance;
  const QuadratureRule* rule = nullptr;  // default_rule() when null
};

/// Full decomposition report for a calibrated scenario. Throws NotCalibrated
/// (carrying the residual report) when the calibration hypothesis fails.
/// The two decomposition values are reported side by side, never asserted equal.
DecompositionReport verify_sharpness(const Scenario& s, const SharpnessOptions& options = {});

/// Same report without the calibration precondition (diagnostic use).
DecompositionReport decompose(const Scenario& s, const SharpnessOptions& options = {});

/// F_i* = translate(F_i, alpha_i), G_i* = translate(G_i, alpha_i).
Scenario recenter(const Scenario& s, const QuadratureRule& rule = default_rule());

struct ThetaProfile {
  std::vector<double> u_grid;
  std::vector<double> theta;
  std::optional<std::vector<double>> reference;
  std::optional<double> sup_deviation;

  nlohmann::json to_json() const;
  static ThetaProfile from_json(const nlohmann::json& j);
};

/// theta_T(u) = (1/T) sum F_i^{-1}(u)^2 on u_k = k/(m+1). Requires bounded
/// forecast supports (UnsupportedDistribution otherwise).
ThetaProfile theta_profile(const Scenario& s, std::size_t u_grid_size = kDefaultThetaGrid,
                           const ThetaProfile* reference = nullptr,
                           Execution exec = Execution::parallel);

struct AsymptoticRow {
  std::size_t horizon = 0;
  double avg_var_f = 0.0;
  double avg_var_g = 0.0;
  double margin = 0.0;
  double theta_sup_deviation = 0.0;  // against the previous checkpoint
};

struct AsymptoticCheck {
  std::vector<AsymptoticRow> rows;
  bool inequality_holds_asymptotically = false;
  bool theta_stable = false;
  std::vector<std::string> hypothesis_violations;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Per-checkpoint comparison of averaged variances and theta_T. The verdict is
/// min avg_var_f - max avg_var_g >= -1e-6 over the checkpoints.
AsymptoticCheck asymptotic_check(const ScenarioGenerator& generator, std::span<const std::size_t> checkpoints,
                                 std::size_t u_grid_size = kDefaultThetaGrid,
                                 const QuadratureRule& rule = default_rule());

}  // namespace sharpcal
