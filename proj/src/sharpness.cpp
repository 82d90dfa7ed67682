#include "sharpcal/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sharpcal {

namespace {

double average(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double dispersion(std::span<const double> xs, double centre) {
  double sum = 0.0;
  for (double x : xs) sum += (x - centre) * (x - centre);
  return sum / static_cast<double>(xs.size());
}

}  // namespace

double h_eval(const Scenario& s, std::size_t i, double u) {
  if (i >= s.horizon()) {
    throw ArgumentError("index " + std::to_string(i) + " out of range for T = " + std::to_string(s.horizon()));
  }
  if (!(u > 0.0 && u < 1.0)) throw ArgumentError("u must lie in (0,1)");
  return s.forecast(i).quantile(u);
}

ZDecomposition z_decomposition(const Scenario& s, const QuadratureRule& rule) {
  ZDecomposition z;
  std::vector<double> vars;
  for (const auto& g : s.truths()) {
    const auto m = g.moments(rule);
    z.mu.push_back(m.mean);
    vars.push_back(m.variance);
  }
  z.avg_var_g = average(vars);
  z.mu_bar = average(z.mu);
  z.mu_dispersion = dispersion(z.mu, z.mu_bar);
  z.var_h_z = z.avg_var_g + z.mu_dispersion;
  return z;
}

UDecomposition u_decomposition(const Scenario& s, const QuadratureRule& rule) {
  UDecomposition u;
  std::vector<double> vars;
  std::vector<double> second;
  for (const auto& f : s.forecasts()) {
    const auto m = f.moments(rule);
    u.alpha.push_back(m.mean);
    vars.push_back(m.variance);
    second.push_back(m.second_raw());
  }
  u.avg_var_f = average(vars);
  u.alpha_bar = average(u.alpha);
  u.alpha_dispersion = dispersion(u.alpha, u.alpha_bar);
  // Computed from raw second moments so the identity with avg_var_f +
  // alpha_dispersion is a genuine numerical check.
  u.var_h_u_formula = average(second) - u.alpha_bar * u.alpha_bar;
  return u;
}

nlohmann::json DecompositionReport::to_json() const {
  return {{"avg_var_G", z.avg_var_g},
          {"avg_var_F", u.avg_var_f},
          {"mu", z.mu},
          {"mu_bar", z.mu_bar},
          {"alpha", u.alpha},
          {"alpha_bar", u.alpha_bar},
          {"mu_dispersion", z.mu_dispersion},
          {"alpha_dispersion", u.alpha_dispersion},
          {"var_H_z", z.var_h_z},
          {"var_H_u_formula", u.var_h_u_formula},
          {"gap", gap},
          {"mean_shifts", mean_shifts},
          {"max_shift_spread", max_shift_spread},
          {"inequality_holds", inequality_holds},
          {"equality_condition_met", equality_condition_met},
          {"max_abs_residual", max_abs_residual},
          {"calibration_tolerance", calibration_tolerance},
          {"notes", notes}};
}

DecompositionReport decompose(const Scenario& s, const SharpnessOptions& options) {
  const QuadratureRule& rule = options.rule ? *options.rule : default_rule();
  DecompositionReport r;
  r.z = z_decomposition(s, rule);
  r.u = u_decomposition(s, rule);
  r.gap = r.u.avg_var_f - r.z.avg_var_g;
  for (std::size_t i = 0; i < s.horizon(); ++i) r.mean_shifts.push_back(r.z.mu[i] - r.u.alpha[i]);
  for (double shift : r.mean_shifts) {
    r.max_shift_spread = std::max(r.max_shift_spread, std::abs(shift - r.mean_shifts.front()));
  }
  r.inequality_holds = r.gap >= -kInequalityTolerance;
  r.equality_condition_met = r.max_shift_spread <= options.equality_tolerance;

  if (!r.inequality_holds) {
    std::ostringstream os;
    os << "average forecast variance falls below average truth variance by " << -r.gap;
    r.notes.push_back(os.str());
  }
  if (r.equality_condition_met && r.gap > kTensionGap) {
    std::ostringstream os;
    os << "mean shifts E(G_i)-E(F_i) are all equal, yet the variance gap is " << r.gap
       << " > 0: the equal-shift condition does not force equality for this scenario";
    r.notes.push_back(os.str());
  }
  if (!r.equality_condition_met && std::abs(r.gap) <= kInequalityTolerance) {
    r.notes.emplace_back("variance gap vanishes although the mean shifts differ");
  }
  return r;
}

DecompositionReport verify_sharpness(const Scenario& s, const SharpnessOptions& options) {
  auto cal = finite_calibration_residual(s, options.calibration);
  if (!cal.calibrated) throw NotCalibrated(std::move(cal));
  auto r = decompose(s, options);
  r.max_abs_residual = cal.max_abs_residual;
  r.calibration_tolerance = cal.tolerance;
  return r;
}

Scenario recenter(const Scenario& s, const QuadratureRule& rule) {
  std::vector<Distribution> f;
  std::vector<Distribution> g;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.horizon(); ++i) {
    const double alpha = mean(s.forecast(i), rule);
    f.push_back(translate(s.forecast(i), alpha));
    g.push_back(translate(s.truth(i), alpha));
    if (s.bounds()) {
      lo = std::min(lo, s.bounds()->lo - alpha);
      hi = std::max(hi, s.bounds()->hi - alpha);
    }
  }
  std::optional<Support> bounds;
  if (s.bounds()) bounds = Support{lo, hi};
  return Scenario(std::move(f), std::move(g), bounds);
}

nlohmann::json ThetaProfile::to_json() const {
  nlohmann::json j{{"u_grid", u_grid}, {"theta", theta}};
  if (reference) j["reference"] = *reference;
  if (sup_deviation) j["sup_deviation"] = *sup_deviation;
  return j;
}

ThetaProfile ThetaProfile::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("u_grid") || !j.contains("theta")) {
    throw ParseError("theta profile needs 'u_grid' and 'theta'");
  }
  ThetaProfile p;
  try {
    p.u_grid = j.at("u_grid").get<std::vector<double>>();
    p.theta = j.at("theta").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("theta profile: ") + e.what());
  }
  if (p.u_grid.size() != p.theta.size()) throw ParseError("theta profile: grid and values differ in length");
  return p;
}

ThetaProfile theta_profile(const Scenario& s, std::size_t u_grid_size, const ThetaProfile* reference,
                           Execution exec) {
  if (u_grid_size < 1) throw ArgumentError("theta grid size must be >= 1");
  if (!s.forecasts_bounded()) {
    throw UnsupportedDistribution("theta profile needs every forecast to have bounded support");
  }
  ThetaProfile p;
  p.u_grid = interior_grid(u_grid_size);
  p.theta = theta_values(s, p.u_grid, exec);
  if (reference) {
    if (reference->u_grid.size() != p.u_grid.size()) {
      throw ArgumentError("reference theta profile uses a different grid size");
    }
    double dev = 0.0;
    for (std::size_t k = 0; k < p.theta.size(); ++k) {
      if (std::abs(reference->u_grid[k] - p.u_grid[k]) > 1e-15) {
        throw ArgumentError("reference theta profile uses a different grid");
      }
      dev = std::max(dev, std::abs(p.theta[k] - reference->theta[k]));
    }
    p.reference = reference->theta;
    p.sup_deviation = dev;
  }
  return p;
}

nlohmann::json AsymptoticCheck::to_json() const {
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& r : rows) {
    traj.push_back({{"T", r.horizon},
                    {"avg_var_F", r.avg_var_f},
                    {"avg_var_G", r.avg_var_g},
                    {"margin", r.margin},
                    {"theta_dev", r.theta_sup_deviation}});
  }
  return {{"trajectory", std::move(traj)},
          {"inequality_holds_asymptotically", inequality_holds_asymptotically},
          {"theta_stable", theta_stable},
          {"hypothesis_violations", hypothesis_violations}};
}

std::string AsymptoticCheck::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "T,avg_var_F,avg_var_G,margin,theta_dev\n";
  for (const auto& r : rows) {
    os << r.horizon << ',' << r.avg_var_f << ',' << r.avg_var_g << ',' << r.margin << ','
       << r.theta_sup_deviation << '\n';
  }
  return os.str();
}

AsymptoticCheck asymptotic_check(const ScenarioGenerator& generator, std::span<const std::size_t> checkpoints,
                                 std::size_t u_grid_size, const QuadratureRule& rule) {
  if (checkpoints.empty()) throw ArgumentError("at least one checkpoint is required");
  for (std::size_t k = 1; k < checkpoints.size(); ++k) {
    if (checkpoints[k] <= checkpoints[k - 1]) throw ArgumentError("checkpoints must be strictly increasing");
  }
  AsymptoticCheck check;
  check.theta_stable = true;
  std::optional<ThetaProfile> previous;
  double prev_dev = 0.0;
  double min_f = std::numeric_limits<double>::infinity();
  double max_g = -std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const Scenario s = generator(checkpoints[k]);
    if (!s.forecasts_bounded()) {
      throw UnsupportedDistribution("generator produced unbounded forecast support at T = " +
                                    std::to_string(checkpoints[k]));
    }
    AsymptoticRow row;
    row.horizon = checkpoints[k];
    row.avg_var_f = u_decomposition(s, rule).avg_var_f;
    row.avg_var_g = z_decomposition(s, rule).avg_var_g;
    row.margin = row.avg_var_f - row.avg_var_g;
    auto profile = theta_profile(s, u_grid_size, previous ? &*previous : nullptr);
    row.theta_sup_deviation = profile.sup_deviation.value_or(0.0);
    if (k >= 2 && row.theta_sup_deviation > (1.0 + kTrendSlack) * prev_dev &&
        row.theta_sup_deviation > kAsymptoticSlack) {
      check.theta_stable = false;
    }
    prev_dev = row.theta_sup_deviation;
    profile.reference.reset();
    profile.sup_deviation.reset();
    previous = std::move(profile);
    min_f = std::min(min_f, row.avg_var_f);
    max_g = std::max(max_g, row.avg_var_g);
    check.rows.push_back(row);
  }
  if (check.rows.size() >= 2 && check.rows.back().theta_sup_deviation > kAsymptoticSlack &&
      check.rows.back().theta_sup_deviation >= check.rows[1].theta_sup_deviation) {
    check.theta_stable = false;
  }
  if (!check.theta_stable) {
    check.hypothesis_violations.emplace_back(
        "theta_T does not settle across checkpoints (uniform convergence not observed)");
  }
  check.inequality_holds_asymptotically = min_f - max_g >= -kAsymptoticSlack;
  return check;
}

}  // namespace sharpcal
