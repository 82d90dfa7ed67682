#include "sharpcal/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sharpcal/rng.hpp"
#include "sharpcal/scenarios.hpp"

namespace sharpcal {

// --- Monte Carlo oracle ----------------------------------------------------

nlohmann::json McOracleReport::to_json() const {
  return {{"n", n},
          {"seed", seed},
          {"u_bins", u_bins},
          {"T", horizon},
          {"mean_H_mc", mean_h_mc},
          {"var_H_mc", var_h_mc},
          {"var_H_mc_se", var_h_mc_se},
          {"var_H_z", var_h_z},
          {"var_H_u_formula", var_h_u_formula},
          {"bin_counts", bin_counts},
          {"conditional_z_given_u", conditional_z_given_u},
          {"conditional_se", conditional_se},
          {"e_h_given_u", e_h_given_u},
          {"e_h_given_u_se", e_h_given_u_se}};
}

std::string McOracleReport::conditional_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "bin_lo,bin_hi,count";
  for (std::size_t i = 0; i < horizon; ++i) os << ",p_" << (i + 1);
  os << '\n';
  const auto b = static_cast<double>(u_bins);
  for (std::size_t k = 0; k < u_bins; ++k) {
    os << static_cast<double>(k) / b << ',' << static_cast<double>(k + 1) / b << ',' << bin_counts[k];
    for (double f : conditional_z_given_u[k]) os << ',' << f;
    os << '\n';
  }
  return os.str();
}

McOracleReport mc_oracle(const Scenario& s, std::size_t n, std::size_t u_bins, std::uint64_t seed,
                         Execution exec) {
  if (n < kMinOracleSamples) throw ArgumentError("MC oracle needs n >= 10^4");
  if (u_bins < 1) throw ArgumentError("MC oracle needs at least one U bin");
  auto cal = finite_calibration_residual(s);
  if (!cal.calibrated) throw NotCalibrated(std::move(cal));

  const auto draws = draw_randomized_pit(s, n, seed, exec);
  const std::size_t t = s.horizon();

  McOracleReport r;
  r.n = n;
  r.seed = seed;
  r.u_bins = u_bins;
  r.horizon = t;

  // Two passes in sample order keep the statistics deterministic.
  double sum = 0.0;
  for (double x : draws.x) sum += x;
  const auto nd = static_cast<double>(n);
  r.mean_h_mc = sum / nd;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : draws.x) {
    const double d = (x - r.mean_h_mc) * (x - r.mean_h_mc);
    m2 += d;
    m4 += d * d;
  }
  r.var_h_mc = m2 / (nd - 1.0);
  const double central4 = m4 / nd;
  const double central2 = m2 / nd;
  r.var_h_mc_se = std::sqrt(std::max(0.0, central4 - central2 * central2) / nd);

  r.bin_counts.assign(u_bins, 0);
  std::vector<std::vector<std::size_t>> index_counts(u_bins, std::vector<std::size_t>(t, 0));
  std::vector<double> bin_sum(u_bins, 0.0);
  const auto b = static_cast<double>(u_bins);
  std::vector<std::size_t> bin_of(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pos = std::floor(draws.u[k] * b);
    const std::size_t bin = std::min(pos <= 0.0 ? 0 : static_cast<std::size_t>(pos), u_bins - 1);
    bin_of[k] = bin;
    r.bin_counts[bin] += 1;
    index_counts[bin][draws.index[k]] += 1;
    bin_sum[bin] += draws.x[k];
  }
  std::vector<double> bin_m2(u_bins, 0.0);
  r.e_h_given_u.assign(u_bins, 0.0);
  for (std::size_t k = 0; k < u_bins; ++k) {
    if (r.bin_counts[k] > 0) r.e_h_given_u[k] = bin_sum[k] / static_cast<double>(r.bin_counts[k]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double d = draws.x[k] - r.e_h_given_u[bin_of[k]];
    bin_m2[bin_of[k]] += d * d;
  }

  r.conditional_z_given_u.assign(u_bins, std::vector<double>(t, 0.0));
  r.conditional_se.assign(u_bins, std::vector<double>(t, 0.0));
  r.e_h_given_u_se.assign(u_bins, 0.0);
  for (std::size_t k = 0; k < u_bins; ++k) {
    const auto c = static_cast<double>(r.bin_counts[k]);
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < t; ++i) {
      const double f = static_cast<double>(index_counts[k][i]) / c;
      r.conditional_z_given_u[k][i] = f;
      r.conditional_se[k][i] = std::sqrt(f * (1.0 - f) / c);
    }
    if (c > 1.0) r.e_h_given_u_se[k] = std::sqrt(bin_m2[k] / (c - 1.0) / c);
  }

  r.var_h_z = z_decomposition(s).var_h_z;
  r.var_h_u_formula = u_decomposition(s).var_h_u_formula;
  return r;
}

// --- calibration completion ------------------------------------------------

Scenario complete_calibration(std::span<const Distribution> partial_forecasts,
                              std::span<const Distribution> truths, std::size_t grid_size) {
  const std::size_t t = truths.size();
  if (t < 2) throw ArgumentError("calibration completion needs T >= 2");
  if (partial_forecasts.size() + 1 != t) {
    throw ArgumentError("calibration completion needs exactly T-1 partial forecasts");
  }
  if (grid_size < 2) throw ArgumentError("completion grid size must be >= 2");

  const auto grid = interior_grid(grid_size);
  std::vector<double> knots;
  std::vector<double> phi;
  knots.reserve(grid_size + 2);
  phi.reserve(grid_size + 2);
  knots.push_back(0.0);
  phi.push_back(0.0);
  const auto td = static_cast<double>(t);
  for (double p : grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t; ++i) sum += truths[i].cdf(partial_forecasts[i].quantile(p));
    const double arg = td * p - sum;
    if (!(arg > 0.0 && arg < 1.0)) {
      std::ostringstream os;
      os << "infeasible completion: argument " << arg << " leaves (0,1) at p = " << p;
      throw InfeasibleCompletion(os.str(), p);
    }
    knots.push_back(p);
    phi.push_back(arg);
  }
  knots.push_back(1.0);
  phi.push_back(1.0);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    if (!(phi[k + 1] - phi[k] >= kMinQuantileSlope * (knots[k + 1] - knots[k])) || !(phi[k + 1] > phi[k])) {
      std::ostringstream os;
      os << "infeasible completion: non-monotone last quantile at p = " << knots[k + 1];
      throw InfeasibleCompletion(os.str(), knots[k + 1]);
    }
  }

  std::vector<Distribution> forecasts(partial_forecasts.begin(), partial_forecasts.end());
  forecasts.push_back(warped(truths[t - 1], std::move(knots), std::move(phi)));
  return Scenario(std::move(forecasts), std::vector<Distribution>(truths.begin(), truths.end()));
}

// --- sharpness search ------------------------------------------------------

nlohmann::json ProbeResult::to_json() const {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"index", c.index},
                     {"avg_var_F", c.avg_var_f},
                     {"gap", c.gap},
                     {"max_abs_residual", c.max_abs_residual}});
  }
  nlohmann::json j{{"budget", budget},
                   {"seed", seed},
                   {"basis_size", basis_size},
                   {"feasible", feasible},
                   {"infeasible", infeasible},
                   {"avg_var_G", avg_var_g},
                   {"best_avg_var_F", best_avg_var_f},
                   {"margin_vs_avg_var_G", margin_vs_avg_var_g},
                   {"min_gap", min_gap},
                   {"gap_violations", gap_violations},
                   {"all_candidates_calibrated", all_candidates_calibrated},
                   {"best_index", best_index},
                   {"best_coefficients", best_coefficients},
                   {"candidates", std::move(cands)}};
  if (best_scenario) j["best_scenario"] = best_scenario->to_json();
  return j;
}

namespace {

struct CandidateOutcome {
  bool feasible = false;
  bool calibrated = false;
  ProbeCandidate summary;
  std::vector<std::vector<double>> coefficients;
  std::optional<Scenario> scenario;
};

CandidateOutcome evaluate_candidate(std::span<const Distribution> truths, const ProbeOptions& options,
                                    std::size_t index, double avg_var_g) {
  CandidateOutcome out;
  const std::size_t t = truths.size();
  RandomStream rng(options.seed, index);

  out.coefficients.assign(t - 1, std::vector<double>(options.basis_size, 0.0));
  for (auto& row : out.coefficients) {
    for (std::size_t l = 0; l < row.size(); ++l) {
      const double bound = 1.0 / (4.0 * std::numbers::pi * static_cast<double>(l + 1));
      row[l] = rng.uniform(-bound, bound);
    }
  }

  const auto grid = interior_grid(options.grid_size);
  std::vector<double> knots{0.0};
  knots.insert(knots.end(), grid.begin(), grid.end());
  knots.push_back(1.0);

  std::vector<Distribution> partial;
  for (std::size_t i = 0; i + 1 < t; ++i) {
    std::vector<double> phi(knots.size());
    phi.front() = 0.0;
    phi.back() = 1.0;
    for (std::size_t k = 1; k + 1 < knots.size(); ++k) {
      double v = knots[k];
      for (std::size_t l = 0; l < options.basis_size; ++l) {
        v += out.coefficients[i][l] * std::sin(2.0 * std::numbers::pi * static_cast<double>(l + 1) * knots[k]);
      }
      if (!(v > 0.0 && v < 1.0)) return out;
      phi[k] = v;
    }
    try {
      partial.push_back(warped(truths[i], knots, std::move(phi)));
    } catch (const InvariantViolation&) {
      return out;  // perturbation not monotone
    }
  }

  std::optional<Scenario> s;
  try {
    s = complete_calibration(partial, truths, options.grid_size);
  } catch (const InfeasibleCompletion&) {
    return out;
  }
  out.feasible = true;

  CalibrationOptions cal_opts;
  cal_opts.execution = Execution::serial;
  const auto cal = finite_calibration_residual(*s, cal_opts);
  out.calibrated = cal.calibrated;
  out.summary.index = index;
  out.summary.max_abs_residual = cal.max_abs_residual;
  out.summary.avg_var_f = u_decomposition(*s).avg_var_f;
  out.summary.gap = out.summary.avg_var_f - avg_var_g;
  out.scenario = std::move(s);
  return out;
}

}  // namespace

ProbeResult minimize_sharpness(std::span<const Distribution> truths, const ProbeOptions& options) {
  if (options.budget < 1) throw ArgumentError("probe budget must be >= 1");
  if (truths.size() < 2) throw ArgumentError("probe needs T >= 2 truths");
  if (options.basis_size < 1) throw ArgumentError("probe basis size must be >= 1");
  if (options.grid_size < 2) throw ArgumentError("probe grid size must be >= 2");

  ProbeResult result;
  result.budget = options.budget;
  result.seed = options.seed;
  result.basis_size = options.basis_size;
  result.avg_var_g = z_decomposition(make_ideal(truths)).avg_var_g;

  const std::function<CandidateOutcome(std::size_t)> task = [&](std::size_t j) {
    return evaluate_candidate(truths, options, j, result.avg_var_g);
  };
  auto outcomes = map_indexed<CandidateOutcome>(options.budget, task, options.execution);

  std::optional<std::size_t> best;
  result.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    auto& o = outcomes[j];
    if (!o.feasible) {
      ++result.infeasible;
      continue;
    }
    ++result.feasible;
    if (!o.calibrated) {
      // Never recorded as a candidate.
      result.all_candidates_calibrated = false;
      continue;
    }
    result.candidates.push_back(o.summary);
    result.min_gap = std::min(result.min_gap, o.summary.gap);
    if (o.summary.gap < -kProbeGapTolerance) ++result.gap_violations;
    if (!best || o.summary.avg_var_f < outcomes[*best].summary.avg_var_f) best = j;
  }
  if (!best) {
    std::ostringstream os;
    os << "no feasible calibrated candidate in budget " << options.budget << " (" << result.infeasible
       << " infeasible, " << (result.feasible) << " feasible but uncalibrated)";
    throw SearchFailure(os.str());
  }
  auto& winner = outcomes[*best];
  result.best_index = *best;
  result.best_avg_var_f = winner.summary.avg_var_f;
  result.margin_vs_avg_var_g = result.best_avg_var_f - result.avg_var_g;
  result.best_coefficients = std::move(winner.coefficients);
  result.best_scenario = std::move(winner.scenario);
  return result;
}

// --- equality scan ---------------------------------------------------------

nlohmann::json ScanTable::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"id", r.id}, {"calibrated", r.calibrated}, {"max_abs_residual", r.max_abs_residual}};
    if (r.calibrated) {
      row["equality_condition_met"] = r.equality_condition_met;
      row["gap"] = r.gap;
      row["tension"] = r.tension;
    } else {
      row["equality_condition_met"] = nullptr;
      row["gap"] = nullptr;
      row["tension"] = nullptr;
    }
    out.push_back(std::move(row));
  }
  return {{"rows", std::move(out)}};
}

std::string ScanTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "id,calibrated,equality_condition_met,gap,tension\n";
  for (const auto& r : rows) {
    os << r.id << ',' << (r.calibrated ? "true" : "false") << ',';
    if (r.calibrated) {
      os << (r.equality_condition_met ? "true" : "false") << ',' << r.gap << ',' << (r.tension ? "true" : "false");
    } else {
      os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

ScanTable equality_gap_scan(std::span<const std::pair<std::string, Scenario>> scenarios,
                            const SharpnessOptions& options) {
  ScanTable table;
  for (const auto& [id, s] : scenarios) {
    ScanRow row;
    row.id = id;
    try {
      const auto report = verify_sharpness(s, options);
      row.calibrated = true;
      row.equality_condition_met = report.equality_condition_met;
      row.gap = report.gap;
      row.max_abs_residual = report.max_abs_residual;
      row.tension = report.equality_condition_met && report.gap > kTensionGap;
    } catch (const NotCalibrated& e) {
      row.max_abs_residual = e.report().max_abs_residual;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sharpcal
