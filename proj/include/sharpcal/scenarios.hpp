#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpcal/calibration.hpp"
#include "sharpcal/scenario.hpp"

namespace sharpcal {

inline constexpr std::size_t kDefaultCompensatedKnots = 2048;

/// F_i = G_i.
Scenario make_ideal(std::span<const Distribution> truths);

/// Every F_i is the equal-weight mixture of the truths, which satisfies the
/// finite calibration condition exactly.
Scenario make_climatological(std::span<const Distribution> truths);

/// T = 2, G_1 = G_2 = Uniform(0,1), F_{1,2}^{-1}(p) = p +/- eps sin(2 pi p)
/// tabulated on `knots` interior points. Requires 0 < eps < 1/(2 pi).
Scenario make_compensated_pair(double epsilon, std::size_t knots = kDefaultCompensatedKnots);

/// F_i = translate(G_i, -c); a negative control, so c != 0.
Scenario make_shifted_negative(std::span<const Distribution> truths, double c);

/// Cyclic repetition of the base pairs up to horizon T (a multiple of base T).
Scenario make_block_repeat(const Scenario& base, std::size_t horizon);

/// Seeded normal truths with mu in [-3, 3] and sigma in [0.5, 2].
std::vector<Distribution> random_normal_truths(std::size_t count, std::uint64_t seed);

/// Seeded mix of normal and uniform truths.
std::vector<Distribution> random_truths(std::size_t count, std::uint64_t seed);

/// Builds a scenario from a family spec, e.g. {"family":"compensated_pair","epsilon":0.1}.
/// A plain scenario document (with "forecasts") is accepted as-is.
Scenario build_scenario(const nlohmann::json& spec);

/// Generator spec for horizon sweeps:
///   {"family":"block_repeat","base":<spec>}
///   {"family":"ideal","truth":<dist>}
///   {"family":"shifted_negative","truth":<dist>,"c":x}
///   {"family":"climatological_ladder"}   (G_t = Uniform(t-1, t))
ScenarioGenerator generator_from_json(const nlohmann::json& spec);

}  // namespace sharpcal
