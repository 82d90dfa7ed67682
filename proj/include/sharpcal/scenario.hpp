#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpcal/distribution.hpp"

namespace sharpcal {

/// Paired forecast/truth sequences F_1..F_T and G_1..G_T.
class Scenario {
 public:
  Scenario(std::vector<Distribution> forecasts, std::vector<Distribution> truths,
           std::optional<Support> bounds = std::nullopt);

  std::size_t horizon() const noexcept { return forecasts_.size(); }
  const std::vector<Distribution>& forecasts() const noexcept { return forecasts_; }
  const std::vector<Distribution>& truths() const noexcept { return truths_; }
  const Distribution& forecast(std::size_t i) const { return forecasts_.at(i); }
  const Distribution& truth(std::size_t i) const { return truths_.at(i); }
  const std::optional<Support>& bounds() const noexcept { return bounds_; }

  /// Any forecast or truth carries interpolation error.
  bool is_tabulated() const;
  /// Every forecast has a bounded support.
  bool forecasts_bounded() const;

  nlohmann::json to_json() const;

 private:
  std::vector<Distribution> forecasts_;
  std::vector<Distribution> truths_;
  std::optional<Support> bounds_;
};

/// Parses {"T":…, "forecasts":[…], "truths":[…], "support":[a,b]?}.
/// Throws ParseError for malformed structure and InvariantViolation for
/// invalid laws or mismatched lengths.
Scenario scenario_from_json(const nlohmann::json& j);

/// Checks a scenario document and lists every violation found instead of
/// stopping at the first one. Throws ParseError only when the document is
/// not a JSON object.
std::vector<std::string> validate_scenario_json(const nlohmann::json& j);

}  // namespace sharpcal
