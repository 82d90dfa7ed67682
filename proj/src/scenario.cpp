#include "sharpcal/scenario.hpp"

#include <algorithm>

#include "sharpcal/errors.hpp"

namespace sharpcal {

Scenario::Scenario(std::vector<Distribution> forecasts, std::vector<Distribution> truths,
                   std::optional<Support> bounds)
    : forecasts_(std::move(forecasts)), truths_(std::move(truths)), bounds_(bounds) {
  if (forecasts_.empty()) throw InvariantViolation("scenario needs T >= 1");
  if (forecasts_.size() != truths_.size()) {
    throw InvariantViolation("scenario: " + std::to_string(forecasts_.size()) + " forecasts but " +
                             std::to_string(truths_.size()) + " truths");
  }
  if (bounds_) {
    if (!(bounds_->hi > bounds_->lo)) throw InvariantViolation("scenario support requires a < b");
    for (std::size_t i = 0; i < forecasts_.size(); ++i) {
      if (!bounds_->contains(forecasts_[i].support())) {
        throw InvariantViolation("forecast " + std::to_string(i + 1) + " support exceeds the scenario bounds");
      }
    }
  }
}

bool Scenario::is_tabulated() const {
  auto tab = [](const Distribution& d) { return d.is_tabulated(); };
  return std::any_of(forecasts_.begin(), forecasts_.end(), tab) ||
         std::any_of(truths_.begin(), truths_.end(), tab);
}

bool Scenario::forecasts_bounded() const {
  return std::all_of(forecasts_.begin(), forecasts_.end(),
                     [](const Distribution& d) { return d.support().bounded(); });
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json f = nlohmann::json::array();
  nlohmann::json g = nlohmann::json::array();
  for (const auto& d : forecasts_) f.push_back(d.to_json());
  for (const auto& d : truths_) g.push_back(d.to_json());
  nlohmann::json j{{"T", horizon()}, {"forecasts", std::move(f)}, {"truths", std::move(g)}};
  if (bounds_) j["support"] = {bounds_->lo, bounds_->hi};
  return j;
}

namespace {

void require_structure(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  for (const char* key : {"forecasts", "truths"}) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      throw ParseError(std::string("scenario: '") + key + "' must be an array");
    }
  }
  if (j.contains("T") && !j.at("T").is_number_integer()) throw ParseError("scenario: 'T' must be an integer");
  if (j.contains("support")) {
    const auto& s = j.at("support");
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      throw ParseError("scenario: 'support' must be [a, b]");
    }
  }
}

std::optional<Support> parse_bounds(const nlohmann::json& j) {
  if (!j.contains("support")) return std::nullopt;
  return Support{j.at("support")[0].get<double>(), j.at("support")[1].get<double>()};
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  require_structure(j);
  std::vector<Distribution> f;
  std::vector<Distribution> g;
  for (const auto& d : j.at("forecasts")) f.push_back(distribution_from_json(d));
  for (const auto& d : j.at("truths")) g.push_back(distribution_from_json(d));
  if (j.contains("T")) {
    const auto t = j.at("T").get<long long>();
    if (t < 1 || static_cast<std::size_t>(t) != f.size()) {
      throw InvariantViolation("scenario: T = " + std::to_string(t) + " but " + std::to_string(f.size()) +
                               " forecasts given");
    }
  }
  return Scenario(std::move(f), std::move(g), parse_bounds(j));
}

std::vector<std::string> validate_scenario_json(const nlohmann::json& j) {
  require_structure(j);
  std::vector<std::string> problems;
  std::vector<std::optional<Distribution>> forecasts;

  auto check_list = [&](const char* key, std::vector<std::optional<Distribution>>* keep) {
    std::size_t idx = 0;
    for (const auto& d : j.at(key)) {
      try {
        auto dist = distribution_from_json(d);
        if (keep) keep->push_back(dist);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        problems.push_back(std::string(key) + "[" + std::to_string(idx) + "]: " + e.what());
        if (keep) keep->push_back(std::nullopt);
      }
      ++idx;
    }
  };
  check_list("forecasts", &forecasts);
  check_list("truths", nullptr);

  const auto nf = j.at("forecasts").size();
  const auto ng = j.at("truths").size();
  if (nf == 0) problems.emplace_back("scenario needs T >= 1");
  if (nf != ng) {
    problems.push_back("length mismatch: " + std::to_string(nf) + " forecasts, " + std::to_string(ng) + " truths");
  }
  if (j.contains("T")) {
    const auto t = j.at("T").get<long long>();
    if (t < 1 || static_cast<std::size_t>(t) != nf) {
      problems.push_back("T = " + std::to_string(t) + " does not match " + std::to_string(nf) + " forecasts");
    }
  }
  if (auto bounds = parse_bounds(j)) {
    if (!(bounds->hi > bounds->lo)) problems.emplace_back("support requires a < b");
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
      if (forecasts[i] && !bounds->contains(forecasts[i]->support())) {
        problems.push_back("forecasts[" + std::to_string(i) + "]: support exceeds the scenario bounds");
      }
    }
  }
  return problems;
}

}  // namespace sharpcal
