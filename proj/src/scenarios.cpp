#include "sharpcal/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "sharpcal/errors.hpp"
#include "sharpcal/rng.hpp"

namespace sharpcal {

namespace {

void require_nonempty(std::span<const Distribution> truths, const char* who) {
  if (truths.empty()) throw ArgumentError(std::string(who) + ": truths must be nonempty");
}

}  // namespace

Scenario make_ideal(std::span<const Distribution> truths) {
  require_nonempty(truths, "make_ideal");
  std::vector<Distribution> g(truths.begin(), truths.end());
  return Scenario(g, g);
}

Scenario make_climatological(std::span<const Distribution> truths) {
  require_nonempty(truths, "make_climatological");
  const Distribution forecast = mixture_of(truths);
  return Scenario(std::vector<Distribution>(truths.size(), forecast),
                  std::vector<Distribution>(truths.begin(), truths.end()));
}

Scenario make_compensated_pair(double epsilon, std::size_t knots) {
  if (!(epsilon > 0.0 && epsilon < 0.5 / std::numbers::pi)) {
    throw ArgumentError("compensated pair needs 0 < epsilon < 1/(2 pi)");
  }
  auto up = tabulate([epsilon](double p) { return p + epsilon * std::sin(2.0 * std::numbers::pi * p); }, knots);
  auto down = tabulate([epsilon](double p) { return p - epsilon * std::sin(2.0 * std::numbers::pi * p); }, knots);
  const auto g = uniform(0.0, 1.0);
  return Scenario({up, down}, {g, g});
}

Scenario make_shifted_negative(std::span<const Distribution> truths, double c) {
  require_nonempty(truths, "make_shifted_negative");
  if (c == 0.0) throw ArgumentError("shifted negative needs c != 0 (c = 0 is the ideal forecaster)");
  std::vector<Distribution> f;
  for (const auto& g : truths) f.push_back(translate(g, -c));
  return Scenario(std::move(f), std::vector<Distribution>(truths.begin(), truths.end()));
}

Scenario make_block_repeat(const Scenario& base, std::size_t horizon) {
  const std::size_t block = base.horizon();
  if (horizon == 0 || horizon % block != 0) {
    throw ArgumentError("block repeat: T = " + std::to_string(horizon) + " is not a multiple of " +
                        std::to_string(block));
  }
  if (!base.forecasts_bounded()) throw ArgumentError("block repeat needs a bounded-support base");
  std::vector<Distribution> f;
  std::vector<Distribution> g;
  f.reserve(horizon);
  g.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    f.push_back(base.forecast(i % block));
    g.push_back(base.truth(i % block));
  }
  return Scenario(std::move(f), std::move(g), base.bounds());
}

std::vector<Distribution> random_normal_truths(std::size_t count, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  std::vector<Distribution> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double sigma = rng.uniform(0.5, 2.0);
    out.push_back(normal(mu, sigma));
  }
  return out;
}

std::vector<Distribution> random_truths(std::size_t count, std::uint64_t seed) {
  RandomStream rng(seed, 1);
  std::vector<Distribution> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double centre = rng.uniform(-3.0, 3.0);
    const double scale = rng.uniform(0.5, 2.0);
    if (rng.index(2) == 0) {
      out.push_back(normal(centre, scale));
    } else {
      out.push_back(uniform(centre - scale, centre + scale));
    }
  }
  return out;
}

namespace {

std::vector<Distribution> truths_from_spec(const nlohmann::json& spec) {
  if (spec.contains("truths")) {
    if (!spec.at("truths").is_array()) throw ParseError("'truths' must be an array");
    std::vector<Distribution> out;
    for (const auto& d : spec.at("truths")) out.push_back(distribution_from_json(d));
    return out;
  }
  if (spec.contains("random_truths")) {
    const auto& r = spec.at("random_truths");
    if (!r.is_object() || !r.contains("count") || !r.contains("seed")) {
      throw ParseError("'random_truths' needs 'count' and 'seed'");
    }
    const auto count = r.at("count").get<std::size_t>();
    const auto seed = r.at("seed").get<std::uint64_t>();
    const auto kind = r.value("kind", std::string("normal"));
    if (kind == "normal") return random_normal_truths(count, seed);
    if (kind == "mixed") return random_truths(count, seed);
    throw ParseError("unknown random_truths kind '" + kind + "'");
  }
  throw ParseError("scenario spec needs 'truths' or 'random_truths'");
}

double number(const nlohmann::json& spec, const char* key) {
  if (!spec.contains(key) || !spec.at(key).is_number()) {
    throw ParseError(std::string("scenario spec: '") + key + "' must be a number");
  }
  return spec.at(key).get<double>();
}

}  // namespace

Scenario build_scenario(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ParseError("scenario spec must be a JSON object");
  if (spec.contains("forecasts")) return scenario_from_json(spec);
  if (!spec.contains("family") || !spec.at("family").is_string()) {
    throw ParseError("scenario spec needs a string 'family'");
  }
  const auto family = spec.at("family").get<std::string>();
  try {
    if (family == "ideal") return make_ideal(truths_from_spec(spec));
    if (family == "climatological") return make_climatological(truths_from_spec(spec));
    if (family == "compensated_pair") {
      return make_compensated_pair(number(spec, "epsilon"), spec.value("knots", kDefaultCompensatedKnots));
    }
    if (family == "shifted_negative") return make_shifted_negative(truths_from_spec(spec), number(spec, "c"));
    if (family == "block_repeat") {
      if (!spec.contains("base")) throw ParseError("block_repeat spec needs a 'base'");
      return make_block_repeat(build_scenario(spec.at("base")), spec.at("T").get<std::size_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario spec: ") + e.what());
  }
  throw ParseError("unknown scenario family '" + family + "'");
}

ScenarioGenerator generator_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("family") || !spec.at("family").is_string()) {
    throw ParseError("generator spec needs a string 'family'");
  }
  const auto family = spec.at("family").get<std::string>();
  if (family == "block_repeat") {
    if (!spec.contains("base")) throw ParseError("block_repeat generator needs a 'base'");
    Scenario base = build_scenario(spec.at("base"));
    return [base](std::size_t t) { return make_block_repeat(base, t); };
  }
  if (family == "ideal" || family == "shifted_negative") {
    if (!spec.contains("truth")) throw ParseError(family + " generator needs a 'truth'");
    const Distribution g = distribution_from_json(spec.at("truth"));
    if (family == "ideal") {
      return [g](std::size_t t) { return make_ideal(std::vector<Distribution>(t, g)); };
    }
    const double c = number(spec, "c");
    return [g, c](std::size_t t) { return make_shifted_negative(std::vector<Distribution>(t, g), c); };
  }
  if (family == "climatological_ladder") {
    return [](std::size_t t) {
      std::vector<Distribution> truths;
      for (std::size_t i = 0; i < t; ++i) truths.push_back(uniform(static_cast<double>(i), static_cast<double>(i + 1)));
      return make_climatological(truths);
    };
  }
  throw ParseError("unknown generator family '" + family + "'");
}

}  // namespace sharpcal
