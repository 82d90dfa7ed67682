#include "sharpcal/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "sharpcal/errors.hpp"

namespace sharpcal {

namespace {

constexpr double kMixtureBracketWidth = 1e-12;
constexpr double kVarianceClamp = 1e-12;

double checked_variance(double second, double mean) {
  double var = second - mean * mean;
  if (var < 0.0) {
    if (var > -kVarianceClamp * std::max(1.0, second)) return 0.0;
    throw NumericError("negative variance from quadrature");
  }
  return var;
}

// Position of x within a sorted table: index k with xs[k] <= x < xs[k+1],
// clamped to the first/last segment.
std::size_t segment_of(std::span<const double> xs, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  auto k = static_cast<std::size_t>(std::distance(xs.begin(), it));
  if (k == 0) return 0;
  return std::min(k - 1, xs.size() - 2);
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  const std::size_t k = segment_of(xs, x);
  const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
  return ys[k] + t * (ys[k + 1] - ys[k]);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ArgumentError(std::string(what) + " must be finite");
}

// Standard normal helpers.
double phi_density(double z) {
  if (!std::isfinite(z)) return 0.0;
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double z_times_density(double z) {
  if (!std::isfinite(z)) return 0.0;
  return z * phi_density(z);
}

double standard_normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace

std::string to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::uniform: return "uniform";
    case DistributionKind::normal: return "normal";
    case DistributionKind::tabulated_quantile: return "tabulated_quantile";
    case DistributionKind::mixture: return "mixture";
    case DistributionKind::translated: return "translated";
    case DistributionKind::warped: return "warped";
    case DistributionKind::functional: return "functional";
  }
  return "unknown";
}

bool Support::bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

bool Support::contains(const Support& other) const noexcept {
  return other.lo >= lo && other.hi <= hi;
}

// --- DistributionModel defaults --------------------------------------------

Moments DistributionModel::moments(const QuadratureRule& rule) const {
  if (auto closed = closed_form_moments()) return *closed;
  if (!support().bounded()) {
    throw UnsupportedDistribution(to_string(kind()) +
                                  " law has unbounded support and no closed-form moments");
  }
  const auto pm = partial_moments(0.0, 1.0, rule);
  return {pm.first, checked_variance(pm.second, pm.first)};
}

PartialMoments DistributionModel::partial_moments(double a, double b, const QuadratureRule& rule) const {
  if (!support().bounded()) {
    throw UnsupportedDistribution(to_string(kind()) + " law: partial moments need bounded support");
  }
  PartialMoments pm;
  pm.first = rule.integrate([this](double u) { return quantile(u); }, a, b);
  pm.second = rule.integrate(
      [this](double u) {
        const double q = quantile(u);
        return q * q;
      },
      a, b);
  return pm;
}

Distribution::Distribution(std::shared_ptr<const DistributionModel> model) : model_(std::move(model)) {
  if (!model_) throw ArgumentError("null distribution model");
}

// --- Uniform ---------------------------------------------------------------

Uniform::Uniform(double a, double b) : a_(a), b_(b) {
  require_finite(a, "uniform bound a");
  require_finite(b, "uniform bound b");
  if (!(b > a)) throw InvariantViolation("uniform requires a < b");
}

double Uniform::cdf(double x) const {
  if (x <= a_) return 0.0;
  if (x >= b_) return 1.0;
  return (x - a_) / (b_ - a_);
}

double Uniform::quantile(double p) const { return a_ + p * (b_ - a_); }

std::optional<Moments> Uniform::closed_form_moments() const {
  const double w = b_ - a_;
  return Moments{0.5 * (a_ + b_), w * w / 12.0};
}

PartialMoments Uniform::partial_moments(double s, double t, const QuadratureRule&) const {
  const double w = b_ - a_;
  const double len = t - s;
  const double sq = t * t - s * s;
  const double cu = t * t * t - s * s * s;
  return {a_ * len + 0.5 * w * sq, a_ * a_ * len + a_ * w * sq + w * w * cu / 3.0};
}

nlohmann::json Uniform::to_json() const { return {{"type", "uniform"}, {"a", a_}, {"b", b_}}; }

// --- Normal ----------------------------------------------------------------

Normal::Normal(double mu, double sigma) : mu_(mu), sigma_(sigma) {
  require_finite(mu, "normal mu");
  require_finite(sigma, "normal sigma");
  if (!(sigma > 0.0)) throw InvariantViolation("normal requires sigma > 0");
}

double Normal::cdf(double x) const {
  return 0.5 * std::erfc(-(x - mu_) / (sigma_ * std::numbers::sqrt2));
}

double Normal::quantile(double p) const { return mu_ + sigma_ * standard_normal_quantile(p); }

std::optional<Moments> Normal::closed_form_moments() const { return Moments{mu_, sigma_ * sigma_}; }

PartialMoments Normal::partial_moments(double a, double b, const QuadratureRule&) const {
  // With z = Phi^{-1}(v):  int z dv = -[phi(z)],  int z^2 dv = [v - z phi(z)].
  const double za = standard_normal_quantile(a);
  const double zb = standard_normal_quantile(b);
  const double len = b - a;
  const double m1 = phi_density(za) - phi_density(zb);
  const double m2 = len + z_times_density(za) - z_times_density(zb);
  return {mu_ * len + sigma_ * m1, mu_ * mu_ * len + 2.0 * mu_ * sigma_ * m1 + sigma_ * sigma_ * m2};
}

nlohmann::json Normal::to_json() const { return {{"type", "normal"}, {"mu", mu_}, {"sigma", sigma_}}; }

// --- TabulatedQuantile -----------------------------------------------------

TabulatedQuantile::TabulatedQuantile(std::vector<double> u, std::vector<double> q) {
  if (u.size() != q.size()) throw InvariantViolation("tabulated quantile: u and q lengths differ");
  if (u.size() < 2) throw InvariantViolation("tabulated quantile needs at least two knots");
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!std::isfinite(u[k]) || !std::isfinite(q[k])) {
      throw InvariantViolation("tabulated quantile: non-finite entry at knot " + std::to_string(k));
    }
    if (!(u[k] > 0.0 && u[k] < 1.0)) {
      throw InvariantViolation("tabulated quantile: knot " + std::to_string(k) + " outside (0,1)");
    }
  }
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    if (!(u[k + 1] > u[k])) {
      throw InvariantViolation("non-monotone knots at knot " + std::to_string(k + 1));
    }
    if (!((q[k + 1] - q[k]) >= kMinQuantileSlope * (u[k + 1] - u[k])) || !(q[k + 1] > q[k])) {
      throw InvariantViolation("non-monotone values at knot " + std::to_string(k + 1));
    }
  }
  const std::size_t m = u.size();
  const double lo_slope = (q[1] - q[0]) / (u[1] - u[0]);
  const double hi_slope = (q[m - 1] - q[m - 2]) / (u[m - 1] - u[m - 2]);
  u_.reserve(m + 2);
  q_.reserve(m + 2);
  u_.push_back(0.0);
  q_.push_back(q[0] - lo_slope * u[0]);
  u_.insert(u_.end(), u.begin(), u.end());
  q_.insert(q_.end(), q.begin(), q.end());
  u_.push_back(1.0);
  q_.push_back(q[m - 1] + hi_slope * (1.0 - u[m - 1]));
}

double TabulatedQuantile::cdf(double x) const {
  if (x <= q_.front()) return 0.0;
  if (x >= q_.back()) return 1.0;
  return interpolate(q_, u_, x);
}

double TabulatedQuantile::quantile(double p) const { return interpolate(u_, q_, p); }

PartialMoments TabulatedQuantile::partial_moments(double a, double b, const QuadratureRule&) const {
  // Exact integrals of the piecewise-linear quantile and its square.
  PartialMoments pm;
  for (std::size_t k = segment_of(u_, a); k + 1 < u_.size() && u_[k] < b; ++k) {
    const double s = std::max(a, u_[k]);
    const double t = std::min(b, u_[k + 1]);
    if (!(t > s)) continue;
    const double slope = (q_[k + 1] - q_[k]) / (u_[k + 1] - u_[k]);
    const double qs = q_[k] + slope * (s - u_[k]);
    const double qt = q_[k] + slope * (t - u_[k]);
    const double len = t - s;
    pm.first += 0.5 * len * (qs + qt);
    pm.second += len * (qs * qs + qs * qt + qt * qt) / 3.0;
  }
  return pm;
}

nlohmann::json TabulatedQuantile::to_json() const {
  const auto u = knots();
  const auto q = values();
  return {{"type", "tabulated_quantile"},
          {"u", std::vector<double>(u.begin(), u.end())},
          {"q", std::vector<double>(q.begin(), q.end())}};
}

// --- Mixture ---------------------------------------------------------------

Mixture::Mixture(std::vector<Distribution> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw ArgumentError("mixture needs at least one component");
  if (weights_.size() != components_.size()) {
    throw InvariantViolation("mixture: weights and components lengths differ");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvariantViolation("mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvariantViolation("mixture weights must sum to 1");
  equal_weights_ = std::all_of(weights_.begin(), weights_.end(),
                               [&](double w) { return w == weights_.front(); });
}

double Mixture::cdf(double x) const {
  double sum = 0.0;
  if (equal_weights_) {
    for (const auto& c : components_) sum += c.cdf(x);
    return sum / static_cast<double>(components_.size());
  }
  for (std::size_t j = 0; j < components_.size(); ++j) sum += weights_[j] * components_[j].cdf(x);
  return sum;
}

double Mixture::quantile(double p) const {
  // Each component quantile brackets the mixture quantile from one side.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < components_.size(); ++j) {
    if (weights_[j] == 0.0) continue;
    const double q = components_[j].quantile(p);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    if (p <= 0.0) return lo;
    if (p >= 1.0) return hi;
    throw NumericError("mixture quantile: non-finite bracket");
  }
  while (hi - lo > kMixtureBracketWidth) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Support Mixture::support() const {
  Support s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& c : components_) {
    const auto cs = c.support();
    s.lo = std::min(s.lo, cs.lo);
    s.hi = std::max(s.hi, cs.hi);
  }
  return s;
}

std::optional<Moments> Mixture::closed_form_moments() const {
  double m = 0.0;
  double second = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    auto cm = components_[j].closed_form_moments();
    if (!cm) return std::nullopt;
    m += weights_[j] * cm->mean;
    second += weights_[j] * cm->second_raw();
  }
  return Moments{m, checked_variance(second, m)};
}

Moments Mixture::moments(const QuadratureRule& rule) const {
  // Law of total variance over the components.
  double m = 0.0;
  double within = 0.0;
  std::vector<double> means(components_.size());
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const auto cm = components_[j].moments(rule);
    means[j] = cm.mean;
    m += weights_[j] * cm.mean;
    within += weights_[j] * cm.variance;
  }
  double between = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    between += weights_[j] * (means[j] - m) * (means[j] - m);
  }
  return {m, within + between};
}

bool Mixture::is_tabulated() const {
  return std::any_of(components_.begin(), components_.end(),
                     [](const Distribution& c) { return c.is_tabulated(); });
}

nlohmann::json Mixture::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components_) comps.push_back(c.to_json());
  nlohmann::json j{{"type", "mixture"}, {"components", std::move(comps)}};
  if (!equal_weights_) j["weights"] = weights_;
  return j;
}

// --- Translated ------------------------------------------------------------

Translated::Translated(Distribution base, double c) : base_(std::move(base)), c_(c) {
  require_finite(c, "translation");
}

Support Translated::support() const {
  const auto s = base_.support();
  return {s.lo - c_, s.hi - c_};
}

std::optional<Moments> Translated::closed_form_moments() const {
  auto m = base_.closed_form_moments();
  if (!m) return std::nullopt;
  return Moments{m->mean - c_, m->variance};
}

Moments Translated::moments(const QuadratureRule& rule) const {
  const auto m = base_.moments(rule);
  return {m.mean - c_, m.variance};
}

PartialMoments Translated::partial_moments(double a, double b, const QuadratureRule& rule) const {
  const auto pm = base_.partial_moments(a, b, rule);
  const double len = b - a;
  return {pm.first - c_ * len, pm.second - 2.0 * c_ * pm.first + c_ * c_ * len};
}

nlohmann::json Translated::to_json() const {
  return {{"type", "translated"}, {"base", base_.to_json()}, {"c", c_}};
}

// --- Warped ----------------------------------------------------------------

Warped::Warped(Distribution base, std::vector<double> knots, std::vector<double> phi)
    : base_(std::move(base)), knots_(std::move(knots)), phi_(std::move(phi)) {
  if (knots_.size() != phi_.size()) throw InvariantViolation("warp: knots and phi lengths differ");
  if (knots_.size() < 2) throw InvariantViolation("warp needs at least two knots");
  if (knots_.front() != 0.0 || knots_.back() != 1.0 || phi_.front() != 0.0 || phi_.back() != 1.0) {
    throw InvariantViolation("warp must map 0 to 0 and 1 to 1");
  }
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    const double du = knots_[k + 1] - knots_[k];
    if (!(du > 0.0)) throw InvariantViolation("non-monotone warp knots at knot " + std::to_string(k + 1));
    if (!(phi_[k + 1] - phi_[k] >= kMinQuantileSlope * du) || !(phi_[k + 1] > phi_[k])) {
      throw InvariantViolation("non-monotone warp values at knot " + std::to_string(k + 1));
    }
  }
}

double Warped::warp(double p) const { return interpolate(knots_, phi_, p); }

double Warped::unwarp(double v) const {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  return interpolate(phi_, knots_, v);
}

Moments Warped::moments(const QuadratureRule& rule) const {
  // E g(Q_base(phi(U))) = sum_k (du_k / dphi_k) int_{phi_k}^{phi_{k+1}} g(Q_base(v)) dv.
  double first = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    const double scale = (knots_[k + 1] - knots_[k]) / (phi_[k + 1] - phi_[k]);
    const auto pm = base_.partial_moments(phi_[k], phi_[k + 1], rule);
    first += scale * pm.first;
    second += scale * pm.second;
  }
  return {first, checked_variance(second, first)};
}

nlohmann::json Warped::to_json() const {
  return {{"type", "warped"}, {"base", base_.to_json()}, {"u", knots_}, {"phi", phi_}};
}

// --- Functional ------------------------------------------------------------

Functional::Functional(FunctionalSpec spec) : spec_(std::move(spec)) {
  if (!spec_.cdf || !spec_.quantile) throw ArgumentError("functional law needs cdf and quantile");
}

nlohmann::json Functional::to_json() const {
  throw ArgumentError("functional law '" + spec_.label + "' cannot be serialized");
}

// --- factories -------------------------------------------------------------

Distribution uniform(double a, double b) { return Distribution(std::make_shared<Uniform>(a, b)); }

Distribution normal(double mu, double sigma) { return Distribution(std::make_shared<Normal>(mu, sigma)); }

Distribution tabulated_quantile(std::vector<double> u, std::vector<double> q) {
  return Distribution(std::make_shared<TabulatedQuantile>(std::move(u), std::move(q)));
}

Distribution tabulate(const std::function<double(double)>& quantile, std::size_t knots) {
  if (knots < 2) throw ArgumentError("tabulation needs at least two knots");
  std::vector<double> u(knots);
  std::vector<double> q(knots);
  const double denom = static_cast<double>(knots + 1);
  for (std::size_t k = 0; k < knots; ++k) {
    u[k] = static_cast<double>(k + 1) / denom;
    q[k] = quantile(u[k]);
  }
  return tabulated_quantile(std::move(u), std::move(q));
}

Distribution mixture_of(std::span<const Distribution> components) {
  if (components.empty()) throw ArgumentError("mixture_of: empty component list");
  std::vector<double> weights(components.size(), 1.0 / static_cast<double>(components.size()));
  return mixture({components.begin(), components.end()}, std::move(weights));
}

Distribution mixture(std::vector<Distribution> components, std::vector<double> weights) {
  if (components.size() == 1) return components.front();
  return Distribution(std::make_shared<Mixture>(std::move(components), std::move(weights)));
}

Distribution translate(const Distribution& d, double c) {
  require_finite(c, "translation");
  if (c == 0.0) return d;
  if (const auto* u = d.as<Uniform>()) return uniform(u->a() - c, u->b() - c);
  if (const auto* n = d.as<Normal>()) return normal(n->mu() - c, n->sigma());
  if (const auto* t = d.as<Translated>()) {
    const double total = t->shift() + c;
    if (total == 0.0) return t->base();
    return Distribution(std::make_shared<Translated>(t->base(), total));
  }
  return Distribution(std::make_shared<Translated>(d, c));
}

Distribution warped(Distribution base, std::vector<double> knots, std::vector<double> phi) {
  return Distribution(std::make_shared<Warped>(std::move(base), std::move(knots), std::move(phi)));
}

Distribution from_functions(FunctionalSpec spec) {
  return Distribution(std::make_shared<Functional>(std::move(spec)));
}

namespace {

double number_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("distribution spec: missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ParseError(std::string("distribution spec: field '") + key + "' is not a number");
  return v.get<double>();
}

std::vector<double> array_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ParseError(std::string("distribution spec: field '") + key + "' must be an array");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ParseError(std::string("distribution spec: non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Distribution distribution_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("type") || !spec.at("type").is_string()) {
    throw ParseError("distribution spec must be an object with a string 'type'");
  }
  const auto type = spec.at("type").get<std::string>();
  if (type == "uniform") return uniform(number_field(spec, "a"), number_field(spec, "b"));
  if (type == "normal") return normal(number_field(spec, "mu"), number_field(spec, "sigma"));
  if (type == "tabulated_quantile") return tabulated_quantile(array_field(spec, "u"), array_field(spec, "q"));
  if (type == "mixture") {
    if (!spec.contains("components") || !spec.at("components").is_array()) {
      throw ParseError("mixture spec needs a 'components' array");
    }
    std::vector<Distribution> comps;
    for (const auto& c : spec.at("components")) comps.push_back(distribution_from_json(c));
    if (spec.contains("weights")) return mixture(std::move(comps), array_field(spec, "weights"));
    return mixture_of(comps);
  }
  if (type == "translated") {
    if (!spec.contains("base")) throw ParseError("translated spec needs a 'base'");
    return translate(distribution_from_json(spec.at("base")), number_field(spec, "c"));
  }
  if (type == "warped") {
    if (!spec.contains("base")) throw ParseError("warped spec needs a 'base'");
    return warped(distribution_from_json(spec.at("base")), array_field(spec, "u"), array_field(spec, "phi"));
  }
  throw ParseError("unknown distribution type '" + type + "'");
}

double mean(const Distribution& d, const QuadratureRule& rule) { return d.moments(rule).mean; }

double variance(const Distribution& d, const QuadratureRule& rule) { return d.moments(rule).variance; }

}  // namespace sharpcal
