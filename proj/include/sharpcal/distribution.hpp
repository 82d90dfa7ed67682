#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpcal/quadrature.hpp"

namespace sharpcal {

struct Support {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool bounded() const noexcept;
  bool contains(const Support& other) const noexcept;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;

  double second_raw() const noexcept { return variance + mean * mean; }
};

// Integrals over a probability sub-interval [a, b] of (0,1):
//   first  = int_a^b Q(v) dv,   second = int_a^b Q(v)^2 dv.
struct PartialMoments {
  double first = 0.0;
  double second = 0.0;
};

enum class DistributionKind { uniform, normal, tabulated_quantile, mixture, translated, warped, functional };

std::string to_string(DistributionKind kind);

// Minimum slope (per unit of u) accepted for tabulated quantile and
// probability-warp segments.
inline constexpr double kMinQuantileSlope = 1e-12;

/// Interface every continuous, strictly increasing law implements.
class DistributionModel {
 public:
  virtual ~DistributionModel() = default;

  virtual DistributionKind kind() const = 0;
  virtual double cdf(double x) const = 0;
  virtual double quantile(double p) const = 0;
  virtual Support support() const = 0;
  virtual std::optional<Moments> closed_form_moments() const { return std::nullopt; }

  /// Closed form when available, otherwise Gauss-Legendre over the quantile
  /// function on (0,1). Throws UnsupportedDistribution for unbounded laws
  /// without closed-form moments.
  virtual Moments moments(const QuadratureRule& rule) const;

  /// Quantile-domain integrals over [a, b]; quadrature fallback needs bounded support.
  virtual PartialMoments partial_moments(double a, double b, const QuadratureRule& rule) const;

  /// True when the law carries piecewise-linear interpolation error.
  virtual bool is_tabulated() const { return false; }

  virtual nlohmann::json to_json() const = 0;
};

/// Immutable value handle; copies share the underlying model.
class Distribution {
 public:
  explicit Distribution(std::shared_ptr<const DistributionModel> model);

  double cdf(double x) const { return model_->cdf(x); }
  double quantile(double p) const { return model_->quantile(p); }
  Support support() const { return model_->support(); }
  DistributionKind kind() const { return model_->kind(); }
  std::optional<Moments> closed_form_moments() const { return model_->closed_form_moments(); }
  Moments moments(const QuadratureRule& rule = default_rule()) const { return model_->moments(rule); }
  PartialMoments partial_moments(double a, double b, const QuadratureRule& rule = default_rule()) const {
    return model_->partial_moments(a, b, rule);
  }
  bool is_tabulated() const { return model_->is_tabulated(); }
  nlohmann::json to_json() const { return model_->to_json(); }

  const DistributionModel& model() const noexcept { return *model_; }

  template <typename Model>
  const Model* as() const noexcept {
    return dynamic_cast<const Model*>(model_.get());
  }

  friend bool same_model(const Distribution& a, const Distribution& b) noexcept {
    return a.model_ == b.model_;
  }

 private:
  std::shared_ptr<const DistributionModel> model_;
};

// --- concrete laws ---------------------------------------------------------

class Uniform final : public DistributionModel {
 public:
  Uniform(double a, double b);
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  DistributionKind kind() const override { return DistributionKind::uniform; }
  double cdf(double x) const override;
  double quantile(double p) const override;
  Support support() const override { return {a_, b_}; }
  std::optional<Moments> closed_form_moments() const override;
  PartialMoments partial_moments(double a, double b, const QuadratureRule& rule) const override;
  nlohmann::json to_json() const override;

 private:
  double a_;
  double b_;
};

class Normal final : public DistributionModel {
 public:
  Normal(double mu, double sigma);
  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }

  DistributionKind kind() const override { return DistributionKind::normal; }
  double cdf(double x) const override;
  double quantile(double p) const override;
  Support support() const override { return {}; }
  std::optional<Moments> closed_form_moments() const override;
  PartialMoments partial_moments(double a, double b, const QuadratureRule& rule) const override;
  nlohmann::json to_json() const override;

 private:
  double mu_;
  double sigma_;
};

/// Piecewise-linear quantile through (u_k, q_k); the end segments extend
/// linearly to u = 0 and u = 1, so the support is bounded.
class TabulatedQuantile final : public DistributionModel {
 public:
  TabulatedQuantile(std::vector<double> u, std::vector<double> q);

  std::span<const double> knots() const noexcept { return {u_.data() + 1, u_.size() - 2}; }
  std::span<const double> values() const noexcept { return {q_.data() + 1, q_.size() - 2}; }

  DistributionKind kind() const override { return DistributionKind::tabulated_quantile; }
  double cdf(double x) const override;
  double quantile(double p) const override;
  Support support() const override { return {q_.front(), q_.back()}; }
  PartialMoments partial_moments(double a, double b, const QuadratureRule& rule) const override;
  bool is_tabulated() const override { return true; }
  nlohmann::json to_json() const override;

 private:
  // Augmented with the extrapolated end points at u = 0 and u = 1.
  std::vector<double> u_;
  std::vector<double> q_;
};

/// Weighted mixture; cdf is the weighted average of component cdfs and the
/// quantile is found by bisection.
class Mixture final : public DistributionModel {
 public:
  Mixture(std::vector<Distribution> components, std::vector<double> weights);

  std::span<const Distribution> components() const noexcept { return components_; }
  std::span<const double> weights() const noexcept { return weights_; }

  DistributionKind kind() const override { return DistributionKind::mixture; }
  double cdf(double x) const override;
  double quantile(double p) const override;
  Support support() const override;
  std::optional<Moments> closed_form_moments() const override;
  Moments moments(const QuadratureRule& rule) const override;
  bool is_tabulated() const override;
  nlohmann::json to_json() const override;

 private:
  std::vector<Distribution> components_;
  std::vector<double> weights_;
  bool equal_weights_ = true;
};

/// Law of X - c for X ~ base.
class Translated final : public DistributionModel {
 public:
  Translated(Distribution base, double c);
  const Distribution& base() const noexcept { return base_; }
  double shift() const noexcept { return c_; }

  DistributionKind kind() const override { return DistributionKind::translated; }
  double cdf(double x) const override { return base_.cdf(x + c_); }
  double quantile(double p) const override { return base_.quantile(p) - c_; }
  Support support() const override;
  std::optional<Moments> closed_form_moments() const override;
  Moments moments(const QuadratureRule& rule) const override;
  PartialMoments partial_moments(double a, double b, const QuadratureRule& rule) const override;
  bool is_tabulated() const override { return base_.is_tabulated(); }
  nlohmann::json to_json() const override;

 private:
  Distribution base_;
  double c_;
};

/// Quantile Q(p) = Q_base(phi(p)) for a piecewise-linear increasing bijection
/// phi of [0,1]; equivalently base.cdf composed with phi^{-1}.
class Warped final : public DistributionModel {
 public:
  Warped(Distribution base, std::vector<double> knots, std::vector<double> phi);

  const Distribution& base() const noexcept { return base_; }
  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> phi() const noexcept { return phi_; }
  double warp(double p) const;
  double unwarp(double v) const;

  DistributionKind kind() const override { return DistributionKind::warped; }
  double cdf(double x) const override { return unwarp(base_.cdf(x)); }
  double quantile(double p) const override { return base_.quantile(warp(p)); }
  Support support() const override { return base_.support(); }
  Moments moments(const QuadratureRule& rule) const override;
  bool is_tabulated() const override { return true; }
  nlohmann::json to_json() const override;

 private:
  Distribution base_;
  std::vector<double> knots_;
  std::vector<double> phi_;
};

/// Law given directly by evaluators; not serializable.
struct FunctionalSpec {
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
  Support support;
  std::optional<Moments> moments;
  std::string label = "functional";
};

class Functional final : public DistributionModel {
 public:
  explicit Functional(FunctionalSpec spec);

  DistributionKind kind() const override { return DistributionKind::functional; }
  double cdf(double x) const override { return spec_.cdf(x); }
  double quantile(double p) const override { return spec_.quantile(p); }
  Support support() const override { return spec_.support; }
  std::optional<Moments> closed_form_moments() const override { return spec_.moments; }
  nlohmann::json to_json() const override;

 private:
  FunctionalSpec spec_;
};

// --- construction ----------------------------------------------------------

Distribution uniform(double a, double b);
Distribution normal(double mu, double sigma);
Distribution tabulated_quantile(std::vector<double> u, std::vector<double> q);
/// Tabulates q = quantile(u) on u_k = k/(m+1), k = 1..m.
Distribution tabulate(const std::function<double(double)>& quantile, std::size_t knots);
/// Equal-weight mixture. Throws ArgumentError on an empty list.
Distribution mixture_of(std::span<const Distribution> components);
Distribution mixture(std::vector<Distribution> components, std::vector<double> weights);
/// cdf*(x) = cdf(x + c), quantile*(p) = quantile(p) - c.
Distribution translate(const Distribution& d, double c);
Distribution warped(Distribution base, std::vector<double> knots, std::vector<double> phi);
Distribution from_functions(FunctionalSpec spec);

Distribution distribution_from_json(const nlohmann::json& spec);

// --- moments ---------------------------------------------------------------

double mean(const Distribution& d, const QuadratureRule& rule = default_rule());
double variance(const Distribution& d, const QuadratureRule& rule = default_rule());

}  // namespace sharpcal
