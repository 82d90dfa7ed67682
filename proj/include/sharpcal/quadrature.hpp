#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sharpcal {

/// Gauss-Legendre rule mapped onto the unit interval (0,1).
///
/// Nodes are strictly interior, which is what quantile-domain integrals need:
/// the integrand Q(u) may be unbounded at u = 0 and u = 1.
class QuadratureRule {
 public:
  explicit QuadratureRule(std::size_t nodes);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Integral of f over (a, b) using the rule affinely mapped onto (a, b).
  template <typename F>
  double integrate(F&& f, double a = 0.0, double b = 1.0) const {
    const double width = b - a;
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      sum += weights_[k] * f(a + width * nodes_[k]);
    }
    return sum * width;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline constexpr std::size_t kDefaultQuadratureNodes = 256;

/// Shared 256-node rule.
const QuadratureRule& default_rule();

}  // namespace sharpcal
