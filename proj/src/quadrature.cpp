#include "sharpcal/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "sharpcal/errors.hpp"

namespace sharpcal {

QuadratureRule::QuadratureRule(std::size_t nodes) {
  if (nodes == 0) throw ArgumentError("quadrature rule needs at least one node");
  nodes_.resize(nodes);
  weights_.resize(nodes);
  const auto n = static_cast<double>(nodes);

  // Newton iteration on P_n from the Tricomi initial guess; roots are
  // symmetric so only half are solved for.
  const std::size_t half = (nodes + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= nodes; ++k) {
        const auto kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= nodes; ++k) {
      const auto kd = static_cast<double>(k);
      const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
      p0 = p1;
      p1 = p2;
    }
    dp = nodes == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);

    // Map [-1,1] -> (0,1); the rule on (0,1) has weights summing to 1.
    nodes_[i] = 0.5 * (1.0 - x);
    weights_[i] = 0.5 * w;
    nodes_[nodes - 1 - i] = 0.5 * (1.0 + x);
    weights_[nodes - 1 - i] = 0.5 * w;
  }
  if (nodes % 2 == 1) {
    // Middle root is exactly zero.
    nodes_[half - 1] = 0.5;
  }
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule(kDefaultQuadratureNodes);
  return rule;
}

}  // namespace sharpcal
