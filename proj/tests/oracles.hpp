#pragma once

// Reference computations written independently of the library code paths.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

/// Normalization constant from std::tgamma (the library uses lgamma).
inline double normalization(double gamma, int d) {
  const double k = 2.0 * gamma / (gamma - 1.0);
  const double n = 2.0 / (gamma - 1.0) - d;
  return std::pow(k, -1.0 / (gamma - 1.0)) * std::tgamma(gamma / (gamma - 1.0)) /
         (std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(0.5 * n + 1.0));
}

/// Composite midpoint rule on [a, b] with m cells, summed in Kahan fashion.
inline double midpoint(const std::function<double(double)>& g, double a, double b, long m) {
  const double h = (b - a) / static_cast<double>(m);
  double sum = 0, comp = 0;
  for (long i = 0; i < m; ++i) {
    const double y = g(a + (static_cast<double>(i) + 0.5) * h) * h - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

/// One-dimensional equilibrium c (K rho^(gamma-1) - (v-u)^2)_+^(n/2).
inline double maxwellian_1d(double gamma, double rho, double u, double v) {
  const double k = 2.0 * gamma / (gamma - 1.0);
  const double n = 2.0 / (gamma - 1.0) - 1.0;
  const double base = k * std::pow(rho, gamma - 1.0) - (v - u) * (v - u);
  return base > 0 ? normalization(gamma, 1) * std::pow(base, 0.5 * n) : 0.0;
}

}  // namespace oracle
