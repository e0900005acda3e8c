#pragma once

#include "bgk/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace bgk {

/// Constants of the isentropic BGK model for a given adiabatic exponent and dimension.
///
/// The equilibrium is c (K rho^(gamma-1) - |v-u|^2)_+^(n/2) with K = 2 gamma/(gamma-1),
/// n = 2/(gamma-1) - d and c chosen so the equilibrium carries unit mass at rho = 1.
template <typename Scalar>
struct GasParams {
  Scalar gamma;
  int dim;
  Scalar n;        ///< 2/(gamma-1) - d
  Scalar log_c;    ///< log of the normalization; c itself underflows quickly as gamma -> 1
  Scalar c;
  Scalar k_coef;   ///< 2 gamma / (gamma - 1)
  Scalar support_radius;  ///< sqrt(k_coef): support radius of the global equilibrium

  /// c^(2/n). The linearization of the equilibrium around rho = 1, u = 0 carries this factor.
  Scalar c_pow_2n() const { return std::exp(Scalar(2) * log_c / n); }

  /// Upper end of the exponent range for which the decay theorem is stated at derivative order N.
  Scalar theorem_gamma_bound(int order) const {
    return Scalar(1) + Scalar(2) / Scalar(4 * order + 6 + dim);
  }
};

template <typename Scalar>
GasParams<Scalar> derive_params(Scalar gamma, int dim) {
  if (dim <= 0) {
    throw ConfigError("gas.dim must be a positive integer, got " + std::to_string(dim));
  }
  const Scalar upper = Scalar(1) + Scalar(2) / Scalar(dim);
  if (!(gamma > Scalar(1) && gamma < upper)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "gas.gamma = " << gamma << " is outside the open interval (1, 1 + 2/d) = (1, " << upper
        << ") for d = " << dim;
    throw ConfigError(msg.str());
  }
  using std::exp;
  using std::lgamma;
  using std::log;
  using std::sqrt;

  GasParams<Scalar> p{};
  p.gamma = gamma;
  p.dim = dim;
  const Scalar gm1 = gamma - Scalar(1);
  p.n = Scalar(2) / gm1 - Scalar(dim);
  p.k_coef = Scalar(2) * gamma / gm1;
  p.support_radius = sqrt(p.k_coef);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  p.log_c = -log(p.k_coef) / gm1 + lgamma(gamma / gm1) - Scalar(0.5) * Scalar(dim) * log(pi) -
            lgamma(p.n / Scalar(2) + Scalar(1));
  p.c = exp(p.log_c);
  return p;
}

/// Density and bulk velocity of a cell.
template <typename Scalar>
struct MacroState {
  Scalar rho;
  VectorX<Scalar> u;

  static MacroState rest(int dim, Scalar rho = Scalar(1)) { return {rho, VectorX<Scalar>::Zero(dim)}; }
};

}  // namespace bgk
