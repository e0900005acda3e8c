#pragma once

#include "bgk/core.hpp"
#include "bgk/grids.hpp"
#include "bgk/params.hpp"

#include <cmath>
#include <string>

namespace bgk {

/// c (K rho^(gamma-1) - |v-u|^2)_+^(n/2); zero below the vacuum floor.
template <typename Scalar, typename Derived>
Scalar maxwellian(const GasParams<Scalar>& p, const MacroState<Scalar>& m,
                  const Eigen::MatrixBase<Derived>& v) {
  if (m.rho <= Scalar(kRhoFloor)) return Scalar(0);
  const Scalar base = p.k_coef * std::pow(m.rho, p.gamma - Scalar(1)) -
                      (v.transpose() - m.u).squaredNorm();
  if (base <= Scalar(0)) return Scalar(0);
  return std::exp(p.log_c + Scalar(0.5) * p.n * std::log(base));
}

/// Maxwellian evaluated at every velocity node.
template <typename Scalar>
ArrayX<Scalar> sample_maxwellian(const GasParams<Scalar>& p, const MacroState<Scalar>& m,
                                 const VelocityGrid<Scalar>& grid) {
  ArrayX<Scalar> out(grid.size());
  for (Index j = 0; j < grid.size(); ++j) out(j) = maxwellian(p, m, grid.node(j));
  return out;
}

/// The global equilibrium M(1, 0) on the grid.
template <typename Scalar>
ArrayX<Scalar> global_equilibrium(const GasParams<Scalar>& p, const VelocityGrid<Scalar>& grid) {
  return sample_maxwellian(p, MacroState<Scalar>::rest(p.dim), grid);
}

/// Velocity moments (1, v, |v|^2) of one cell.
template <typename Scalar>
struct Moments {
  Scalar density = 0;
  VectorX<Scalar> momentum;
  Scalar energy = 0;

  VectorX<Scalar> velocity() const { return momentum / density; }
};

template <typename Derived>
Moments<typename Derived::Scalar> moments(const Eigen::ArrayBase<Derived>& slice,
                                         const VelocityGrid<typename Derived::Scalar>& grid) {
  using Scalar = typename Derived::Scalar;
  const auto& f = slice.derived();
  const auto& w = grid.weights();
  Moments<Scalar> m;
  m.density = pairwise_sum<Scalar>(grid.size(), [&](Index j) { return w(j) * f(j); });
  m.momentum.resize(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) {
    const auto va = grid.component(a);
    m.momentum(a) = pairwise_sum<Scalar>(grid.size(), [&](Index j) { return w(j) * va(j) * f(j); });
  }
  m.energy = pairwise_sum<Scalar>(grid.size(), [&](Index j) { return w(j) * grid.speed2()(j) * f(j); });
  return m;
}

/// (rho, u) of a cell; throws VacuumError if the density is at or below the floor.
template <typename Scalar>
MacroState<Scalar> macro_state(const Moments<Scalar>& m) {
  if (!(m.density > Scalar(kRhoFloor))) {
    throw VacuumError("cell density " + std::to_string(static_cast<double>(m.density)) +
                      " is at or below rho_floor");
  }
  return {m.density, m.momentum / m.density};
}

/// (rho, rho u, rho |u|^2 + d rho^gamma): exact moments of the continuous Maxwellian.
template <typename Scalar>
Moments<Scalar> exact_moments(const GasParams<Scalar>& p, const MacroState<Scalar>& m) {
  return {m.rho, m.rho * m.u, m.rho * m.u.squaredNorm() + Scalar(p.dim) * std::pow(m.rho, p.gamma)};
}

/// Integral of (v-u)(v-u)^T F over velocity.
template <typename Derived>
MatrixX<typename Derived::Scalar> pressure_tensor(const Eigen::ArrayBase<Derived>& slice,
                                                  const VelocityGrid<typename Derived::Scalar>& grid,
                                                  const VectorX<typename Derived::Scalar>& u) {
  using Scalar = typename Derived::Scalar;
  const auto& f = slice.derived();
  const int d = grid.dim();
  MatrixX<Scalar> out(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      out(a, b) = pairwise_sum<Scalar>(grid.size(), [&](Index j) {
        return grid.weights()(j) * (grid.nodes()(j, a) - u(a)) * (grid.nodes()(j, b) - u(b)) * f(j);
      });
  return out;
}

/// H(F, v) = |v|^2 F / 2 + F^(1+2/n) / (2 c^(2/n) (1 + 2/n)), valid for gamma < 1 + 2/d.
/// Negative values (transport round-off) contribute no power-law term.
template <typename Scalar>
Scalar entropy_density(const GasParams<Scalar>& p, Scalar f, Scalar speed2) {
  const Scalar q = Scalar(1) + Scalar(2) / p.n;
  const Scalar power = f > Scalar(0) ? std::pow(f, q) : Scalar(0);
  return Scalar(0.5) * speed2 * f + power / (Scalar(2) * p.c_pow_2n() * q);
}

/// Velocity integral of H over one cell.
template <typename Derived>
typename Derived::Scalar kinetic_entropy(const Eigen::ArrayBase<Derived>& slice,
                                         const VelocityGrid<typename Derived::Scalar>& grid,
                                         const GasParams<typename Derived::Scalar>& p) {
  using Scalar = typename Derived::Scalar;
  const auto& f = slice.derived();
  return pairwise_sum<Scalar>(grid.size(), [&](Index j) {
    return grid.weights()(j) * entropy_density(p, Scalar(f(j)), grid.speed2()(j));
  });
}

/// Phase-space integral of H.
template <typename Scalar>
Scalar kinetic_entropy(const KineticField<Scalar>& field, const GasParams<Scalar>& p) {
  return field.space.cell_volume() * pairwise_sum<Scalar>(field.cells(), [&](Index i) {
           return kinetic_entropy(field.values.row(i).transpose(), field.velocity, p);
         });
}

/// Result of matching a Maxwellian to discrete moments.
template <typename Scalar>
struct DiscreteMaxwellian {
  ArrayX<Scalar> values;
  MacroState<Scalar> parameters;  ///< (rho, u) fed to the analytic Maxwellian
  int iterations = 0;
};

/// Finds (rho~, u~) such that the grid moments of M(rho~, u~) equal the target
/// (rho, rho u) exactly, by Newton iteration on the d+1 parameters.
///
/// The result has the Maxwellian's functional form, so it is also the minimizer
/// of the discrete entropy under the discrete moment constraints.
template <typename Scalar>
DiscreteMaxwellian<Scalar> discrete_maxwellian(const GasParams<Scalar>& p, const VelocityGrid<Scalar>& grid,
                                               Scalar density, const VectorX<Scalar>& momentum,
                                               Scalar tolerance = Scalar(1e-13), int max_iterations = 20) {
  const int d = grid.dim();
  if (!(density > Scalar(kRhoFloor))) {
    throw VacuumError("cannot build an equilibrium for density " + std::to_string(static_cast<double>(density)));
  }
  const Index nv = grid.size();
  const auto& w = grid.weights();
  DiscreteMaxwellian<Scalar> out;
  out.parameters = {density, momentum / density};
  out.values.resize(nv);
  ArrayX<Scalar> base(nv);

  const Scalar scale_m = density * (Scalar(1) + out.parameters.u.norm());
  for (int it = 0; it <= max_iterations; ++it) {
    const auto& th = out.parameters;
    const Scalar level = p.k_coef * std::pow(th.rho, p.gamma - Scalar(1));
    for (Index j = 0; j < nv; ++j) {
      base(j) = level - (grid.node(j).transpose() - th.u).squaredNorm();
      out.values(j) = base(j) > Scalar(0) ? std::exp(p.log_c + Scalar(0.5) * p.n * std::log(base(j))) : Scalar(0);
    }
    const Moments<Scalar> m = moments(out.values, grid);
    VectorX<Scalar> residual(d + 1);
    residual(0) = m.density - density;
    residual.tail(d) = m.momentum - momentum;
    if (std::abs(residual(0)) <= tolerance * density && residual.tail(d).norm() <= tolerance * scale_m) {
      out.iterations = it;
      return out;
    }
    if (it == max_iterations) break;

    // dM/drho = c n gamma rho^(gamma-2) B^(n/2-1), dM/du = c n (v-u) B^(n/2-1)
    MatrixX<Scalar> jac = MatrixX<Scalar>::Zero(d + 1, d + 1);
    const Scalar drho_factor = p.n * p.gamma * std::pow(th.rho, p.gamma - Scalar(2));
    for (Index j = 0; j < nv; ++j) {
      if (base(j) <= Scalar(0)) continue;
      const Scalar g = w(j) * std::exp(p.log_c + (Scalar(0.5) * p.n - Scalar(1)) * std::log(base(j)));
      VectorX<Scalar> moment_row(d + 1);  // (1, v)
      moment_row(0) = Scalar(1);
      moment_row.tail(d) = grid.node(j).transpose();
      VectorX<Scalar> param_col(d + 1);  // d/d(rho, u)
      param_col(0) = drho_factor;
      param_col.tail(d) = p.n * (grid.node(j).transpose() - th.u);
      jac.noalias() += g * moment_row * param_col.transpose();
    }
    const VectorX<Scalar> delta = jac.partialPivLu().solve(-residual);
    if (!delta.allFinite()) break;
    Scalar step = Scalar(1);
    while (th.rho + step * delta(0) <= Scalar(0.1) * th.rho) step *= Scalar(0.5);
    out.parameters.rho += step * delta(0);
    out.parameters.u += step * delta.tail(d);
  }
  throw CorrectionError("discrete Maxwellian correction did not converge for density " +
                        std::to_string(static_cast<double>(density)) +
                        "; the velocity grid cannot represent this equilibrium");
}

/// Total mass of a sampled profile lying outside the equilibrium support |v| < R.
template <typename Derived>
typename Derived::Scalar mass_outside_support(const Eigen::ArrayBase<Derived>& slice,
                                              const VelocityGrid<typename Derived::Scalar>& grid,
                                              const GasParams<typename Derived::Scalar>& p) {
  using Scalar = typename Derived::Scalar;
  const auto& f = slice.derived();
  return pairwise_sum<Scalar>(grid.size(), [&](Index j) {
    return grid.speed2()(j) >= p.k_coef ? grid.weights()(j) * std::abs(Scalar(f(j))) : Scalar(0);
  });
}

}  // namespace bgk
