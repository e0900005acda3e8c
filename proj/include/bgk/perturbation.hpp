#pragma once

#include "bgk/core.hpp"
#include "bgk/equilibrium.hpp"
#include "bgk/grids.hpp"
#include "bgk/params.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace bgk {

/// Weight M0^w, w = (n-2)/(2n), of the decomposition F = M0 + M0^w f.
///
/// Nodes where M0 <= m_floor are masked: the weight and its inverse are set to
/// zero there, so f vanishes on them and the discarded part of F is reported.
template <typename Scalar>
struct PerturbationWeight {
  Scalar exponent = 0;
  Scalar m_floor = 0;
  ArrayX<Scalar> m0;
  ArrayX<Scalar> weight;
  ArrayX<Scalar> inverse_weight;
  Eigen::Array<bool, Eigen::Dynamic, 1> active;

  Index active_count() const { return active.count(); }
};

template <typename Scalar>
PerturbationWeight<Scalar> make_weight(const GasParams<Scalar>& p, const VelocityGrid<Scalar>& grid,
                                       Scalar relative_floor = Scalar(1e-12)) {
  if (!(p.n > Scalar(2))) {
    std::ostringstream msg;
    msg << "the weighted perturbation needs n > 2 (gamma < 1 + 2/(d+2)); got n = " << p.n;
    throw ConfigError(msg.str());
  }
  PerturbationWeight<Scalar> out;
  out.exponent = (p.n - Scalar(2)) / (Scalar(2) * p.n);
  out.m0 = global_equilibrium(p, grid);
  out.m_floor = relative_floor * out.m0.maxCoeff();
  out.active = out.m0 > out.m_floor;
  out.weight = ArrayX<Scalar>::Zero(grid.size());
  out.inverse_weight = ArrayX<Scalar>::Zero(grid.size());
  for (Index j = 0; j < grid.size(); ++j) {
    if (!out.active(j)) continue;
    const Scalar lw = out.exponent * std::log(out.m0(j));
    out.weight(j) = std::exp(lw);
    out.inverse_weight(j) = std::exp(-lw);
  }
  return out;
}

/// Orthonormal basis {e_1, e_{1+j}} of the hydrodynamic kernel, stored column-wise.
///
/// e_1 = (n gamma c^(2/n))^(1/2) M0^w and e_{1+j} = (n c^(2/n))^(1/2) v_j M0^w.
/// The c^(2/n) factor is what the second-order expansion of M(rho, u) around
/// (1, 0) produces; without it the Gram matrix is c^(-2/n) I instead of I.
template <typename Scalar>
struct ProjectionBasis {
  MatrixX<Scalar> vectors;  ///< nodes x (d+1)
  MatrixX<Scalar> gram;
  Scalar gram_deviation = 0;  ///< max |gram - I|
  Scalar density_scale = 0;   ///< n gamma c^(2/n)
  Scalar velocity_scale = 0;  ///< n c^(2/n)

  int size() const { return static_cast<int>(vectors.cols()); }
};

/// Quadrature inner product <f, g>_{L^2_v}.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar inner(const Eigen::ArrayBase<DerivedA>& f, const Eigen::ArrayBase<DerivedB>& g,
                                const VelocityGrid<typename DerivedA::Scalar>& grid) {
  using Scalar = typename DerivedA::Scalar;
  const auto& a = f.derived();
  const auto& b = g.derived();
  return pairwise_sum<Scalar>(grid.size(), [&](Index j) { return grid.weights()(j) * a(j) * b(j); });
}

template <typename Scalar>
ProjectionBasis<Scalar> build_basis(const GasParams<Scalar>& p, const VelocityGrid<Scalar>& grid,
                                    const PerturbationWeight<Scalar>& weight,
                                    std::optional<Scalar> gram_tolerance = Scalar(1e-6)) {
  const int d = grid.dim();
  ProjectionBasis<Scalar> b;
  b.density_scale = p.n * p.gamma * p.c_pow_2n();
  b.velocity_scale = p.n * p.c_pow_2n();
  b.vectors.resize(grid.size(), d + 1);
  b.vectors.col(0) = (std::sqrt(b.density_scale) * weight.weight).matrix();
  for (int a = 0; a < d; ++a)
    b.vectors.col(1 + a) = (std::sqrt(b.velocity_scale) * grid.component(a) * weight.weight).matrix();
  b.gram.resize(d + 1, d + 1);
  for (int i = 0; i <= d; ++i)
    for (int k = 0; k <= d; ++k) b.gram(i, k) = inner(b.vectors.col(i).array(), b.vectors.col(k).array(), grid);
  b.gram_deviation = (b.gram - MatrixX<Scalar>::Identity(d + 1, d + 1)).cwiseAbs().maxCoeff();
  if (gram_tolerance && b.gram_deviation > *gram_tolerance) {
    std::ostringstream msg;
    msg << "Gram matrix of the projection basis deviates from the identity by " << b.gram_deviation
        << " (tolerance " << *gram_tolerance << ") on a grid with " << grid.points_per_axis()
        << " velocity points per axis; refine the velocity grid";
    throw ResolutionError(msg.str());
  }
  return b;
}

/// Everything needed to move between F and the weighted perturbation f.
template <typename Scalar>
class PerturbationSpace {
 public:
  PerturbationSpace(GasParams<Scalar> params, VelocityGrid<Scalar> grid,
                    std::optional<Scalar> gram_tolerance = Scalar(1e-6), Scalar envelope = Scalar(0.5))
      : params_(std::move(params)),
        grid_(std::move(grid)),
        weight_(make_weight(params_, grid_)),
        basis_(build_basis(params_, grid_, weight_, gram_tolerance)),
        envelope_(envelope) {}

  const GasParams<Scalar>& params() const { return params_; }
  const VelocityGrid<Scalar>& grid() const { return grid_; }
  const PerturbationWeight<Scalar>& weight() const { return weight_; }
  const ProjectionBasis<Scalar>& basis() const { return basis_; }
  Scalar envelope() const { return envelope_; }

 private:
  GasParams<Scalar> params_;
  VelocityGrid<Scalar> grid_;
  PerturbationWeight<Scalar> weight_;
  ProjectionBasis<Scalar> basis_;
  Scalar envelope_;
};

/// Velocity profile of f for one cell, with the mass dropped on masked nodes.
template <typename Scalar>
struct Perturbed {
  ArrayX<Scalar> values;
  Scalar leakage = 0;  ///< integral of |F - M0| over masked nodes
};

template <typename Derived>
Perturbed<typename Derived::Scalar> to_perturbation(const Eigen::ArrayBase<Derived>& F,
                                                    const PerturbationSpace<typename Derived::Scalar>& space) {
  using Scalar = typename Derived::Scalar;
  const auto& w = space.weight();
  const auto& in = F.derived();
  Perturbed<Scalar> out;
  out.values.resize(space.grid().size());
  for (Index j = 0; j < space.grid().size(); ++j) {
    const Scalar diff = Scalar(in(j)) - w.m0(j);
    if (w.active(j)) {
      out.values(j) = diff * w.inverse_weight(j);
    } else {
      out.values(j) = Scalar(0);
      out.leakage += space.grid().weights()(j) * std::abs(diff);
    }
  }
  return out;
}

/// F = M0 + M0^w f; masked nodes return M0.
template <typename Derived>
ArrayX<typename Derived::Scalar> from_perturbation(const Eigen::ArrayBase<Derived>& f,
                                                   const PerturbationSpace<typename Derived::Scalar>& space) {
  const auto& w = space.weight();
  return w.m0 + w.weight * f.derived();
}

/// Whole-field versions. Leakage is integrated over x as well.
template <typename Scalar>
struct PerturbedField {
  FieldArray<Scalar> values;
  Scalar leakage = 0;
};

template <typename Scalar>
PerturbedField<Scalar> to_perturbation(const KineticField<Scalar>& F, const PerturbationSpace<Scalar>& space) {
  PerturbedField<Scalar> out;
  out.values.resize(F.cells(), F.nodes());
  ArrayX<Scalar> leak(F.cells());
  for (Index i = 0; i < F.cells(); ++i) {
    auto r = to_perturbation(F.values.row(i).transpose(), space);
    out.values.row(i) = r.values.transpose();
    leak(i) = r.leakage;
  }
  out.leakage = F.space.cell_volume() * pairwise_sum(leak);
  return out;
}

template <typename Scalar>
FieldArray<Scalar> from_perturbation(const FieldArray<Scalar>& f, const PerturbationSpace<Scalar>& space) {
  FieldArray<Scalar> out(f.rows(), f.cols());
  for (Index i = 0; i < f.rows(); ++i)
    out.row(i) = from_perturbation(f.row(i).transpose(), space).transpose();
  return out;
}

/// Coordinates <f, e_i> of f in the kernel basis.
template <typename Derived>
VectorX<typename Derived::Scalar> basis_coefficients(const Eigen::ArrayBase<Derived>& f,
                                                     const PerturbationSpace<typename Derived::Scalar>& space) {
  const auto& b = space.basis();
  VectorX<typename Derived::Scalar> out(b.size());
  for (int i = 0; i < b.size(); ++i) out(i) = inner(f.derived(), b.vectors.col(i).array(), space.grid());
  return out;
}

/// P(f) = sum_i <f, e_i> e_i.
template <typename Derived>
ArrayX<typename Derived::Scalar> project(const Eigen::ArrayBase<Derived>& f,
                                         const PerturbationSpace<typename Derived::Scalar>& space) {
  return (space.basis().vectors * basis_coefficients(f, space)).array();
}

/// L(f) = P(f) - f.
template <typename Derived>
ArrayX<typename Derived::Scalar> linear_op(const Eigen::ArrayBase<Derived>& f,
                                           const PerturbationSpace<typename Derived::Scalar>& space) {
  return project(f, space) - f.derived();
}

/// Hydrodynamic coefficients with P(f) = (a + v.b) M0^w.
template <typename Scalar>
struct MacroCoefficients {
  Scalar a = 0;
  VectorX<Scalar> b;
};

template <typename Derived>
MacroCoefficients<typename Derived::Scalar> macro_coeffs(const Eigen::ArrayBase<Derived>& f,
                                                         const PerturbationSpace<typename Derived::Scalar>& space) {
  using Scalar = typename Derived::Scalar;
  const auto& g = space.grid();
  const auto& w = space.weight().weight;
  MacroCoefficients<Scalar> out;
  out.a = space.basis().density_scale * inner(f.derived(), w, g);
  out.b.resize(g.dim());
  for (int k = 0; k < g.dim(); ++k) out.b(k) = space.basis().velocity_scale * inner(f.derived(), g.component(k) * w, g);
  return out;
}

/// (a + v.b) M0^w.
template <typename Scalar>
ArrayX<Scalar> macro_part(const MacroCoefficients<Scalar>& c, const PerturbationSpace<Scalar>& space) {
  return (c.a + (space.grid().nodes() * c.b).array()) * space.weight().weight;
}

template <typename Scalar>
struct NonlinearTerm {
  ArrayX<Scalar> values;
  Scalar leakage = 0;
  MacroState<Scalar> state;  ///< (rho_F, u_F) of F = M0 + M0^w f
};

/// Gamma(f) in exact-residual form: M0^(-w) (M^[F] - M0) - P(f), F = M0 + M0^w f.
///
/// Equivalent to the second-order remainder of the expansion of M[F] around
/// M0, without needing the intermediate point of that expansion. M^ is the
/// moment-matched equilibrium the solver relaxes to, so Gamma(0) = 0 and
/// P(Gamma(f)) = 0 hold on the grid. Throws
/// EnvelopeError when |rho_F - 1| or |u_F| exceed the space's envelope.
template <typename Derived>
NonlinearTerm<typename Derived::Scalar> nonlinear_op(const Eigen::ArrayBase<Derived>& f,
                                                     const PerturbationSpace<typename Derived::Scalar>& space) {
  using Scalar = typename Derived::Scalar;
  const auto F = from_perturbation(f, space);
  const Moments<Scalar> m = moments(F, space.grid());
  NonlinearTerm<Scalar> out;
  out.state = macro_state(m);
  const Scalar drho = std::abs(out.state.rho - Scalar(1));
  const Scalar speed = out.state.u.norm();
  if (drho > space.envelope() || speed > space.envelope()) {
    std::ostringstream msg;
    msg << "perturbative envelope violated: |rho - 1| = " << drho << ", |u| = " << speed << " (limit "
        << space.envelope() << ")";
    throw EnvelopeError(msg.str());
  }
  const ArrayX<Scalar> equilibrium = discrete_maxwellian(space.params(), space.grid(), m.density, m.momentum).values;
  const auto& w = space.weight();
  const ArrayX<Scalar> pf = project(f, space);
  out.values.resize(space.grid().size());
  for (Index j = 0; j < space.grid().size(); ++j) {
    const Scalar residual = equilibrium(j) - w.m0(j);
    if (w.active(j)) {
      out.values(j) = residual * w.inverse_weight(j) - pf(j);
    } else {
      out.values(j) = Scalar(0);
      out.leakage += space.grid().weights()(j) * std::abs(residual);
    }
  }
  return out;
}

}  // namespace bgk
