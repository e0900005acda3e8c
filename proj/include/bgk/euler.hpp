#pragma once

#include "bgk/core.hpp"
#include "bgk/equilibrium.hpp"
#include "bgk/grids.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace bgk {

/// Conservative state of the isentropic Euler system with pressure rho^gamma.
template <typename Scalar>
struct EulerState {
  ArrayX<Scalar> rho;
  FieldArray<Scalar> momentum;  ///< cells x d
  Scalar t = 0;
};

/// Largest characteristic speed |u_a| + sqrt(gamma rho^(gamma-1)) over cells and axes.
template <typename Scalar>
Scalar euler_max_speed(const EulerState<Scalar>& s, Scalar gamma) {
  Scalar smax = 0;
  for (Index i = 0; i < s.rho.size(); ++i) {
    if (!(s.rho(i) > Scalar(kRhoFloor))) {
      std::ostringstream msg;
      msg << "vacuum in Euler state at cell " << i << " (rho = " << s.rho(i) << ")";
      throw VacuumError(msg.str());
    }
    const Scalar sound = std::sqrt(gamma * std::pow(s.rho(i), gamma - Scalar(1)));
    smax = std::max(smax, s.momentum.row(i).abs().maxCoeff() / s.rho(i) + sound);
  }
  return smax;
}

template <typename Scalar>
Scalar euler_stable_dt(const EulerState<Scalar>& s, const SpatialGrid<Scalar>& grid, Scalar gamma, Scalar cfl) {
  return cfl * grid.min_spacing() / euler_max_speed(s, gamma);
}

namespace detail {

template <typename Scalar>
Scalar minmod3(Scalar a, Scalar b) {
  if (a * b <= Scalar(0)) return Scalar(0);
  return std::abs(a) < std::abs(b) ? a : b;
}

/// Time derivative of the conservative variables (Rusanov flux, minmod reconstruction).
/// Conservative variables are packed as columns (rho, m_1..m_d).
template <typename Scalar>
FieldArray<Scalar> euler_rhs(const FieldArray<Scalar>& q, const SpatialGrid<Scalar>& grid, Scalar gamma) {
  const int d = grid.dim();
  const Index nc = q.cols();
  FieldArray<Scalar> rhs = FieldArray<Scalar>::Zero(q.rows(), nc);

  auto flux = [&](const ArrayX<Scalar>& u, int axis) {
    ArrayX<Scalar> out(nc);
    const Scalar vel = u(1 + axis) / u(0);
    out(0) = u(1 + axis);
    for (int b = 0; b < d; ++b) out(1 + b) = u(1 + b) * vel;
    out(1 + axis) += std::pow(u(0), gamma);
    return out;
  };
  auto speed = [&](const ArrayX<Scalar>& u, int axis) {
    return std::abs(u(1 + axis) / u(0)) + std::sqrt(gamma * std::pow(u(0), gamma - Scalar(1)));
  };

  for (int a = 0; a < d; ++a) {
    const Scalar h = grid.spacing(a);
    for (Index i = 0; i < q.rows(); ++i) {
      // face between i and its right neighbour
      const Index ip = grid.shift(i, a, 1);
      const Index im = grid.shift(i, a, -1);
      const Index ipp = grid.shift(i, a, 2);
      ArrayX<Scalar> left(nc), right(nc);
      for (Index c = 0; c < nc; ++c) {
        const Scalar sl = minmod3(q(ip, c) - q(i, c), q(i, c) - q(im, c));
        const Scalar sr = minmod3(q(ipp, c) - q(ip, c), q(ip, c) - q(i, c));
        left(c) = q(i, c) + Scalar(0.5) * sl;
        right(c) = q(ip, c) - Scalar(0.5) * sr;
      }
      if (!(left(0) > Scalar(kRhoFloor) && right(0) > Scalar(kRhoFloor))) {
        throw VacuumError("vacuum in reconstructed Euler state");
      }
      const Scalar s = std::max(speed(left, a), speed(right, a));
      const ArrayX<Scalar> fhat = Scalar(0.5) * (flux(left, a) + flux(right, a)) - Scalar(0.5) * s * (right - left);
      rhs.row(i) -= fhat.transpose() / h;
      rhs.row(ip) += fhat.transpose() / h;
    }
  }
  return rhs;
}

template <typename Scalar>
FieldArray<Scalar> pack(const EulerState<Scalar>& s) {
  FieldArray<Scalar> q(s.rho.size(), 1 + s.momentum.cols());
  q.col(0) = s.rho;
  q.rightCols(s.momentum.cols()) = s.momentum;
  return q;
}

}  // namespace detail

/// One second-order step (SSP-RK2, minmod reconstruction, Rusanov flux) on the periodic grid.
/// Rejects dt above cfl * dx / (max characteristic speed).
template <typename Scalar>
EulerState<Scalar> euler_step(const EulerState<Scalar>& s, const SpatialGrid<Scalar>& grid, Scalar gamma, Scalar dt,
                              Scalar cfl = Scalar(0.4)) {
  const Scalar bound = euler_stable_dt(s, grid, gamma, cfl);
  if (dt > bound * (Scalar(1) + Scalar(1e-12))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Euler step dt = " << dt << " violates the CFL bound " << bound << " (cfl = " << cfl << ")";
    throw CflError(msg.str());
  }
  const FieldArray<Scalar> q0 = detail::pack(s);
  const FieldArray<Scalar> q1 = q0 + dt * detail::euler_rhs(q0, grid, gamma);
  const FieldArray<Scalar> q2 = Scalar(0.5) * (q0 + q1 + dt * detail::euler_rhs(q1, grid, gamma));
  EulerState<Scalar> out;
  out.rho = q2.col(0);
  out.momentum = q2.rightCols(q2.cols() - 1);
  out.t = s.t + dt;
  if (!(out.rho > Scalar(kRhoFloor)).all()) throw VacuumError("Euler step produced vacuum");
  return out;
}

/// Advances to t_end with CFL-limited steps; the last step lands on t_end exactly.
template <typename Scalar>
EulerState<Scalar> euler_solve(EulerState<Scalar> s, const SpatialGrid<Scalar>& grid, Scalar gamma, Scalar t_end,
                               Scalar cfl = Scalar(0.4), std::optional<Scalar> fixed_dt = std::nullopt) {
  while (s.t < t_end - Scalar(1e-14) * std::max(Scalar(1), t_end)) {
    Scalar dt = fixed_dt ? *fixed_dt : euler_stable_dt(s, grid, gamma, cfl);
    dt = std::min(dt, t_end - s.t);
    s = euler_step(s, grid, gamma, dt, cfl);
  }
  s.t = t_end;
  return s;
}

/// Density and velocity per cell, the form in which kinetic and Euler results are compared.
template <typename Scalar>
struct MacroProfile {
  ArrayX<Scalar> rho;
  FieldArray<Scalar> u;  ///< cells x d
};

template <typename Scalar>
MacroProfile<Scalar> macro_profile(const EulerState<Scalar>& s) {
  MacroProfile<Scalar> out{s.rho, s.momentum};
  for (Index i = 0; i < s.rho.size(); ++i) out.u.row(i) /= s.rho(i);
  return out;
}

template <typename Scalar>
MacroProfile<Scalar> macro_profile(const KineticField<Scalar>& F) {
  const int d = F.velocity.dim();
  MacroProfile<Scalar> out{ArrayX<Scalar>(F.cells()), FieldArray<Scalar>(F.cells(), d)};
  for (Index i = 0; i < F.cells(); ++i) {
    const auto m = macro_state(moments(F.values.row(i).transpose(), F.velocity));
    out.rho(i) = m.rho;
    out.u.row(i) = m.u.transpose().array();
  }
  return out;
}

/// Euler state with the macroscopic data of a kinetic field.
template <typename Scalar>
EulerState<Scalar> euler_from_kinetic(const KineticField<Scalar>& F, Scalar t = Scalar(0)) {
  const auto prof = macro_profile(F);
  EulerState<Scalar> s{prof.rho, prof.u, t};
  for (Index i = 0; i < s.rho.size(); ++i) s.momentum.row(i) *= s.rho(i);
  return s;
}

template <typename Scalar>
struct L1Error {
  Scalar rho = 0;
  Scalar u = 0;
};

/// Grid L1 norms of the density and velocity differences (velocity: sum over components).
template <typename Scalar>
L1Error<Scalar> kinetic_vs_euler_error(const MacroProfile<Scalar>& kinetic, const MacroProfile<Scalar>& euler,
                                       const SpatialGrid<Scalar>& grid) {
  if (kinetic.rho.size() != euler.rho.size() || kinetic.rho.size() != grid.size() ||
      kinetic.u.cols() != euler.u.cols()) {
    throw ConfigError("kinetic_vs_euler_error: profiles have mismatched shapes");
  }
  L1Error<Scalar> e;
  e.rho = grid.cell_volume() * pairwise_sum(ArrayX<Scalar>((kinetic.rho - euler.rho).abs()));
  e.u = grid.cell_volume() * pairwise_sum(ArrayX<Scalar>((kinetic.u - euler.u).abs().rowwise().sum()));
  return e;
}

}  // namespace bgk
