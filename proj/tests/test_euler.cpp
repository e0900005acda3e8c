#include "doctest.h"

#include "bgk/equilibrium.hpp"
#include "bgk/euler.hpp"

#include <cmath>

using namespace bgk;

namespace {

constexpr double kGamma = 1.1;

EulerState<double> smooth_state(const SpatialGrid<double>& g, double amp = 0.2) {
  EulerState<double> s{ArrayX<double>(g.size()), FieldArray<double>(g.size(), 1), 0.0};
  for (Index i = 0; i < g.size(); ++i) {
    const double x = g.center(i, 0);
    s.rho(i) = 1.0 + amp * std::sin(x);
    s.momentum(i, 0) = s.rho(i) * 0.1 * std::cos(x);
  }
  return s;
}

}  // namespace

TEST_CASE("a uniform state is stationary") {
  const auto g = SpatialGrid<double>::cube(2, 8);
  EulerState<double> s{ArrayX<double>::Constant(g.size(), 1.3), FieldArray<double>(g.size(), 2), 0.0};
  s.momentum.col(0).setConstant(1.3 * 0.2);
  s.momentum.col(1).setConstant(-1.3 * 0.1);
  const auto out = euler_solve(s, g, kGamma, 0.5);
  CHECK((out.rho - s.rho).abs().maxCoeff() <= 1e-14);
  CHECK((out.momentum - s.momentum).abs().maxCoeff() <= 1e-14);
  CHECK(out.t == 0.5);
}

TEST_CASE("Euler steps conserve mass and momentum") {
  const auto g = SpatialGrid<double>::cube(1, 64);
  const auto s = smooth_state(g);
  const auto out = euler_solve(s, g, kGamma, 0.3);
  CHECK(std::abs(out.rho.sum() - s.rho.sum()) <= 1e-13 * s.rho.sum());
  CHECK(std::abs(out.momentum.sum() - s.momentum.sum()) <= 1e-13 * s.rho.sum());
}

TEST_CASE("the Euler solver converges for smooth data") {
  const double t_end = 0.2;
  auto solve = [&](int cells) {
    const auto g = SpatialGrid<double>::cube(1, cells);
    return macro_profile(euler_solve(smooth_state(g), g, kGamma, t_end));
  };
  auto coarsen = [](const ArrayX<double>& a, int factor) {
    ArrayX<double> out = ArrayX<double>::Zero(a.size() / factor);
    for (Index i = 0; i < a.size(); ++i) out(i / factor) += a(i) / factor;
    return out;
  };
  const auto ref = solve(2048);
  std::vector<double> err;
  for (int cells : {64, 128, 256}) {
    const auto p = solve(cells);
    err.push_back((p.rho - coarsen(ref.rho, 2048 / cells)).abs().sum() * (2 * std::numbers::pi / cells));
  }
  const double order = std::log2(err[1] / err[2]);
  MESSAGE("observed order " << order);
  CHECK(order > 1.5);
  CHECK(err[2] < err[1]);
}

TEST_CASE("Euler step rejects oversized steps and vacuum") {
  const auto g = SpatialGrid<double>::cube(1, 32);
  const auto s = smooth_state(g);
  const double dt = euler_stable_dt(s, g, kGamma, 0.4);
  CHECK(dt > 0.0);
  CHECK_NOTHROW(euler_step(s, g, kGamma, dt));
  CHECK_THROWS_AS(euler_step(s, g, kGamma, 1.5 * dt), CflError);
  CHECK_THROWS_AS(euler_solve(s, g, kGamma, 0.1, 0.4, std::optional<double>(10 * dt)), CflError);

  auto empty = s;
  empty.rho(3) = 0.0;
  CHECK_THROWS_AS(euler_max_speed(empty, kGamma), VacuumError);
}

TEST_CASE("L1 comparison of macroscopic profiles") {
  const auto g = SpatialGrid<double>::cube(1, 16);
  const auto a = macro_profile(smooth_state(g));
  const auto zero = kinetic_vs_euler_error(a, a, g);
  CHECK(zero.rho == 0.0);
  CHECK(zero.u == 0.0);

  auto b = a;
  b.rho += 0.5;
  b.u.col(0) -= 0.25;
  const auto e = kinetic_vs_euler_error(a, b, g);
  CHECK(e.rho == doctest::Approx(0.5 * 2 * std::numbers::pi));
  CHECK(e.u == doctest::Approx(0.25 * 2 * std::numbers::pi));

  const auto other = SpatialGrid<double>::cube(1, 8);
  CHECK_THROWS_AS(kinetic_vs_euler_error(a, macro_profile(smooth_state(other)), g), ConfigError);
}

TEST_CASE("Euler data taken from a kinetic field keeps its moments") {
  const auto p = derive_params(kGamma, 1);
  const auto g = SpatialGrid<double>::cube(1, 16);
  const auto vel = make_velocity_grid(p, 128);
  const auto ref = smooth_state(g);
  KineticField<double> F(g, vel);
  for (Index i = 0; i < g.size(); ++i) {
    const VectorX<double> mom = ref.momentum.row(i).transpose().matrix();
    F.values.row(i) = discrete_maxwellian(p, vel, ref.rho(i), mom).values.transpose();
  }
  const auto s = euler_from_kinetic(F, 0.25);
  CHECK(s.t == 0.25);
  CHECK((s.rho - ref.rho).abs().maxCoeff() <= 1e-13);
  CHECK((s.momentum - ref.momentum).abs().maxCoeff() <= 1e-13);
  const auto prof = macro_profile(F);
  CHECK((prof.u - macro_profile(ref).u).abs().maxCoeff() <= 1e-13);
}
