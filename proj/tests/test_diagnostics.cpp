#include "doctest.h"

#include "bgk/diagnostics.hpp"
#include "bgk/experiments.hpp"
#include "bgk/rng.hpp"

#include <cmath>
#include <numbers>

using namespace bgk;

namespace {

const PerturbationSpace<double>& space_1d() {
  static const PerturbationSpace<double> ps = [] {
    const auto p = derive_params(1.1, 1);
    return PerturbationSpace<double>(p, make_velocity_grid(p, 128));
  }();
  return ps;
}

// a(x) e_1 + micro(x) with a seeded micro profile
FieldArray<double> field_of(const SpatialGrid<double>& space, const std::function<double(double)>& a,
                            const ArrayX<double>& profile) {
  const auto& ps = space_1d();
  FieldArray<double> f(space.size(), ps.grid().size());
  for (Index i = 0; i < space.size(); ++i) f.row(i) = (a(space.center(i, 0)) * profile).transpose();
  return f;
}

ArrayX<double> e1() { return space_1d().basis().vectors.col(0).array(); }

}  // namespace

TEST_CASE("energy functional of simple fields") {
  const auto& ps = space_1d();
  const auto space = SpatialGrid<double>::cube(1, 32);
  const FieldArray<double> zero = FieldArray<double>::Zero(space.size(), ps.grid().size());
  CHECK(energy_functional(zero, space, ps.grid(), 2).total == 0.0);

  const double g00 = ps.basis().gram(0, 0);
  const auto flat = energy_functional(field_of(space, [](double) { return 1.0; }, e1()), space, ps.grid(), 2);
  CHECK(flat.total == doctest::Approx(2 * std::numbers::pi * g00).epsilon(1e-13));
  CHECK(flat.by_order[1] == 0.0);
  CHECK(flat.by_order[2] == 0.0);

  // the central difference of sin is cos scaled by sin(h)/h
  const auto wave = energy_functional(field_of(space, [](double x) { return std::sin(x); }, e1()), space, ps.grid(), 1);
  const double h = space.spacing(0);
  const double damp = std::sin(h) / h;
  CHECK(wave.by_order[0] == doctest::Approx(std::numbers::pi * g00).epsilon(1e-12));
  CHECK(wave.by_order[1] == doctest::Approx(std::numbers::pi * g00 * damp * damp).epsilon(1e-12));
  CHECK(wave.total == doctest::Approx(wave.by_order[0] + wave.by_order[1]).epsilon(1e-15));
  CHECK(wave.total == doctest::Approx(2 * std::numbers::pi).epsilon(1e-2));
  CHECK_THROWS_AS(energy_functional(zero, space, ps.grid(), -1), ConfigError);
}

TEST_CASE("energy functional is additive over orthogonal modes") {
  const auto& ps = space_1d();
  const auto space = SpatialGrid<double>::cube(1, 32);
  const FieldArray<double> a = field_of(space, [](double x) { return std::sin(x); }, e1());
  const FieldArray<double> b = field_of(space, [](double x) { return std::cos(3 * x); }, e1());
  const double ea = energy_functional(a, space, ps.grid(), 2).total;
  const double eb = energy_functional(b, space, ps.grid(), 2).total;
  const double eab = energy_functional(FieldArray<double>(a + b), space, ps.grid(), 2).total;
  CHECK(eab == doctest::Approx(ea + eb).epsilon(1e-12));
}

TEST_CASE("coercivity defect and delta hat") {
  const auto& ps = space_1d();
  const auto space = SpatialGrid<double>::cube(1, 16);
  SplitMix64 rng(7);
  FieldArray<double> f(space.size(), ps.grid().size());
  for (Index i = 0; i < space.size(); ++i) f.row(i) = random_perturbation(ps, rng).transpose();
  const auto r = coercivity_defect(f, space, ps, 2);
  CHECK(std::abs(r.defect) <= 1e-12 * r.energy);
  CHECK(r.delta_hat >= 0.0);
  CHECK(r.delta_hat <= 1.0);
  CHECK(r.macro + r.dissipation == doctest::Approx(r.energy).epsilon(1e-10));

  const auto pure = coercivity_defect(field_of(space, [](double x) { return std::sin(x); }, e1()), space, ps, 2);
  CHECK(pure.delta_hat <= 1e-6);
}

TEST_CASE("macro-micro report") {
  const auto& ps = space_1d();
  const auto space = SpatialGrid<double>::cube(1, 16);

  const FieldArray<double> wave = field_of(space, [](double x) { return 1e-3 * std::sin(x); }, e1());
  const auto kernel = macro_micro_report(wave, space, ps, 2);
  CHECK(kernel.coefficients.b.abs().maxCoeff() <= 1e-12);
  CHECK(kernel.coefficients.a.abs().maxCoeff() > 0.0);
  CHECK(std::isfinite(kernel.ab_ratio));

  // without x dependence ell = -(I-P) Gamma and the two moment sets cancel
  SplitMix64 rng(19);
  ArrayX<double> profile = random_perturbation(ps, rng);
  profile *= 1e-3 / std::sqrt(inner(profile, profile, ps.grid()));
  const auto flat = macro_micro_report(field_of(space, [](double) { return 1.0; }, profile), space, ps, 2);
  const double scale = flat.h_moments.abs().maxCoeff();
  CHECK(scale > 0.0);
  CHECK((flat.ell_moments + flat.h_moments).abs().maxCoeff() <= 1e-6 * scale);
  CHECK(flat.a_norms.size() == 3);
}

TEST_CASE("diagnose records conservation data") {
  const auto& ps = space_1d();
  const auto& p = ps.params();
  const auto space = SpatialGrid<double>::cube(1, 16);
  KineticField<double> F(space, ps.grid());
  for (Index i = 0; i < F.cells(); ++i) F.values.row(i) = ps.weight().m0.transpose();
  DiagnosticsContext<double> ctx{p, ps, 2, 2, true};
  const auto rest = diagnose(SolverState<double>{F, 0.0, 0}, ctx);
  CHECK(rest.energy_total <= 1e-20);
  CHECK(std::abs(rest.perturbation_mass) <= 1e-20);
  CHECK(rest.envelope_ok);
  CHECK(rest.mass == doctest::Approx(2 * std::numbers::pi * moments(ps.weight().m0, ps.grid()).density));
  CHECK(diagnostics_row(rest, 1, 2).size() == diagnostics_columns(1, 2).size());

  KineticField<double> heavy = F;
  heavy.values *= 1.8;
  CHECK_THROWS_AS(diagnose(SolverState<double>{heavy, 0.0, 0}, ctx), EnvelopeError);
  ctx.abort_on_envelope = false;
  CHECK_FALSE(diagnose(SolverState<double>{heavy, 0.0, 0}, ctx).envelope_ok);

  const std::vector<std::string> expected{"t",       "mass",     "momentum_1", "entropy",   "E_total",
                                          "E_0",     "E_1",      "E_2",        "P_norm2",   "IP_norm2",
                                          "leakage", "delta_hat", "pert_mass", "pert_momentum_1", "envelope_ok"};
  CHECK(diagnostics_columns(1, 2) == expected);
}

TEST_CASE("Pythagoras for the projection") {
  const auto& ps = space_1d();
  const auto space = SpatialGrid<double>::cube(1, 8);
  SplitMix64 rng(29);
  FieldArray<double> f(space.size(), ps.grid().size());
  for (Index i = 0; i < space.size(); ++i) f.row(i) = random_perturbation(ps, rng).transpose();
  const FieldArray<double> pf = project_field(f, ps);
  const double total = norm2_xv(f, space, ps.grid());
  CHECK(norm2_xv(pf, space, ps.grid()) + norm2_xv<double>(f - pf, space, ps.grid()) ==
        doctest::Approx(total).epsilon(1e-12));
  CHECK(std::abs(inner_xv<double>(pf, f - pf, space, ps.grid())) <= 1e-12 * total);
}

TEST_CASE("decay fit") {
  std::vector<double> t, e;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(0.25 * k);
    e.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  const auto fit = fit_decay(t, e, 1.0, 9.0);
  CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.samples == 33);

  std::vector<double> shifted = t;
  for (auto& x : shifted) x += 5.0;
  const auto moved = fit_decay(shifted, e, 6.0, 14.0);
  CHECK(moved.rate == doctest::Approx(fit.rate).epsilon(1e-12));

  std::vector<double> scaled = e;
  for (auto& y : scaled) y *= 1e-6;
  CHECK(fit_decay(t, scaled, 1.0, 9.0).rate == doctest::Approx(fit.rate).epsilon(1e-12));

  const std::vector<double> flat(t.size(), 2.0);
  const auto c = fit_decay(t, flat, 0.0, 10.0);
  CHECK(c.rate == 0.0);
  CHECK(c.r_squared == 1.0);

  CHECK_THROWS_AS(fit_decay(t, e, 1.0, 2.0), FitRefused);
  std::vector<double> dead = e;
  dead[20] = 0.0;
  CHECK_THROWS_AS(fit_decay(t, dead, 1.0, 9.0), FitRefused);
  CHECK_THROWS_AS(fit_decay(t, e, 2.0, 1.0), ConfigError);
}

TEST_CASE("conservation report") {
  std::vector<DiagnosticsRecord<double>> recs(3);
  for (int k = 0; k < 3; ++k) {
    recs[k].mass = 2.0 + 1e-12 * k;
    recs[k].momentum = VectorX<double>::Constant(1, 1e-13 * k);
    recs[k].perturbation_mass = -1e-14 * k;
    recs[k].perturbation_momentum = VectorX<double>::Constant(1, 2e-14 * k);
  }
  const auto r = conservation_report(recs);
  CHECK(r.mass_drift == doctest::Approx(1e-12));
  CHECK(r.momentum_drift == doctest::Approx(2e-13));
  CHECK(r.perturbation_mass == doctest::Approx(2e-14));
  CHECK(r.perturbation_momentum == doctest::Approx(4e-14));
  CHECK(conservation_report(std::vector<DiagnosticsRecord<double>>{}).mass_drift == 0.0);
}
