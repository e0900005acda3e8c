#include "bgk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bgk {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

VectorX<double> random_velocity(int dim, double max_norm, SplitMix64& rng) {
  VectorX<double> u(dim);
  do {
    for (int a = 0; a < dim; ++a) u(a) = rng.uniform(-max_norm, max_norm);
  } while (u.norm() > max_norm);
  return u;
}

double moment_error(const Moments<double>& q, const Moments<double>& ex) {
  const double rho = ex.density;
  const double scale_m = rho * (1.0 + ex.velocity().norm());
  return std::max({std::abs(q.density - ex.density) / rho, (q.momentum - ex.momentum).cwiseAbs().maxCoeff() / scale_m,
                   std::abs(q.energy - ex.energy) / ex.energy});
}

double l2_velocity(const ArrayX<double>& f, const VelocityGrid<double>& g) { return std::sqrt(inner(f, f, g)); }

}  // namespace

CheckResult make_check(std::string name, double measured, double tolerance, std::string message) {
  CheckResult c{std::move(name), measured, tolerance, measured <= tolerance, std::move(message)};
  return c;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

nlohmann::ordered_json VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["passed"] = passed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["measured"] = std::isfinite(c.measured) ? nlohmann::ordered_json(c.measured) : nlohmann::ordered_json();
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    if (!c.message.empty()) e["message"] = c.message;
    arr.push_back(std::move(e));
  }
  j["checks"] = std::move(arr);
  return j;
}

double moment_identity_error(const GasParams<double>& p, const VelocityGrid<double>& grid, std::uint64_t seed,
                             int samples) {
  SplitMix64 rng(seed);
  double worst = 0;
  for (int k = 0; k < samples; ++k) {
    MacroState<double> m{rng.uniform(0.5, 2.0), random_velocity(p.dim, 0.2 * p.support_radius, rng)};
    const auto q = moments(sample_maxwellian(p, m, grid), grid);
    worst = std::max(worst, moment_error(q, exact_moments(p, m)));
  }
  return worst;
}

double admissible_margin(const GasParams<double>& p) {
  // |u| + R rho^((gamma-1)/2) at rho = 2, |u| = 0.2 R, plus a little room
  return 0.2 + std::pow(2.0, 0.5 * (p.gamma - 1.0)) - 1.0 + 0.05;
}

std::vector<double> moment_refinement_errors(const GasParams<double>& p, std::uint64_t seed, int samples) {
  std::vector<double> out;
  for (int points : {16, 32, 64}) {
    const auto grid = make_velocity_grid(p, points, admissible_margin(p));
    out.push_back(moment_identity_error(p, grid, seed, samples));
  }
  return out;
}

WeightIntegrals weight_integrals(const PerturbationSpace<double>& ps) {
  const auto& p = ps.params();
  const auto& g = ps.grid();
  const ArrayX<double> w2 = ps.weight().weight.square();  // M0^((n-2)/n)
  WeightIntegrals out;
  out.density = p.c_pow_2n() * pairwise_sum(ArrayX<double>(g.weights() * w2));
  out.velocity = p.c_pow_2n() * pairwise_sum(ArrayX<double>(g.weights() * g.component(0).square() * w2));
  return out;
}

ArrayX<double> random_perturbation(const PerturbationSpace<double>& ps, SplitMix64& rng) {
  ArrayX<double> f(ps.grid().size());
  for (Index j = 0; j < f.size(); ++j) {
    const double r = rng.uniform(-1.0, 1.0);
    f(j) = ps.weight().active(j) ? r : 0.0;
  }
  return f;
}

double coercivity_identity_error(const PerturbationSpace<double>& ps, std::uint64_t seed, int samples) {
  SplitMix64 rng(seed);
  const auto& g = ps.grid();
  double worst = 0;
  for (int k = 0; k < samples; ++k) {
    const ArrayX<double> f = random_perturbation(ps, rng);
    const ArrayX<double> lf = linear_op(f, ps);
    const ArrayX<double> micro = f - project(f, ps);
    worst = std::max(worst, std::abs(inner(lf, f, g) + inner(micro, micro, g)) / inner(f, f, g));
  }
  return worst;
}

double idempotence_error(const PerturbationSpace<double>& ps, std::uint64_t seed, int samples) {
  SplitMix64 rng(seed);
  const auto& g = ps.grid();
  double worst = 0;
  for (int k = 0; k < samples; ++k) {
    const ArrayX<double> f = random_perturbation(ps, rng);
    const ArrayX<double> pf = project(f, ps);
    const ArrayX<double> ppf = project(pf, ps);
    worst = std::max(worst, l2_velocity(ppf - pf, g) / l2_velocity(f, g));
  }
  return worst;
}

double entropy_minimization_excess(const GasParams<double>& p, const VelocityGrid<double>& grid, std::uint64_t seed,
                                   int samples) {
  SplitMix64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    // random nonnegative profile, tilted so it carries momentum, scaled to a target density
    ArrayX<double> F(grid.size());
    const VectorX<double> tilt = random_velocity(p.dim, 0.1, rng);
    for (Index j = 0; j < grid.size(); ++j) {
      const double shape = std::max(0.0, 1.0 + grid.node(j).dot(tilt.transpose()) / p.support_radius);
      F(j) = rng.uniform() * shape;
    }
    const double rho = rng.uniform(0.5, 2.0);
    F *= rho / moments(F, grid).density;
    const auto m = moments(F, grid);
    const auto eq = discrete_maxwellian(p, grid, m.density, m.momentum);
    worst = std::max(worst, kinetic_entropy(eq.values, grid, p) - kinetic_entropy(F, grid, p));
  }
  return worst;
}

std::vector<double> quadratic_smallness_ratios(const PerturbationSpace<double>& ps, std::uint64_t seed,
                                               const std::vector<double>& epsilons) {
  SplitMix64 rng(seed);
  ArrayX<double> dir = random_perturbation(ps, rng);
  dir /= l2_velocity(dir, ps.grid());
  std::vector<double> out;
  for (double eps : epsilons) {
    const ArrayX<double> f = eps * dir;
    out.push_back(l2_velocity(nonlinear_op(f, ps).values, ps.grid()) / (eps * eps));
  }
  return out;
}

VerifyReport verify_suite(const RunConfig& cfg) {
  VerifyReport r;
  auto add = [&](CheckResult c) { r.checks.push_back(std::move(c)); };
  const auto p = cfg.params();
  const auto grid = cfg.velocity_grid();
  const std::uint64_t seed = cfg.seed;

  add(make_check("params.n", std::abs(p.n - (2.0 / (p.gamma - 1.0) - p.dim)), 1e-12));
  add(make_check("params.support_radius", std::abs(p.support_radius * p.support_radius - p.k_coef) / p.k_coef, 1e-14));

  const ArrayX<double> m0 = global_equilibrium(p, grid);
  add(make_check("equilibrium.unit_mass", std::abs(moments(m0, grid).density - 1.0), 1e-6,
                 "quadrature mass of the global equilibrium"));
  add(make_check("equilibrium.moment_identity", moment_identity_error(p, grid, seed), 1e-6,
                 "20 seeded states, rho in [0.5, 2], |u| <= 0.2 R"));
  {
    const auto errs = moment_refinement_errors(p, seed);
    double worst_ratio = 0;
    for (std::size_t k = 1; k < errs.size(); ++k) worst_ratio = std::max(worst_ratio, errs[k] / errs[k - 1]);
    auto c = make_check("equilibrium.moment_refinement", worst_ratio, 0.5,
                        "error ratio per halving of dv on 16, 32, 64 points: " + fmt(errs[0]) + ", " + fmt(errs[1]) +
                            ", " + fmt(errs[2]));
    add(c);
  }
  {
    SplitMix64 rng(seed + 1);
    double diag = 0, off = 0;
    for (int k = 0; k < 20; ++k) {
      MacroState<double> m{rng.uniform(0.5, 2.0), random_velocity(p.dim, 0.2 * p.support_radius, rng)};
      const auto P = pressure_tensor(sample_maxwellian(p, m, grid), grid, m.u);
      const double pr = std::pow(m.rho, p.gamma);
      for (int a = 0; a < p.dim; ++a)
        for (int b = 0; b < p.dim; ++b) {
          if (a == b)
            diag = std::max(diag, std::abs(P(a, b) - pr) / pr);
          else
            off = std::max(off, std::abs(P(a, b)));
        }
    }
    add(make_check("equilibrium.pressure_diagonal", diag, 1e-6, "relative to rho^gamma"));
    add(make_check("equilibrium.pressure_offdiagonal", off, 1e-8));
  }
  {
    SplitMix64 rng(seed + 2);
    double jump = 0;
    const MacroState<double> rest = MacroState<double>::rest(p.dim);
    const double peak = maxwellian(p, rest, VectorX<double>::Zero(p.dim));
    for (int k = 0; k < 100; ++k) {
      VectorX<double> dir = random_velocity(p.dim, 1.0, rng);
      if (dir.norm() == 0.0) dir(0) = 1.0;
      dir.normalize();
      const VectorX<double> in = (1.0 - 1e-9) * p.support_radius * dir;
      const VectorX<double> out = (1.0 + 1e-9) * p.support_radius * dir;
      jump = std::max(jump, std::abs(maxwellian(p, rest, in) - maxwellian(p, rest, out)) / peak);
    }
    add(make_check("equilibrium.support_continuity", jump, 1e-14, "relative jump across |v| = R"));
  }
  add(make_check("equilibrium.entropy_minimization", entropy_minimization_excess(p, grid, seed + 3), 1e-10,
                 "max of H(M^[F]) - H(F) over 20 random profiles"));

  if (!(p.n > 2.0)) {
    add(make_check("perturbation.available", 1.0, 0.0, "the weighted perturbation needs n > 2"));
    return r;
  }
  const PerturbationSpace<double> ps(p, grid, std::nullopt, cfg.envelope);
  const auto& basis = ps.basis();
  {
    std::ostringstream msg;
    msg << "max |Gram - I| on " << cfg.velocity_points << " points per axis";
    if (basis.gram_deviation > cfg.gram_tolerance) msg << "; the velocity grid is too coarse for the basis";
    add(make_check("perturbation.gram", basis.gram_deviation, cfg.gram_tolerance, msg.str()));
  }
  {
    const auto wi = weight_integrals(ps);
    const double nd = 1.0 / (p.n * p.gamma), nv = 1.0 / p.n;
    add(make_check("perturbation.density_integral", std::abs(wi.density - nd) / nd, 1e-6,
                   "c^(2/n) * integral M0^((n-2)/n) against 1/(n gamma)"));
    add(make_check("perturbation.velocity_integral", std::abs(wi.velocity - nv) / nv, 1e-6,
                   "c^(2/n) * integral v_1^2 M0^((n-2)/n) against 1/n"));
  }
  {
    double parity = 0;
    for (Index j = 0; j < grid.size(); ++j) {
      const Index mj = grid.mirror(j);
      parity = std::max(parity, std::abs(basis.vectors(j, 0) - basis.vectors(mj, 0)));
      for (int a = 1; a <= p.dim; ++a) parity = std::max(parity, std::abs(basis.vectors(j, a) + basis.vectors(mj, a)));
    }
    add(make_check("perturbation.basis_parity", parity / basis.vectors.cwiseAbs().maxCoeff(), 1e-13));
  }
  {
    SplitMix64 rng(seed + 4);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
      const ArrayX<double> f = random_perturbation(ps, rng);
      const auto back = to_perturbation(from_perturbation(f, ps), ps);
      worst = std::max(worst, (back.values - f).abs().maxCoeff());
    }
    add(make_check("perturbation.round_trip", worst, 1e-10, "max |to(from(f)) - f| for |f| <= 1"));
  }
  {
    double worst = 0;
    for (int i = 0; i < basis.size(); ++i)
      worst = std::max(worst, l2_velocity(linear_op(basis.vectors.col(i).array(), ps), grid));
    add(make_check("perturbation.kernel", worst, cfg.gram_tolerance, "max ||L e_i||"));
  }
  const std::string gram_note = "; Gram deviation " + fmt(basis.gram_deviation);
  add(make_check("perturbation.idempotence", idempotence_error(ps, seed + 5), 1e-10,
                 "max ||P P f - P f|| / ||f||" + gram_note));
  add(make_check("perturbation.coercivity_identity", coercivity_identity_error(ps, seed + 6), 1e-10,
                 "max |<Lf, f> + ||(I-P)f||^2| / ||f||^2 over 100 random f" + gram_note));
  {
    SplitMix64 rng(seed + 7);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
      const ArrayX<double> f = random_perturbation(ps, rng);
      const ArrayX<double> rec = macro_part(macro_coeffs(f, ps), ps);
      worst = std::max(worst, l2_velocity(project(f, ps) - rec, grid) / l2_velocity(f, grid));
    }
    add(make_check("perturbation.macro_reconstruction", worst, 1e-10, "max ||P f - (a + v.b) M0^w|| / ||f||"));
  }
  {
    const auto g0 = nonlinear_op(ArrayX<double>::Zero(grid.size()), ps);
    add(make_check("perturbation.gamma_at_zero", l2_velocity(g0.values, grid), 1e-12));
  }
  {
    SplitMix64 rng(seed + 8);
    double split = 0, macro = 0;
    const auto& w = ps.weight();
    for (int k = 0; k < 20; ++k) {
      const ArrayX<double> f = 1e-3 * random_perturbation(ps, rng);
      const auto gam = nonlinear_op(f, ps);
      const auto m = moments(from_perturbation(f, ps), grid);
      const ArrayX<double> eq = discrete_maxwellian(p, grid, m.density, m.momentum).values;
      const ArrayX<double> lhs = linear_op(f, ps) + gam.values;
      for (Index j = 0; j < grid.size(); ++j) {
        if (!w.active(j)) continue;
        const double rhs = (eq(j) - w.m0(j)) * w.inverse_weight(j) - f(j);
        split = std::max(split, std::abs(lhs(j) - rhs) / std::max(1.0, std::abs(rhs)));
      }
      macro = std::max(macro, l2_velocity(project(gam.values, ps), grid) / l2_velocity(f, grid));
    }
    add(make_check("perturbation.splitting_consistency", split, 1e-12,
                   "L f + Gamma f against M0^(-w)(M^[F] - M0) - f on unmasked nodes"));
    add(make_check("perturbation.gamma_macro_free", macro, 1e-10, "max ||P Gamma(f)|| / ||f||" + gram_note));
  }
  {
    const auto ratios = quadratic_smallness_ratios(ps, seed + 9, {1e-2, 1e-3, 1e-4});
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    add(make_check("perturbation.quadratic_smallness", (*hi - *lo) / *lo, 0.2,
                   "relative spread of ||Gamma(eps f)|| / eps^2 over eps = 1e-2, 1e-3, 1e-4: " + fmt(ratios[0]) + ", " +
                       fmt(ratios[1]) + ", " + fmt(ratios[2])));
  }
  return r;
}

KineticField<double> initial_field(const RunConfig& cfg) {
  const auto p = cfg.params();
  const auto space = cfg.spatial_grid();
  const auto vel = cfg.velocity_grid();
  KineticField<double> F(space, vel);
  const ArrayX<double> m0 = global_equilibrium(p, vel);
  const double mass0 = moments(m0, vel).density;
  const double k = 2.0 * std::numbers::pi * cfg.wavenumber / cfg.length;
  const int d = cfg.dim;

  switch (cfg.family) {
    case InitialFamily::Equilibrium:
      for (Index i = 0; i < space.size(); ++i) F.values.row(i) = m0.transpose();
      break;
    case InitialFamily::DensityMode:
    case InitialFamily::VelocityMode: {
      parallel_for(space.size(), cfg.threads, [&](Index i) {
        const double x = space.center(i, 0);
        double rho = mass0;
        VectorX<double> mom = VectorX<double>::Zero(d);
        if (cfg.family == InitialFamily::DensityMode)
          rho = mass0 * (1.0 + cfg.amplitude * std::cos(k * x));
        else
          mom(0) = rho * cfg.amplitude * std::sin(k * x);
        F.values.row(i) = discrete_maxwellian(p, vel, rho, mom).values.transpose();
      });
      break;
    }
    case InitialFamily::BasisPerturbation: {
      const PerturbationSpace<double> ps(p, vel, std::nullopt, cfg.envelope);
      VectorX<double> coeff = VectorX<double>::Zero(d + 1);
      if (cfg.coefficients.empty())
        coeff(0) = 1.0;
      else
        for (int a = 0; a <= d; ++a) coeff(a) = cfg.coefficients[static_cast<std::size_t>(a)];
      const ArrayX<double> shape = (ps.basis().vectors * coeff).array();
      for (Index i = 0; i < space.size(); ++i) {
        const double g = std::cos(k * space.center(i, 0));
        F.values.row(i) = from_perturbation(ArrayX<double>(cfg.amplitude * g * shape), ps).transpose();
      }
      break;
    }
  }
  if (F.values.minCoeff() < 0.0)
    throw ConfigError("initial.amplitude: the initial distribution is negative somewhere; reduce the amplitude");
  return F;
}

DecayOutcome run_decay(const RunConfig& cfg, const std::function<void(const DiagnosticsRecord<double>&)>& sink,
                       bool track_entropy) {
  if (!(cfg.fit_end() > cfg.window_start))
    throw ConfigError("decay.window_start: the fit window [" + fmt(cfg.window_start) + ", " + fmt(cfg.fit_end()) +
                      "] is empty; it must end after it starts (window_end defaults to solver.t_end)");
  const auto p = cfg.params();
  DiagnosticsContext<double> ctx{p, PerturbationSpace<double>(p, cfg.velocity_grid(), cfg.gram_tolerance, cfg.envelope),
                                 cfg.order, cfg.stencil_order, cfg.abort_on_envelope};
  const auto& ps = *ctx.perturbation;

  // zero total perturbation mass and momentum: f <- f - P(mean_x f)
  KineticField<double> F = initial_field(cfg);
  auto pert = to_perturbation(F, ps);
  const ArrayX<double> mean = pert.values.colwise().mean().transpose();
  const ArrayX<double> shift = project(mean, ps);
  for (Index i = 0; i < F.cells(); ++i) pert.values.row(i) -= shift.transpose();
  F.values = from_perturbation(pert.values, ps);

  DecayOutcome out;
  StepHooks<double> hooks;
  if (track_entropy) {
    hooks.on_relaxation = [&](const KineticField<double>& before, const KineticField<double>& after) {
      const double hb = kinetic_entropy(before, p);
      const double ha = kinetic_entropy(after, p);
      out.max_entropy_increase = std::max(out.max_entropy_increase, ha - hb);
      ++out.relaxation_steps;
    };
  }
  SolverState<double> s{std::move(F), 0.0, 0};
  run(std::move(s), cfg.solver(), p,
      [&](const SolverState<double>& st) {
        out.records.push_back(diagnose(st, ctx));
        if (sink) sink(out.records.back());
      },
      hooks);

  out.conservation = conservation_report(out.records);
  const double e0 = out.records.front().energy_total;
  out.energy_ratio = e0 > 0 ? out.records.back().energy_total / e0 : std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ts, es;
  for (const auto& r : out.records) {
    ts.push_back(r.t);
    es.push_back(r.energy_total);
  }
  try {
    out.fit = fit_decay(ts, es, cfg.window_start, cfg.fit_end());
  } catch (const FitRefused& e) {
    out.fit_error = e.what();
  }
  return out;
}

HydroOutcome run_hydro(const RunConfig& cfg) {
  const auto p = cfg.params();
  const KineticField<double> F0 = initial_field(cfg);
  const auto space = F0.space;
  HydroOutcome out;
  const auto euler = euler_solve(euler_from_kinetic(F0), space, p.gamma, cfg.t_end, cfg.euler_cfl, cfg.euler_dt);
  out.euler = macro_profile(euler);
  for (double eps : cfg.epsilons) {
    auto sc = cfg.solver();
    sc.epsilon = eps;
    sc.output_interval = cfg.t_end;
    const auto s = run(SolverState<double>{F0, 0.0, 0}, sc, p, {});
    out.kinetic.push_back(macro_profile(s.F));
    out.rows.push_back({eps, kinetic_vs_euler_error(out.kinetic.back(), out.euler, space)});
  }
  return out;
}

}  // namespace bgk
