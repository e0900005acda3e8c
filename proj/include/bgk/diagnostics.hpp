#pragma once

#include "bgk/core.hpp"
#include "bgk/derivatives.hpp"
#include "bgk/equilibrium.hpp"
#include "bgk/grids.hpp"
#include "bgk/perturbation.hpp"
#include "bgk/solver.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bgk {

/// ||g||^2 in L^2_{x,v}: sum over cells of dx times the velocity quadrature of g^2.
template <typename Scalar>
Scalar norm2_xv(const FieldArray<Scalar>& g, const SpatialGrid<Scalar>& space, const VelocityGrid<Scalar>& vel) {
  return space.cell_volume() * pairwise_sum<Scalar>(g.rows(), [&](Index i) {
           return pairwise_sum<Scalar>(g.cols(), [&](Index j) { return vel.weights()(j) * g(i, j) * g(i, j); });
         });
}

/// <g, h> in L^2_{x,v}.
template <typename Scalar>
Scalar inner_xv(const FieldArray<Scalar>& g, const FieldArray<Scalar>& h, const SpatialGrid<Scalar>& space,
                const VelocityGrid<Scalar>& vel) {
  return space.cell_volume() * pairwise_sum<Scalar>(g.rows(), [&](Index i) {
           return pairwise_sum<Scalar>(g.cols(), [&](Index j) { return vel.weights()(j) * g(i, j) * h(i, j); });
         });
}

/// ||g||^2 in L^2_x for a field with one value (or one row of components) per cell.
template <typename Derived>
typename Derived::Scalar norm2_x(const Eigen::ArrayBase<Derived>& g,
                                 const SpatialGrid<typename Derived::Scalar>& space) {
  using Scalar = typename Derived::Scalar;
  const auto& a = g.derived();
  return space.cell_volume() * pairwise_sum<Scalar>(a.rows(), [&](Index i) { return a.row(i).square().sum(); });
}

/// P applied to every cell of f.
template <typename Scalar>
FieldArray<Scalar> project_field(const FieldArray<Scalar>& f, const PerturbationSpace<Scalar>& ps) {
  FieldArray<Scalar> out(f.rows(), f.cols());
  for (Index i = 0; i < f.rows(); ++i) out.row(i) = project(f.row(i).transpose(), ps).transpose();
  return out;
}

/// Per-order contributions sum_{|alpha| = k} ||d^alpha f||^2, k = 0..N.
template <typename Scalar>
struct EnergyBreakdown {
  std::vector<Scalar> by_order;
  Scalar total = 0;
};

template <typename Scalar>
EnergyBreakdown<Scalar> energy_functional(const FieldArray<Scalar>& f, const SpatialGrid<Scalar>& space,
                                          const VelocityGrid<Scalar>& vel, int max_order, int stencil_order = 2) {
  if (max_order < 0) throw ConfigError("diagnostics.order must be non-negative");
  EnergyBreakdown<Scalar> out;
  out.by_order.assign(static_cast<std::size_t>(max_order) + 1, Scalar(0));
  for (int k = 0; k <= max_order; ++k) {
    for (const auto& alpha : multi_indices_of_order(space.dim(), k)) {
      const FieldArray<Scalar> g = multi_index_derivative(space, f, alpha, stencil_order, max_order);
      out.by_order[static_cast<std::size_t>(k)] += norm2_xv(g, space, vel);
    }
  }
  for (Scalar e : out.by_order) out.total += e;
  return out;
}

template <typename Scalar>
struct CoercivityReport {
  Scalar defect = 0;       ///< sum <L d^a f, d^a f> + sum ||(I-P) d^a f||^2; zero for an exact projection
  Scalar delta_hat = 0;    ///< -sum <L d^a f, d^a f> / sum ||d^a f||^2
  Scalar dissipation = 0;  ///< sum ||(I-P) d^a f||^2
  Scalar macro = 0;        ///< sum ||P d^a f||^2
  Scalar energy = 0;       ///< sum ||d^a f||^2
};

template <typename Scalar>
CoercivityReport<Scalar> coercivity_defect(const FieldArray<Scalar>& f, const SpatialGrid<Scalar>& space,
                                           const PerturbationSpace<Scalar>& ps, int max_order,
                                           int stencil_order = 2) {
  const auto& vel = ps.grid();
  CoercivityReport<Scalar> r;
  Scalar pairing = 0;
  for (const auto& alpha : multi_indices_up_to(space.dim(), max_order)) {
    const FieldArray<Scalar> g = multi_index_derivative(space, f, alpha, stencil_order, max_order);
    const FieldArray<Scalar> pg = project_field(g, ps);
    const FieldArray<Scalar> lg = pg - g;
    pairing += inner_xv(lg, g, space, vel);
    r.dissipation += norm2_xv<Scalar>(g - pg, space, vel);
    r.macro += norm2_xv(pg, space, vel);
    r.energy += norm2_xv(g, space, vel);
  }
  r.defect = pairing + r.dissipation;
  r.delta_hat = r.energy > Scalar(0) ? -pairing / r.energy : Scalar(0);
  return r;
}

/// a(x) and b(x) for every cell.
template <typename Scalar>
struct MacroFields {
  ArrayX<Scalar> a;
  FieldArray<Scalar> b;  ///< cells x d
};

template <typename Scalar>
MacroFields<Scalar> macro_fields(const FieldArray<Scalar>& f, const PerturbationSpace<Scalar>& ps) {
  const int d = ps.grid().dim();
  MacroFields<Scalar> out{ArrayX<Scalar>(f.rows()), FieldArray<Scalar>(f.rows(), d)};
  for (Index i = 0; i < f.rows(); ++i) {
    const auto c = macro_coeffs(f.row(i).transpose(), ps);
    out.a(i) = c.a;
    out.b.row(i) = c.b.transpose().array();
  }
  return out;
}

/// Inner products of a phase-space field with {1, v_i, v_i v_j} M0^w, per cell.
/// Columns: a, a_1..a_d, b_11, b_12, ..., b_dd (row-major over (i, j)).
template <typename Scalar>
FieldArray<Scalar> micro_macro_moments(const FieldArray<Scalar>& g, const PerturbationSpace<Scalar>& ps) {
  const auto& vel = ps.grid();
  const int d = vel.dim();
  const auto& w = ps.weight().weight;
  std::vector<ArrayX<Scalar>> tests;
  tests.push_back(w);
  for (int i = 0; i < d; ++i) tests.push_back(vel.component(i) * w);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) tests.push_back(vel.component(i) * vel.component(j) * w);
  FieldArray<Scalar> out(g.rows(), static_cast<Index>(tests.size()));
  for (Index x = 0; x < g.rows(); ++x)
    for (std::size_t t = 0; t < tests.size(); ++t)
      out(x, static_cast<Index>(t)) = inner(g.row(x).transpose(), tests[t], vel);
  return out;
}

template <typename Scalar>
struct MacroMicroReport {
  std::vector<Scalar> a_norms;  ///< ||d^alpha a||_{L^2_x}, multi-indices up to N in enumeration order
  std::vector<Scalar> b_norms;  ///< ||d^alpha b||_{L^2_x}
  Scalar macro_energy = 0;      ///< sum_{|alpha|<=N} ||d^a a||^2 + ||d^a b||^2
  Scalar ell_energy = 0;        ///< sum_{|alpha|<=N-1} of squared norms of the ell moments
  Scalar h_energy = 0;          ///< same for the h = Gamma(f) moments
  Scalar ab_ratio = 0;          ///< macro_energy / (ell_energy + h_energy)
  Scalar p_ip_ratio = 0;        ///< sum ||P d^a f||^2 / sum ||(I-P) d^a f||^2
  Scalar ell_ratio = 0;         ///< sum ||d^a ell moments|| / sum ||(I-P) d^a f||
  Scalar h_ratio = 0;           ///< sum ||d^a h moments|| / (sqrt(E) sum ||d^a f||)
  FieldArray<Scalar> ell_moments;
  FieldArray<Scalar> h_moments;
  MacroFields<Scalar> coefficients;
};

/// Macro-micro balance of a solution snapshot.
///
/// ell{I-P}f = (-d_t - v.grad + L)(I-P)f with d_t f replaced through the
/// perturbation equation, which reduces to (I-P)(v.grad f) - v.grad (I-P)f - (I-P)Gamma(f).
template <typename Scalar>
MacroMicroReport<Scalar> macro_micro_report(const FieldArray<Scalar>& f, const SpatialGrid<Scalar>& space,
                                            const PerturbationSpace<Scalar>& ps, int max_order,
                                            int stencil_order = 2) {
  const auto& vel = ps.grid();
  const int d = space.dim();
  MacroMicroReport<Scalar> r;
  r.coefficients = macro_fields(f, ps);

  FieldArray<Scalar> gamma(f.rows(), f.cols());
  for (Index i = 0; i < f.rows(); ++i) gamma.row(i) = nonlinear_op(f.row(i).transpose(), ps).values.transpose();
  const FieldArray<Scalar> micro = f - project_field(f, ps);

  FieldArray<Scalar> transport_f = FieldArray<Scalar>::Zero(f.rows(), f.cols());
  FieldArray<Scalar> transport_micro = FieldArray<Scalar>::Zero(f.rows(), f.cols());
  for (int a = 0; a < d; ++a) {
    const auto va = vel.component(a).transpose();
    transport_f += spatial_derivative(space, f, a, stencil_order).rowwise() * va;
    transport_micro += spatial_derivative(space, micro, a, stencil_order).rowwise() * va;
  }
  const FieldArray<Scalar> micro_transport = transport_f - project_field(transport_f, ps);
  const FieldArray<Scalar> micro_gamma = gamma - project_field(gamma, ps);
  const FieldArray<Scalar> ell = micro_transport - transport_micro - micro_gamma;

  r.ell_moments = micro_macro_moments(ell, ps);
  r.h_moments = micro_macro_moments(gamma, ps);

  Scalar ell_sum = 0, h_sum = 0, micro_sum = 0, f_sum = 0, p_sum = 0, ip_sum = 0;
  for (const auto& alpha : multi_indices_up_to(d, max_order)) {
    const ArrayX<Scalar> da = multi_index_derivative(space, r.coefficients.a, alpha, stencil_order, max_order);
    const FieldArray<Scalar> db = multi_index_derivative(space, r.coefficients.b, alpha, stencil_order, max_order);
    const Scalar na = norm2_x(da, space), nb = norm2_x(db, space);
    r.a_norms.push_back(std::sqrt(na));
    r.b_norms.push_back(std::sqrt(nb));
    r.macro_energy += na + nb;

    const FieldArray<Scalar> g = multi_index_derivative(space, f, alpha, stencil_order, max_order);
    const FieldArray<Scalar> pg = project_field(g, ps);
    const Scalar p2 = norm2_xv(pg, space, vel);
    const Scalar ip2 = norm2_xv<Scalar>(g - pg, space, vel);
    const Scalar g2 = norm2_xv(g, space, vel);
    p_sum += p2;
    ip_sum += ip2;
    micro_sum += std::sqrt(ip2);
    f_sum += std::sqrt(g2);

    if (total_order(alpha) <= max_order - 1) {
      const FieldArray<Scalar> dl = multi_index_derivative(space, r.ell_moments, alpha, stencil_order, max_order);
      const FieldArray<Scalar> dh = multi_index_derivative(space, r.h_moments, alpha, stencil_order, max_order);
      for (Index c = 0; c < dl.cols(); ++c) {
        const Scalar l2 = norm2_x(dl.col(c), space);
        const Scalar h2 = norm2_x(dh.col(c), space);
        r.ell_energy += l2;
        r.h_energy += h2;
        ell_sum += std::sqrt(l2);
        h_sum += std::sqrt(h2);
      }
    }
  }
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const Scalar energy = p_sum + ip_sum;
  r.ab_ratio = (r.ell_energy + r.h_energy) > Scalar(0) ? r.macro_energy / (r.ell_energy + r.h_energy) : inf;
  r.p_ip_ratio = ip_sum > Scalar(0) ? p_sum / ip_sum : inf;
  r.ell_ratio = micro_sum > Scalar(0) ? ell_sum / micro_sum : inf;
  r.h_ratio = energy > Scalar(0) && f_sum > Scalar(0) ? h_sum / (std::sqrt(energy) * f_sum) : inf;
  return r;
}

/// Everything recorded at one output time.
template <typename Scalar>
struct DiagnosticsRecord {
  Scalar t = 0;
  Scalar mass = 0;
  VectorX<Scalar> momentum;
  Scalar entropy = 0;
  Scalar energy_total = std::numeric_limits<Scalar>::quiet_NaN();
  std::vector<Scalar> energy_by_order;
  Scalar p_norm2 = std::numeric_limits<Scalar>::quiet_NaN();   ///< ||P f||^2
  Scalar ip_norm2 = std::numeric_limits<Scalar>::quiet_NaN();  ///< ||(I-P) f||^2
  Scalar leakage = 0;
  Scalar delta_hat = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar perturbation_mass = std::numeric_limits<Scalar>::quiet_NaN();  ///< integral of M0^w f
  VectorX<Scalar> perturbation_momentum;                                ///< integral of v M0^w f
  Scalar max_density_deviation = 0;                                     ///< max_x |rho - 1|
  Scalar max_speed = 0;                                                 ///< max_x |u|
  bool envelope_ok = true;
};

/// Settings shared by every record of a run.
template <typename Scalar>
struct DiagnosticsContext {
  GasParams<Scalar> params;
  std::optional<PerturbationSpace<Scalar>> perturbation;  ///< absent when n <= 2
  int max_order = 2;
  int stencil_order = 2;
  bool abort_on_envelope = false;
};

template <typename Scalar>
DiagnosticsRecord<Scalar> diagnose(const SolverState<Scalar>& s, const DiagnosticsContext<Scalar>& ctx) {
  const auto& F = s.F;
  const auto& space = F.space;
  const auto& vel = F.velocity;
  const int d = vel.dim();
  DiagnosticsRecord<Scalar> r;
  r.t = s.t;

  ArrayX<Scalar> rho(F.cells());
  FieldArray<Scalar> mom(F.cells(), d);
  for (Index i = 0; i < F.cells(); ++i) {
    const auto m = moments(F.values.row(i).transpose(), vel);
    rho(i) = m.density;
    mom.row(i) = m.momentum.transpose().array();
    r.max_density_deviation = std::max(r.max_density_deviation, std::abs(m.density - Scalar(1)));
    if (m.density > Scalar(kRhoFloor))
      r.max_speed = std::max(r.max_speed, m.momentum.norm() / m.density);
  }
  r.mass = space.cell_volume() * pairwise_sum(rho);
  r.momentum.resize(d);
  for (int a = 0; a < d; ++a) r.momentum(a) = space.cell_volume() * pairwise_sum(mom.col(a));
  r.entropy = kinetic_entropy(F, ctx.params);

  if (!ctx.perturbation) return r;
  const auto& ps = *ctx.perturbation;
  r.envelope_ok = r.max_density_deviation <= ps.envelope() && r.max_speed <= ps.envelope();
  if (!r.envelope_ok && ctx.abort_on_envelope) {
    std::ostringstream msg;
    msg << "perturbative envelope violated at t = " << s.t << ": max |rho - 1| = " << r.max_density_deviation
        << ", max |u| = " << r.max_speed << " (limit " << ps.envelope() << ")";
    throw EnvelopeError(msg.str());
  }
  const auto pert = to_perturbation(F, ps);
  r.leakage = pert.leakage;
  const auto energy = energy_functional(pert.values, space, vel, ctx.max_order, ctx.stencil_order);
  r.energy_total = energy.total;
  r.energy_by_order = energy.by_order;
  const FieldArray<Scalar> pf = project_field(pert.values, ps);
  r.p_norm2 = norm2_xv(pf, space, vel);
  r.ip_norm2 = norm2_xv<Scalar>(pert.values - pf, space, vel);
  r.delta_hat = coercivity_defect(pert.values, space, ps, ctx.max_order, ctx.stencil_order).delta_hat;

  const auto& w = ps.weight().weight;
  ArrayX<Scalar> cell_mass(F.cells());
  FieldArray<Scalar> cell_mom(F.cells(), d);
  for (Index i = 0; i < F.cells(); ++i) {
    const auto row = pert.values.row(i).transpose();
    cell_mass(i) = inner(row, w, vel);
    for (int a = 0; a < d; ++a) cell_mom(i, a) = inner(row, vel.component(a) * w, vel);
  }
  r.perturbation_mass = space.cell_volume() * pairwise_sum(cell_mass);
  r.perturbation_momentum.resize(d);
  for (int a = 0; a < d; ++a) r.perturbation_momentum(a) = space.cell_volume() * pairwise_sum(cell_mom.col(a));
  return r;
}

/// Column names of the diagnostics CSV, matching DiagnosticsRecord.
inline std::vector<std::string> diagnostics_columns(int dim, int max_order) {
  std::vector<std::string> c{"t", "mass"};
  for (int a = 1; a <= dim; ++a) c.push_back("momentum_" + std::to_string(a));
  c.push_back("entropy");
  c.push_back("E_total");
  for (int k = 0; k <= max_order; ++k) c.push_back("E_" + std::to_string(k));
  for (const char* s : {"P_norm2", "IP_norm2", "leakage", "delta_hat", "pert_mass"}) c.emplace_back(s);
  for (int a = 1; a <= dim; ++a) c.push_back("pert_momentum_" + std::to_string(a));
  c.emplace_back("envelope_ok");
  return c;
}

template <typename Scalar>
std::vector<Scalar> diagnostics_row(const DiagnosticsRecord<Scalar>& r, int dim, int max_order) {
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  std::vector<Scalar> v{r.t, r.mass};
  for (int a = 0; a < dim; ++a) v.push_back(r.momentum(a));
  v.push_back(r.entropy);
  v.push_back(r.energy_total);
  for (int k = 0; k <= max_order; ++k)
    v.push_back(static_cast<std::size_t>(k) < r.energy_by_order.size() ? r.energy_by_order[static_cast<std::size_t>(k)]
                                                                         : nan);
  for (Scalar x : {r.p_norm2, r.ip_norm2, r.leakage, r.delta_hat, r.perturbation_mass}) v.push_back(x);
  for (int a = 0; a < dim; ++a)
    v.push_back(r.perturbation_momentum.size() > a ? r.perturbation_momentum(a) : nan);
  v.push_back(r.envelope_ok ? Scalar(1) : Scalar(0));
  return v;
}

/// Fit of ln E(t) = intercept - rate * t.
template <typename Scalar>
struct DecayFit {
  Scalar t0 = 0;
  Scalar t1 = 0;
  Scalar rate = 0;
  Scalar intercept = 0;
  Scalar r_squared = 0;
  int samples = 0;
};

class FitRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
DecayFit<Scalar> fit_decay(const std::vector<Scalar>& times, const std::vector<Scalar>& energies, Scalar t0, Scalar t1,
                           Scalar floor = Scalar(1e-24)) {
  if (!(t1 > t0)) throw ConfigError("decay window needs t1 > t0");
  if (times.size() != energies.size()) throw ConfigError("fit_decay: times and energies differ in length");
  const Scalar slack = Scalar(1e-9) * std::max(Scalar(1), std::abs(t1));
  std::vector<Scalar> xs, ys;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 - slack || times[k] > t1 + slack) continue;
    if (!(energies[k] > floor)) {
      std::ostringstream msg;
      msg << "energy " << energies[k] << " at t = " << times[k] << " is at or below the floor " << floor;
      throw FitRefused(msg.str());
    }
    xs.push_back(times[k]);
    ys.push_back(std::log(energies[k]));
  }
  if (xs.size() < 10) {
    throw FitRefused("decay window [" + std::to_string(static_cast<double>(t0)) + ", " +
                     std::to_string(static_cast<double>(t1)) + "] holds " + std::to_string(xs.size()) +
                     " samples; at least 10 are required");
  }
  const auto n = static_cast<Index>(xs.size());
  const Eigen::Map<const ArrayX<Scalar>> x(xs.data(), n), y(ys.data(), n);
  const Scalar xm = x.mean(), ym = y.mean();
  const Scalar sxx = (x - xm).square().sum();
  const Scalar sxy = ((x - xm) * (y - ym)).sum();
  const Scalar slope = sxy / sxx;
  DecayFit<Scalar> fit;
  fit.t0 = t0;
  fit.t1 = t1;
  fit.samples = static_cast<int>(n);
  fit.rate = -slope;
  fit.intercept = ym - slope * xm;
  const Scalar ss_tot = (y - ym).square().sum();
  const Scalar ss_res = (y - (fit.intercept + slope * x)).square().sum();
  fit.r_squared = ss_tot > Scalar(0) ? Scalar(1) - ss_res / ss_tot : Scalar(1);
  return fit;
}

template <typename Scalar>
struct ConservationReport {
  Scalar mass_drift = 0;                  ///< max_t |mass - mass(0)| / |mass(0)|
  Scalar momentum_drift = 0;              ///< max_t max_i |momentum_i - momentum_i(0)|
  Scalar perturbation_mass = 0;           ///< max_t |integral of M0^w f|
  Scalar perturbation_momentum = 0;       ///< max_t max_i |integral of v_i M0^w f|
};

template <typename Scalar>
ConservationReport<Scalar> conservation_report(const std::vector<DiagnosticsRecord<Scalar>>& records) {
  ConservationReport<Scalar> r;
  if (records.empty()) return r;
  const auto& first = records.front();
  for (const auto& rec : records) {
    r.mass_drift = std::max(r.mass_drift, std::abs(rec.mass - first.mass) / std::abs(first.mass));
    r.momentum_drift = std::max(r.momentum_drift, (rec.momentum - first.momentum).cwiseAbs().maxCoeff());
    if (!std::isnan(rec.perturbation_mass)) {
      r.perturbation_mass = std::max(r.perturbation_mass, std::abs(rec.perturbation_mass));
      r.perturbation_momentum = std::max(r.perturbation_momentum, rec.perturbation_momentum.cwiseAbs().maxCoeff());
    }
  }
  return r;
}

}  // namespace bgk
