#pragma once

#include "bgk/config.hpp"
#include "bgk/diagnostics.hpp"
#include "bgk/euler.hpp"
#include "bgk/perturbation.hpp"
#include "bgk/rng.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bgk {

/// One named identity check: pass means measured <= tolerance.
struct CheckResult {
  std::string name;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;
  std::string message;
};

CheckResult make_check(std::string name, double measured, double tolerance, std::string message = {});

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

// Individual checks; verify_suite runs all of them on the configured grid.

/// Largest relative moment error over `samples` seeded states with rho in [0.5, 2], |u| <= 0.2 R.
/// Momentum errors are scaled by rho (1 + |u|).
double moment_identity_error(const GasParams<double>& p, const VelocityGrid<double>& grid, std::uint64_t seed,
                             int samples = 20);

/// Box margin that contains the support of every state of moment_identity_error.
double admissible_margin(const GasParams<double>& p);

/// Moment errors on grids of 16, 32, 64 points per axis (box from admissible_margin),
/// where the quadrature error is still above round-off.
std::vector<double> moment_refinement_errors(const GasParams<double>& p, std::uint64_t seed, int samples = 20);

/// c^(2/n) * integral of M0^((n-2)/n) and of v_1^2 M0^((n-2)/n); the closed forms are 1/(n gamma) and 1/n.
struct WeightIntegrals {
  double density = 0;
  double velocity = 0;
};
WeightIntegrals weight_integrals(const PerturbationSpace<double>& ps);

/// Seeded random perturbation: uniform in [-1, 1] on unmasked nodes, zero elsewhere.
ArrayX<double> random_perturbation(const PerturbationSpace<double>& ps, SplitMix64& rng);

/// max over samples of |<Lf, f> + ||(I-P)f||^2| / ||f||^2.
double coercivity_identity_error(const PerturbationSpace<double>& ps, std::uint64_t seed, int samples = 100);

/// max over samples of ||P(P f) - P f|| / ||f||.
double idempotence_error(const PerturbationSpace<double>& ps, std::uint64_t seed, int samples = 100);

/// max over samples of integral H(M^[F]) - integral H(F) for random nonnegative F with rho in [0.5, 2].
double entropy_minimization_excess(const GasParams<double>& p, const VelocityGrid<double>& grid, std::uint64_t seed,
                                   int samples = 20);

/// ||Gamma(eps f^)|| / eps^2 for a seeded unit direction f^.
std::vector<double> quadratic_smallness_ratios(const PerturbationSpace<double>& ps, std::uint64_t seed,
                                               const std::vector<double>& epsilons);

VerifyReport verify_suite(const RunConfig& cfg);

/// Initial distribution of the configured family.
KineticField<double> initial_field(const RunConfig& cfg);

struct DecayOutcome {
  std::vector<DiagnosticsRecord<double>> records;
  std::optional<DecayFit<double>> fit;
  std::string fit_error;  ///< why the fit was refused, when it was
  ConservationReport<double> conservation;
  double max_entropy_increase = 0;  ///< largest increase of total entropy over one relaxation sub-step
  long long relaxation_steps = 0;
  double energy_ratio = 0;  ///< E(t_end) / E(t_0)
};

/// The decay experiment: initial data with zero perturbation mass and momentum,
/// diagnostics at every output tick, exponential fit over the configured window.
/// `sink` sees every record as it is produced.
DecayOutcome run_decay(const RunConfig& cfg, const std::function<void(const DiagnosticsRecord<double>&)>& sink = {},
                       bool track_entropy = false);

struct HydroRow {
  double epsilon = 0;
  L1Error<double> error;
};

struct HydroOutcome {
  std::vector<HydroRow> rows;
  MacroProfile<double> euler;
  std::vector<MacroProfile<double>> kinetic;  ///< one per epsilon
};

/// One kinetic run per epsilon and one Euler run, all from the configured initial data.
HydroOutcome run_hydro(const RunConfig& cfg);

}  // namespace bgk
