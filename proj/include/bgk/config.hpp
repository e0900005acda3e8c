#pragma once

#include "bgk/grids.hpp"
#include "bgk/params.hpp"
#include "bgk/solver.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bgk {

enum class InitialFamily { Equilibrium, DensityMode, VelocityMode, BasisPerturbation };

/// Everything a CLI run needs. Read from a flat JSON object with dotted keys;
/// every key is optional and unknown keys are rejected.
struct RunConfig {
  // gas
  double gamma = 1.1;
  int dim = 1;
  // grid
  int cells = 128;  ///< per axis
  double length = 6.283185307179586;
  int velocity_points = 256;  ///< per axis
  double velocity_margin = 0.1;
  // solver
  double cfl = 0.5;
  double t_end = 1.0;
  double epsilon = 1.0;
  Splitting splitting = Splitting::Strang;
  TransportScheme transport = TransportScheme::Upwind1;
  double output_interval = 0.1;
  std::optional<double> dt;
  // initial condition
  InitialFamily family = InitialFamily::Equilibrium;
  double amplitude = 1e-3;
  int wavenumber = 1;  ///< number of periods across the torus along axis 1
  std::vector<double> coefficients;  ///< basis_perturbation weights c_1..c_{d+1}; default e_1 only
  // diagnostics
  int order = 2;
  int stencil_order = 2;
  // decay fit window; window_end defaults to t_end
  double window_start = 5.0;
  std::optional<double> window_end;
  // hydrodynamic limit
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  double euler_cfl = 0.4;
  std::optional<double> euler_dt;
  // output and run control
  std::optional<double> snapshot_interval;
  std::uint64_t seed = 20240607;
  int threads = 1;
  std::optional<std::string> restart;
  // perturbation framework
  double envelope = 0.5;
  double gram_tolerance = 1e-6;
  bool abort_on_envelope = true;

  /// Checks every module's preconditions; throws ConfigError naming the key.
  void validate() const;

  GasParams<double> params() const { return derive_params(gamma, dim); }
  SpatialGrid<double> spatial_grid() const { return SpatialGrid<double>::cube(dim, cells, length); }
  VelocityGrid<double> velocity_grid() const { return make_velocity_grid(params(), velocity_points, velocity_margin); }
  SolverConfig<double> solver() const;
  double fit_end() const { return window_end.value_or(t_end); }
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// All keys, resolved defaults included, in a fixed order.
nlohmann::ordered_json config_to_json(const RunConfig& c);

std::string to_string(Splitting s);
std::string to_string(TransportScheme s);
std::string to_string(InitialFamily f);

}  // namespace bgk
