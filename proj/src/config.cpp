#include "bgk/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bgk {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) bad(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(key, "must be finite");
  return x;
}

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) bad(key, "expected an integer");
  return v.get<int>();
}

std::optional<double> as_optional_number(const std::string& key, const json& v) {
  if (v.is_null()) return std::nullopt;
  return as_number(key, v);
}

std::vector<double> as_numbers(const std::string& key, const json& v) {
  if (!v.is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(key + "[" + std::to_string(k) + "]", v[k]));
  return out;
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

Splitting parse_splitting(const std::string& key, const std::string& s) {
  if (s == "lie") return Splitting::Lie;
  if (s == "strang") return Splitting::Strang;
  bad(key, "expected \"lie\" or \"strang\", got \"" + s + "\"");
}

TransportScheme parse_transport(const std::string& key, const std::string& s) {
  if (s == "upwind1") return TransportScheme::Upwind1;
  if (s == "muscl_minmod") return TransportScheme::MusclMinmod;
  bad(key, "expected \"upwind1\" or \"muscl_minmod\", got \"" + s + "\"");
}

InitialFamily parse_family(const std::string& key, const std::string& s) {
  if (s == "equilibrium") return InitialFamily::Equilibrium;
  if (s == "density_mode") return InitialFamily::DensityMode;
  if (s == "velocity_mode") return InitialFamily::VelocityMode;
  if (s == "basis_perturbation") return InitialFamily::BasisPerturbation;
  bad(key, "unknown family \"" + s + "\" (equilibrium, density_mode, velocity_mode, basis_perturbation)");
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"gas.gamma", [](RunConfig& c, const std::string& k, const json& v) { c.gamma = as_number(k, v); }},
      {"gas.dim", [](RunConfig& c, const std::string& k, const json& v) { c.dim = as_int(k, v); }},
      {"grid.cells", [](RunConfig& c, const std::string& k, const json& v) { c.cells = as_int(k, v); }},
      {"grid.length", [](RunConfig& c, const std::string& k, const json& v) { c.length = as_number(k, v); }},
      {"grid.velocity_points",
       [](RunConfig& c, const std::string& k, const json& v) { c.velocity_points = as_int(k, v); }},
      {"grid.velocity_margin",
       [](RunConfig& c, const std::string& k, const json& v) { c.velocity_margin = as_number(k, v); }},
      {"solver.cfl", [](RunConfig& c, const std::string& k, const json& v) { c.cfl = as_number(k, v); }},
      {"solver.t_end", [](RunConfig& c, const std::string& k, const json& v) { c.t_end = as_number(k, v); }},
      {"solver.epsilon", [](RunConfig& c, const std::string& k, const json& v) { c.epsilon = as_number(k, v); }},
      {"solver.splitting",
       [](RunConfig& c, const std::string& k, const json& v) { c.splitting = parse_splitting(k, as_string(k, v)); }},
      {"solver.transport",
       [](RunConfig& c, const std::string& k, const json& v) { c.transport = parse_transport(k, as_string(k, v)); }},
      {"solver.output_interval",
       [](RunConfig& c, const std::string& k, const json& v) { c.output_interval = as_number(k, v); }},
      {"solver.dt", [](RunConfig& c, const std::string& k, const json& v) { c.dt = as_optional_number(k, v); }},
      {"initial.family",
       [](RunConfig& c, const std::string& k, const json& v) { c.family = parse_family(k, as_string(k, v)); }},
      {"initial.amplitude", [](RunConfig& c, const std::string& k, const json& v) { c.amplitude = as_number(k, v); }},
      {"initial.wavenumber", [](RunConfig& c, const std::string& k, const json& v) { c.wavenumber = as_int(k, v); }},
      {"initial.coefficients",
       [](RunConfig& c, const std::string& k, const json& v) { c.coefficients = as_numbers(k, v); }},
      {"diagnostics.order", [](RunConfig& c, const std::string& k, const json& v) { c.order = as_int(k, v); }},
      {"diagnostics.stencil_order",
       [](RunConfig& c, const std::string& k, const json& v) { c.stencil_order = as_int(k, v); }},
      {"decay.window_start",
       [](RunConfig& c, const std::string& k, const json& v) { c.window_start = as_number(k, v); }},
      {"decay.window_end",
       [](RunConfig& c, const std::string& k, const json& v) { c.window_end = as_optional_number(k, v); }},
      {"hydro.epsilons", [](RunConfig& c, const std::string& k, const json& v) { c.epsilons = as_numbers(k, v); }},
      {"hydro.euler_cfl", [](RunConfig& c, const std::string& k, const json& v) { c.euler_cfl = as_number(k, v); }},
      {"hydro.euler_dt",
       [](RunConfig& c, const std::string& k, const json& v) { c.euler_dt = as_optional_number(k, v); }},
      {"output.snapshot_interval",
       [](RunConfig& c, const std::string& k, const json& v) { c.snapshot_interval = as_optional_number(k, v); }},
      {"run.seed",
       [](RunConfig& c, const std::string& k, const json& v) {
         if (!v.is_number_unsigned()) bad(k, "expected a non-negative integer");
         c.seed = v.get<std::uint64_t>();
       }},
      {"run.threads", [](RunConfig& c, const std::string& k, const json& v) { c.threads = as_int(k, v); }},
      {"restart.snapshot",
       [](RunConfig& c, const std::string& k, const json& v) {
         if (v.is_null())
           c.restart.reset();
         else
           c.restart = as_string(k, v);
       }},
      {"perturbation.envelope",
       [](RunConfig& c, const std::string& k, const json& v) { c.envelope = as_number(k, v); }},
      {"perturbation.gram_tolerance",
       [](RunConfig& c, const std::string& k, const json& v) { c.gram_tolerance = as_number(k, v); }},
      {"perturbation.abort_on_envelope",
       [](RunConfig& c, const std::string& k, const json& v) {
         if (!v.is_boolean()) bad(k, "expected true or false");
         c.abort_on_envelope = v.get<bool>();
       }},
  };
  return table;
}

bool is_multiple(double x, double step) {
  const double q = x / step;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

}  // namespace

std::string to_string(Splitting s) { return s == Splitting::Lie ? "lie" : "strang"; }

std::string to_string(TransportScheme s) { return s == TransportScheme::Upwind1 ? "upwind1" : "muscl_minmod"; }

std::string to_string(InitialFamily f) {
  switch (f) {
    case InitialFamily::Equilibrium: return "equilibrium";
    case InitialFamily::DensityMode: return "density_mode";
    case InitialFamily::VelocityMode: return "velocity_mode";
    case InitialFamily::BasisPerturbation: return "basis_perturbation";
  }
  return "?";
}

void RunConfig::validate() const {
  if (dim < 1 || dim > 2) bad("gas.dim", "must be 1 or 2");
  (void)derive_params(gamma, dim);
  if (cells < 4) bad("grid.cells", "must be at least 4");
  if (!(length > 0)) bad("grid.length", "must be positive");
  if (velocity_points < 2) bad("grid.velocity_points", "must be at least 2");
  if (!(velocity_margin >= 0)) bad("grid.velocity_margin", "must be non-negative");
  (void)solver();
  if (wavenumber < 0) bad("initial.wavenumber", "must be non-negative");
  if (!coefficients.empty() && static_cast<int>(coefficients.size()) != dim + 1)
    bad("initial.coefficients", "needs exactly d + 1 = " + std::to_string(dim + 1) + " entries");
  if (order < 0 || order > 4) bad("diagnostics.order", "must lie in [0, 4]");
  if (stencil_order != 2 && stencil_order != 4) bad("diagnostics.stencil_order", "must be 2 or 4");
  if (!(window_start >= 0)) bad("decay.window_start", "must be non-negative");
  if (window_end && !(*window_end > window_start)) bad("decay.window_end", "must exceed decay.window_start");
  if (epsilons.empty()) bad("hydro.epsilons", "must list at least one value");
  for (double e : epsilons)
    if (!(e > 0)) bad("hydro.epsilons", "every value must be positive");
  if (!(euler_cfl > 0 && euler_cfl <= 1)) bad("hydro.euler_cfl", "must lie in (0, 1]");
  if (euler_dt && !(*euler_dt > 0)) bad("hydro.euler_dt", "must be positive");
  if (snapshot_interval) {
    if (!(*snapshot_interval > 0)) bad("output.snapshot_interval", "must be positive");
    if (!is_multiple(*snapshot_interval, output_interval))
      bad("output.snapshot_interval", "must be a whole multiple of solver.output_interval");
  }
  if (threads < 1) bad("run.threads", "must be at least 1");
  if (!(envelope > 0)) bad("perturbation.envelope", "must be positive");
  if (!(gram_tolerance > 0)) bad("perturbation.gram_tolerance", "must be positive");
}

SolverConfig<double> RunConfig::solver() const {
  SolverConfig<double> s;
  s.cfl = cfl;
  s.t_end = t_end;
  s.epsilon = epsilon;
  s.splitting = splitting;
  s.transport = transport;
  s.output_interval = output_interval;
  s.fixed_dt = dt;
  s.threads = threads;
  s.validate();
  return s;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object with dotted keys");
  RunConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) {
      if (value.is_object()) bad(key, "nested objects are not accepted; use flat dotted keys");
      bad(key, "unknown configuration key");
    }
    it->second(c, key, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["gas.gamma"] = c.gamma;
  j["gas.dim"] = c.dim;
  j["grid.cells"] = c.cells;
  j["grid.length"] = c.length;
  j["grid.velocity_points"] = c.velocity_points;
  j["grid.velocity_margin"] = c.velocity_margin;
  j["solver.cfl"] = c.cfl;
  j["solver.t_end"] = c.t_end;
  j["solver.epsilon"] = c.epsilon;
  j["solver.splitting"] = to_string(c.splitting);
  j["solver.transport"] = to_string(c.transport);
  j["solver.output_interval"] = c.output_interval;
  j["solver.dt"] = opt(c.dt);
  j["initial.family"] = to_string(c.family);
  j["initial.amplitude"] = c.amplitude;
  j["initial.wavenumber"] = c.wavenumber;
  j["initial.coefficients"] = c.coefficients;
  j["diagnostics.order"] = c.order;
  j["diagnostics.stencil_order"] = c.stencil_order;
  j["decay.window_start"] = c.window_start;
  j["decay.window_end"] = opt(c.window_end);
  j["hydro.epsilons"] = c.epsilons;
  j["hydro.euler_cfl"] = c.euler_cfl;
  j["hydro.euler_dt"] = opt(c.euler_dt);
  j["output.snapshot_interval"] = opt(c.snapshot_interval);
  j["run.seed"] = c.seed;
  j["run.threads"] = c.threads;
  j["restart.snapshot"] = c.restart ? nlohmann::ordered_json(*c.restart) : nlohmann::ordered_json();
  j["perturbation.envelope"] = c.envelope;
  j["perturbation.gram_tolerance"] = c.gram_tolerance;
  j["perturbation.abort_on_envelope"] = c.abort_on_envelope;
  return j;
}

}  // namespace bgk
