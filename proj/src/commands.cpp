#include "bgk/commands.hpp"

#include "bgk/experiments.hpp"
#include "bgk/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace bgk {

namespace fs = std::filesystem;

namespace {

const fs::path& require_out(const CommandOptions& opts) {
  if (!opts.out) throw ConfigError("--out <dir> is required for this command");
  return *opts.out;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeAbort("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
}

void note_theorem_range(const RunConfig& cfg, std::ostream& log) {
  const auto p = cfg.params();
  const double bound = p.theorem_gamma_bound(cfg.order);
  if (cfg.gamma > bound) {
    log << "note: gamma = " << cfg.gamma << " lies outside the range (1, " << bound
        << "] covered by the decay theorem at order N = " << cfg.order << "; running anyway\n";
  }
}

std::string snapshot_name(long long index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snapshot_%06lld.bin", index);
  return buf;
}

}  // namespace

RunConfig resolve_config(const CommandOptions& opts) {
  RunConfig cfg = opts.config ? load_config(*opts.config) : RunConfig{};
  if (opts.threads) {
    cfg.threads = *opts.threads;
    cfg.validate();
  }
  return cfg;
}

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError("--out " + dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !overwrite)
      throw ConfigError("output directory " + dir.string() + " is not empty; pass --overwrite to reuse it");
  }
  fs::create_directories(dir);
}

int cmd_verify(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  if (opts.out) prepare_output_dir(*opts.out, opts.overwrite);
  const VerifyReport report = verify_suite(cfg);
  auto j = report.to_json();
  if (opts.out) {
    write_json(*opts.out / "config.json", config_to_json(cfg));
    write_json(*opts.out / "verify_report.json", j);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  for (const auto& c : report.checks) {
    if (c.pass) continue;
    log << "FAIL " << c.name << ": measured " << c.measured << " > tolerance " << c.tolerance;
    if (!c.message.empty()) log << " (" << c.message << ")";
    log << "\n";
  }
  log << (report.passed() ? "verify: all checks passed\n" : "verify: some checks failed\n");
  return report.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_decay(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = require_out(opts);
  prepare_output_dir(out, opts.overwrite);
  note_theorem_range(cfg, log);
  write_json(out / "config.json", config_to_json(cfg));

  CsvWriter csv(out / "trajectory.csv");
  csv.header(diagnostics_columns(cfg.dim, cfg.order));
  const DecayOutcome res = run_decay(cfg, [&](const DiagnosticsRecord<double>& r) {
    csv.row(diagnostics_row(r, cfg.dim, cfg.order));
    csv.flush();
  });

  const auto p = cfg.params();
  nlohmann::ordered_json j;
  j["window_start"] = cfg.window_start;
  j["window_end"] = cfg.fit_end();
  if (res.fit) {
    j["rate"] = res.fit->rate;
    j["intercept"] = res.fit->intercept;
    j["r_squared"] = res.fit->r_squared;
    j["samples"] = res.fit->samples;
  } else {
    j["refused"] = res.fit_error;
  }
  j["energy_initial"] = number_or_null(res.records.front().energy_total);
  j["energy_final"] = number_or_null(res.records.back().energy_total);
  j["energy_ratio"] = number_or_null(res.energy_ratio);
  j["mass_drift"] = res.conservation.mass_drift;
  j["momentum_drift"] = res.conservation.momentum_drift;
  j["perturbation_mass_max"] = res.conservation.perturbation_mass;
  j["perturbation_momentum_max"] = res.conservation.perturbation_momentum;
  j["theorem_gamma_bound"] = p.theorem_gamma_bound(cfg.order);
  j["gamma_within_theorem_range"] = cfg.gamma <= p.theorem_gamma_bound(cfg.order);
  write_json(out / "decay_fit.json", j);

  if (!res.fit) {
    log << "decay: fit refused: " << res.fit_error << "\n";
    return kExitCheckFailed;
  }
  log << "decay: rate " << res.fit->rate << ", R^2 " << res.fit->r_squared << "\n";
  return kExitOk;
}

int cmd_hydro_limit(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = require_out(opts);
  prepare_output_dir(out, opts.overwrite);
  write_json(out / "config.json", config_to_json(cfg));
  const HydroOutcome res = run_hydro(cfg);

  CsvWriter table(out / "hydro_limit.csv");
  table.header({"epsilon", "l1_rho", "l1_u"});
  for (const auto& row : res.rows) table.row({row.epsilon, row.error.rho, row.error.u});

  const auto space = cfg.spatial_grid();
  const int d = cfg.dim;
  std::vector<std::string> cols;
  for (int a = 1; a <= d; ++a) cols.push_back("x_" + std::to_string(a));
  auto add_profile_cols = [&](const std::string& tag) {
    cols.push_back("rho_" + tag);
    for (int a = 1; a <= d; ++a) cols.push_back("u" + std::to_string(a) + "_" + tag);
  };
  add_profile_cols("euler");
  for (std::size_t k = 0; k < res.kinetic.size(); ++k) add_profile_cols("kinetic_" + std::to_string(k + 1));
  CsvWriter macro(out / "hydro_macro.csv");
  macro.header(cols);
  for (Index i = 0; i < space.size(); ++i) {
    std::vector<double> row;
    for (int a = 0; a < d; ++a) row.push_back(space.center(i, a));
    auto add_profile = [&](const MacroProfile<double>& m) {
      row.push_back(m.rho(i));
      for (int a = 0; a < d; ++a) row.push_back(m.u(i, a));
    };
    add_profile(res.euler);
    for (const auto& m : res.kinetic) add_profile(m);
    macro.row(row);
  }
  for (const auto& row : res.rows)
    log << "hydro-limit: epsilon " << row.epsilon << "  L1(rho) " << row.error.rho << "  L1(u) " << row.error.u << "\n";
  return kExitOk;
}

int cmd_run(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = require_out(opts);
  prepare_output_dir(out, opts.overwrite);
  write_json(out / "config.json", config_to_json(cfg));
  const auto p = cfg.params();

  SolverState<double> s;
  if (cfg.restart) {
    const Snapshot snap = read_snapshot(*cfg.restart);
    const auto vel = cfg.velocity_grid();
    if (snap.space.counts() != cfg.spatial_grid().counts() || snap.space.lengths() != cfg.spatial_grid().lengths() ||
        snap.velocity_points != cfg.velocity_points || snap.half_width != vel.half_width() || snap.gamma != cfg.gamma)
      throw ConfigError("restart.snapshot: " + *cfg.restart + " does not match the configured grids and gamma");
    if (!(snap.t < cfg.t_end)) throw ConfigError("restart.snapshot: snapshot time is not before solver.t_end");
    s = snap.state();
  } else {
    s = {initial_field(cfg), 0.0, 0};
  }

  DiagnosticsContext<double> ctx{p, std::nullopt, cfg.order, cfg.stencil_order, cfg.abort_on_envelope};
  if (p.n > 2.0) ctx.perturbation.emplace(p, cfg.velocity_grid(), cfg.gram_tolerance, cfg.envelope);
  else log << "note: n <= 2, perturbation diagnostics are left empty\n";

  const fs::path snaps = out / "snapshots";
  if (cfg.snapshot_interval) fs::create_directories(snaps);
  CsvWriter csv(out / "diagnostics.csv");
  csv.header(diagnostics_columns(cfg.dim, cfg.order));
  const SolverState<double> final_state = run(std::move(s), cfg.solver(), p, [&](const SolverState<double>& st) {
    csv.row(diagnostics_row(diagnose(st, ctx), cfg.dim, cfg.order));
    csv.flush();
    if (cfg.snapshot_interval) {
      const double q = st.t / *cfg.snapshot_interval;
      const long long idx = std::llround(q);
      if (std::abs(q - static_cast<double>(idx)) <= 1e-9 * std::max(1.0, q))
        write_snapshot(snaps / snapshot_name(idx), st, cfg.gamma);
    }
  });
  write_snapshot(out / "final.bin", final_state, cfg.gamma);
  log << "run: reached t = " << final_state.t << " after " << final_state.steps << " steps\n";
  return kExitOk;
}

}  // namespace bgk
