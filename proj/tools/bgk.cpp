#include "bgk/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Kinetic BGK model relaxing to isentropic gas dynamics: verification and experiments"};
  app.require_subcommand(1);
  bgk::CommandOptions opts;
  std::string config, out;
  int threads = 0;

  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", config, "flat JSON config with dotted keys")->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", out, "output directory");
    if (out_required) o->required();
    sub->add_option("--threads", threads, "worker threads (results depend on this count only)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--overwrite", opts.overwrite, "reuse a non-empty output directory");
  };

  auto* verify = app.add_subcommand("verify", "run the identity suite on the configured grid");
  auto* run = app.add_subcommand("run", "simulate and write diagnostics and snapshots");
  auto* decay = app.add_subcommand("decay", "measure the exponential decay rate of the energy functional");
  auto* hydro = app.add_subcommand("hydro-limit", "compare kinetic runs against the Euler reference");
  add_common(verify, false);
  add_common(run, true);
  add_common(decay, true);
  add_common(hydro, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? bgk::kExitOk : bgk::kExitConfigError;
  }
  if (!config.empty()) opts.config = config;
  if (!out.empty()) opts.out = out;
  if (threads > 0) opts.threads = threads;

  try {
    if (verify->parsed()) return bgk::cmd_verify(opts, std::cerr);
    if (run->parsed()) return bgk::cmd_run(opts, std::cerr);
    if (decay->parsed()) return bgk::cmd_decay(opts, std::cerr);
    return bgk::cmd_hydro_limit(opts, std::cerr);
  } catch (const bgk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bgk::kExitConfigError;
  } catch (const bgk::RuntimeAbort& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return bgk::kExitRuntimeAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bgk::kExitRuntimeAbort;
  }
}
