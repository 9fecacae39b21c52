#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dobc/errors.hpp"
#include "dobc_cli/commands.hpp"

namespace dobc::cli {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Output-feedback disturbance-observer controller toolkit", "dobc"};
  std::string config;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  bool quiet = false;
  app.add_option("--config", config, "RunSpec JSON file");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Random seed (overrides seed)");
  app.add_option("--tau", tau, "Time-scale parameter (overrides controller.tau)")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "Suppress progress output");
  app.require_subcommand(1, 1);

  const std::vector<std::pair<const char*, const char*>> commands{
      {"synthesize", "Certify or search filter gains and estimate saturation levels"},
      {"simulate", "Simulate the closed loop; write trajectory CSV and metrics"},
      {"nominal", "Simulate the nominal state-feedback loop"},
      {"sweep", "Closed-loop runs over a list of tau values"},
      {"verify", "Quasi-steady, sector, gain-bound and fast-dynamics checks"},
      {"example-satellite", "Write the builtin satellite RunSpec"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (command == "example-satellite") {
      RunSpec spec;
      if (seed) spec.seed = *seed;
      if (tau) spec.controller.tau = *tau;
      validate(spec);
      if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        const auto path = std::filesystem::path(*out_dir) / "satellite.json";
        std::ofstream os(path, std::ios::binary);
        os << to_json(spec);
        if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
        if (!quiet) out << "wrote " << path.string() << '\n';
      } else {
        out << to_json(spec);
      }
      return kOk;
    }
    if (config.empty()) throw ConfigError("--config is required for '" + command + "'", "--config");
    CommandContext ctx{apply_overrides(load_run_spec(config), {out_dir, seed, tau}), quiet, &out};
    if (command == "synthesize") return cmd_synthesize(ctx);
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "nominal") return cmd_nominal(ctx);
    if (command == "sweep") return cmd_sweep(ctx);
    return cmd_verify(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleError& e) {
    err << "synthesis failed: " << e.what() << '\n';
    return kVerificationFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const CoarseGridError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace dobc::cli
