#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dobc/analysis.hpp"
#include "dobc_cli/run_spec.hpp"

namespace dobc::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalFailure = 3,
  kVerificationFailure = 4,
};

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
};

RunSpec apply_overrides(RunSpec spec, const Overrides& o);

// Builtin satellite with the configured parameters and feedback poles.
SatelliteModel build_satellite(const RunSpec& spec);
SatelliteModel build_satellite(const RunSpec& spec, NominalGainKind kind);

// Certifies the configured gains, or searches a_i1 when none are given.
// Throws InfeasibleError naming the channel.
SynthesisReport run_synthesis(const RunSpec& spec);

ControllerParams controller_params(const RunSpec& spec, double tau);
SimConfig sim_config(const RunSpec& spec, double tau);
double steady_state_start(const RunSpec& spec);

struct VerifyReport {
  double mu_design = 0.0;
  std::string mu_mode;
  GainBoundResult gain_bound;
  bool gain_bound_flagged = false;

  double quasi_steady_max = 0.0;
  double quasi_steady_collapse_max = 0.0;
  double quasi_steady_tolerance = 0.0;
  int quasi_steady_samples = 0;
  bool quasi_steady_pass = false;

  double sector_mu = 0.0;
  SectorResult sector;
  int sector_samples = 0;
  bool sector_pass = false;

  bool fast_enabled = false;
  double fast_spacing = 0.0;
  double xi_residual[2] = {0.0, 0.0};
  double eta_residual[2] = {0.0, 0.0};
  double xi_order = 0.0;
  double eta_order = 0.0;
  double fast_min_order = 0.0;
  bool fast_pass = true;

  bool pass() const;
  std::string to_text() const;
};

VerifyReport run_verify(const RunSpec& spec);

struct CommandContext {
  RunSpec spec;
  bool quiet = false;
  std::ostream* log = nullptr;  // progress lines unless quiet
};

int cmd_synthesize(const CommandContext& ctx);
int cmd_simulate(const CommandContext& ctx);
int cmd_nominal(const CommandContext& ctx);
int cmd_sweep(const CommandContext& ctx);
int cmd_verify(const CommandContext& ctx);

// Entry point shared by the executable and the tests. Errors go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dobc::cli
