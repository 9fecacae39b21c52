#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dobc/controller.hpp"

namespace dobc {

struct SimConfig {
  double t_end = 20.0;
  double step = 5e-5;
  double tau = 1e-3;
  int record_stride = 1;
  Vec z0;
  Vec x0;
  // Controller initial state; empty means zeros.
  Vec zbar0;
  Vec q0;
  Vec p0;
  // Permit step > tau / 20.
  bool allow_coarse_step = false;
  double blowup_bound = 1e8;

  // Throws ConfigError.
  void validate() const;
  // floor(t_end / step), tolerant to representation error in the ratio.
  long long steps() const;
  long long samples() const { return steps() / record_stride + 1; }
};

enum class RunStatus { Completed, BlowUp, SingularGain };
const char* to_string(RunStatus s);

// Signals are stored column-per-sample. Open-loop/nominal runs leave controller signals
// with zero rows.
struct Trajectory {
  std::vector<double> times;
  Mat z, x, zbar, q, p, y, u, w;
  RunStatus status = RunStatus::Completed;
  std::string message;
  double tau = 0.0;
  double step = 0.0;
  int record_stride = 1;

  std::size_t samples() const { return times.size(); }
  double spacing() const { return step * record_stride; }
  bool completed() const { return status == RunStatus::Completed; }
};

// Plant + controller, RK4 with u and w recomputed at every stage.
Trajectory simulate_closed_loop(const NormalFormPlant& plant, const NominalModel& nominal,
                                const ControllerParams& params, const SimConfig& cfg);

// Nominal loop z' = F0(z, x), x' = A x + B (F + Gbar U_r). Trajectory fills z, x, y, u.
Trajectory simulate_nominal(const NormalFormPlant& plant, const NominalModel& nominal,
                            const SimConfig& cfg);

// Header: t, z_1.., x_1.., zbar_.., q_.., p_.., y_.., u_.., w_..; shortest round-trip doubles.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

struct SweepOptions {
  // step = tau / step_divisor
  double step_divisor = 20.0;
  double tail_fraction = 0.7;
  // Fast-coordinate tail norms need dense records (record_stride 1).
  bool fast_tails = true;
  bool parallel = true;
};

struct SweepEntry {
  double tau = 0.0;
  RunStatus status = RunStatus::Completed;
  std::string message;
  double ultimate_bound = 0.0;
  double recovery_error = 0.0;
  double effort_l1 = 0.0;
  double effort_l2 = 0.0;
  double xi_tail = 0.0;       // NaN when not computed
  double eta_error_tail = 0.0;
  double runtime_seconds = 0.0;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
};

// One closed-loop run per tau (descending, positive). `base.step` is replaced by
// tau / step_divisor. Per-run failures are recorded, never thrown.
SweepReport sweep_tau(const NormalFormPlant& plant, const NominalModel& nominal,
                      const ControllerParams& base_params, const SimConfig& base,
                      const std::vector<double>& taus, const SweepOptions& opts = {});

void write_sweep_csv(std::ostream& os, const SweepReport& report);

}  // namespace dobc
