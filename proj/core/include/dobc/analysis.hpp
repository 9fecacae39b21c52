#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dobc/simulator.hpp"

namespace dobc {

// xi_ij = (q_ij - x_ij) / tau^{nu_i - j}
Vec xi_from_states(const Vec& q, const Vec& x, double tau, const RelativeDegree& nu);

// Central finite-difference weights of O(h^2) accuracy for the given derivative order,
// on offsets -half..half (half = (order + 1) / 2), unit spacing.
std::vector<double> central_difference_weights(int order);

// Time series over the interior samples [first, first + times.size()).
struct FastSeries {
  std::vector<double> times;
  std::size_t first = 0;
  Mat values;  // rows: coordinates, columns: samples
};

// eta_ij = tau^{j-1} (p_i1^{(j-1)} - q_{i nu_i}^{(j)}), derivatives by central differences.
// Throws std::invalid_argument when sample spacing exceeds max_spacing or there are too few
// samples for the stencils.
FastSeries eta_from_trajectory(const Trajectory& traj, double tau, const RelativeDegree& nu,
                               double max_spacing);

FastSeries xi_series(const Trajectory& traj, double tau, const RelativeDegree& nu);

struct ResidualSeries {
  std::vector<double> times;
  std::vector<double> xi;   // ||tau xi' - (A_xi xi - tau B Theta_xi)||
  std::vector<double> eta;  // ||tau eta' - (A eta + B Theta_eta)||

  double max_xi(double t_from, double t_to) const;
  double max_eta(double t_from, double t_to) const;
};

ResidualSeries fast_dynamics_residual(const Trajectory& traj, const NormalFormPlant& plant,
                                      const NominalModel& nominal, const ControllerParams& params,
                                      double max_spacing);

// eta*_[1] = -F(zbar,x) + Gbar G^{-1} {F(zbar,x) - F(z,x) + (Gbar - G) U_r(zbar,x)}
Vec quasi_steady_eta(const Vec& z, const Vec& x, const Vec& zbar, double t,
                     const NormalFormPlant& plant, const NominalModel& nominal);

// ||F(z,x) - F(zbar,x) + G Gbar^{-1}(eta1 + F(zbar,x)) - (Gbar - G) U_r||
double quasi_steady_residual(const Vec& eta1, const Vec& z, const Vec& x, const Vec& zbar, double t,
                             const NormalFormPlant& plant, const NominalModel& nominal);

struct SectorSample {
  Vec z;
  Vec x;
  Vec zbar;
  double t = 0.0;
  Vec zeta;
};

// Psi_t(zeta) = zeta - [I - G Gbar^{-1}] {Phi(zeta + eta* + F(zbar,x)) - Phi(eta* + F(zbar,x))}
Vec sector_map(const SectorSample& s, const NormalFormPlant& plant, const NominalModel& nominal,
               const SmoothSaturation& Phi);

struct SectorResult {
  double max_form = 0.0;  // max of (Psi - (1-mu) zeta)^T (Psi - (1+mu) zeta)
  std::size_t argmax = 0;
  std::size_t violations = 0;  // samples with form > slack
};

SectorResult sector_check(const std::vector<SectorSample>& samples, const NormalFormPlant& plant,
                          const NominalModel& nominal, const SmoothSaturation& Phi, double mu,
                          double slack = 1e-12);

struct GainBoundResult {
  double max_norm = 0.0;
  Vec z;
  Vec x;
  double t = 0.0;
};

// max over grid of ||I - G(z,x,t) Gbar^{-1}(z,x,t)||_2. state_grid columns are [z; x].
GainBoundResult check_gain_bound(const NormalFormPlant& plant, const NominalModel& nominal,
                                 const Mat& state_grid, const std::vector<double>& time_grid);

struct Metrics {
  double ultimate_bound = 0.0;
  std::optional<double> recovery_error;
  double effort_l1 = 0.0;  // integral of ||u||
  double effort_l2 = 0.0;  // integral of ||u||^2
  bool settled = false;    // ultimate_bound <= settle_tolerance
};

// Tail window [t_ss, t_end]. Throws std::invalid_argument on misaligned time grids.
Metrics compute_metrics(const Trajectory& traj, const Trajectory* nominal, double t_ss,
                        double settle_tolerance = 0.05);

// Max over samples in [t_from, t_to] of the column norms.
double tail_norm(const std::vector<double>& times, const Mat& values, double t_from, double t_to);

// ||eta - eta*|| series, with eta* = C^T eta*_[1] evaluated along the trajectory.
FastSeries eta_error_series(const Trajectory& traj, const NormalFormPlant& plant,
                            const NominalModel& nominal, const ControllerParams& params,
                            double max_spacing);

}  // namespace dobc
