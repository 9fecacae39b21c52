#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dobc/analysis.hpp"

namespace dobc {

Vec quasi_steady_eta(const Vec& z, const Vec& x, const Vec& zbar, double t, const NormalFormPlant& plant,
                     const NominalModel& nominal) {
  const Mat G = plant.G(z, x, t);
  const Mat Gbar = nominal.Gbar(zbar, x, t);
  const Vec Ur = nominal.Ur(zbar, x, t);
  const Vec Fbar = plant.F(zbar, x);
  const Vec bracket = Fbar - plant.F(z, x) + (Gbar - G) * Ur;
  return -Fbar + Gbar * solve_gain(G, bracket, "G", z, x, t);
}

double quasi_steady_residual(const Vec& eta1, const Vec& z, const Vec& x, const Vec& zbar, double t,
                             const NormalFormPlant& plant, const NominalModel& nominal) {
  const Mat G = plant.G(z, x, t);
  const Mat Gbar = nominal.Gbar(zbar, x, t);
  const Vec Ur = nominal.Ur(zbar, x, t);
  const Vec Fbar = plant.F(zbar, x);
  const Vec r = plant.F(z, x) - Fbar + G * solve_gain(Gbar, eta1 + Fbar, "Gbar", zbar, x, t) - (Gbar - G) * Ur;
  return r.norm();
}

Vec sector_map(const SectorSample& s, const NormalFormPlant& plant, const NominalModel& nominal,
               const SmoothSaturation& Phi) {
  const Mat G = plant.G(s.z, s.x, s.t);
  const Mat Gbar = nominal.Gbar(s.zbar, s.x, s.t);
  const Vec base = quasi_steady_eta(s.z, s.x, s.zbar, s.t, plant, nominal) + plant.F(s.zbar, s.x);
  const Mat E = Mat::Identity(G.rows(), G.cols()) - G * inverse_gain(Gbar, "Gbar", s.zbar, s.x, s.t);
  return s.zeta - E * (Phi(s.zeta + base) - Phi(base));
}

SectorResult sector_check(const std::vector<SectorSample>& samples, const NormalFormPlant& plant,
                          const NominalModel& nominal, const SmoothSaturation& Phi, double mu, double slack) {
  if (!(mu >= 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in [0, 1)");
  SectorResult out;
  out.max_form = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Vec psi = sector_map(samples[k], plant, nominal, Phi);
    const Vec& zeta = samples[k].zeta;
    const double form = (psi - (1.0 - mu) * zeta).dot(psi - (1.0 + mu) * zeta);
    if (form > out.max_form) {
      out.max_form = form;
      out.argmax = k;
    }
    if (form > slack) ++out.violations;
  }
  if (samples.empty()) out.max_form = 0.0;
  return out;
}

GainBoundResult check_gain_bound(const NormalFormPlant& plant, const NominalModel& nominal, const Mat& state_grid,
                                 const std::vector<double>& time_grid) {
  const int nz = plant.internal_dim();
  const int nx = plant.nu.total();
  if (state_grid.rows() != nz + nx) throw std::invalid_argument("state grid rows must equal dim z + dim x");
  if (time_grid.empty()) throw std::invalid_argument("time grid is empty");
  GainBoundResult out;
  out.max_norm = -1.0;
  for (Eigen::Index c = 0; c < state_grid.cols(); ++c) {
    const Vec z = state_grid.col(c).head(nz);
    const Vec x = state_grid.col(c).tail(nx);
    for (double t : time_grid) {
      const Mat G = plant.G(z, x, t);
      const Mat Gbar = nominal.Gbar(z, x, t);
      const Mat E = Mat::Identity(G.rows(), G.cols()) - G * inverse_gain(Gbar, "Gbar", z, x, t);
      const double n = spectral_norm(E);
      if (n > out.max_norm) {
        out.max_norm = n;
        out.z = z;
        out.x = x;
        out.t = t;
      }
    }
  }
  return out;
}

double tail_norm(const std::vector<double>& times, const Mat& values, double t_from, double t_to) {
  if (static_cast<Eigen::Index>(times.size()) != values.cols()) {
    throw std::invalid_argument("time and value series differ in length");
  }
  double best = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_from || times[k] > t_to) continue;
    const double n = values.col(static_cast<Eigen::Index>(k)).norm();
    best = std::isnan(best) ? n : std::max(best, n);
  }
  return best;
}

Metrics compute_metrics(const Trajectory& traj, const Trajectory* nominal, double t_ss, double settle_tolerance) {
  if (traj.samples() == 0) throw std::invalid_argument("empty trajectory");
  Metrics m;
  const double t_end = traj.times.back();
  m.ultimate_bound = t_ss <= t_end ? tail_norm(traj.times, traj.x, t_ss, t_end)
                                   : traj.x.col(traj.x.cols() - 1).norm();
  m.settled = m.ultimate_bound <= settle_tolerance;

  if (nominal != nullptr) {
    if (nominal->samples() != traj.samples() || nominal->x.rows() != traj.x.rows()) {
      throw std::invalid_argument("nominal and closed-loop trajectories are not aligned");
    }
    double err = 0.0;
    for (std::size_t k = 0; k < traj.samples(); ++k) {
      const double scale = std::max(1.0, std::abs(traj.times[k]));
      if (std::abs(traj.times[k] - nominal->times[k]) > 1e-9 * scale) {
        throw std::invalid_argument("nominal and closed-loop time grids differ");
      }
      const auto c = static_cast<Eigen::Index>(k);
      err = std::max(err, (traj.x.col(c) - nominal->x.col(c)).norm());
    }
    m.recovery_error = err;
  }

  for (std::size_t k = 1; k < traj.samples(); ++k) {
    const double dt = traj.times[k] - traj.times[k - 1];
    const auto c = static_cast<Eigen::Index>(k);
    const double n0 = traj.u.col(c - 1).norm();
    const double n1 = traj.u.col(c).norm();
    m.effort_l1 += 0.5 * dt * (n0 + n1);
    m.effort_l2 += 0.5 * dt * (n0 * n0 + n1 * n1);
  }
  return m;
}

}  // namespace dobc
