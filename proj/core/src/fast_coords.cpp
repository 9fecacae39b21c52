#include <cmath>
#include <stdexcept>
#include <string>

#include "dobc/analysis.hpp"

namespace dobc {

Vec xi_from_states(const Vec& q, const Vec& x, double tau, const RelativeDegree& nu) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  Vec xi(nu.total());
  for (int i = 0; i < nu.channels(); ++i) {
    for (int j = 0; j < nu[i]; ++j) {
      const int k = nu.offset(i) + j;
      xi(k) = (q(k) - x(k)) / std::pow(tau, nu[i] - 1 - j);
    }
  }
  return xi;
}

std::vector<double> central_difference_weights(int order) {
  if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
  const int half = (order + 1) / 2;
  const int n = 2 * half + 1;
  // Fornberg's recursion on the nodes -half..half, expansion point 0.
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[std::size_t(i)] = i - half;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n), std::vector<double>(std::size_t(order) + 1, 0.0));
  double c1 = 1.0;
  double c4 = xs[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[std::size_t(i)];
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[std::size_t(i)] - xs[std::size_t(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[std::size_t(i)][std::size_t(k)] =
              c1 * (k * c[std::size_t(i - 1)][std::size_t(k - 1)] - c5 * c[std::size_t(i - 1)][std::size_t(k)]) / c2;
        }
        c[std::size_t(i)][0] = -c1 * c5 * c[std::size_t(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[std::size_t(j)][std::size_t(k)] =
            (c4 * c[std::size_t(j)][std::size_t(k)] - k * c[std::size_t(j)][std::size_t(k - 1)]) / c3;
      }
      c[std::size_t(j)][0] = c4 * c[std::size_t(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[std::size_t(i)] = c[std::size_t(i)][std::size_t(order)];
  return w;
}

namespace {

// d-th derivative of row `row` of M at column k, spacing h.
double derivative(const Mat& M, Eigen::Index row, Eigen::Index k, int order, double h,
                  const std::vector<std::vector<double>>& weights) {
  const auto& w = weights[std::size_t(order)];
  const auto half = static_cast<Eigen::Index>(w.size() / 2);
  double acc = 0.0;
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(w.size()); ++s) acc += w[std::size_t(s)] * M(row, k + s - half);
  return acc / std::pow(h, order);
}

int max_degree(const RelativeDegree& nu) {
  int d = 0;
  for (int v : nu.degrees()) d = std::max(d, v);
  return d;
}

}  // namespace

FastSeries eta_from_trajectory(const Trajectory& traj, double tau, const RelativeDegree& nu, double max_spacing) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (traj.q.rows() != nu.total() || traj.p.rows() != nu.total()) {
    throw std::invalid_argument("trajectory carries no controller states of matching size");
  }
  const double h = traj.spacing();
  if (!(h > 0.0) || h > max_spacing * (1.0 + 1e-12)) {
    throw std::invalid_argument("insufficient sampling density: spacing " + std::to_string(h) + " exceeds " +
                                std::to_string(max_spacing));
  }
  const int top = max_degree(nu);
  std::vector<std::vector<double>> weights;
  for (int d = 0; d <= top; ++d) weights.push_back(central_difference_weights(d));
  const auto half = static_cast<Eigen::Index>(weights.back().size() / 2);
  const auto n = static_cast<Eigen::Index>(traj.samples());
  if (n < 2 * half + 1) {
    throw std::invalid_argument("insufficient sampling density: too few samples for order " + std::to_string(top));
  }

  FastSeries out;
  out.first = static_cast<std::size_t>(half);
  const Eigen::Index count = n - 2 * half;
  out.values.resize(nu.total(), count);
  out.times.assign(traj.times.begin() + half, traj.times.begin() + half + count);
  for (Eigen::Index c = 0; c < count; ++c) {
    const Eigen::Index k = c + half;
    for (int i = 0; i < nu.channels(); ++i) {
      const Eigen::Index p1 = nu.offset(i);
      const Eigen::Index qn = nu.last(i);
      double tau_pow = 1.0;
      for (int j = 0; j < nu[i]; ++j) {
        const double dp = j == 0 ? traj.p(p1, k) : derivative(traj.p, p1, k, j, h, weights);
        const double dq = derivative(traj.q, qn, k, j + 1, h, weights);
        out.values(nu.offset(i) + j, c) = tau_pow * (dp - dq);
        tau_pow *= tau;
      }
    }
  }
  return out;
}

FastSeries xi_series(const Trajectory& traj, double tau, const RelativeDegree& nu) {
  FastSeries out;
  out.times = traj.times;
  out.values.resize(nu.total(), static_cast<Eigen::Index>(traj.samples()));
  for (Eigen::Index k = 0; k < out.values.cols(); ++k) {
    out.values.col(k) = xi_from_states(traj.q.col(k), traj.x.col(k), tau, nu);
  }
  return out;
}

double ResidualSeries::max_xi(double t_from, double t_to) const {
  double best = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= t_from && times[k] <= t_to) best = std::max(best, xi[k]);
  }
  return best;
}

double ResidualSeries::max_eta(double t_from, double t_to) const {
  double best = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= t_from && times[k] <= t_to) best = std::max(best, eta[k]);
  }
  return best;
}

ResidualSeries fast_dynamics_residual(const Trajectory& traj, const NormalFormPlant& plant,
                                      const NominalModel& nominal, const ControllerParams& params,
                                      double max_spacing) {
  const RelativeDegree& nu = params.nu;
  const double tau = params.tau;
  const double h = traj.spacing();
  const FastSeries eta = eta_from_trajectory(traj, tau, nu, max_spacing);
  const FastSeries xi = xi_series(traj, tau, nu);
  const Mat A_xi = assemble_filter_matrices(params.gains, nu, 1.0).A_atau;
  const int nz = plant.internal_dim();
  const int m = nu.channels();

  // Rows of the stacked coefficient matrix diag{a_1^T, ..., a_m^T}.
  Mat a_rows = Mat::Zero(m, nu.total());
  Vec a_first(m);
  for (int i = 0; i < m; ++i) {
    a_rows.block(i, nu.offset(i), 1, nu[i]) = params.gains[std::size_t(i)].transpose();
    a_first(i) = params.gains[std::size_t(i)](0);
  }

  ResidualSeries out;
  const auto first = static_cast<Eigen::Index>(eta.first);
  // eta' needs eta at k +- 1
  for (Eigen::Index c = 1; c + 1 < eta.values.cols(); ++c) {
    const Eigen::Index k = c + first;
    const double t = traj.times[std::size_t(k)];
    const Vec z = traj.z.col(k).head(nz);
    const Vec x = traj.x.col(k);
    const Vec zbar = traj.zbar.col(k).head(nz);
    const Vec u = traj.u.col(k);
    const Mat G = plant.G(z, x, t);
    const Vec Fz = plant.F(z, x);

    const Vec xi_dot = (xi.values.col(k + 1) - xi.values.col(k - 1)) / (2.0 * h);
    const Vec theta_xi = Fz + G * u;
    Vec rhs_xi = A_xi * xi.values.col(k);
    for (int i = 0; i < m; ++i) rhs_xi(nu.last(i)) -= tau * theta_xi(i);

    const Vec eta_k = eta.values.col(c);
    const Vec eta_dot = (eta.values.col(c + 1) - eta.values.col(c - 1)) / (2.0 * h);
    const Vec xq = params.phi()(traj.q.col(k));
    const Mat Gbar = nominal.Gbar(zbar, xq, t);
    const Vec theta_eta = -a_rows * eta_k + a_first.cwiseProduct(-Fz + (Gbar - G) * u);
    const Vec rhs_eta = chain_rhs(nu, eta_k, theta_eta);

    out.times.push_back(t);
    out.xi.push_back((tau * xi_dot - rhs_xi).norm());
    out.eta.push_back((tau * eta_dot - rhs_eta).norm());
  }
  return out;
}

FastSeries eta_error_series(const Trajectory& traj, const NormalFormPlant& plant, const NominalModel& nominal,
                            const ControllerParams& params, double max_spacing) {
  FastSeries eta = eta_from_trajectory(traj, params.tau, params.nu, max_spacing);
  const int nz = plant.internal_dim();
  for (Eigen::Index c = 0; c < eta.values.cols(); ++c) {
    const auto k = static_cast<Eigen::Index>(eta.first) + c;
    const Vec star = quasi_steady_eta(traj.z.col(k).head(nz), traj.x.col(k), traj.zbar.col(k).head(nz),
                                      traj.times[std::size_t(k)], plant, nominal);
    for (int i = 0; i < params.nu.channels(); ++i) eta.values(params.nu.offset(i), c) -= star(i);
  }
  return eta;
}

}  // namespace dobc
