#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dobc/analysis.hpp"
#include "satellite_fixture.hpp"

using namespace dobc;

namespace {

NormalFormPlant scalar_plant(double g) {
  NormalFormPlant p;
  p.n = 1;
  p.nu = RelativeDegree({1});
  p.F = [](const Vec&, const Vec&) { return Vec::Zero(1); };
  p.G = [g](const Vec&, const Vec&, double) { return Mat::Constant(1, 1, g); };
  return p;
}

NominalModel scalar_nominal(double gbar, double ur) {
  NominalModel n;
  n.Gbar = [gbar](const Vec&, const Vec&, double) { return Mat::Constant(1, 1, gbar); };
  n.Ur = [ur](const Vec&, const Vec&, double) { return Vec::Constant(1, ur); };
  return n;
}

Trajectory dense_satellite_run(double tau, double t_end, double step_divisor, int stride) {
  const auto m = fixture::satellite_model();
  SimConfig c;
  c.t_end = t_end;
  c.tau = tau;
  c.step = tau / step_divisor;
  c.record_stride = stride;
  c.x0 = fixture::initial_state();
  return simulate_closed_loop(m.plant, m.nominal, fixture::satellite_controller(tau), c);
}

}  // namespace

TEST(FastCoords, XiScaling) {
  const RelativeDegree nu({2});
  EXPECT_EQ(xi_from_states(Vec{{3.0, 4.0}}, Vec{{3.0, 4.0}}, 0.1, nu), Vec::Zero(2));
  EXPECT_EQ(xi_from_states(Vec{{2.0, 1.0}}, Vec{{1.0, 0.5}}, 1.0, nu), (Vec{{1.0, 0.5}}));
  const Vec xi = xi_from_states(Vec{{1.0, 1.0}}, Vec::Zero(2), 0.1, nu);
  EXPECT_NEAR(xi(0), 10.0, 1e-14);
  EXPECT_EQ(xi(1), 1.0);
}

TEST(FastCoords, CentralDifferenceWeights) {
  auto near = [](const std::vector<double>& a, const std::vector<double>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
  };
  near(central_difference_weights(0), {1.0});
  near(central_difference_weights(1), {-0.5, 0.0, 0.5});
  near(central_difference_weights(2), {1.0, -2.0, 1.0});
  near(central_difference_weights(3), {-0.5, 1.0, 0.0, -1.0, 0.5});
  near(central_difference_weights(4), {1.0, -4.0, 6.0, -4.0, 1.0});
}

TEST(FastCoords, ConstantSignalsGiveZeroHigherEta) {
  Trajectory t;
  const int n = 30;
  t.step = 0.01;
  t.record_stride = 1;
  t.q = Mat::Constant(3, n, 2.0);
  t.p = Mat::Constant(3, n, -1.5);
  for (int k = 0; k < n; ++k) t.times.push_back(0.01 * k);
  const auto eta = eta_from_trajectory(t, 0.1, RelativeDegree({3}), 0.01);
  EXPECT_EQ(eta.first, 2u);
  EXPECT_EQ(eta.values.cols(), n - 4);
  for (Eigen::Index c = 0; c < eta.values.cols(); ++c) {
    EXPECT_EQ(eta.values(0, c), -1.5);
    EXPECT_NEAR(eta.values(1, c), 0.0, 1e-12);
    EXPECT_NEAR(eta.values(2, c), 0.0, 1e-12);
  }
}

TEST(FastCoords, RejectsSparseSampling) {
  const auto traj = dense_satellite_run(1e-2, 0.05, 20.0, 4);
  EXPECT_THROW(eta_from_trajectory(traj, 1e-2, fixture::satellite_nu(), 1e-2 / 20.0), std::invalid_argument);
  EXPECT_NO_THROW(eta_from_trajectory(traj, 1e-2, fixture::satellite_nu(), 1e-2 / 5.0));
}

// q'_{i nu_i} = -(a_i1 / tau^nu_i)(q_i1 - y_i) exactly, so eta_i1 = p_i1 - q'_{i nu_i} has a closed form.
TEST(FastCoords, FirstEtaMatchesFilterFormula) {
  const double tau = 1e-3;
  double prev = 0.0;
  for (int stride : {8, 4}) {
    const auto traj = dense_satellite_run(tau, 0.05, 160.0, stride);
    const auto eta = eta_from_trajectory(traj, tau, fixture::satellite_nu(), tau / 20.0);
    double err = 0.0;
    for (Eigen::Index c = 0; c < eta.values.cols(); ++c) {
      const auto k = static_cast<Eigen::Index>(eta.first) + c;
      if (traj.times[std::size_t(k)] < 0.01) continue;
      for (int i = 0; i < 2; ++i) {
        const double qdot = -(15.0 / (tau * tau)) * (traj.q(2 * i, k) - traj.y(i, k));
        const double exact = traj.p(2 * i, k) - qdot;
        err = std::max(err, std::abs(eta.values(2 * i, c) - exact));
      }
    }
    if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.8);
    prev = err;
  }
}

TEST(FastCoords, ResidualDecaysQuadratically) {
  const double tau = 1e-3;
  const auto m = fixture::satellite_model();
  const auto params = fixture::satellite_controller(tau);
  double rx[2], re[2];
  for (int level = 0; level < 2; ++level) {
    const auto traj = dense_satellite_run(tau, 0.06, 160.0, 8 >> level);
    const auto r = fast_dynamics_residual(traj, m.plant, m.nominal, params, tau / 20.0);
    rx[level] = r.max_xi(10 * tau, 50 * tau);
    re[level] = r.max_eta(10 * tau, 50 * tau);
  }
  EXPECT_GE(std::log2(rx[0] / rx[1]), 1.8);
  EXPECT_GE(std::log2(re[0] / re[1]), 1.8);
}

TEST(FastCoords, EtaSettlesNearQuasiSteadyState) {
  const double tau = 1e-3;
  const auto m = fixture::satellite_model();
  const auto traj = dense_satellite_run(tau, 0.3, 20.0, 1);
  const auto err = eta_error_series(traj, m.plant, m.nominal, fixture::satellite_controller(tau), tau / 20.0);
  const double early = tail_norm(err.times, err.values, 0.0, 5 * tau);
  const double late = tail_norm(err.times, err.values, 0.2, 0.3);
  EXPECT_LT(late, 1e-3 * early);
  EXPECT_LT(late, 50.0 * tau);
}

TEST(QuasiSteady, ScalarClosedForm) {
  const auto plant = scalar_plant(2.0);
  EXPECT_EQ(quasi_steady_eta(Vec(0), Vec::Zero(1), Vec(0), 0.0, plant, scalar_nominal(1.0, 0.0))(0), 0.0);
  EXPECT_NEAR(quasi_steady_eta(Vec(0), Vec::Zero(1), Vec(0), 0.0, plant, scalar_nominal(1.0, 3.0))(0), -1.5, 1e-15);
}

TEST(QuasiSteady, SatelliteResidualAndCollapse) {
  const auto m = fixture::satellite_model();
  const Vec x = fixture::initial_state();
  const Vec eta = quasi_steady_eta(Vec(0), x, Vec(0), 0.0, m.plant, m.nominal);
  EXPECT_LT(quasi_steady_residual(eta, Vec(0), x, Vec(0), 0.0, m.plant, m.nominal), 1e-10);
  // theta_unknown(0) = 0 but m != m_nominal, so the estimate differs from -F.
  EXPECT_GT((eta + m.plant.F(Vec(0), x)).norm(), 1e-3);

  NormalFormPlant matched = m.plant;
  matched.G = m.nominal.Gbar;
  const Vec collapsed = quasi_steady_eta(Vec(0), x, Vec(0), 0.37, matched, m.nominal);
  EXPECT_EQ(collapsed, -m.plant.F(Vec(0), x));
}

TEST(Sector, TrivialCases) {
  const auto m = fixture::satellite_model();
  const SmoothSaturation Phi{Vec::Constant(2, 100.0), 1.0};
  SectorSample s{Vec(0), fixture::initial_state(), Vec(0), 0.3, Vec::Zero(2)};
  EXPECT_EQ(sector_map(s, m.plant, m.nominal, Phi), Vec::Zero(2));

  NormalFormPlant matched = m.plant;
  matched.G = m.nominal.Gbar;
  s.zeta = Vec{{3.0, -4.0}};
  EXPECT_EQ(sector_map(s, matched, m.nominal, Phi), s.zeta);
  const auto r = sector_check({s}, matched, m.nominal, Phi, 0.2);
  EXPECT_NEAR(r.max_form, -0.04 * 25.0, 1e-12);
  EXPECT_EQ(r.violations, 0u);
}

TEST(Sector, SaturatedSlopeKeepsSector) {
  const auto m = fixture::satellite_model();
  const SmoothSaturation Phi{Vec::Constant(2, 1.0), 0.5};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<SectorSample> samples;
  double mu = 0.0;
  for (int k = 0; k < 500; ++k) {
    SectorSample s{Vec(0), Vec{{0.5 + 0.5 * d(rng), d(rng), d(rng), d(rng)}}, Vec(0), 0.125, Vec{{20.0 * d(rng), 20.0 * d(rng)}}};
    mu = std::max(mu, check_gain_bound(m.plant, m.nominal, s.x, {s.t}).max_norm);
    samples.push_back(s);
  }
  ASSERT_LT(mu, 1.0);
  EXPECT_EQ(sector_check(samples, m.plant, m.nominal, Phi, mu).violations, 0u);
  EXPECT_GT(sector_check(samples, m.plant, m.nominal, Phi, 0.5 * mu, 0.0).violations, 0u);
}

TEST(GainBound, TrivialAndScalar) {
  const auto same = scalar_plant(1.0);
  EXPECT_EQ(check_gain_bound(same, scalar_nominal(1.0, 0.0), Mat::Zero(1, 3), {0.0}).max_norm, 0.0);
  EXPECT_NEAR(check_gain_bound(scalar_plant(1.3), scalar_nominal(1.0, 0.0), Mat::Zero(1, 1), {0.0}).max_norm, 0.3,
              1e-15);
}

TEST(GainBound, RotationOracle) {
  auto p = SatelliteParams::defaults();
  p.m_true = p.m_nominal;
  const auto m = satellite_plant(p, satellite_default_feedback());
  // theta_unknown = (pi/5) sin(4 pi t) peaks at t = 1/8
  const auto r = check_gain_bound(m.plant, m.nominal, Mat::Zero(4, 1), {0.0, 0.125, 0.375});
  EXPECT_NEAR(r.max_norm, 2.0 * std::sin(std::numbers::pi / 10.0), 1e-12);
}

TEST(Metrics, ZeroAndConstant) {
  Trajectory t;
  for (int k = 0; k <= 10; ++k) t.times.push_back(0.1 * k);
  t.x = Mat::Zero(2, 11);
  t.u = Mat::Zero(2, 11);
  auto m = compute_metrics(t, &t, 0.5);
  EXPECT_EQ(m.ultimate_bound, 0.0);
  EXPECT_EQ(*m.recovery_error, 0.0);
  EXPECT_EQ(m.effort_l1, 0.0);
  EXPECT_TRUE(m.settled);

  t.u.row(0).setConstant(3.0);
  t.u.row(1).setConstant(-4.0);
  m = compute_metrics(t, nullptr, 0.5);
  EXPECT_NEAR(m.effort_l1, 5.0, 1e-14);
  EXPECT_NEAR(m.effort_l2, 25.0, 1e-13);
  EXPECT_FALSE(m.recovery_error.has_value());

  Trajectory shifted = t;
  shifted.times[3] += 0.01;
  EXPECT_THROW(compute_metrics(t, &shifted, 0.5), std::invalid_argument);
  Trajectory shorter = t;
  shorter.times.pop_back();
  shorter.x = t.x.leftCols(10);
  EXPECT_THROW(compute_metrics(t, &shorter, 0.5), std::invalid_argument);
}

TEST(Metrics, TailNorm) {
  const std::vector<double> times{0.0, 1.0, 2.0, 3.0};
  const Mat v{{1.0, 0.0, 3.0, 0.5}, {0.0, 2.0, 4.0, 0.0}};
  EXPECT_EQ(tail_norm(times, v, 1.5, 3.0), 5.0);
  EXPECT_EQ(tail_norm(times, v, 2.5, 3.0), 0.5);
  EXPECT_TRUE(std::isnan(tail_norm(times, v, 5.0, 6.0)));
}
