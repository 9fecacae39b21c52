#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dobc/errors.hpp"
#include "dobc/satellite.hpp"
#include "satellite_fixture.hpp"

using namespace dobc;

TEST(RelativeDegree, OffsetsAndTotals) {
  const RelativeDegree nu({2, 3, 1});
  EXPECT_EQ(nu.channels(), 3);
  EXPECT_EQ(nu.total(), 6);
  EXPECT_EQ(nu.offset(0), 0);
  EXPECT_EQ(nu.offset(1), 2);
  EXPECT_EQ(nu.offset(2), 5);
  EXPECT_EQ(nu.last(1), 4);
  EXPECT_THROW(RelativeDegree({2, 0}), std::invalid_argument);
}

TEST(StructuralMatrices, SatelliteBlocks) {
  const auto s = build_structural_matrices(RelativeDegree({2, 2}));
  Mat A = Mat::Zero(4, 4);
  A(0, 1) = 1.0;
  A(2, 3) = 1.0;
  Mat B = Mat::Zero(4, 2);
  B(1, 0) = 1.0;
  B(3, 1) = 1.0;
  Mat C = Mat::Zero(2, 4);
  C(0, 0) = 1.0;
  C(1, 2) = 1.0;
  EXPECT_EQ(s.A, A);
  EXPECT_EQ(s.B, B);
  EXPECT_EQ(s.C, C);
}

TEST(StructuralMatrices, ChainHelpersMatchMatrices) {
  const RelativeDegree nu({3, 1, 2});
  const auto s = build_structural_matrices(nu);
  const Vec x = Vec::LinSpaced(6, -1.0, 2.0);
  const Vec v{{0.5, -2.0, 7.0}};
  EXPECT_EQ(chain_rhs(nu, x, v), s.A * x + s.B * v);
  EXPECT_EQ(chain_output(nu, x), s.C * x);
}

TEST(Polynomials, MonicFromRoots) {
  const std::vector<Complex> real{{-1.0, 0.0}, {-3.0, 0.0}};
  EXPECT_EQ(monic_from_roots(real), (std::vector<double>{3.0, 4.0}));
  const std::vector<Complex> pair{{-1.0, 2.0}, {-1.0, -2.0}};
  const auto c = monic_from_roots(pair);
  EXPECT_DOUBLE_EQ(c[0], 5.0);
  EXPECT_DOUBLE_EQ(c[1], 2.0);
  const std::vector<Complex> lonely{{-1.0, 2.0}};
  EXPECT_THROW(monic_from_roots(lonely), std::invalid_argument);
}

TEST(Polynomials, CompanionRootsAndHurwitz) {
  const std::vector<double> c{15.0, 8.0};
  auto roots = roots_of_monic(c);
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  EXPECT_NEAR(roots[0].real(), -5.0, 1e-9);
  EXPECT_NEAR(roots[1].real(), -3.0, 1e-9);
  EXPECT_TRUE(is_hurwitz_monic(c));
  // s^3 + 3 s^2 + 2 s + 7 violates 3 * 2 > 7
  EXPECT_FALSE(is_hurwitz_monic(std::vector<double>{7.0, 2.0, 3.0}));
  EXPECT_TRUE(is_hurwitz_monic(std::vector<double>{5.0, 2.0, 3.0}));
}

TEST(Linalg, SolveGainRejectsSingular) {
  const Mat M{{1.0, 2.0}, {2.0, 4.0}};
  EXPECT_THROW(solve_gain(M, Vec::Ones(2), "M", Vec(0), Vec::Zero(2), 0.5), SingularGainError);
  try {
    solve_gain(M, Vec::Ones(2), "M", Vec(0), Vec::Ones(2), 0.5);
  } catch (const SingularGainError& e) {
    EXPECT_EQ(e.t(), 0.5);
    EXPECT_EQ(e.x(), Vec::Ones(2));
  }
  const Mat I = Mat::Identity(2, 2) * 2.0;
  EXPECT_EQ(solve_gain(I, Vec::Ones(2), "I", Vec(0), Vec(0), 0.0), Vec::Constant(2, 0.5));
}

TEST(Linalg, SpectralNormOfRotationDifference) {
  for (double th : {0.1, 0.7, std::numbers::pi / 5.0}) {
    EXPECT_NEAR(spectral_norm(Mat::Identity(2, 2) - rotation(th)), 2.0 * std::sin(th / 2.0), 1e-14);
  }
}

TEST(Linalg, TensorGridCoversCorners) {
  const Box box{Vec{{-1.0, 0.0}}, Vec{{1.0, 2.0}}};
  const Mat g = tensor_grid(box, 3);
  EXPECT_EQ(g.cols(), 9);
  EXPECT_EQ(g.rowwise().minCoeff(), box.lo);
  EXPECT_EQ(g.rowwise().maxCoeff(), box.hi);
}

TEST(Feedback, DecoupledPolePlacement) {
  const Mat K = satellite_default_feedback();
  const Mat expected{{3.0, 4.0, 0.0, 0.0}, {0.0, 0.0, 15.0, 8.0}};
  EXPECT_EQ(K, expected);
  const auto s = build_structural_matrices(RelativeDegree({2, 2}));
  Eigen::EigenSolver<Mat> es(s.A - s.B * K);
  std::vector<double> re;
  for (auto e : es.eigenvalues()) {
    EXPECT_NEAR(e.imag(), 0.0, 1e-9);
    re.push_back(e.real());
  }
  std::sort(re.begin(), re.end());
  const std::vector<double> want{-5.0, -3.0, -3.0, -1.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(re[i], want[i], 1e-7);
}

TEST(PlantRhs, RejectsNonFinite) {
  NormalFormPlant p;
  p.n = 1;
  p.nu = RelativeDegree({1});
  p.F = [](const Vec&, const Vec&) { return Vec::Constant(1, std::nan("")); };
  p.G = [](const Vec&, const Vec&, double) { return Mat::Identity(1, 1); };
  EXPECT_THROW(plant_rhs(p, Vec(0), Vec::Zero(1), Vec::Zero(1), 0.0), NumericalError);
}

// Polar-coordinate equations of the point mass, written independently of the normal form:
//   r'' = r w^2 - k / r^2 + u_r / m,   w' = -2 r' w / r + u_t / (m r)
TEST(Satellite, DriftMatchesPolarEquations) {
  const auto p = SatelliteParams::defaults();
  const std::vector<Vec> states{Vec{{1.0, -2.0, 0.0, -0.8}}, Vec{{-0.3, 0.4, 1.2, 0.25}}, Vec{{0.0, 0.0, 0.0, 0.0}}};
  for (const Vec& x : states) {
    const double r = x(0) + p.r_star;
    const double v = x(1);
    const double w = x(3) / p.r_star + p.omega_star;
    const Vec F = satellite_drift(p, x);
    EXPECT_NEAR(F(0), r * w * w - p.k / (r * r), 1e-13);
    EXPECT_NEAR(F(1), p.r_star * (-2.0 * v * w / r), 1e-13);
  }
  EXPECT_NEAR(satellite_drift(p, Vec::Zero(4)).norm(), 0.0, 1e-14);  // circular orbit
}

TEST(Satellite, GainStructure) {
  const auto p = SatelliteParams::defaults();
  const Vec x{{0.5, 0.0, 0.0, 0.0}};
  const double th = 0.3;
  const Mat G = satellite_gain(p, 1.2, th, x, 0.0);
  const double c = std::cos(th), s = std::sin(th);
  const double d2 = p.r_star / (1.2 * (0.5 + p.r_star));
  const Mat want{{c / 1.2, s / 1.2}, {-s * d2, c * d2}};
  EXPECT_LT((G - want).norm(), 1e-15);
  EXPECT_THROW(satellite_gain(p, 1.2, th, Vec{{-p.r_star, 0.0, 0.0, 0.0}}, 0.0), SingularGainError);
}

TEST(Satellite, MismatchIndependentOfKnownAngle) {
  const auto m = fixture::satellite_model();
  const auto p = SatelliteParams::defaults();
  const Vec x{{0.4, -1.0, 0.1, 0.2}};
  for (double t : {0.0, 0.13, 0.37, 0.9}) {
    const Mat E = m.plant.G(Vec(0), x, t) * m.nominal.Gbar(Vec(0), x, t).inverse();
    const Mat D = Vec{{1.0, p.r_star / (x(0) + p.r_star)}}.asDiagonal();
    const Mat want = (p.m_nominal / p.m_true) * D * rotation(p.theta_unknown(t)) * D.inverse();
    EXPECT_LT((E - want).norm(), 1e-13);
  }
}

TEST(Satellite, ReferenceControlCancelsDrift) {
  const auto m = fixture::satellite_model();
  const Vec x{{1.0, -2.0, 0.0, -0.8}};
  const double t = 0.21;
  const Vec Ur = m.nominal.Ur(Vec(0), x, t);
  const Vec lhs = m.plant.F(Vec(0), x) + m.nominal.Gbar(Vec(0), x, t) * Ur;
  EXPECT_LT((lhs + m.K * x).norm(), 1e-12);
}

TEST(Satellite, ValidateRejectsInconsistentParameters) {
  auto p = SatelliteParams::defaults();
  EXPECT_NO_THROW(p.validate());
  p.omega_star *= 1.01;
  EXPECT_THROW(p.validate(), ConfigError);
  p = SatelliteParams::defaults();
  p.theta_unknown.amplitude = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = SatelliteParams::defaults();
  p.m_true = 0.0;
  try {
    p.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "m_true");
  }
}
