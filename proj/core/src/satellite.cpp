#include "dobc/satellite.hpp"

#include <cmath>

#include "dobc/errors.hpp"

namespace dobc {

double Sinusoid::operator()(double t) const { return amplitude * std::sin(angular_frequency * t); }

SatelliteParams SatelliteParams::defaults() {
  SatelliteParams p;
  p.omega_star = std::sqrt(p.k / (p.r_star * p.r_star * p.r_star));
  return p;
}

void SatelliteParams::validate() const {
  if (!(m_true > 0.0)) throw ConfigError("satellite mass must be positive", "m_true");
  if (!(m_nominal > 0.0)) throw ConfigError("nominal mass must be positive", "m_nominal");
  if (!(r_star > 0.0)) throw ConfigError("orbit radius must be positive", "r_star");
  if (!(k > 0.0)) throw ConfigError("field constant must be positive", "k");
  const double k_orbit = r_star * r_star * r_star * omega_star * omega_star;
  if (std::abs(k_orbit - k) > 1e-12 * std::abs(k)) {
    throw ConfigError("k must equal r_star^3 omega_star^2", "omega_star");
  }
  if (std::abs(theta_unknown.amplitude) > c_theta_bound) {
    throw ConfigError("unknown angle exceeds c_theta_bound", "theta_unknown");
  }
}

Mat rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat R(2, 2);
  R << c, s, -s, c;
  return R;
}

Vec satellite_drift(const SatelliteParams& p, const Vec& x) {
  const double r = x(0) + p.r_star;
  const double omega = x(3) / p.r_star + p.omega_star;
  Vec F(2);
  F(0) = r * omega * omega - p.k / (r * r);
  F(1) = -2.0 * x(1) * p.r_star / r * omega;
  return F;
}

Mat satellite_gain(const SatelliteParams& p, double mass, double theta, const Vec& x, double t) {
  const double r = x(0) + p.r_star;
  if (!(r > 0.0)) throw SingularGainError("satellite gain (x11 + r* <= 0)", Vec(0), x, t);
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1.0 / mass;
  D(1, 1) = p.r_star / (mass * r);
  return D * rotation(theta);
}

SatelliteModel satellite_plant(const SatelliteParams& params, const Mat& K, NominalGainKind kind,
                               double constant_gain_mass) {
  params.validate();
  if (K.rows() != 2 || K.cols() != 4) throw ConfigError("satellite feedback gain must be 2x4", "feedback");
  SatelliteModel out;
  out.K = K;

  NormalFormPlant& plant = out.plant;
  plant.n = 4;
  plant.nu = RelativeDegree({2, 2});
  plant.F = [params](const Vec&, const Vec& x) { return satellite_drift(params, x); };
  plant.G = [params](const Vec&, const Vec& x, double t) {
    return satellite_gain(params, params.m_true, params.theta_known(t) + params.theta_unknown(t), x, t);
  };

  GainFn gbar;
  if (kind == NominalGainKind::Nonlinear) {
    gbar = [params](const Vec&, const Vec& x, double t) {
      return satellite_gain(params, params.m_nominal, params.theta_known(t), x, t);
    };
  } else {
    if (!(constant_gain_mass > 0.0)) throw ConfigError("constant gain mass must be positive", "constant_gain_mass");
    const Mat Gc = Mat::Identity(2, 2) / constant_gain_mass;
    gbar = [Gc](const Vec&, const Vec&, double) { return Gc; };
  }
  out.nominal.Gbar = gbar;
  out.nominal.Ur = [params, gbar, K](const Vec& zbar, const Vec& x, double t) {
    const Vec rhs = -satellite_drift(params, x) - K * x;
    return solve_gain(gbar(zbar, x, t), rhs, "nominal gain Gbar", zbar, x, t);
  };
  return out;
}

GainFn satellite_gain_with_offset(const SatelliteParams& params, double theta_offset) {
  return [params, theta_offset](const Vec&, const Vec& x, double t) {
    return satellite_gain(params, params.m_true, params.theta_known(t) + theta_offset, x, t);
  };
}

Mat satellite_default_feedback() {
  return decoupled_feedback_gain(RelativeDegree({2, 2}),
                                 {{Complex(-1.0), Complex(-3.0)}, {Complex(-3.0), Complex(-5.0)}});
}

}  // namespace dobc
