#pragma once

#include <numbers>

#include "dobc/plant_model.hpp"

namespace dobc {

// amplitude * sin(angular_frequency * t)
struct Sinusoid {
  double amplitude = 0.0;
  double angular_frequency = 0.0;

  double operator()(double t) const;
  bool operator==(const Sinusoid&) const = default;
};

// Planar point-mass satellite around the circular orbit r = r_star, psi = omega_star t.
// Thrust direction is rotated by theta(t) = theta_known(t) + theta_unknown(t).
struct SatelliteParams {
  double m_true = 1.2;
  double m_nominal = 1.0;
  double k = 5.0;
  double r_star = 1.5;
  double omega_star = 0.0;  // sqrt(k / r_star^3) for the default parameters
  Sinusoid theta_known{std::numbers::pi / 2.0, std::numbers::pi};
  Sinusoid theta_unknown{std::numbers::pi / 5.0, 4.0 * std::numbers::pi};
  double c_theta_bound = std::numbers::pi / 5.0;

  static SatelliteParams defaults();

  // Checks positivity, k = r_star^3 omega_star^2 (rel. tol 1e-12) and
  // |theta_unknown| <= c_theta_bound. Throws ConfigError.
  void validate() const;

  bool operator==(const SatelliteParams&) const = default;
};

// [cos th, sin th; -sin th, cos th]
Mat rotation(double theta);

// F(x) of the satellite in normal-form coordinates
//   x11 = r - r*, x12 = v, x21 = r*(psi - omega* t), x22 = r*(omega - omega*).
Vec satellite_drift(const SatelliteParams& p, const Vec& x);

// diag(1/mass, r*/(mass (x11 + r*))) R(theta). Throws SingularGainError when x11 + r* <= 0.
Mat satellite_gain(const SatelliteParams& p, double mass, double theta, const Vec& x, double t);

enum class NominalGainKind {
  Nonlinear,  // diag(1/m_nominal, r*/(m_nominal (x11 + r*))) R(theta_known)
  Constant,   // diag(1/m_c, 1/m_c)
};

struct SatelliteModel {
  NormalFormPlant plant;
  NominalModel nominal;
  Mat K;  // U_r = Gbar^{-1}(-F - K x)
};

// Builds the true plant (mass m_true, angle theta_known + theta_unknown) and the nominal model.
// `constant_gain_mass` is only used for NominalGainKind::Constant.
SatelliteModel satellite_plant(const SatelliteParams& params, const Mat& K,
                               NominalGainKind kind = NominalGainKind::Nonlinear,
                               double constant_gain_mass = 1.2);

// Plant gain with the unknown angle frozen at `theta_offset` (for worst-case sampling).
GainFn satellite_gain_with_offset(const SatelliteParams& params, double theta_offset);

// Feedback gain placing A - B K at (s+1)(s+3) on the radial channel and (s+3)(s+5) on the
// angular channel.
Mat satellite_default_feedback();

}  // namespace dobc
