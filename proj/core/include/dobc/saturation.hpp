#pragma once

#include "dobc/linalg.hpp"

namespace dobc {

// Componentwise C^1 saturation:
//   s(v) = v                                         for |v| <= L
//   s(v) = sign(v) (L + margin (1 - exp(-(|v| - L) / margin)))   otherwise.
// Identity on the box |v_c| <= L_c, bounded by L_c + margin, slope in (0, 1].
struct SmoothSaturation {
  Vec level;
  double margin = 1.0;

  Vec operator()(const Vec& v) const;
  // Diagonal of the Jacobian at v.
  Vec slope(const Vec& v) const;
  bool identity_at(const Vec& v) const;
};

double smooth_sat_scalar(double v, double level, double margin);
double smooth_sat_slope(double v, double level, double margin);

Vec smooth_sat(const Vec& v, const SmoothSaturation& sat);

}  // namespace dobc
