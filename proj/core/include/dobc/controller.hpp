#pragma once

#include "dobc/plant_model.hpp"
#include "dobc/synthesis.hpp"

namespace dobc {

struct ControllerState {
  Vec zbar;
  Vec q;
  Vec p;

  static ControllerState zeros(int internal_dim, int nu_total);
};

struct ControllerOutput {
  Vec u;
  Vec w;
  Vec xq;  // phi(q)
};

//   w = C p + B^T B^q_atau (C q - y) + F(zbar, phi(q))
//   u = Gbar^{-1}(zbar, phi(q), t) Phi(w) + U_r(zbar, phi(q), t)
// Throws SingularGainError carrying (zbar, phi(q), t) when Gbar is singular.
ControllerOutput controller_output(const ControllerState& state, const Vec& y,
                                   const ControllerParams& params, const NormalFormPlant& plant,
                                   const NominalModel& nominal, double t);

struct ControllerDerivative {
  Vec zbar_dot;
  Vec q_dot;
  Vec p_dot;
};

// u must be the value controller_output produced for the same (state, y, t).
ControllerDerivative controller_rhs(const ControllerState& state, const Vec& y, const Vec& u,
                                    const ControllerParams& params, const NormalFormPlant& plant,
                                    const NominalModel& nominal, double t);

}  // namespace dobc
