#pragma once

#include "dobc/satellite.hpp"
#include "dobc/synthesis.hpp"

namespace dobc::fixture {

inline RelativeDegree satellite_nu() { return RelativeDegree({2, 2}); }

inline GainVector design_gains() { return {Vec{{15.0, 8.0}}, Vec{{15.0, 8.0}}}; }

inline Vec initial_state() { return Vec{{1.0, -2.0, 0.0, -0.8}}; }

inline ControllerParams satellite_controller(double tau) {
  return make_controller_params(satellite_nu(), design_gains(), tau, Vec::Constant(1, 25.0), Vec::Constant(1, 100.0),
                                1.0);
}

inline SatelliteModel satellite_model(NominalGainKind kind = NominalGainKind::Nonlinear) {
  return satellite_plant(SatelliteParams::defaults(), satellite_default_feedback(), kind, 1.2);
}

}  // namespace dobc::fixture
