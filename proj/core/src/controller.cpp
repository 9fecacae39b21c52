#include "dobc/controller.hpp"

#include <cmath>

#include "dobc/errors.hpp"

namespace dobc {

double smooth_sat_scalar(double v, double level, double margin) {
  const double mag = std::abs(v);
  if (mag <= level) return v;
  const double out = level + margin * -std::expm1(-(mag - level) / margin);
  return std::copysign(out, v);
}

double smooth_sat_slope(double v, double level, double margin) {
  const double mag = std::abs(v);
  if (mag <= level) return 1.0;
  return std::exp(-(mag - level) / margin);
}

Vec SmoothSaturation::operator()(const Vec& v) const {
  Vec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = smooth_sat_scalar(v(k), level(k), margin);
  return out;
}

Vec SmoothSaturation::slope(const Vec& v) const {
  Vec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = smooth_sat_slope(v(k), level(k), margin);
  return out;
}

bool SmoothSaturation::identity_at(const Vec& v) const { return (v.array().abs() <= level.array()).all(); }

Vec smooth_sat(const Vec& v, const SmoothSaturation& sat) { return sat(v); }

ControllerState ControllerState::zeros(int internal_dim, int nu_total) {
  return {Vec::Zero(internal_dim), Vec::Zero(nu_total), Vec::Zero(nu_total)};
}

ControllerOutput controller_output(const ControllerState& state, const Vec& y, const ControllerParams& params,
                                   const NormalFormPlant& plant, const NominalModel& nominal, double t) {
  const RelativeDegree& nu = params.nu;
  ControllerOutput out;
  out.xq = params.phi()(state.q);

  // C p + B^T B^q (C q - y): p_i1 + (a_i1 / tau^nu_i)(q_i1 - y_i)
  const Vec injection = params.output_injection();
  out.w = chain_output(nu, state.p) + injection.cwiseProduct(chain_output(nu, state.q) - y) +
          plant.F(state.zbar, out.xq);

  const Mat Gbar = nominal.Gbar(state.zbar, out.xq, t);
  out.u = solve_gain(Gbar, params.Phi()(out.w), "nominal gain Gbar", state.zbar, out.xq, t) +
          nominal.Ur(state.zbar, out.xq, t);
  return out;
}

ControllerDerivative controller_rhs(const ControllerState& state, const Vec& y, const Vec& u,
                                    const ControllerParams& params, const NormalFormPlant& plant,
                                    const NominalModel& nominal, double t) {
  const Vec xq = params.phi()(state.q);
  const Mat Gbar = nominal.Gbar(state.zbar, xq, t);
  if (!Gbar.allFinite()) throw SingularGainError("nominal gain Gbar", state.zbar, xq, t);
  const FilterMatrices& f = params.filters;
  ControllerDerivative d;
  d.zbar_dot = plant.zero_dynamics(state.zbar, xq);
  d.q_dot = f.A_atau * state.q + f.Bq_atau * y;
  d.p_dot = f.A_atau * state.p + f.Bp_atau * (Gbar * u);
  return d;
}

}  // namespace dobc
