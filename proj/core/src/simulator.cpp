#include "dobc/simulator.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include "dobc/analysis.hpp"
#include "dobc/errors.hpp"
#include "dobc/rk4.hpp"

namespace dobc {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::BlowUp: return "blow-up";
    case RunStatus::SingularGain: return "singular-gain";
  }
  return "unknown";
}

void SimConfig::validate() const {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be finite and >= 0", "t_end");
  if (!(step > 0.0)) throw ConfigError("step must be positive", "step");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive", "tau");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1", "record_stride");
  if (!allow_coarse_step && step > tau / 20.0 * (1.0 + 1e-12)) {
    throw ConfigError("step must not exceed tau / 20 (set allow_coarse_step to override)", "step");
  }
  if (!(blowup_bound > 0.0)) throw ConfigError("blowup_bound must be positive", "blowup_bound");
}

long long SimConfig::steps() const {
  const double ratio = t_end / step;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<long long>(nearest);
  return static_cast<long long>(std::floor(ratio));
}

namespace {

Vec or_zeros(const Vec& v, Eigen::Index n, const char* key) {
  if (v.size() == 0) return Vec::Zero(n);
  if (v.size() != n) throw ConfigError(std::string(key) + " has the wrong dimension", key);
  return v;
}

void allocate(Trajectory& tr, long long samples, int nz, int nx, int m, bool closed_loop) {
  const auto n = static_cast<Eigen::Index>(samples);
  tr.times.reserve(static_cast<std::size_t>(samples));
  tr.z.resize(nz, n);
  tr.x.resize(nx, n);
  tr.y.resize(m, n);
  tr.u.resize(m, n);
  const int c = closed_loop ? 1 : 0;
  tr.zbar.resize(nz * c, n);
  tr.q.resize(nx * c, n);
  tr.p.resize(nx * c, n);
  tr.w.resize(m * c, n);
}

void truncate(Trajectory& tr) {
  const auto n = static_cast<Eigen::Index>(tr.times.size());
  for (Mat* M : {&tr.z, &tr.x, &tr.zbar, &tr.q, &tr.p, &tr.y, &tr.u, &tr.w}) {
    M->conservativeResize(Eigen::NoChange, n);
  }
}

// Runs the fixed-step loop. `record(k, t, s)` stores sample k; `f` is the RK4 right-hand side.
template <typename Rhs, typename Record>
void integrate(const SimConfig& cfg, Vec& s, Trajectory& tr, Rhs&& f, Record&& record) {
  Rk4 rk(s.size());
  const long long steps = cfg.steps();
  long long sample = 0;
  try {
    record(sample++, 0.0, s);
    for (long long k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * cfg.step;
      rk.step(f, t, cfg.step, s);
      const double norm = s.norm();
      if (!std::isfinite(norm) || norm > cfg.blowup_bound) {
        tr.status = RunStatus::BlowUp;
        tr.message = "state norm " + std::to_string(norm) + " exceeded the blow-up bound at t=" +
                     std::to_string(t + cfg.step);
        break;
      }
      if ((k + 1) % cfg.record_stride == 0) {
        record(sample++, static_cast<double>(k + 1) * cfg.step, s);
      }
    }
  } catch (const SingularGainError& e) {
    tr.status = RunStatus::SingularGain;
    tr.message = e.what();
  } catch (const NumericalError& e) {
    tr.status = RunStatus::BlowUp;
    tr.message = e.what();
  }
  truncate(tr);
}

}  // namespace

Trajectory simulate_closed_loop(const NormalFormPlant& plant, const NominalModel& nominal,
                                const ControllerParams& params, const SimConfig& cfg) {
  cfg.validate();
  const int nz = plant.internal_dim();
  const int nx = plant.nu.total();
  const int m = plant.inputs();
  if (!(params.nu == plant.nu)) throw ConfigError("controller and plant relative degrees differ", "controller");
  if (std::abs(params.tau - cfg.tau) > 1e-15 * cfg.tau) {
    throw ConfigError("controller tau and simulation tau differ", "tau");
  }

  Vec s(2 * nz + 3 * nx);
  s << or_zeros(cfg.z0, nz, "z0"), or_zeros(cfg.x0, nx, "x0"), or_zeros(cfg.zbar0, nz, "zbar0"),
      or_zeros(cfg.q0, nx, "q0"), or_zeros(cfg.p0, nx, "p0");

  Trajectory tr;
  tr.tau = cfg.tau;
  tr.step = cfg.step;
  tr.record_stride = cfg.record_stride;
  allocate(tr, cfg.samples(), nz, nx, m, true);

  ControllerState cs{Vec(nz), Vec(nx), Vec(nx)};
  auto unpack = [&](const Vec& st) {
    cs.zbar = st.segment(nz + nx, nz);
    cs.q = st.segment(2 * nz + nx, nx);
    cs.p = st.segment(2 * nz + 2 * nx, nx);
  };

  auto f = [&](double t, const Vec& st, Vec& ds) {
    const Vec z = st.head(nz);
    const Vec x = st.segment(nz, nx);
    unpack(st);
    const Vec y = chain_output(plant.nu, x);
    const ControllerOutput out = controller_output(cs, y, params, plant, nominal, t);
    const PlantDerivative pd = plant_rhs(plant, z, x, out.u, t);
    const ControllerDerivative cd = controller_rhs(cs, y, out.u, params, plant, nominal, t);
    ds << pd.zdot, pd.xdot, cd.zbar_dot, cd.q_dot, cd.p_dot;
  };

  auto record = [&](long long k, double t, const Vec& st) {
    const Vec x = st.segment(nz, nx);
    unpack(st);
    const Vec y = chain_output(plant.nu, x);
    const ControllerOutput out = controller_output(cs, y, params, plant, nominal, t);
    const auto c = static_cast<Eigen::Index>(k);
    tr.times.push_back(t);
    tr.z.col(c) = st.head(nz);
    tr.x.col(c) = x;
    tr.zbar.col(c) = cs.zbar;
    tr.q.col(c) = cs.q;
    tr.p.col(c) = cs.p;
    tr.y.col(c) = y;
    tr.u.col(c) = out.u;
    tr.w.col(c) = out.w;
  };

  integrate(cfg, s, tr, f, record);
  return tr;
}

Trajectory simulate_nominal(const NormalFormPlant& plant, const NominalModel& nominal, const SimConfig& cfg) {
  cfg.validate();
  const int nz = plant.internal_dim();
  const int nx = plant.nu.total();
  Vec s(nz + nx);
  s << or_zeros(cfg.z0, nz, "z0"), or_zeros(cfg.x0, nx, "x0");

  Trajectory tr;
  tr.tau = cfg.tau;
  tr.step = cfg.step;
  tr.record_stride = cfg.record_stride;
  allocate(tr, cfg.samples(), nz, nx, plant.inputs(), false);

  auto f = [&](double t, const Vec& st, Vec& ds) {
    const Vec z = st.head(nz);
    const Vec x = st.tail(nx);
    const Vec ur = nominal.Ur(z, x, t);
    const Vec v = plant.F(z, x) + nominal.Gbar(z, x, t) * ur;
    if (!v.allFinite()) throw NumericalError("nominal loop evaluated to a non-finite value");
    ds << plant.zero_dynamics(z, x), chain_rhs(plant.nu, x, v);
  };
  auto record = [&](long long k, double t, const Vec& st) {
    const auto c = static_cast<Eigen::Index>(k);
    const Vec z = st.head(nz);
    const Vec x = st.tail(nx);
    tr.times.push_back(t);
    tr.z.col(c) = z;
    tr.x.col(c) = x;
    tr.y.col(c) = chain_output(plant.nu, x);
    tr.u.col(c) = nominal.Ur(z, x, t);
  };
  integrate(cfg, s, tr, f, record);
  return tr;
}

SweepReport sweep_tau(const NormalFormPlant& plant, const NominalModel& nominal, const ControllerParams& base_params,
                      const SimConfig& base, const std::vector<double>& taus, const SweepOptions& opts) {
  if (taus.empty()) throw ConfigError("tau list is empty", "taus");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0)) throw ConfigError("tau values must be positive", "taus");
    if (i > 0 && !(taus[i] < taus[i - 1])) throw ConfigError("tau values must be strictly descending", "taus");
  }
  if (!(opts.step_divisor >= 1.0)) throw ConfigError("step divisor must be >= 1", "step_divisor");

  auto run_one = [&](double tau) {
    SweepEntry e;
    e.tau = tau;
    const auto start = std::chrono::steady_clock::now();
    try {
      SimConfig cfg = base;
      cfg.tau = tau;
      cfg.step = tau / opts.step_divisor;
      if (opts.step_divisor < 20.0) cfg.allow_coarse_step = true;
      const ControllerParams params = make_controller_params(base_params.nu, base_params.gains, tau,
                                                             base_params.phi_level, base_params.Phi_level,
                                                             base_params.sat_margin);
      const Trajectory tr = simulate_closed_loop(plant, nominal, params, cfg);
      const Trajectory nom = simulate_nominal(plant, nominal, cfg);
      e.status = tr.status;
      e.message = tr.message;
      const double t_ss = opts.tail_fraction * cfg.t_end;
      const Metrics mt = compute_metrics(tr, tr.completed() && nom.completed() ? &nom : nullptr, t_ss);
      e.ultimate_bound = tr.completed() ? mt.ultimate_bound : std::numeric_limits<double>::infinity();
      e.recovery_error = mt.recovery_error.value_or(std::numeric_limits<double>::infinity());
      e.effort_l1 = mt.effort_l1;
      e.effort_l2 = mt.effort_l2;
      e.xi_tail = std::numeric_limits<double>::quiet_NaN();
      e.eta_error_tail = std::numeric_limits<double>::quiet_NaN();
      if (opts.fast_tails && tr.completed() && cfg.record_stride == 1) {
        const FastSeries xi = xi_series(tr, tau, params.nu);
        e.xi_tail = tail_norm(xi.times, xi.values, t_ss, cfg.t_end);
        const FastSeries eta_err = eta_error_series(tr, plant, nominal, params, tau);
        e.eta_error_tail = tail_norm(eta_err.times, eta_err.values, t_ss, cfg.t_end);
      }
    } catch (const std::exception& ex) {
      e.status = RunStatus::BlowUp;
      e.message = ex.what();
      e.ultimate_bound = e.recovery_error = std::numeric_limits<double>::infinity();
    }
    e.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return e;
  };

  SweepReport report;
  if (opts.parallel && taus.size() > 1) {
    std::vector<std::future<SweepEntry>> futures;
    futures.reserve(taus.size());
    for (const double tau : taus) futures.push_back(std::async(std::launch::async, run_one, tau));
    for (auto& fut : futures) report.entries.push_back(fut.get());
  } else {
    for (const double tau : taus) report.entries.push_back(run_one(tau));
  }
  return report;
}

}  // namespace dobc
