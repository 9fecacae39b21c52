#include "dobc_cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "dobc/errors.hpp"
#include "dobc/format.hpp"

namespace dobc::cli {

namespace fs = std::filesystem;

namespace {

Vec to_vec(const Doubles& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  if (n == 1) return {a};
  for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * k / (n - 1));
  return out;
}

void require_satellite(const RunSpec& spec, const char* command) {
  if (spec.plant.kind != "satellite") {
    throw ConfigError(std::string(command) + " needs plant.kind = \"satellite\"", "plant.kind");
  }
}

fs::path output_path(const RunSpec& spec, const std::string& name) {
  const fs::path dir(spec.output.dir);
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  fn(os);
}

void kv(std::ostream& os, const std::string& key, const std::string& value) { os << key << " = " << value << '\n'; }
void kv(std::ostream& os, const std::string& key, double value) { kv(os, key, format_double(value)); }
void kv_bool(std::ostream& os, const std::string& key, bool value) { kv(os, key, value ? "true" : "false"); }

void say(const CommandContext& ctx, const std::string& line) {
  if (!ctx.quiet && ctx.log != nullptr) *ctx.log << line << '\n';
}

Vec sample_box(std::mt19937_64& rng, const Doubles& lo, const Doubles& hi) {
  Vec v(static_cast<Eigen::Index>(lo.size()));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    std::uniform_real_distribution<double> d(lo[i], hi[i]);
    v(static_cast<Eigen::Index>(i)) = lo[i] == hi[i] ? lo[i] : d(rng);
  }
  return v;
}

}  // namespace

RunSpec apply_overrides(RunSpec spec, const Overrides& o) {
  if (o.out_dir) spec.output.dir = *o.out_dir;
  if (o.seed) spec.seed = *o.seed;
  if (o.tau) spec.controller.tau = *o.tau;
  validate(spec);
  return spec;
}

SatelliteModel build_satellite(const RunSpec& spec, NominalGainKind kind) {
  require_satellite(spec, "this command");
  std::vector<std::vector<Complex>> poles;
  for (const auto& ch : spec.plant.feedback_poles) {
    std::vector<Complex> c;
    for (double p : ch) c.emplace_back(p, 0.0);
    poles.push_back(std::move(c));
  }
  const Mat K = decoupled_feedback_gain(RelativeDegree(spec.controller.nu), poles);
  return satellite_plant(spec.plant.satellite, K, kind, spec.plant.constant_gain_mass);
}

SatelliteModel build_satellite(const RunSpec& spec) {
  return build_satellite(spec, spec.plant.nominal_gain == "constant" ? NominalGainKind::Constant
                                                                     : NominalGainKind::Nonlinear);
}

SynthesisReport run_synthesis(const RunSpec& spec) {
  const auto& syn = spec.synthesis;
  const SectorDisk disk(syn.mu);
  SynthesisReport report;
  report.mu = syn.mu;
  report.grid = syn.grid;
  for (std::size_t i = 0; i < spec.controller.nu.size(); ++i) {
    const int nu_i = spec.controller.nu[i];
    const std::string name = "channel " + std::to_string(i + 1);
    Vec inner;
    std::optional<double> a1_given;
    if (spec.controller.gains) {
      const Vec g = to_vec((*spec.controller.gains)[i]);
      if (g.size() != nu_i) throw ConfigError(name + ": expected " + std::to_string(nu_i) + " gains", "controller.gains");
      inner = g.tail(nu_i - 1);
      a1_given = g(0);
    } else {
      std::vector<Complex> roots;
      for (const auto& r : syn.inner_roots[i]) roots.emplace_back(r[0], r[1]);
      try {
        inner = inner_coeffs_from_roots(roots, nu_i);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(name + ": " + e.what(), "synthesis.inner_roots");
      }
    }

    ChannelReport ch;
    ch.channel = static_cast<int>(i) + 1;
    try {
      ch.a1_max = search_a1(inner, disk, syn.a1_bracket, syn.grid, {syn.rel_tol, syn.safety});
    } catch (const InfeasibleError& e) {
      if (!a1_given) throw InfeasibleError(name + ": " + e.what());
    }
    ch.gains.resize(nu_i);
    ch.gains(0) = a1_given ? *a1_given : *ch.a1_max;
    ch.gains.tail(nu_i - 1) = inner;
    ch.nyquist = nyquist_check(ch.gains, disk, syn.grid);
    ch.spr = spr_check(ch.gains, syn.mu, syn.grid);
    report.channels.push_back(std::move(ch));
  }

  if (spec.plant.kind == "satellite" && syn.saturation.enabled) {
    const auto model = build_satellite(spec);
    const auto& sat = syn.saturation;
    SaturationInputs in;
    in.state_box = Box{to_vec(sat.box_lo), to_vec(sat.box_hi)};
    in.z_bound = sat.z_bound;
    const double c = spec.plant.satellite.c_theta_bound;
    for (double th : {-c, 0.0, c}) in.uncertainty_samples.push_back(satellite_gain_with_offset(spec.plant.satellite, th));
    in.time_grid = linspace(0.0, sat.time_end, sat.time_points);
    in.delta_w = sat.delta_w;
    in.delta_1 = sat.delta_1;
    in.lipschitz_F = sat.lipschitz_F;
    in.grid_points = sat.grid_points;
    in.safety_factor = sat.safety_factor;
    report.saturation = estimate_saturation_levels(model.plant, model.nominal, in);
  }
  return report;
}

ControllerParams controller_params(const RunSpec& spec, double tau) {
  GainVector gains;
  if (spec.controller.gains) {
    for (const auto& g : *spec.controller.gains) gains.push_back(to_vec(g));
  } else {
    for (const auto& ch : run_synthesis(spec).channels) gains.push_back(ch.gains);
  }
  try {
    return make_controller_params(RelativeDegree(spec.controller.nu), std::move(gains), tau,
                                  to_vec(spec.controller.phi_level), to_vec(spec.controller.Phi_level),
                                  spec.controller.sat_margin);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("controller: ") + e.what(), "controller");
  }
}

SimConfig sim_config(const RunSpec& spec, double tau) {
  const auto& s = spec.simulation;
  SimConfig cfg;
  cfg.t_end = s.t_end;
  cfg.tau = tau;
  cfg.step = s.step ? *s.step : tau / 20.0;
  cfg.record_stride = s.record_stride;
  cfg.x0 = to_vec(s.x0);
  cfg.z0 = to_vec(s.z0);
  cfg.zbar0 = to_vec(s.zbar0);
  cfg.q0 = to_vec(s.q0);
  cfg.p0 = to_vec(s.p0);
  cfg.allow_coarse_step = s.allow_coarse_step;
  cfg.blowup_bound = s.blowup_bound;
  cfg.validate();
  return cfg;
}

double steady_state_start(const RunSpec& spec) {
  return spec.simulation.t_ss ? *spec.simulation.t_ss : 0.7 * spec.simulation.t_end;
}

bool VerifyReport::pass() const {
  const bool mu_ok = mu_mode != "enforce" || !gain_bound_flagged;
  return mu_ok && quasi_steady_pass && sector_pass && fast_pass;
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  os << "# verification report\n";
  kv(os, "mu.design", mu_design);
  kv(os, "mu.measured", gain_bound.max_norm);
  kv(os, "mu.mode", mu_mode);
  kv(os, "mu.argmax.x", format_vector(gain_bound.x));
  kv(os, "mu.argmax.t", gain_bound.t);
  kv(os, "gain_bound.status", gain_bound_flagged ? "FLAGGED" : "ok");
  if (gain_bound_flagged) {
    kv(os, "gain_bound.note", "measured ||I - G Gbar^-1|| exceeds the design mu");
  }
  kv(os, "quasi_steady.samples", std::to_string(quasi_steady_samples));
  kv(os, "quasi_steady.max_residual", quasi_steady_max);
  kv(os, "quasi_steady.collapse_max_error", quasi_steady_collapse_max);
  kv(os, "quasi_steady.tolerance", quasi_steady_tolerance);
  kv_bool(os, "quasi_steady.pass", quasi_steady_pass);
  kv(os, "sector.samples", std::to_string(sector_samples));
  kv(os, "sector.mu", sector_mu);
  kv(os, "sector.max_form", sector.max_form);
  kv(os, "sector.violations", std::to_string(sector.violations));
  kv_bool(os, "sector.pass", sector_pass);
  kv_bool(os, "fast.enabled", fast_enabled);
  if (fast_enabled) {
    kv(os, "fast.spacing", fast_spacing);
    kv(os, "fast.xi_residual", format_double(xi_residual[0]) + " " + format_double(xi_residual[1]));
    kv(os, "fast.eta_residual", format_double(eta_residual[0]) + " " + format_double(eta_residual[1]));
    kv(os, "fast.xi_order", xi_order);
    kv(os, "fast.eta_order", eta_order);
    kv(os, "fast.min_order", fast_min_order);
    kv_bool(os, "fast.pass", fast_pass);
  }
  kv_bool(os, "pass", pass());
  return os.str();
}

VerifyReport run_verify(const RunSpec& spec) {
  require_satellite(spec, "verify");
  const auto& v = spec.verify;
  const auto model = build_satellite(spec);
  const auto& plant = model.plant;
  const auto& nominal = model.nominal;
  const Vec none(0);
  const std::vector<double> times = linspace(0.0, v.time_end, v.time_points);

  VerifyReport r;
  r.mu_design = spec.synthesis.mu;
  r.mu_mode = v.mu_mode;
  r.gain_bound = check_gain_bound(plant, nominal, tensor_grid(Box{to_vec(v.box_lo), to_vec(v.box_hi)}, v.gain_grid_points), times);
  r.gain_bound_flagged = r.gain_bound.max_norm > r.mu_design;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> time_dist(0.0, v.time_end);

  NormalFormPlant matched = plant;
  matched.G = nominal.Gbar;
  r.quasi_steady_samples = v.quasi_steady_samples;
  r.quasi_steady_tolerance = v.quasi_steady_tolerance;
  for (int k = 0; k < v.quasi_steady_samples; ++k) {
    const Vec x = sample_box(rng, v.box_lo, v.box_hi);
    const double t = v.time_end > 0.0 ? time_dist(rng) : 0.0;
    const Vec eta = quasi_steady_eta(none, x, none, t, plant, nominal);
    r.quasi_steady_max = std::max(r.quasi_steady_max, quasi_steady_residual(eta, none, x, none, t, plant, nominal));
    const Vec collapse = quasi_steady_eta(none, x, none, t, matched, nominal) + plant.F(none, x);
    r.quasi_steady_collapse_max = std::max(r.quasi_steady_collapse_max, collapse.lpNorm<Eigen::Infinity>());
  }
  r.quasi_steady_pass = r.quasi_steady_max < v.quasi_steady_tolerance && r.quasi_steady_collapse_max <= 1e-12;

  const auto params = controller_params(spec, spec.controller.tau);
  const SmoothSaturation Phi = params.Phi();
  std::uniform_int_distribution<std::size_t> time_index(0, times.size() - 1);
  std::vector<SectorSample> samples;
  samples.reserve(static_cast<std::size_t>(v.sector_samples));
  for (int k = 0; k < v.sector_samples; ++k) {
    SectorSample s;
    s.z = none;
    s.zbar = none;
    s.x = sample_box(rng, v.box_lo, v.box_hi);
    s.t = times[time_index(rng)];
    s.zeta.resize(Phi.level.size());
    for (Eigen::Index i = 0; i < s.zeta.size(); ++i) {
      std::uniform_real_distribution<double> d(-Phi.level(i), Phi.level(i));
      s.zeta(i) = d(rng);
    }
    r.sector_mu = std::max(r.sector_mu, check_gain_bound(plant, nominal, s.x, {s.t}).max_norm);
    samples.push_back(std::move(s));
  }
  r.sector_samples = v.sector_samples;
  if (r.sector_mu < 1.0) {
    r.sector = sector_check(samples, plant, nominal, Phi, r.sector_mu, v.sector_slack);
    r.sector_pass = r.sector.violations == 0;
  } else {
    r.sector.max_form = std::numeric_limits<double>::infinity();
    r.sector.violations = samples.size();
    r.sector_pass = false;
  }

  const auto& f = v.fast_residual;
  r.fast_enabled = f.enabled;
  if (f.enabled) {
    const double tau = spec.controller.tau;
    SimConfig cfg = sim_config(spec, tau);
    cfg.step = tau / f.step_divisor;
    cfg.t_end = std::max(f.t_end, 1.2 * f.window_end * tau);
    const int coarse = static_cast<int>(std::lround(f.step_divisor / f.spacing_divisor));
    r.fast_spacing = tau / f.spacing_divisor;
    r.fast_min_order = f.min_order;
    for (int level = 0; level < 2; ++level) {
      cfg.record_stride = coarse >> level;
      const Trajectory traj = simulate_closed_loop(plant, nominal, params, cfg);
      if (!traj.completed()) throw NumericalError("fast-residual run failed: " + traj.message);
      const auto res = fast_dynamics_residual(traj, plant, nominal, params, r.fast_spacing);
      r.xi_residual[level] = res.max_xi(f.window_start * tau, f.window_end * tau);
      r.eta_residual[level] = res.max_eta(f.window_start * tau, f.window_end * tau);
    }
    r.xi_order = std::log2(r.xi_residual[0] / r.xi_residual[1]);
    r.eta_order = std::log2(r.eta_residual[0] / r.eta_residual[1]);
    r.fast_pass = r.xi_order >= f.min_order && r.eta_order >= f.min_order;
  }
  return r;
}

int cmd_synthesize(const CommandContext& ctx) {
  const SynthesisReport report = run_synthesis(ctx.spec);
  const auto path = output_path(ctx.spec, ctx.spec.output.synthesis);
  write_text(path, to_text(report));
  for (const auto& ch : report.channels) {
    say(ctx, "channel " + std::to_string(ch.channel) + ": gains " + format_vector(ch.gains) + ", nyquist " +
                 (ch.nyquist.pass ? "pass" : "fail") + ", spr margin " + format_double(ch.spr.min_real));
  }
  say(ctx, "wrote " + path.string());
  return report.pass() ? kOk : kVerificationFailure;
}

namespace {

void write_metrics(const fs::path& path, const std::string& command, const Trajectory& traj, const Metrics& m,
                   double t_ss) {
  std::ostringstream os;
  kv(os, "command", command);
  kv(os, "status", to_string(traj.status));
  if (!traj.message.empty()) kv(os, "message", traj.message);
  kv(os, "tau", traj.tau);
  kv(os, "step", traj.step);
  kv(os, "record_stride", std::to_string(traj.record_stride));
  kv(os, "samples", std::to_string(traj.samples()));
  kv(os, "t_ss", t_ss);
  kv(os, "ultimate_bound", m.ultimate_bound);
  if (m.recovery_error) kv(os, "recovery_error", *m.recovery_error);
  kv(os, "effort_l1", m.effort_l1);
  kv(os, "effort_l2", m.effort_l2);
  kv_bool(os, "settled", m.settled);
  write_text(path, os.str());
}

}  // namespace

int cmd_simulate(const CommandContext& ctx) {
  const auto& spec = ctx.spec;
  const auto model = build_satellite(spec);
  const auto params = controller_params(spec, spec.controller.tau);
  const SimConfig cfg = sim_config(spec, spec.controller.tau);
  const Trajectory traj = simulate_closed_loop(model.plant, model.nominal, params, cfg);
  const Trajectory ref = simulate_nominal(model.plant, model.nominal, cfg);
  const double t_ss = steady_state_start(spec);
  const bool aligned = traj.completed() && ref.completed();
  const Metrics m = compute_metrics(traj, aligned ? &ref : nullptr, t_ss, spec.simulation.settle_tolerance);

  const auto csv = output_path(spec, spec.output.trajectory);
  write_with(csv, [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  const auto metrics = output_path(spec, spec.output.metrics);
  write_metrics(metrics, "simulate", traj, m, t_ss);
  say(ctx, "simulate: " + std::string(to_string(traj.status)) + ", ultimate bound " + format_double(m.ultimate_bound) +
               ", effort " + format_double(m.effort_l1));
  say(ctx, "wrote " + csv.string() + " and " + metrics.string());
  if (!traj.completed()) {
    say(ctx, "simulate: " + traj.message);
    return kNumericalFailure;
  }
  return kOk;
}

int cmd_nominal(const CommandContext& ctx) {
  // No fast dynamics in the nominal loop, so the tau-relative step guard does not apply.
  RunSpec spec = ctx.spec;
  spec.simulation.allow_coarse_step = true;
  const auto model = build_satellite(spec);
  const SimConfig cfg = sim_config(spec, spec.controller.tau);
  const Trajectory traj = simulate_nominal(model.plant, model.nominal, cfg);
  const double t_ss = steady_state_start(spec);
  const Metrics m = compute_metrics(traj, nullptr, t_ss, spec.simulation.settle_tolerance);
  const auto csv = output_path(spec, spec.output.nominal);
  write_with(csv, [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  const auto metrics = output_path(spec, spec.output.metrics);
  write_metrics(metrics, "nominal", traj, m, t_ss);
  say(ctx, "nominal: " + std::string(to_string(traj.status)) + ", ultimate bound " + format_double(m.ultimate_bound));
  say(ctx, "wrote " + csv.string() + " and " + metrics.string());
  return traj.completed() ? kOk : kNumericalFailure;
}

int cmd_sweep(const CommandContext& ctx) {
  const auto& spec = ctx.spec;
  const auto model = build_satellite(spec);
  const auto params = controller_params(spec, spec.sweep.taus.front());
  SimConfig base = sim_config(spec, spec.sweep.taus.front());
  if (spec.sweep.fast_tails) base.record_stride = 1;
  SweepOptions opts;
  opts.step_divisor = spec.sweep.step_divisor;
  opts.tail_fraction = spec.sweep.tail_fraction;
  opts.fast_tails = spec.sweep.fast_tails;
  opts.parallel = spec.sweep.parallel;
  const SweepReport report = sweep_tau(model.plant, model.nominal, params, base, spec.sweep.taus, opts);
  const auto csv = output_path(spec, spec.output.sweep);
  write_with(csv, [&](std::ostream& os) { write_sweep_csv(os, report); });
  bool ok = true;
  for (const auto& e : report.entries) {
    say(ctx, "tau " + format_double(e.tau) + ": " + to_string(e.status) + ", recovery error " +
                 format_double(e.recovery_error) + ", ultimate bound " + format_double(e.ultimate_bound));
    ok = ok && e.status == RunStatus::Completed;
  }
  say(ctx, "wrote " + csv.string());
  return ok ? kOk : kNumericalFailure;
}

int cmd_verify(const CommandContext& ctx) {
  const VerifyReport r = run_verify(ctx.spec);
  const auto path = output_path(ctx.spec, ctx.spec.output.verify);
  write_text(path, r.to_text());
  if (r.gain_bound_flagged) {
    say(ctx, "verify: FLAGGED measured gain bound " + format_double(r.gain_bound.max_norm) + " exceeds design mu " +
                 format_double(r.mu_design));
  }
  say(ctx, std::string("verify: ") + (r.pass() ? "pass" : "FAIL") + ", wrote " + path.string());
  return r.pass() ? kOk : kVerificationFailure;
}

}  // namespace dobc::cli
