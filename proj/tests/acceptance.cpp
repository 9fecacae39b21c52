#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dobc/analysis.hpp"
#include "dobc/format.hpp"
#include "dobc/linalg.hpp"
#include "dobc_cli/commands.hpp"
#include "satellite_fixture.hpp"

using namespace dobc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) { return format_double(v); }

SimConfig closed_loop_config(double tau, double t_end, int stride) {
  SimConfig c;
  c.t_end = t_end;
  c.tau = tau;
  c.step = tau / 20.0;
  c.record_stride = stride;
  c.x0 = fixture::initial_state();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dobc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

}  // namespace

int main() {
  const auto model = fixture::satellite_model();
  const auto constant_model = fixture::satellite_model(NominalGainKind::Constant);
  const auto& plant = model.plant;
  const auto& nominal = model.nominal;

  report(1, "nominal convergence", [&] {
    SimConfig c;
    c.t_end = 10.0;
    c.step = 1e-3;
    c.tau = 1.0;
    c.record_stride = 10;
    c.x0 = fixture::initial_state();
    const auto traj = simulate_nominal(plant, nominal, c);
    const auto s = build_structural_matrices(fixture::satellite_nu());
    const Mat Acl = s.A - s.B * model.K;
    double err = 0.0;
    for (std::size_t k = 0; k < traj.samples(); ++k) {
      const Mat E = (Acl * traj.times[k]).exp();
      err = std::max(err, (traj.x.col(static_cast<Eigen::Index>(k)) - E * c.x0).norm());
    }
    const double ratio = traj.x.col(traj.x.cols() - 1).norm() / c.x0.norm();
    return Outcome{traj.completed() && ratio <= 0.01 && err < 1e-6,
                   "|x(10)|/|x(0)| = " + fmt(ratio) + ", expm error = " + fmt(err)};
  });

  report(2, "gain design", [&] {
    const cli::RunSpec spec;
    const auto syn = cli::run_synthesis(spec);
    bool ok = syn.channels.size() == 2;
    std::string detail;
    for (const auto& ch : syn.channels) {
      ok = ok && ch.gains.isApprox(Vec{{15.0, 8.0}}) && ch.nyquist.pass && ch.spr.pass && ch.spr.min_real > 0.0;
      detail += "channel " + std::to_string(ch.channel) + " spr margin " + fmt(ch.spr.min_real) + "; ";
    }
    const std::vector<double> coeffs{15.0, 8.0};
    auto roots = roots_of_monic(coeffs);
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
    const double root_err = std::max(std::abs(roots[0] - Complex(-5.0, 0.0)), std::abs(roots[1] - Complex(-3.0, 0.0)));
    ok = ok && root_err < 1e-9;
    return Outcome{ok, detail + "root error " + fmt(root_err)};
  });

  cli::RunSpec verify_spec;
  verify_spec.verify.quasi_steady_samples = 100;
  verify_spec.verify.sector_samples = 10000;
  std::optional<cli::VerifyReport> verify;
  try {
    verify = cli::run_verify(verify_spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "verify failed: %s\n", e.what());
  }

  report(3, "quasi-steady residual", [&] {
    if (!verify) return Outcome{false, "verify did not run"};
    const auto& v = *verify;
    return Outcome{v.quasi_steady_samples == 100 && v.quasi_steady_max < 1e-10 && v.quasi_steady_collapse_max <= 1e-12,
                   "max residual " + fmt(v.quasi_steady_max) + " over " + std::to_string(v.quasi_steady_samples) +
                       " states, collapse error " + fmt(v.quasi_steady_collapse_max)};
  });

  report(4, "sector condition", [&] {
    if (!verify) return Outcome{false, "verify did not run"};
    const auto& v = *verify;
    return Outcome{v.sector_samples == 10000 && v.sector.max_form <= 1e-12 && v.sector.violations == 0,
                   "measured mu " + fmt(v.sector_mu) + ", max form " + fmt(v.sector.max_form) + " over " +
                       std::to_string(v.sector_samples) + " samples"};
  });

  report(5, "fast-dynamics residual order", [&] {
    if (!verify) return Outcome{false, "verify did not run"};
    const auto& v = *verify;
    return Outcome{v.fast_enabled && v.xi_order >= 1.8 && v.eta_order >= 1.8,
                   "xi order " + fmt(v.xi_order) + ", eta order " + fmt(v.eta_order) + " (residuals " +
                       fmt(v.xi_residual[0]) + " -> " + fmt(v.xi_residual[1]) + ", " + fmt(v.eta_residual[0]) +
                       " -> " + fmt(v.eta_residual[1]) + ")"};
  });

  const double tau = 1e-3;
  const auto params = fixture::satellite_controller(tau);
  const SimConfig full = closed_loop_config(tau, 20.0, 4);
  Trajectory nonlinear_run;

  report(6, "practical stability", [&] {
    nonlinear_run = simulate_closed_loop(plant, nominal, params, full);
    if (!nonlinear_run.completed()) return Outcome{false, nonlinear_run.message};
    const auto m = compute_metrics(nonlinear_run, nullptr, 14.0);
    return Outcome{m.ultimate_bound <= 0.05, "sup |x| over [14, 20] = " + fmt(m.ultimate_bound)};
  });

  report(7, "performance recovery", [&] {
    SimConfig base = closed_loop_config(0.1, 20.0, 1);
    const auto sweep = sweep_tau(plant, nominal, fixture::satellite_controller(0.1), base, {0.1, 0.01, 0.001});
    const auto& e = sweep.entries;
    bool ok = e.size() == 3;
    std::string detail;
    for (const auto& s : e) {
      ok = ok && s.status == RunStatus::Completed;
      detail += "tau " + fmt(s.tau) + ": recovery " + fmt(s.recovery_error) + ", xi tail " + fmt(s.xi_tail) +
                ", eta tail " + fmt(s.eta_error_tail) + "; ";
    }
    if (!ok) return Outcome{false, detail};
    const double c_xi = e[0].xi_tail / e[0].tau;
    const double c_eta = e[0].eta_error_tail / e[0].tau;
    for (std::size_t k = 1; k < e.size(); ++k) {
      ok = ok && e[k].recovery_error <= e[k - 1].recovery_error;
      ok = ok && e[k].xi_tail <= c_xi * e[k].tau && e[k].eta_error_tail <= c_eta * e[k].tau;
    }
    return Outcome{ok, detail + "C_xi " + fmt(c_xi) + ", C_eta " + fmt(c_eta)};
  });

  report(8, "control effort", [&] {
    const Trajectory constant_run = simulate_closed_loop(constant_model.plant, constant_model.nominal, params, full);
    if (!nonlinear_run.completed() || !constant_run.completed()) return Outcome{false, "run did not complete"};
    const double e_nl = compute_metrics(nonlinear_run, nullptr, 14.0).effort_l1;
    const double e_c = compute_metrics(constant_run, nullptr, 14.0).effort_l1;
    return Outcome{e_nl < e_c, "nonlinear " + fmt(e_nl) + " < constant " + fmt(e_c)};
  });

  report(9, "gain-bound audit", [&] {
    if (!verify) return Outcome{false, "verify did not run"};
    const auto& v = *verify;
    const bool flagged = v.to_text().find("gain_bound.status = FLAGGED") != std::string::npos;
    return Outcome{v.gain_bound.max_norm >= 0.61 && v.gain_bound_flagged && flagged,
                   "measured " + fmt(v.gain_bound.max_norm) + " vs design mu " + fmt(v.mu_design) +
                       (flagged ? ", flagged" : ", not flagged")};
  });

  report(10, "determinism and RK4 order", [&] {
    const fs::path dir = fs::temp_directory_path() / "dobc_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    cli::RunSpec spec;
    spec.simulation.t_end = 2.0;
    spec.controller.tau = 0.01;
    {
      std::ofstream(dir / "spec.json", std::ios::binary) << cli::to_json(spec);
    }
    const std::string cfg = (dir / "spec.json").string();
    const int c1 = run_cli({"simulate", "--config", cfg, "--out", (dir / "a").string(), "--quiet"});
    const int c2 = run_cli({"simulate", "--config", cfg, "--out", (dir / "b").string(), "--quiet"});
    const std::string a = slurp(dir / "a" / "trajectory.csv");
    const bool identical = c1 == 0 && c2 == 0 && !a.empty() && a == slurp(dir / "b" / "trajectory.csv");
    fs::remove_all(dir);

    const double t = 0.1;
    const auto p = fixture::satellite_controller(t);
    SimConfig c = closed_loop_config(t, 2.0, 1);
    c.q0 = c.x0;
    auto final_state = [&](double h) {
      SimConfig cc = c;
      cc.step = h;
      cc.record_stride = static_cast<int>(std::lround(c.t_end / h));
      const auto traj = simulate_closed_loop(plant, nominal, p, cc);
      Vec s(12);
      s << traj.x.col(1), traj.q.col(1), traj.p.col(1);
      return s;
    };
    const double h = t / 20.0;
    const Vec s1 = final_state(h);
    const Vec s2 = final_state(h / 2.0);
    const Vec s3 = final_state(h / 4.0);
    const double order = std::log2((s1 - s2).norm() / (s2 - s3).norm());
    return Outcome{identical && order >= 3.3 && order <= 4.5,
                   std::string(identical ? "CSVs identical" : "CSVs differ") + ", self-convergence order " + fmt(order)};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
