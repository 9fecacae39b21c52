#include "dobc/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dobc {

SectorDisk::SectorDisk(double mu_) : mu(mu_) {
  if (!(mu >= 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in [0, 1)");
}

double SectorDisk::center() const { return -0.5 * (1.0 / (1.0 - mu) + 1.0 / (1.0 + mu)); }

double SectorDisk::radius() const { return 0.5 * (1.0 / (1.0 - mu) - 1.0 / (1.0 + mu)); }

double SectorDisk::distance(Complex p) const {
  return std::max(0.0, std::abs(p - Complex(center())) - radius());
}

Complex loop_transfer(const Vec& a, Complex s) {
  Complex poly(1.0);
  for (Eigen::Index k = a.size() - 1; k >= 1; --k) poly = poly * s + a(k);
  return a(0) / (s * poly);
}

void FrequencyGrid::validate() const {
  if (!(omega_min > 0.0) || !(omega_max > omega_min)) {
    throw std::invalid_argument("frequency grid needs 0 < omega_min < omega_max");
  }
  if (points < 2) throw std::invalid_argument("frequency grid needs at least two points");
  if (arc_points < 8) throw std::invalid_argument("frequency grid needs at least 8 arc points");
  if (max_refine_depth < 0) throw std::invalid_argument("negative refine depth");
}

std::vector<double> FrequencyGrid::omegas() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(points));
  const double l0 = std::log(omega_min);
  const double l1 = std::log(omega_max);
  for (int k = 0; k < points; ++k) out[std::size_t(k)] = std::exp(l0 + (l1 - l0) * k / (points - 1));
  out.front() = omega_min;
  out.back() = omega_max;
  return out;
}

namespace {

double segment_distance(Complex a, Complex b, Complex c) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((c - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(a + t * ab - c);
}

// Samples a parametric piece of the contour image, bisecting segments that are long
// compared with their distance to the disk.
class CurveSampler {
 public:
  CurveSampler(const SectorDisk& disk, double eps, const FrequencyGrid& grid)
      : center_(disk.center()), radius_(disk.radius()), eps_(eps), grid_(grid) {}

  template <typename Eval>
  void sample(const std::vector<double>& params, Eval&& eval, std::vector<Complex>& out) {
    Complex prev = eval(params.front());
    if (out.empty()) out.push_back(prev);
    for (std::size_t k = 1; k < params.size(); ++k) {
      const Complex next = eval(params[k]);
      if (grid_.refine) bisect(params[k - 1], prev, params[k], next, 0, eval, out);
      out.push_back(next);
      prev = next;
    }
  }

 private:
  double disk_gap(Complex a, Complex b) const {
    return std::max(0.0, segment_distance(a, b, Complex(center_)) - radius_);
  }

  template <typename Eval>
  void bisect(double ua, Complex ha, double ub, Complex hb, int depth, Eval& eval,
              std::vector<Complex>& out) {
    if (depth >= grid_.max_refine_depth) return;
    const double d = disk_gap(ha, hb);
    if (d <= eps_) return;  // already touching: the verdict cannot change
    const double um = 0.5 * (ua + ub);
    const Complex hm = eval(um);
    const double chord = std::abs(hb - ha);
    const double dev = std::abs(hm - 0.5 * (ha + hb));
    if (dev <= 0.25 * d && chord <= 0.5 * (d + radius_)) return;
    bisect(ua, ha, um, hm, depth + 1, eval, out);
    out.push_back(hm);
    bisect(um, hm, ub, hb, depth + 1, eval, out);
  }

  double center_;
  double radius_;
  double eps_;
  const FrequencyGrid& grid_;
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[std::size_t(k)] = a + (b - a) * k / (n - 1);
  return v;
}

double low_frequency_real_limit(const Vec& a) {
  // H(s) = a1 / (s P(s)) ~ a1 / (P(0) s) - a1 P'(0) / P(0)^2
  const Eigen::Index nu = a.size();
  if (nu == 1) return 0.0;
  const double p0 = a(1);
  const double dp0 = nu == 2 ? 1.0 : a(2);
  return -a(0) * dp0 / (p0 * p0);
}

void check_inner_hurwitz(const Vec& a) {
  if (a.size() < 1) throw std::invalid_argument("gain vector is empty");
  if ((a.array() <= 0.0).any()) throw std::invalid_argument("gains must be strictly positive");
  std::vector<double> inner(a.data() + 1, a.data() + a.size());
  if (!inner.empty() && !is_hurwitz_monic(inner)) {
    throw std::invalid_argument("inner polynomial is not Hurwitz");
  }
}

}  // namespace

NyquistResult nyquist_check(const Vec& a, const SectorDisk& disk, const FrequencyGrid& grid,
                            double eps_disk) {
  grid.validate();
  check_inner_hurwitz(a);
  const double eps = eps_disk >= 0.0 ? eps_disk : 1e-6 * std::max(disk.radius(), std::abs(disk.center()));

  CurveSampler sampler(disk, eps, grid);
  const double lmin = std::log(grid.omega_min);
  const double lmax = std::log(grid.omega_max);
  const std::vector<double> log_omegas = linspace(lmin, lmax, grid.points);
  const double half_pi = 0.5 * std::numbers::pi;

  // Clockwise contour: -j omega_max -> -j omega_min, indentation around 0 through +omega_min,
  // +j omega_min -> +j omega_max, closing arc through +omega_max.
  std::vector<Complex> positive;
  sampler.sample(log_omegas, [&](double l) { return loop_transfer(a, Complex(0.0, std::exp(l))); }, positive);

  std::vector<Complex> curve;
  curve.reserve(2 * positive.size() + 4 * static_cast<std::size_t>(grid.arc_points));
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) curve.push_back(std::conj(*it));
  sampler.sample(linspace(-half_pi, half_pi, grid.arc_points),
                 [&](double th) { return loop_transfer(a, std::polar(grid.omega_min, th)); }, curve);
  curve.insert(curve.end(), positive.begin() + 1, positive.end());
  sampler.sample(linspace(half_pi, -half_pi, grid.arc_points),
                 [&](double th) { return loop_transfer(a, std::polar(grid.omega_max, th)); }, curve);

  const Complex c(disk.center());
  double min_gap = std::numeric_limits<double>::infinity();
  double total_angle = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const Complex p0 = curve[k];
    const Complex p1 = curve[(k + 1) % curve.size()];
    const double gap = std::max(0.0, segment_distance(p0, p1, c) - disk.radius());
    min_gap = std::min(min_gap, gap);
    if (gap > eps && std::abs(p1 - p0) > gap + disk.radius()) {
      throw CoarseGridError("Nyquist samples too far apart near the disk (chord " +
                            std::to_string(std::abs(p1 - p0)) + " vs gap " + std::to_string(gap) +
                            "); refine the frequency grid");
    }
    total_angle += std::arg((p1 - c) / (p0 - c));
  }

  NyquistResult r;
  r.min_distance = min_gap;
  r.winding_number = static_cast<int>(std::lround(total_angle / (2.0 * std::numbers::pi)));
  r.low_freq_real_limit = low_frequency_real_limit(a);
  r.curve_points = curve.size();
  r.pass = r.min_distance >= eps && r.min_distance > 0.0 && r.winding_number == 0;
  return r;
}

Vec inner_coeffs_from_roots(const std::vector<Complex>& roots, int nu_i) {
  if (nu_i < 1) throw std::invalid_argument("relative degree must be >= 1");
  if (static_cast<int>(roots.size()) != nu_i - 1) {
    throw std::invalid_argument("need exactly nu_i - 1 roots");
  }
  for (const Complex r : roots) {
    if (!(r.real() < 0.0)) throw std::invalid_argument("inner roots must have negative real parts");
  }
  const auto c = monic_from_roots(roots);
  // c_0..c_{nu-2} are a_i2..a_i nu_i
  Vec out(nu_i - 1);
  for (int k = 0; k < nu_i - 1; ++k) out(k) = c[std::size_t(k)];
  return out;
}

double search_a1(const Vec& a_inner, const SectorDisk& disk, const A1Bracket& bracket,
                 const FrequencyGrid& grid, const A1Search& opts) {
  if (!(bracket.lo > 0.0) || !(bracket.hi >= bracket.lo)) {
    throw std::invalid_argument("a1 bracket must satisfy 0 < lo <= hi");
  }
  Vec a(a_inner.size() + 1);
  a.tail(a_inner.size()) = a_inner;
  auto passes = [&](double a1) {
    a(0) = a1;
    return nyquist_check(a, disk, grid).pass;
  };
  if (!passes(bracket.lo)) {
    throw InfeasibleError("no admissible a1 in [" + std::to_string(bracket.lo) + ", " +
                          std::to_string(bracket.hi) + "] for mu = " + std::to_string(disk.mu));
  }
  double lo = bracket.lo;
  double hi = bracket.hi;
  if (passes(hi)) return hi / opts.safety;
  // Nyquist curve scales linearly with a1, so admissibility is an interval (0, a1_max).
  while (hi / lo - 1.0 > opts.rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (passes(mid)) lo = mid;
    else hi = mid;
  }
  return lo / opts.safety;
}

SprResult spr_check(const Vec& a, double mu, const FrequencyGrid& grid) {
  grid.validate();
  check_inner_hurwitz(a);
  if (!(mu >= 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in [0, 1)");

  // Re{(1 + (1+mu)H) / (1 + (1-mu)H)} = (|1+H|^2 - mu^2 |H|^2) / |1 + (1-mu)H|^2
  auto real_part = [mu](Complex H) {
    return (std::norm(1.0 + H) - mu * mu * std::norm(H)) / std::norm(1.0 + (1.0 - mu) * H);
  };
  SprResult r;
  r.min_real = 1.0;  // omega -> infinity
  r.omega_at_min = std::numeric_limits<double>::infinity();
  const double low_limit = (1.0 + mu) / (1.0 - mu);  // omega -> 0, |H| -> infinity
  if (low_limit < r.min_real) {
    r.min_real = low_limit;
    r.omega_at_min = 0.0;
  }
  for (const double w : grid.omegas()) {
    const double re = real_part(loop_transfer(a, Complex(0.0, w)));
    if (re < r.min_real) {
      r.min_real = re;
      r.omega_at_min = w;
    }
  }
  // s P(s) + (1 - mu) a1
  std::vector<double> closed(static_cast<std::size_t>(a.size()));
  closed[0] = (1.0 - mu) * a(0);
  for (Eigen::Index k = 1; k < a.size(); ++k) closed[std::size_t(k)] = a(k);
  r.stable = is_hurwitz_monic(closed);
  r.pass = r.stable && r.min_real > 0.0;
  return r;
}

void validate_gains(const GainVector& gains, const RelativeDegree& nu) {
  if (static_cast<int>(gains.size()) != nu.channels()) {
    throw std::invalid_argument("need one gain vector per channel");
  }
  for (int i = 0; i < nu.channels(); ++i) {
    const Vec& a = gains[std::size_t(i)];
    const std::string ch = "channel " + std::to_string(i + 1) + ": ";
    if (a.size() != nu[i]) throw std::invalid_argument(ch + "gain vector must have nu_i entries");
    try {
      check_inner_hurwitz(a);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(ch + e.what());
    }
    std::vector<double> full(a.data(), a.data() + a.size());
    if (!is_hurwitz_monic(full)) throw std::invalid_argument(ch + "full polynomial is not Hurwitz");
  }
}

FilterMatrices assemble_filter_matrices(const GainVector& gains, const RelativeDegree& nu, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (static_cast<int>(gains.size()) != nu.channels()) {
    throw std::invalid_argument("need one gain vector per channel");
  }
  const int n = nu.total();
  const int m = nu.channels();
  FilterMatrices f{Mat::Zero(n, n), Mat::Zero(n, m), Mat::Zero(n, m)};
  for (int i = 0; i < m; ++i) {
    const Vec& a = gains[std::size_t(i)];
    const int o = nu.offset(i);
    const int d = nu[i];
    if (a.size() != d) throw std::invalid_argument("gain vector size must match nu_i");
    double tau_pow = 1.0;
    for (int r = 0; r < d; ++r) {
      tau_pow *= tau;
      const double entry = a(d - 1 - r) / tau_pow;  // a_{i, nu-r} / tau^{r+1}
      f.A_atau(o + r, o) = -entry;
      f.Bq_atau(o + r, i) = entry;
      if (r + 1 < d) f.A_atau(o + r, o + r + 1) = 1.0;
    }
    f.Bp_atau(o + d - 1, i) = a(0) / tau_pow;
  }
  return f;
}

Vec ControllerParams::output_injection() const {
  Vec out(nu.channels());
  for (int i = 0; i < nu.channels(); ++i) out(i) = filters.Bp_atau(nu.last(i), i);
  return out;
}

ControllerParams make_controller_params(const RelativeDegree& nu, GainVector gains, double tau,
                                        const Vec& phi_level, const Vec& Phi_level, double sat_margin) {
  validate_gains(gains, nu);
  if (!(sat_margin > 0.0)) throw std::invalid_argument("saturation margin must be positive");
  auto broadcast = [](const Vec& v, int n, const char* what) {
    if (v.size() == 1) return Vec(Vec::Constant(n, v(0)));
    if (v.size() != n) throw std::invalid_argument(std::string(what) + " level has the wrong size");
    return v;
  };
  ControllerParams p;
  p.nu = nu;
  p.tau = tau;
  p.filters = assemble_filter_matrices(gains, nu, tau);
  p.gains = std::move(gains);
  p.phi_level = broadcast(phi_level, nu.total(), "phi");
  p.Phi_level = broadcast(Phi_level, nu.channels(), "Phi");
  if ((p.phi_level.array() <= 0.0).any() || (p.Phi_level.array() <= 0.0).any()) {
    throw std::invalid_argument("saturation levels must be positive");
  }
  p.sat_margin = sat_margin;
  return p;
}

bool SynthesisReport::pass() const {
  return std::all_of(channels.begin(), channels.end(),
                     [](const ChannelReport& c) { return c.nyquist.pass && c.spr.pass; });
}

}  // namespace dobc
