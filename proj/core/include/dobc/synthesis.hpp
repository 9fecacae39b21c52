#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dobc/plant_model.hpp"
#include "dobc/saturation.hpp"

namespace dobc {

// Per channel a_i = [a_i1; a_i2; ...; a_i nu_i], all strictly positive.
using GainVector = std::vector<Vec>;

// Closed disk D(1 - mu, 1 + mu): the segment [-1/(1-mu), -1/(1+mu)] is a diameter.
struct SectorDisk {
  double mu = 0.0;

  explicit SectorDisk(double mu_);
  double center() const;
  double radius() const;
  // Distance from p to the disk, zero inside.
  double distance(Complex p) const;
};

// H_i(s) = a_i1 / (s (s^{nu_i-1} + a_i nu_i s^{nu_i-2} + ... + a_i2))
Complex loop_transfer(const Vec& a, Complex s);

struct FrequencyGrid {
  double omega_min = 1e-4;
  double omega_max = 1e4;
  int points = 10000;
  // Bisect segments whose chord is long compared to their distance from the disk.
  bool refine = true;
  int max_refine_depth = 24;
  int arc_points = 256;

  void validate() const;
  std::vector<double> omegas() const;
  bool operator==(const FrequencyGrid&) const = default;
};

struct NyquistResult {
  bool pass = false;
  double min_distance = 0.0;  // curve to disk, 0 if they intersect
  int winding_number = 0;     // closed contour image about the disk center
  // omega -> 0+ limit of Re H(j omega); the branch runs off to -j infinity along it.
  double low_freq_real_limit = 0.0;
  std::size_t curve_points = 0;
};

// Thrown when the sampled curve is too sparse near the disk to decide.
class CoarseGridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Disk criterion on the closed Nyquist contour (indented around s = 0 with radius
// omega_min, closed at radius omega_max). Passes iff min_distance >= eps_disk and the
// winding number about the disk center is zero. eps_disk < 0 selects the default
// 1e-6 * max(radius, |center|).
NyquistResult nyquist_check(const Vec& a, const SectorDisk& disk, const FrequencyGrid& grid,
                            double eps_disk = -1.0);

// Real coefficients [a_i2, ..., a_i nu_i] from nu_i - 1 roots of the inner polynomial.
// Throws std::invalid_argument for wrong count, unstable or non-conjugate-closed roots.
Vec inner_coeffs_from_roots(const std::vector<Complex>& roots, int nu_i);

struct A1Bracket {
  double lo = 1e-6;
  double hi = 1000.0;
  bool operator==(const A1Bracket&) const = default;
};

struct A1Search {
  double rel_tol = 1e-6;
  // Returned value is the bisection boundary divided by this factor.
  double safety = 1.0;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Largest a_i1 in the bracket passing nyquist_check (bisection). Throws InfeasibleError
// when the lower end already fails.
double search_a1(const Vec& a_inner, const SectorDisk& disk, const A1Bracket& bracket,
                 const FrequencyGrid& grid, const A1Search& opts = {});

struct SprResult {
  bool pass = false;
  // min over the grid (and the omega -> 0, infinity limits) of
  // Re{[1 + (1+mu) H] / [1 + (1-mu) H]}
  double min_real = 0.0;
  double omega_at_min = 0.0;
  // s (s^{nu-1} + ...) + (1 - mu) a_i1 is Hurwitz
  bool stable = false;
};

SprResult spr_check(const Vec& a, double mu, const FrequencyGrid& grid);

struct FilterMatrices {
  Mat A_atau;
  Mat Bq_atau;
  Mat Bp_atau;
};

FilterMatrices assemble_filter_matrices(const GainVector& gains, const RelativeDegree& nu, double tau);

// Checks sizes, positivity and both Hurwitz conditions. Throws std::invalid_argument.
void validate_gains(const GainVector& gains, const RelativeDegree& nu);

struct ControllerParams {
  RelativeDegree nu;
  GainVector gains;
  double tau = 1e-3;
  FilterMatrices filters;
  Vec phi_level;  // size nu.total()
  Vec Phi_level;  // size m
  double sat_margin = 1.0;

  SmoothSaturation phi() const { return {phi_level, sat_margin}; }
  SmoothSaturation Phi() const { return {Phi_level, sat_margin}; }
  // Diagonal entries a_i1 / tau^{nu_i} of B^T B^q_atau.
  Vec output_injection() const;
};

// Validates and assembles. Scalar levels are broadcast to every component.
ControllerParams make_controller_params(const RelativeDegree& nu, GainVector gains, double tau,
                                        const Vec& phi_level, const Vec& Phi_level,
                                        double sat_margin);

// ---------------------------------------------------------------------------
// Saturation levels
// ---------------------------------------------------------------------------

struct SaturationInputs {
  Box state_box;              // over (zbar, x), dim n
  double z_bound = 0.0;       // l_z: plant z sampled on [-l_z, l_z]^{n-nu}
  std::vector<GainFn> uncertainty_samples;
  std::vector<double> time_grid{0.0};
  double delta_w = 0.1;
  double delta_1 = 0.1;
  std::optional<double> lipschitz_F;  // estimated over the box when absent
  int grid_points = 11;
  double safety_factor = 1.25;
};

struct SaturationEstimate {
  double Phi_level = 0.0;
  Vec phi_level;
  double grid_max_w = 0.0;    // max ||w|| before the omega-tilde term
  Vec argmax_point;           // [zbar; z; x] of the maximum
  double argmax_time = 0.0;
  double lipschitz_F = 0.0;
  bool lipschitz_estimated = false;
  std::size_t grid_size = 0;
  int grid_points = 0;
  double safety_factor = 1.0;
};

SaturationEstimate estimate_saturation_levels(const NormalFormPlant& plant, const NominalModel& nominal,
                                              const SaturationInputs& in);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct ChannelReport {
  int channel = 0;  // 1-based
  Vec gains;        // chosen a_i
  std::optional<double> a1_max;
  NyquistResult nyquist;
  SprResult spr;
};

struct SynthesisReport {
  double mu = 0.0;
  FrequencyGrid grid;
  std::vector<ChannelReport> channels;
  std::optional<SaturationEstimate> saturation;

  bool pass() const;
};

// Key/value text, one "key = value" per line, '#' comments. Schema documented in README.
std::string to_text(const SynthesisReport& report);
SynthesisReport parse_synthesis_report(const std::string& text);

}  // namespace dobc
