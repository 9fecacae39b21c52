#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dobc/linalg.hpp"

namespace dobc {

// Vector relative degree {nu_1, ..., nu_m}; every entry >= 1.
class RelativeDegree {
 public:
  RelativeDegree() = default;
  explicit RelativeDegree(std::vector<int> degrees);

  int channels() const { return static_cast<int>(degrees_.size()); }
  int total() const { return total_; }
  int operator[](int i) const { return degrees_[static_cast<std::size_t>(i)]; }
  // Index of x_{i1} inside the stacked x vector.
  int offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
  // Index of x_{i nu_i}.
  int last(int i) const { return offset(i) + (*this)[i] - 1; }
  std::span<const int> degrees() const { return degrees_; }

  bool operator==(const RelativeDegree& other) const { return degrees_ == other.degrees_; }

 private:
  std::vector<int> degrees_;
  std::vector<int> offsets_;
  int total_ = 0;
};

// Block-diagonal integrator-chain matrices A (nu x nu), B (nu x m), C (m x nu).
struct StructuralMatrices {
  Mat A;
  Mat B;
  Mat C;
};

StructuralMatrices build_structural_matrices(const RelativeDegree& nu);

// A x + B v evaluated through the chain structure: shifts each block up and adds v_i to its
// last entry.
Vec chain_rhs(const RelativeDegree& nu, const Vec& x, const Vec& v);

// C x: the first entry of every block.
Vec chain_output(const RelativeDegree& nu, const Vec& x);

// Evaluators. All of them must be pure; models are shared across concurrent runs.
using DriftFn = std::function<Vec(const Vec& z, const Vec& x)>;
using GainFn = std::function<Mat(const Vec& z, const Vec& x, double t)>;
using FeedbackFn = std::function<Vec(const Vec& zbar, const Vec& x, double t)>;

// z' = F0(z, x);  x' = A x + B (F(z, x) + G(z, x, t) u);  y = C x.
struct NormalFormPlant {
  int n = 0;
  RelativeDegree nu;
  DriftFn F0;  // may be empty when n == nu.total()
  DriftFn F;
  GainFn G;

  int internal_dim() const { return n - nu.total(); }
  int inputs() const { return nu.channels(); }
  Vec zero_dynamics(const Vec& z, const Vec& x) const;
};

// Nominal gain and stabilizing state feedback. F0 and F are the plant's.
struct NominalModel {
  GainFn Gbar;
  FeedbackFn Ur;
};

struct PlantDerivative {
  Vec zdot;
  Vec xdot;
};

// Throws NumericalError if G or F evaluate to non-finite values.
PlantDerivative plant_rhs(const NormalFormPlant& plant, const Vec& z, const Vec& x, const Vec& u, double t);

// Decoupled pole placement for the chain structure: row i of K holds the coefficients
// c_0..c_{nu_i-1} of prod (s - p) over the poles of channel i, so that A - B K has exactly
// those poles.
Mat decoupled_feedback_gain(const RelativeDegree& nu, const std::vector<std::vector<Complex>>& poles);

}  // namespace dobc
