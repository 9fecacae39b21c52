#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dobc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;

// Gain matrices whose estimated condition number exceeds this are treated as singular.
inline constexpr double kMaxConditionNumber = 1e12;

// Solves M v = b. Throws SingularGainError (tagged with `what`, z, x, t) when M is
// not square, non-finite, or its 1-norm reciprocal condition estimate is below
// 1/kMaxConditionNumber.
Vec solve_gain(const Mat& M, const Vec& b, const char* what, const Vec& z, const Vec& x, double t);

// M^{-1} under the same guard as solve_gain.
Mat inverse_gain(const Mat& M, const char* what, const Vec& z, const Vec& x, double t);

// Spectral (induced 2-) norm.
double spectral_norm(const Mat& M);

// Exact 2-norm condition number via SVD; +inf for singular input.
double condition_number(const Mat& M);

bool all_finite(const Vec& v);

// Coefficients c_0..c_{k-1} of the monic polynomial prod (s - r) = s^k + c_{k-1} s^{k-1} + ... + c_0.
// The roots must be closed under conjugation; throws std::invalid_argument otherwise.
std::vector<double> monic_from_roots(std::span<const Complex> roots);

// Roots of s^k + c_{k-1} s^{k-1} + ... + c_0 from companion-matrix eigenvalues.
std::vector<Complex> roots_of_monic(std::span<const double> lower_coeffs);

// True iff every root of the monic polynomial has strictly negative real part.
bool is_hurwitz_monic(std::span<const double> lower_coeffs);

// Tensor-product grid over an axis-aligned box; columns are points.
struct Box {
  Vec lo;
  Vec hi;
  Eigen::Index dim() const { return lo.size(); }
  bool contains(const Vec& v) const;
};

Mat tensor_grid(const Box& box, int points_per_dim);

}  // namespace dobc
