#include "dobc/plant_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dobc/errors.hpp"

namespace dobc {

namespace {

std::string describe_point(const std::string& what, const Vec& z, const Vec& x, double t) {
  std::ostringstream os;
  os << what << " is singular or ill-conditioned at z=[" << z.transpose() << "] x=["
     << x.transpose() << "] t=" << t;
  return os.str();
}

}  // namespace

SingularGainError::SingularGainError(const std::string& what_gain, Eigen::VectorXd z,
                                     Eigen::VectorXd x, double t)
    : NumericalError(describe_point(what_gain, z, x, t)), z_(std::move(z)), x_(std::move(x)), t_(t) {}

Vec solve_gain(const Mat& M, const Vec& b, const char* what, const Vec& z, const Vec& x, double t) {
  if (M.rows() != M.cols() || M.rows() != b.size() || !M.allFinite()) {
    throw SingularGainError(what, z, x, t);
  }
  Eigen::PartialPivLU<Mat> lu(M);
  if (!(lu.rcond() >= 1.0 / kMaxConditionNumber)) {
    throw SingularGainError(what, z, x, t);
  }
  return lu.solve(b);
}

Mat inverse_gain(const Mat& M, const char* what, const Vec& z, const Vec& x, double t) {
  if (M.rows() != M.cols() || !M.allFinite()) throw SingularGainError(what, z, x, t);
  Eigen::PartialPivLU<Mat> lu(M);
  if (!(lu.rcond() >= 1.0 / kMaxConditionNumber)) throw SingularGainError(what, z, x, t);
  return lu.inverse();
}

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

double condition_number(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  return smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
}

bool all_finite(const Vec& v) { return v.allFinite(); }

std::vector<double> monic_from_roots(std::span<const Complex> roots) {
  // Conjugate closure: every complex root needs a partner.
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const Complex r = roots[i];
    const double scale = std::max(1.0, std::abs(r));
    if (std::abs(r.imag()) <= 1e-12 * scale || used[i]) continue;
    bool found = false;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == i || used[j]) continue;
      if (std::abs(roots[j] - std::conj(r)) <= 1e-9 * scale) {
        used[i] = used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("roots are not closed under conjugation");
  }

  std::vector<Complex> c{Complex(1.0)};  // highest degree first
  for (const Complex r : roots) {
    std::vector<Complex> next(c.size() + 1, Complex(0.0));
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k] += c[k];
      next[k + 1] -= r * c[k];
    }
    c = std::move(next);
  }
  // c = [1, c_{k-1}, ..., c_0]; return ascending c_0..c_{k-1}
  std::vector<double> out(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) out[k] = c[roots.size() - k].real();
  return out;
}

std::vector<Complex> roots_of_monic(std::span<const double> lower_coeffs) {
  const auto k = static_cast<Eigen::Index>(lower_coeffs.size());
  if (k == 0) return {};
  Mat companion = Mat::Zero(k, k);
  for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) companion(i, k - 1) = -lower_coeffs[static_cast<std::size_t>(i)];
  Eigen::EigenSolver<Mat> es(companion, false);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

bool is_hurwitz_monic(std::span<const double> lower_coeffs) {
  const auto roots = roots_of_monic(lower_coeffs);
  return std::all_of(roots.begin(), roots.end(), [](Complex r) { return r.real() < 0.0; });
}

bool Box::contains(const Vec& v) const {
  return v.size() == lo.size() && (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
}

Mat tensor_grid(const Box& box, int points_per_dim) {
  const Eigen::Index dim = box.dim();
  if (box.hi.size() != dim || points_per_dim < 1) throw std::invalid_argument("bad grid box");
  if ((box.hi.array() < box.lo.array()).any()) throw std::invalid_argument("box has hi < lo");
  Eigen::Index total = 1;
  for (Eigen::Index d = 0; d < dim; ++d) total *= points_per_dim;
  Mat pts(dim, total);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index col = 0; col < total; ++col) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double frac = points_per_dim == 1 ? 0.5 : double(idx[std::size_t(d)]) / (points_per_dim - 1);
      pts(d, col) = box.lo(d) + frac * (box.hi(d) - box.lo(d));
    }
    for (Eigen::Index d = 0; d < dim; ++d) {
      if (++idx[std::size_t(d)] < points_per_dim) break;
      idx[std::size_t(d)] = 0;
    }
  }
  return pts;
}

RelativeDegree::RelativeDegree(std::vector<int> degrees) : degrees_(std::move(degrees)) {
  if (degrees_.empty()) throw std::invalid_argument("relative degree needs at least one channel");
  offsets_.reserve(degrees_.size());
  for (int d : degrees_) {
    if (d < 1) throw std::invalid_argument("relative degree entries must be >= 1");
    offsets_.push_back(total_);
    total_ += d;
  }
}

StructuralMatrices build_structural_matrices(const RelativeDegree& nu) {
  const int n = nu.total();
  const int m = nu.channels();
  StructuralMatrices s{Mat::Zero(n, n), Mat::Zero(n, m), Mat::Zero(m, n)};
  for (int i = 0; i < m; ++i) {
    const int o = nu.offset(i);
    for (int j = 0; j + 1 < nu[i]; ++j) s.A(o + j, o + j + 1) = 1.0;
    s.B(nu.last(i), i) = 1.0;
    s.C(i, o) = 1.0;
  }
  return s;
}

Vec chain_rhs(const RelativeDegree& nu, const Vec& x, const Vec& v) {
  Vec out(nu.total());
  for (int i = 0; i < nu.channels(); ++i) {
    const int o = nu.offset(i);
    for (int j = 0; j + 1 < nu[i]; ++j) out(o + j) = x(o + j + 1);
    out(nu.last(i)) = v(i);
  }
  return out;
}

Vec chain_output(const RelativeDegree& nu, const Vec& x) {
  Vec y(nu.channels());
  for (int i = 0; i < nu.channels(); ++i) y(i) = x(nu.offset(i));
  return y;
}

Vec NormalFormPlant::zero_dynamics(const Vec& z, const Vec& x) const {
  if (internal_dim() == 0) return Vec(0);
  return F0(z, x);
}

PlantDerivative plant_rhs(const NormalFormPlant& plant, const Vec& z, const Vec& x, const Vec& u, double t) {
  const Mat G = plant.G(z, x, t);
  if (!G.allFinite()) throw NumericalError("plant gain G evaluated to a non-finite value");
  const Vec v = plant.F(z, x) + G * u;
  if (!v.allFinite()) throw NumericalError("plant drift F evaluated to a non-finite value");
  return {plant.zero_dynamics(z, x), chain_rhs(plant.nu, x, v)};
}

Mat decoupled_feedback_gain(const RelativeDegree& nu, const std::vector<std::vector<Complex>>& poles) {
  if (static_cast<int>(poles.size()) != nu.channels()) {
    throw std::invalid_argument("need one pole list per channel");
  }
  Mat K = Mat::Zero(nu.channels(), nu.total());
  for (int i = 0; i < nu.channels(); ++i) {
    if (static_cast<int>(poles[std::size_t(i)].size()) != nu[i]) {
      throw std::invalid_argument("channel " + std::to_string(i + 1) + " needs nu_i poles");
    }
    const auto c = monic_from_roots(poles[std::size_t(i)]);
    for (int j = 0; j < nu[i]; ++j) K(i, nu.offset(i) + j) = c[std::size_t(j)];
  }
  return K;
}

}  // namespace dobc
