#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dobc/errors.hpp"
#include "dobc/synthesis.hpp"

namespace dobc {

namespace {

double lipschitz_over_grid(const NormalFormPlant& plant, const Mat& grid, int nz) {
  double best = 0.0;
  const int dim = static_cast<int>(grid.rows());
  Mat J(plant.inputs(), dim);
  for (Eigen::Index col = 0; col < grid.cols(); ++col) {
    const Vec v = grid.col(col);
    for (int k = 0; k < dim; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(v(k)));
      Vec plus = v;
      Vec minus = v;
      plus(k) += h;
      minus(k) -= h;
      J.col(k) = (plant.F(plus.head(nz), plus.tail(dim - nz)) - plant.F(minus.head(nz), minus.tail(dim - nz))) /
                 (2.0 * h);
    }
    best = std::max(best, spectral_norm(J));
  }
  return best;
}

}  // namespace

SaturationEstimate estimate_saturation_levels(const NormalFormPlant& plant, const NominalModel& nominal,
                                              const SaturationInputs& in) {
  const int nz = plant.internal_dim();
  const int nx = plant.nu.total();
  if (in.state_box.dim() != nz + nx || in.state_box.hi.size() != nz + nx) {
    throw std::invalid_argument("state box must cover (zbar, x)");
  }
  if (in.uncertainty_samples.empty()) throw std::invalid_argument("need at least one uncertainty sample");
  if (in.time_grid.empty()) throw std::invalid_argument("time grid is empty");
  if (in.grid_points < 1) throw std::invalid_argument("grid_points must be >= 1");
  if (!(in.safety_factor >= 1.0)) throw std::invalid_argument("safety factor must be >= 1");
  if (in.delta_w < 0.0 || in.delta_1 < 0.0 || in.z_bound < 0.0) {
    throw std::invalid_argument("delta_w, delta_1 and z_bound must be non-negative");
  }

  const Mat grid = tensor_grid(in.state_box, in.grid_points);
  Mat zgrid(nz, 1);
  if (nz > 0) {
    zgrid = tensor_grid(Box{Vec::Constant(nz, -in.z_bound), Vec::Constant(nz, in.z_bound)}, in.grid_points);
  }

  SaturationEstimate est;
  est.grid_points = in.grid_points;
  est.safety_factor = in.safety_factor;
  est.argmax_point = Vec::Zero(2 * nz + nx);
  for (Eigen::Index col = 0; col < grid.cols(); ++col) {
    const Vec zbar = grid.col(col).head(nz);
    const Vec x = grid.col(col).tail(nx);
    const Vec F_nom = plant.F(zbar, x);
    for (Eigen::Index zc = 0; zc < zgrid.cols(); ++zc) {
      const Vec z = zgrid.col(zc);
      const Vec F_true = nz > 0 ? plant.F(z, x) : F_nom;
      for (const double t : in.time_grid) {
        const Mat Gbar = nominal.Gbar(zbar, x, t);
        const Vec Ur = nominal.Ur(zbar, x, t);
        for (const GainFn& G_fn : in.uncertainty_samples) {
          const Mat G = G_fn(z, x, t);
          const Vec bracket = F_nom - F_true + (Gbar - G) * Ur;
          const Vec w = Gbar * solve_gain(G, bracket, "uncertain gain G", z, x, t);
          const double norm = w.norm();
          if (!std::isfinite(norm)) {
            std::ostringstream os;
            os << "non-finite w at zbar=[" << zbar.transpose() << "] z=[" << z.transpose() << "] x=["
               << x.transpose() << "] t=" << t;
            throw NumericalError(os.str());
          }
          ++est.grid_size;
          if (norm > est.grid_max_w) {
            est.grid_max_w = norm;
            est.argmax_point << zbar, z, x;
            est.argmax_time = t;
          }
        }
      }
    }
  }

  if (in.lipschitz_F) {
    est.lipschitz_F = *in.lipschitz_F;
  } else {
    est.lipschitz_F = lipschitz_over_grid(plant, grid, nz);
    est.lipschitz_estimated = true;
  }

  est.Phi_level = (est.grid_max_w + in.delta_w + est.lipschitz_F * in.delta_1) * in.safety_factor;
  est.phi_level.resize(nx);
  for (int j = 0; j < nx; ++j) {
    est.phi_level(j) = std::max(std::abs(in.state_box.lo(nz + j)), std::abs(in.state_box.hi(nz + j))) + in.delta_1;
  }
  return est;
}

}  // namespace dobc
