#pragma once

#include "dobc/linalg.hpp"

namespace dobc {

// Classical fixed-step Runge-Kutta. `f(t, s, ds)` writes the derivative into ds.
class Rk4 {
 public:
  explicit Rk4(Eigen::Index dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), w_(dim) {}

  template <typename Rhs>
  void step(Rhs&& f, double t, double h, Vec& s) {
    f(t, s, k1_);
    w_ = s + (0.5 * h) * k1_;
    f(t + 0.5 * h, w_, k2_);
    w_ = s + (0.5 * h) * k2_;
    f(t + 0.5 * h, w_, k3_);
    w_ = s + h * k3_;
    f(t + h, w_, k4_);
    s += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  Vec k1_, k2_, k3_, k4_, w_;
};

}  // namespace dobc
