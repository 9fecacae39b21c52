#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dobc {

// Base for failures caused by the numbers rather than by the caller's setup.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A gain matrix (G or Gbar) was singular or ill-conditioned at a queried point.
class SingularGainError : public NumericalError {
 public:
  SingularGainError(const std::string& what_gain, Eigen::VectorXd z, Eigen::VectorXd x, double t);

  const Eigen::VectorXd& z() const { return z_; }
  const Eigen::VectorXd& x() const { return x_; }
  double t() const { return t_; }

 private:
  Eigen::VectorXd z_;
  Eigen::VectorXd x_;
  double t_;
};

// Invalid or inconsistent input configuration. `key` names the offending entry when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, std::string key = {})
      : std::runtime_error(msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace dobc
