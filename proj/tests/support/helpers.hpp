// Shared test utilities: deterministic randomness and finite differences.
#pragma once

#include <Eigen/Core>
#include <functional>
#include <random>

#include "fgnav/lie.hpp"
#include "fgnav/types.hpp"

namespace fgnav::testing {

inline std::mt19937 make_rng(unsigned seed) { return std::mt19937(seed); }

inline Eigen::Vector3d random_vector3(std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng), n(rng)};
}

inline Rotation random_rotation(std::mt19937& rng, double max_angle = 3.0) {
  std::uniform_real_distribution<double> u(-max_angle, max_angle);
  Eigen::Vector3d axis = random_vector3(rng);
  if (axis.norm() < 1e-12) axis = Eigen::Vector3d::UnitX();
  axis.normalize();
  return so3_exp(axis * u(rng));
}

inline NavState random_nav_state(std::mt19937& rng) {
  NavState x;
  x.R = random_rotation(rng);
  x.p = random_vector3(rng, 10.0);
  x.v = random_vector3(rng, 3.0);
  x.bias.accel = random_vector3(rng, 0.05);
  x.bias.gyro = random_vector3(rng, 0.005);
  return x;
}

/// Central-difference Jacobian of f: R^n -> R^m evaluated at the origin.
inline Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, int n,
    double h = 1e-6) {
  const Eigen::VectorXd r0 = f(Eigen::VectorXd::Zero(n));
  Eigen::MatrixXd J(r0.size(), n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(n);
    dp(i) = h;
    const Eigen::VectorXd rp = f(dp);
    dp(i) = -h;
    const Eigen::VectorXd rm = f(dp);
    J.col(i) = (rp - rm) / (2.0 * h);
  }
  return J;
}

}  // namespace fgnav::testing
