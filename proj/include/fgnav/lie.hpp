// SO(3) rotation algebra: exponential/logarithm maps, right Jacobians and the
// skew operator. Rotations are stored as unit quaternions and renormalized on
// every composition; the public contract is rotation-matrix semantics.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

namespace fgnav {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  // clang-format off
  s <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return s;
}

class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}

  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) {}

  // Matrix constructor goes through quaternion extraction, which pivots on
  // the largest diagonal entry and is stable for angles near pi.
  explicit Rotation(const Eigen::Matrix3d& m) : q_(m) { q_.normalize(); }

  static Rotation Identity() { return Rotation(); }

  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }

  Rotation inverse() const { return Rotation(q_.conjugate()); }

  Rotation operator*(const Rotation& rhs) const {
    return Rotation(q_ * rhs.q_);
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }

 private:
  Eigen::Quaterniond q_;
};

/// exp([omega]x) via unit quaternion; second-order Taylor below 1e-8 rad.
inline Rotation so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  double half_scale;  // sin(theta/2)/theta
  double w;           // cos(theta/2)
  if (theta < 1e-8) {
    half_scale = 0.5 - theta * theta / 48.0;
    w = 1.0 - theta * theta / 8.0;
  } else {
    half_scale = std::sin(0.5 * theta) / theta;
    w = std::cos(0.5 * theta);
  }
  const Eigen::Vector3d xyz = half_scale * omega;
  return Rotation(Eigen::Quaterniond(w, xyz.x(), xyz.y(), xyz.z()));
}

// Principal axis-angle with norm in [0, pi]. At exactly pi the axis sign is
// ambiguous; the convention here makes the first nonzero component positive.
inline Eigen::Vector3d so3_log(const Rotation& R) {
  Eigen::Quaterniond q = R.quaternion();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  Eigen::Vector3d xyz = q.vec();
  const double n = xyz.norm();
  const double w = q.w();
  if (n < 1e-9) {
    // theta/n expanded around zero: 2/w * (1 - n^2/(3 w^2))
    return xyz * (2.0 / w) * (1.0 - n * n / (3.0 * w * w));
  }
  if (w < 1e-9) {
    // Half-turn boundary: pin the axis sign deterministically.
    for (int i = 0; i < 3; ++i) {
      if (std::abs(xyz[i]) > 1e-12) {
        if (xyz[i] < 0) xyz = -xyz;
        break;
      }
    }
    return (2.0 * std::atan2(n, w) / n) * xyz;
  }
  return (2.0 * std::atan2(n, w) / n) * xyz;
}

/// Right Jacobian Jr(omega) of SO(3); Taylor fallback below 1e-6 rad.
inline Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& omega) {
  const double theta2 = omega.squaredNorm();
  const Eigen::Matrix3d W = skew(omega);
  if (theta2 < 1e-12) {
    return Eigen::Matrix3d::Identity() - 0.5 * W + (1.0 / 6.0) * W * W;
  }
  const double theta = std::sqrt(theta2);
  const double a = (1.0 - std::cos(theta)) / theta2;
  const double b = (theta - std::sin(theta)) / (theta2 * theta);
  return Eigen::Matrix3d::Identity() - a * W + b * W * W;
}

/// Inverse of the right Jacobian; Taylor fallback below 1e-6 rad.
inline Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& omega) {
  const double theta2 = omega.squaredNorm();
  const Eigen::Matrix3d W = skew(omega);
  if (theta2 < 1e-12) {
    return Eigen::Matrix3d::Identity() + 0.5 * W + (1.0 / 12.0) * W * W;
  }
  const double theta = std::sqrt(theta2);
  const double c =
      1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Eigen::Matrix3d::Identity() + 0.5 * W + c * W * W;
}

}  // namespace fgnav
