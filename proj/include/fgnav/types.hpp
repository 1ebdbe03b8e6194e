// Core domain types shared by every module: sensor samples, biases, noise
// parameters, the per-epoch navigation state and its manifold retraction.
//
// Local-coordinate convention used by every Jacobian in this library:
// the 15-vector delta of an epoch is ordered
//   [dtheta(0:3), dp(3:6), dv(6:9), dba(9:12), dbg(12:15)]
// with the rotation perturbed multiplicatively on the right (body frame) and
// all vector parts additive.

#pragma once

#include <Eigen/Core>
#include <cmath>

#include "fgnav/lie.hpp"

namespace fgnav {

using Vector15 = Eigen::Matrix<double, 15, 1>;
using Matrix15 = Eigen::Matrix<double, 15, 15>;

struct ImuSample {
  double t = 0.0;                              // seconds, GPST
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // specific force, m/s^2
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // angular rate, rad/s
};

struct ImuBias {
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // m/s^2
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // rad/s

  Eigen::Matrix<double, 6, 1> vector() const {
    Eigen::Matrix<double, 6, 1> b;
    b << accel, gyro;
    return b;
  }
};

struct ImuNoiseParams {
  double accel_noise_density = 2e-3;  // m/s^2/sqrt(Hz)
  double gyro_noise_density = 2e-4;   // rad/s/sqrt(Hz)
  double accel_bias_rw = 3e-4;        // m/s^3/sqrt(Hz)
  double gyro_bias_rw = 2e-5;         // rad/s^2/sqrt(Hz)
  Eigen::Vector3d gravity = Eigen::Vector3d(0.0, 0.0, -9.80665);  // m/s^2, ENU
};

/// Per-epoch navigation state: attitude body->ENU, position, velocity, biases.
struct NavState {
  Rotation R;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();  // m
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  // m/s
  ImuBias bias;
  double t = 0.0;  // seconds, GPST
};

/// Manifold update x + delta in the 15-dim local coordinates above.
inline NavState retract(const NavState& x, const Vector15& delta) {
  NavState out = x;
  out.R = x.R * so3_exp(delta.segment<3>(0));
  out.p = x.p + delta.segment<3>(3);
  out.v = x.v + delta.segment<3>(6);
  out.bias.accel = x.bias.accel + delta.segment<3>(9);
  out.bias.gyro = x.bias.gyro + delta.segment<3>(12);
  return out;
}

/// Inverse of retract: local(base, retract(base, d)) == d.
inline Vector15 local(const NavState& base, const NavState& target) {
  Vector15 delta;
  delta.segment<3>(0) = so3_log(base.R.inverse() * target.R);
  delta.segment<3>(3) = target.p - base.p;
  delta.segment<3>(6) = target.v - base.v;
  delta.segment<3>(9) = target.bias.accel - base.bias.accel;
  delta.segment<3>(12) = target.bias.gyro - base.bias.gyro;
  return delta;
}

enum class GnssQuality { kFix, kFloat, kSingle };

struct GnssFix {
  double t = 0.0;                               // seconds, GPST
  Eigen::Vector3d p = Eigen::Vector3d::Zero();  // ENU, m
  Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();  // m^2
  GnssQuality quality = GnssQuality::kFix;
};

enum class VariableKind { kPose, kVelocity, kBias };

/// One variable node of the graph: pose, velocity or bias of a given epoch.
struct VariableKey {
  int epoch = 0;
  VariableKind kind = VariableKind::kPose;

  friend bool operator==(const VariableKey&, const VariableKey&) = default;
  friend auto operator<=>(const VariableKey&, const VariableKey&) = default;
};

/// Tangent dimension of a variable node (pose 6, velocity 3, bias 6).
inline int variable_dim(VariableKind kind) {
  return kind == VariableKind::kVelocity ? 3 : 6;
}

}  // namespace fgnav
