// IMU preintegration: accumulates raw samples between two GNSS-anchored
// epochs into one relative-motion constraint (dR, dv, dp) with a 9x9
// covariance and first-order bias Jacobians.
//
// Integration is first-order Euler on the manifold with zero-order hold on
// the sample: integrate(sample, dt) applies the sample's measurement over the
// dt that FOLLOWS it. Covariance and residual rows are ordered
// [dtheta(0:3), dv(3:6), dp(6:9)]; bias Jacobian columns [dba(0:3), dbg(3:6)].

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>

#include "fgnav/errors.hpp"
#include "fgnav/lie.hpp"
#include "fgnav/types.hpp"

namespace fgnav {

using Matrix9 = Eigen::Matrix<double, 9, 9>;
using Matrix9x6 = Eigen::Matrix<double, 9, 6>;

class PreintegratedImu {
 public:
  struct Deltas {
    Rotation R;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
  };

  explicit PreintegratedImu(const ImuBias& lin_bias = {},
                            double max_imu_gap = 0.1)
      : lin_bias_(lin_bias), max_imu_gap_(max_imu_gap) {}

  /// One Euler step: the sample's measurement held over the following dt.
  void integrate(const ImuSample& sample, double dt,
                 const ImuNoiseParams& params) {
    if (dt <= 0.0) {
      throw NonMonotonicTime("preintegration step with dt <= 0");
    }
    if (dt > max_imu_gap_) {
      throw ExcessiveGap("imu gap of " + std::to_string(dt) +
                         " s exceeds max of " + std::to_string(max_imu_gap_) +
                         " s");
    }
    if (sample_count_ > 0 && sample.t <= last_sample_t_) {
      throw NonMonotonicTime("imu sample time regressed");
    }

    const Eigen::Vector3d w = sample.gyro - lin_bias_.gyro;
    const Eigen::Vector3d a = sample.accel - lin_bias_.accel;
    const Eigen::Matrix3d R = delta_.R.matrix();
    const Eigen::Matrix3d Ra_hat = R * skew(a);
    const Eigen::Matrix3d E = so3_exp(w * dt).matrix();
    const Eigen::Matrix3d Jr_wdt = so3_right_jacobian(w * dt);

    // Covariance first (uses the pre-step rotation).
    Matrix9 A = Matrix9::Identity();
    A.block<3, 3>(0, 0) = E.transpose();
    A.block<3, 3>(3, 0) = -Ra_hat * dt;
    A.block<3, 3>(6, 0) = -0.5 * Ra_hat * dt * dt;
    A.block<3, 3>(6, 3) = Eigen::Matrix3d::Identity() * dt;
    Matrix9x6 B = Matrix9x6::Zero();
    B.block<3, 3>(0, 0) = Jr_wdt * dt;
    B.block<3, 3>(3, 3) = R * dt;
    B.block<3, 3>(6, 3) = 0.5 * R * dt * dt;
    Eigen::Matrix<double, 6, 6> Q = Eigen::Matrix<double, 6, 6>::Zero();
    Q.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity() *
                          (params.gyro_noise_density *
                           params.gyro_noise_density / dt);
    Q.block<3, 3>(3, 3) = Eigen::Matrix3d::Identity() *
                          (params.accel_noise_density *
                           params.accel_noise_density / dt);
    cov_ = A * cov_ * A.transpose() + B * Q * B.transpose();
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

    // Bias Jacobians, chain rule with pre-step values. Position rows first
    // since they consume the pre-step velocity rows.
    j_p_ba_ += j_v_ba_ * dt - 0.5 * R * dt * dt;
    j_p_bg_ += j_v_bg_ * dt - 0.5 * Ra_hat * j_theta_bg_ * dt * dt;
    j_v_ba_ -= R * dt;
    j_v_bg_ -= Ra_hat * j_theta_bg_ * dt;
    j_theta_bg_ = E.transpose() * j_theta_bg_ - Jr_wdt * dt;

    // Deltas, dp before dv (dp uses the pre-step dv).
    delta_.p += delta_.v * dt + 0.5 * (R * a) * dt * dt;
    delta_.v += (R * a) * dt;
    delta_.R = delta_.R * so3_exp(w * dt);

    delta_t_ += dt;
    last_sample_t_ = sample.t;
    ++sample_count_;
  }

  /// Appends a later segment integrated at the same linearization bias.
  void compose(const PreintegratedImu& next) {
    if ((next.lin_bias_.vector() - lin_bias_.vector()).norm() > 1e-12) {
      throw Error("compose requires matching linearization bias");
    }
    const Eigen::Matrix3d R1 = delta_.R.matrix();
    const double T2 = next.delta_t_;

    Matrix9 A = Matrix9::Identity();
    A.block<3, 3>(0, 0) = next.delta_.R.matrix().transpose();
    A.block<3, 3>(3, 0) = -R1 * skew(next.delta_.v);
    A.block<3, 3>(6, 0) = -R1 * skew(next.delta_.p);
    A.block<3, 3>(6, 3) = Eigen::Matrix3d::Identity() * T2;
    Matrix9 B = Matrix9::Identity();
    B.block<3, 3>(3, 3) = R1;
    B.block<3, 3>(6, 6) = R1;

    cov_ = A * cov_ * A.transpose() + B * next.cov_ * B.transpose();
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

    Matrix9x6 J1;
    J1.block<3, 3>(0, 0).setZero();
    J1.block<3, 3>(0, 3) = j_theta_bg_;
    J1.block<3, 3>(3, 0) = j_v_ba_;
    J1.block<3, 3>(3, 3) = j_v_bg_;
    J1.block<3, 3>(6, 0) = j_p_ba_;
    J1.block<3, 3>(6, 3) = j_p_bg_;
    const Matrix9x6 J = A * J1 + B * next.bias_jacobians();
    j_theta_bg_ = J.block<3, 3>(0, 3);
    j_v_ba_ = J.block<3, 3>(3, 0);
    j_v_bg_ = J.block<3, 3>(3, 3);
    j_p_ba_ = J.block<3, 3>(6, 0);
    j_p_bg_ = J.block<3, 3>(6, 3);

    delta_.p += delta_.v * T2 + R1 * next.delta_.p;
    delta_.v += R1 * next.delta_.v;
    delta_.R = delta_.R * next.delta_.R;
    delta_t_ += T2;
    sample_count_ += next.sample_count_;
    last_sample_t_ = next.last_sample_t_;
  }

  const Rotation& delta_R() const { return delta_.R; }
  const Eigen::Vector3d& delta_v() const { return delta_.v; }
  const Eigen::Vector3d& delta_p() const { return delta_.p; }
  double delta_t() const { return delta_t_; }
  const Matrix9& cov() const { return cov_; }
  const ImuBias& lin_bias() const { return lin_bias_; }
  std::int64_t sample_count() const { return sample_count_; }
  double last_sample_t() const { return last_sample_t_; }

  Matrix9x6 bias_jacobians() const {
    Matrix9x6 J = Matrix9x6::Zero();
    J.block<3, 3>(0, 3) = j_theta_bg_;
    J.block<3, 3>(3, 0) = j_v_ba_;
    J.block<3, 3>(3, 3) = j_v_bg_;
    J.block<3, 3>(6, 0) = j_p_ba_;
    J.block<3, 3>(6, 3) = j_p_bg_;
    return J;
  }

  /// First-order correction of the deltas to a bias other than lin_bias.
  Deltas bias_corrected(const ImuBias& bias) const {
    const Eigen::Vector3d dba = bias.accel - lin_bias_.accel;
    const Eigen::Vector3d dbg = bias.gyro - lin_bias_.gyro;
    Deltas out;
    out.R = delta_.R * so3_exp(j_theta_bg_ * dbg);
    out.v = delta_.v + j_v_ba_ * dba + j_v_bg_ * dbg;
    out.p = delta_.p + j_p_ba_ * dba + j_p_bg_ * dbg;
    return out;
  }

  /// True while the first-order correction is trustworthy (||db|| <= 0.1).
  bool within_first_order_validity(const ImuBias& bias) const {
    return (bias.vector() - lin_bias_.vector()).norm() <= 0.1;
  }

  /// Propagates state_i through the accumulated motion (bias-corrected to
  /// state_i's bias); gravity re-enters here.
  NavState predict(const NavState& state_i,
                   const Eigen::Vector3d& gravity) const {
    const Deltas d = bias_corrected(state_i.bias);
    const double T = delta_t_;
    NavState out;
    out.R = state_i.R * d.R;
    out.p = state_i.p + state_i.v * T + 0.5 * gravity * T * T +
            state_i.R * d.p;
    out.v = state_i.v + gravity * T + state_i.R * d.v;
    out.bias = state_i.bias;
    out.t = state_i.t + T;
    return out;
  }

 private:
  Deltas delta_;
  double delta_t_ = 0.0;
  Matrix9 cov_ = Matrix9::Zero();
  Eigen::Matrix3d j_theta_bg_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_v_ba_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_v_bg_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_p_ba_ = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_p_bg_ = Eigen::Matrix3d::Zero();
  ImuBias lin_bias_;
  double max_imu_gap_;
  double last_sample_t_ = 0.0;
  std::int64_t sample_count_ = 0;
};

struct ImuResidualJacobians {
  // Columns follow the 15-dim local ordering (dtheta, dp, dv, dba, dbg).
  Eigen::Matrix<double, 9, 15> wrt_i = Eigen::Matrix<double, 9, 15>::Zero();
  Eigen::Matrix<double, 9, 15> wrt_j = Eigen::Matrix<double, 9, 15>::Zero();
};

/// Unwhitened preintegration residual, rows (dtheta, dv, dp). Zero when
/// state_j == predict(state_i). Bias correction uses state_i's bias.
inline Eigen::Matrix<double, 9, 1> imu_residual(
    const PreintegratedImu& preint, const NavState& state_i,
    const NavState& state_j, const Eigen::Vector3d& gravity,
    ImuResidualJacobians* jac = nullptr) {
  const PreintegratedImu::Deltas d = preint.bias_corrected(state_i.bias);
  const double T = preint.delta_t();
  const Eigen::Matrix3d Ri = state_i.R.matrix();
  const Eigen::Matrix3d RiT = Ri.transpose();

  const Rotation Er = d.R.inverse() * state_i.R.inverse() * state_j.R;
  const Eigen::Vector3d r_theta = so3_log(Er);
  const Eigen::Vector3d dv_nav = state_j.v - state_i.v - gravity * T;
  const Eigen::Vector3d dp_nav =
      state_j.p - state_i.p - state_i.v * T - 0.5 * gravity * T * T;
  const Eigen::Vector3d r_v = RiT * dv_nav - d.v;
  const Eigen::Vector3d r_p = RiT * dp_nav - d.p;

  Eigen::Matrix<double, 9, 1> r;
  r << r_theta, r_v, r_p;

  if (jac) {
    const Eigen::Matrix3d Jr_inv = so3_right_jacobian_inverse(r_theta);
    const Eigen::Matrix3d Rj = state_j.R.matrix();
    const Matrix9x6 Jb = preint.bias_jacobians();
    const Eigen::Vector3d dbg = state_i.bias.gyro - preint.lin_bias().gyro;
    const Eigen::Matrix3d j_theta_bg = Jb.block<3, 3>(0, 3);

    auto& Ji = jac->wrt_i;
    auto& Jj = jac->wrt_j;
    Ji.setZero();
    Jj.setZero();

    Ji.block<3, 3>(0, 0) = -Jr_inv * Rj.transpose() * Ri;
    Ji.block<3, 3>(0, 12) = -Jr_inv * Er.matrix().transpose() *
                            so3_right_jacobian(j_theta_bg * dbg) * j_theta_bg;
    Ji.block<3, 3>(3, 0) = skew(RiT * dv_nav);
    Ji.block<3, 3>(3, 6) = -RiT;
    Ji.block<3, 3>(3, 9) = -Jb.block<3, 3>(3, 0);
    Ji.block<3, 3>(3, 12) = -Jb.block<3, 3>(3, 3);
    Ji.block<3, 3>(6, 0) = skew(RiT * dp_nav);
    Ji.block<3, 3>(6, 3) = -RiT;
    Ji.block<3, 3>(6, 6) = -RiT * T;
    Ji.block<3, 3>(6, 9) = -Jb.block<3, 3>(6, 0);
    Ji.block<3, 3>(6, 12) = -Jb.block<3, 3>(6, 3);

    Jj.block<3, 3>(0, 0) = Jr_inv;
    Jj.block<3, 3>(3, 6) = RiT;
    Jj.block<3, 3>(6, 3) = RiT;
  }
  return r;
}

}  // namespace fgnav
