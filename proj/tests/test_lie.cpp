#include "fgnav/lie.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fgnav/types.hpp"

using namespace fgnav;

namespace {

std::mt19937_64 rng(42);

Eigen::Vector3d random_vec(double scale) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng), n(rng)};
}

// Uniform direction, angle uniform in (0, max_angle).
Eigen::Vector3d random_axis_angle(double max_angle) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Vector3d axis = random_vec(1.0);
  while (axis.norm() < 1e-6) axis = random_vec(1.0);
  axis.normalize();
  return axis * (u(rng) * max_angle);
}

}  // namespace

TEST(So3Exp, ZeroGivesIdentity) {
  const Eigen::Matrix3d R = so3_exp(Eigen::Vector3d::Zero()).matrix();
  EXPECT_LT((R - Eigen::Matrix3d::Identity()).norm(), 1e-15);
}

TEST(So3Exp, QuarterTurnAboutX) {
  const Rotation R = so3_exp({M_PI / 2.0, 0.0, 0.0});
  const Eigen::Vector3d y(0.0, 1.0, 0.0);
  EXPECT_LT((R * y - Eigen::Vector3d(0.0, 0.0, 1.0)).norm(), 1e-12);
}

TEST(So3Exp, LogRoundTrip) {
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d w = random_axis_angle(M_PI - 1e-3);
    const Eigen::Vector3d w_back = so3_log(so3_exp(w));
    EXPECT_LT((w_back - w).norm(), 1e-9) << "w = " << w.transpose();
  }
}

TEST(So3Log, IdentityGivesZero) {
  EXPECT_LT(so3_log(Rotation::Identity()).norm(), 1e-15);
}

TEST(So3Log, HalfTurnAboutZ) {
  // Both signs of the input map to the documented principal value [0,0,pi].
  const Eigen::Vector3d w_pos = so3_log(so3_exp({0.0, 0.0, M_PI}));
  const Eigen::Vector3d w_neg = so3_log(so3_exp({0.0, 0.0, -M_PI}));
  EXPECT_LT((w_pos - Eigen::Vector3d(0.0, 0.0, M_PI)).norm(), 1e-9);
  EXPECT_LT((w_neg - Eigen::Vector3d(0.0, 0.0, M_PI)).norm(), 1e-9);
}

TEST(So3Log, ExpRoundTripOnRandomRotations) {
  for (int i = 0; i < 1000; ++i) {
    const Rotation R = so3_exp(random_axis_angle(M_PI - 1e-3));
    const Rotation R_back = so3_exp(so3_log(R));
    EXPECT_LT((R_back.matrix() - R.matrix()).norm(), 1e-9);
  }
}

TEST(RightJacobian, ZeroGivesIdentity) {
  const Eigen::Matrix3d J = so3_right_jacobian(Eigen::Vector3d::Zero());
  EXPECT_LT((J - Eigen::Matrix3d::Identity()).norm(), 1e-15);
}

TEST(RightJacobian, FiniteDifferenceConsistency) {
  // || exp(w + d) - exp(w) exp(Jr(w) d) || must shrink as O(||d||^2).
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d w = random_axis_angle(2.5);
    const Eigen::Matrix3d Jr = so3_right_jacobian(w);
    const Eigen::Vector3d dir = random_axis_angle(1.0).normalized();
    double prev_err = -1.0;
    for (const double h : {1e-3, 1e-4}) {
      const Eigen::Vector3d d = dir * h;
      const Eigen::Matrix3d lhs = so3_exp(w + d).matrix();
      const Eigen::Matrix3d rhs = (so3_exp(w) * so3_exp(Jr * d)).matrix();
      const double err = (lhs - rhs).norm();
      EXPECT_LT(err, 10.0 * h * h);
      if (prev_err > 0) EXPECT_LT(err, prev_err);
      prev_err = err;
    }
  }
}

TEST(RightJacobian, NegatedArgumentIsTranspose) {
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d w = random_axis_angle(3.0);
    const Eigen::Matrix3d a = so3_right_jacobian(-w);
    const Eigen::Matrix3d b = so3_right_jacobian(w).transpose();
    EXPECT_LT((a - b).norm(), 1e-12);
  }
}

TEST(RightJacobian, InverseIsInverse) {
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d w = random_axis_angle(3.0);
    const Eigen::Matrix3d prod =
        so3_right_jacobian(w) * so3_right_jacobian_inverse(w);
    EXPECT_LT((prod - Eigen::Matrix3d::Identity()).norm(), 1e-10);
  }
}

TEST(Retract, ZeroDeltaLeavesStateUnchanged) {
  NavState x;
  x.R = so3_exp({0.1, -0.2, 0.3});
  x.p = {1.0, 2.0, 3.0};
  x.v = {0.5, -0.5, 0.0};
  const NavState y = retract(x, Vector15::Zero());
  EXPECT_LT((y.R.matrix() - x.R.matrix()).norm(), 1e-15);
  EXPECT_EQ(y.p, x.p);
  EXPECT_EQ(y.v, x.v);
}

TEST(Retract, LocalRoundTrip) {
  std::normal_distribution<double> n(0.0, 0.1);
  for (int i = 0; i < 200; ++i) {
    NavState x;
    x.R = so3_exp(random_axis_angle(2.0));
    x.p = random_vec(10.0);
    x.v = random_vec(5.0);
    x.bias.accel = random_vec(0.1);
    x.bias.gyro = random_vec(0.01);
    Vector15 delta;
    for (int k = 0; k < 15; ++k) delta[k] = n(rng);
    const Vector15 back = local(x, retract(x, delta));
    EXPECT_LT((back - delta).norm(), 1e-9);
  }
}

TEST(Retract, TwoHalfStepsMatchFullStepToSecondOrder) {
  NavState x;
  x.R = so3_exp({0.3, 0.1, -0.2});
  const Eigen::Vector3d dir = Eigen::Vector3d(1.0, 2.0, -1.0).normalized();
  for (const double h : {1e-2, 1e-3}) {
    Vector15 full = Vector15::Zero();
    full.segment<3>(0) = dir * h;
    Vector15 half = Vector15::Zero();
    half.segment<3>(0) = dir * (h / 2.0);
    const NavState one = retract(x, full);
    const NavState two = retract(retract(x, half), half);
    const double err = (one.R.matrix() - two.R.matrix()).norm();
    EXPECT_LT(err, 2.0 * h * h);
  }
}

TEST(Rotation, OrthonormalityAfterManyCompositions) {
  Rotation R;
  const Rotation step = so3_exp({1e-3, 2e-3, -1e-3});
  for (int i = 0; i < 1000000; ++i) R = R * step;
  const Eigen::Matrix3d M = R.matrix();
  EXPECT_LT((M.transpose() * M - Eigen::Matrix3d::Identity()).norm(), 1e-7);
  EXPECT_NEAR(M.determinant(), 1.0, 1e-9);
}

TEST(Rotation, MatrixConstructorRestoresInvariants) {
  // Feed a slightly corrupted matrix; construction renormalizes.
  Eigen::Matrix3d M = so3_exp({0.4, -0.3, 0.9}).matrix();
  M(0, 0) += 1e-7;
  const Eigen::Matrix3d R = Rotation(M).matrix();
  EXPECT_LT((R.transpose() * R - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  EXPECT_NEAR(R.determinant(), 1.0, 1e-9);
}

TEST(TaylorBranches, AgreeWithGeneralFormulaAtCrossover) {
  // Hand-rolled Rodrigues against the library exp around the 1e-8 threshold.
  for (const double theta : {3e-9, 1e-8, 3e-8}) {
    const Eigen::Vector3d w = Eigen::Vector3d(1.0, -2.0, 2.0).normalized() * theta;
    const Eigen::Matrix3d K = skew(w / theta);
    const Eigen::Matrix3d general = Eigen::Matrix3d::Identity() +
                                    std::sin(theta) * K +
                                    (1.0 - std::cos(theta)) * K * K;
    EXPECT_LT((so3_exp(w).matrix() - general).norm(), 1e-10);
  }
  // Right Jacobian around its 1e-6 threshold. The (1-cos)/theta^2 form
  // cancels catastrophically at these angles, so use 2 sin^2(theta/2).
  for (const double theta : {3e-7, 1e-6, 3e-6}) {
    const Eigen::Vector3d w = Eigen::Vector3d(2.0, 1.0, -1.0).normalized() * theta;
    const Eigen::Matrix3d W = skew(w);
    const double half_sin = std::sin(0.5 * theta);
    const Eigen::Matrix3d general =
        Eigen::Matrix3d::Identity() -
        2.0 * half_sin * half_sin / (theta * theta) * W +
        (theta - std::sin(theta)) / (theta * theta * theta) * W * W;
    EXPECT_LT((so3_right_jacobian(w) - general).norm(), 1e-10);
  }
}
