// Factor graph over per-epoch pose/velocity/bias variables. Each factor
// produces whitened residuals and Jacobians, so the MAP objective is a plain
// sum of squared residuals and the solver sees ordinary least squares.
//
// Local coordinates per epoch are 15-dim, ordered
// [dtheta(0:3), dp(3:6), dv(6:9), dba(9:12), dbg(12:15)], with variables laid
// out chronologically (pose, velocity, bias within an epoch).

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fgnav/errors.hpp"
#include "fgnav/lie.hpp"
#include "fgnav/preintegration.hpp"
#include "fgnav/types.hpp"

namespace fgnav {

/// Per-epoch state estimates; factors read whole NavStates and the solver
/// updates them through kind-specific retractions.
class Values {
 public:
  bool has(int epoch) const { return states_.count(epoch) > 0; }

  const NavState& at(int epoch) const {
    const auto it = states_.find(epoch);
    if (it == states_.end()) {
      throw MissingEstimate("no estimate for epoch " + std::to_string(epoch));
    }
    return it->second;
  }

  void set(int epoch, const NavState& x) { states_[epoch] = x; }
  void erase(int epoch) { states_.erase(epoch); }
  std::size_t size() const { return states_.size(); }
  const std::map<int, NavState>& all() const { return states_; }

  /// Merges the fragment selected by key.kind into the epoch's state.
  void set_fragment(const VariableKey& key, const NavState& x) {
    NavState& dst = states_[key.epoch];
    switch (key.kind) {
      case VariableKind::kPose:
        dst.R = x.R;
        dst.p = x.p;
        dst.t = x.t;
        break;
      case VariableKind::kVelocity:
        dst.v = x.v;
        break;
      case VariableKind::kBias:
        dst.bias = x.bias;
        break;
    }
  }

  /// Applies a local-coordinate update to the fragment selected by key.kind.
  void apply_delta(const VariableKey& key,
                   const Eigen::Ref<const Eigen::VectorXd>& d) {
    NavState& x = states_.at(key.epoch);
    switch (key.kind) {
      case VariableKind::kPose:
        x.R = x.R * so3_exp(d.head<3>());
        x.p += d.segment<3>(3);
        break;
      case VariableKind::kVelocity:
        x.v += d.head<3>();
        break;
      case VariableKind::kBias:
        x.bias.accel += d.head<3>();
        x.bias.gyro += d.segment<3>(3);
        break;
    }
  }

 private:
  std::map<int, NavState> states_;
};

/// Cholesky-based whitener: maps residuals r to L^{-1} r with cov = L L^T,
/// so that ||whitened r||^2 equals the Mahalanobis norm r^T cov^{-1} r.
class Whitener {
 public:
  explicit Whitener(const Eigen::MatrixXd& cov) : llt_(cov) {
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * (1.0 + cov.cwiseAbs().maxCoeff())) {
      throw NonPositiveDefinite("covariance is not symmetric");
    }
    if (llt_.info() != Eigen::Success ||
        !(llt_.matrixLLT().diagonal().minCoeff() > 0.0)) {
      throw NonPositiveDefinite("covariance is not positive definite");
    }
  }

  Eigen::VectorXd whiten(const Eigen::VectorXd& r) const {
    return llt_.matrixL().solve(r);
  }
  Eigen::MatrixXd whiten_matrix(const Eigen::MatrixXd& J) const {
    return llt_.matrixL().solve(J);
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

class Factor {
 public:
  virtual ~Factor() = default;

  const std::vector<VariableKey>& keys() const { return keys_; }
  virtual int residual_dim() const = 0;

  /// Whitened residual; if jacobians is non-null it is filled with one
  /// whitened block per key (residual_dim x variable_dim(key)).
  virtual Eigen::VectorXd evaluate(
      const Values& values, std::vector<Eigen::MatrixXd>* jacobians) const = 0;

  double cost(const Values& values) const {
    return evaluate(values, nullptr).squaredNorm();
  }

  /// True for factors that anchor the gauge (priors).
  virtual bool fixes_gauge() const { return false; }

 protected:
  std::vector<VariableKey> keys_;
};

/// Anchors one epoch's full 15-dim state to a mean with a given covariance.
class PriorFactor : public Factor {
 public:
  PriorFactor(int epoch, const NavState& mean, const Matrix15& cov)
      : mean_(mean), whitener_(cov) {
    keys_ = {{epoch, VariableKind::kPose},
             {epoch, VariableKind::kVelocity},
             {epoch, VariableKind::kBias}};
  }

  int residual_dim() const override { return 15; }
  bool fixes_gauge() const override { return true; }
  const NavState& mean() const { return mean_; }

  Eigen::VectorXd evaluate(
      const Values& values,
      std::vector<Eigen::MatrixXd>* jacobians) const override {
    const NavState& x = values.at(keys_[0].epoch);
    const Vector15 r = local(mean_, x);
    if (jacobians) {
      Eigen::MatrixXd Jpose = Eigen::MatrixXd::Zero(15, 6);
      Jpose.block<3, 3>(0, 0) = so3_right_jacobian_inverse(r.head<3>());
      Jpose.block<3, 3>(3, 3).setIdentity();
      Eigen::MatrixXd Jvel = Eigen::MatrixXd::Zero(15, 3);
      Jvel.block<3, 3>(6, 0).setIdentity();
      Eigen::MatrixXd Jbias = Eigen::MatrixXd::Zero(15, 6);
      Jbias.block<6, 6>(9, 0).setIdentity();
      *jacobians = {whitener_.whiten_matrix(Jpose),
                    whitener_.whiten_matrix(Jvel),
                    whitener_.whiten_matrix(Jbias)};
    }
    return whitener_.whiten(r);
  }

 private:
  NavState mean_;
  Whitener whitener_;
};

/// Relative-motion constraint between epochs i and j from preintegrated IMU.
class ImuFactor : public Factor {
 public:
  ImuFactor(int epoch_i, int epoch_j, PreintegratedImu preint,
            const Eigen::Vector3d& gravity)
      : preint_(std::move(preint)), gravity_(gravity),
        whitener_(preint_.cov()) {
    keys_ = {{epoch_i, VariableKind::kPose},
             {epoch_i, VariableKind::kVelocity},
             {epoch_i, VariableKind::kBias},
             {epoch_j, VariableKind::kPose},
             {epoch_j, VariableKind::kVelocity}};
  }

  int residual_dim() const override { return 9; }
  const PreintegratedImu& preintegrated() const { return preint_; }

  Eigen::VectorXd evaluate(
      const Values& values,
      std::vector<Eigen::MatrixXd>* jacobians) const override {
    const NavState& xi = values.at(keys_[0].epoch);
    const NavState& xj = values.at(keys_[3].epoch);
    ImuResidualJacobians jac;
    const auto r = imu_residual(preint_, xi, xj, gravity_,
                                jacobians ? &jac : nullptr);
    if (jacobians) {
      *jacobians = {
          whitener_.whiten_matrix(jac.wrt_i.block<9, 6>(0, 0)),
          whitener_.whiten_matrix(jac.wrt_i.block<9, 3>(0, 6)),
          whitener_.whiten_matrix(jac.wrt_i.block<9, 6>(0, 9)),
          whitener_.whiten_matrix(jac.wrt_j.block<9, 6>(0, 0)),
          whitener_.whiten_matrix(jac.wrt_j.block<9, 3>(0, 6)),
      };
    }
    return whitener_.whiten(r);
  }

 private:
  PreintegratedImu preint_;
  Eigen::Vector3d gravity_;
  Whitener whitener_;
};

/// Slow random walk between consecutive bias states.
class BiasWalkFactor : public Factor {
 public:
  BiasWalkFactor(int epoch_i, int epoch_j, const Eigen::Matrix3d& cov_ba,
                 const Eigen::Matrix3d& cov_bg)
      : whitener_(block_diag(cov_ba, cov_bg)) {
    keys_ = {{epoch_i, VariableKind::kBias}, {epoch_j, VariableKind::kBias}};
  }

  int residual_dim() const override { return 6; }

  Eigen::VectorXd evaluate(
      const Values& values,
      std::vector<Eigen::MatrixXd>* jacobians) const override {
    const NavState& xi = values.at(keys_[0].epoch);
    const NavState& xj = values.at(keys_[1].epoch);
    const Eigen::VectorXd r = xj.bias.vector() - xi.bias.vector();
    if (jacobians) {
      *jacobians = {
          whitener_.whiten_matrix(-Eigen::MatrixXd::Identity(6, 6)),
          whitener_.whiten_matrix(Eigen::MatrixXd::Identity(6, 6)),
      };
    }
    return whitener_.whiten(r);
  }

 private:
  static Eigen::MatrixXd block_diag(const Eigen::Matrix3d& a,
                                    const Eigen::Matrix3d& b) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(6, 6);
    out.topLeftCorner<3, 3>() = a;
    out.bottomRightCorner<3, 3>() = b;
    return out;
  }
  Whitener whitener_;
};

/// Absolute position measurement on one pose.
class GnssFactor : public Factor {
 public:
  GnssFactor(int epoch, const Eigen::Vector3d& measured,
             const Eigen::Matrix3d& cov)
      : measured_(measured), whitener_(cov) {
    keys_ = {{epoch, VariableKind::kPose}};
  }

  int residual_dim() const override { return 3; }
  const Eigen::Vector3d& measured() const { return measured_; }

  Eigen::VectorXd evaluate(
      const Values& values,
      std::vector<Eigen::MatrixXd>* jacobians) const override {
    const NavState& x = values.at(keys_[0].epoch);
    if (jacobians) {
      Eigen::MatrixXd Jpose = Eigen::MatrixXd::Zero(3, 6);
      Jpose.block<3, 3>(0, 3).setIdentity();
      *jacobians = {whitener_.whiten_matrix(Jpose)};
    }
    return whitener_.whiten(x.p - measured_);
  }

 private:
  Eigen::Vector3d measured_;
  Whitener whitener_;
};

/// Condensed prior from marginalization: r(delta) = r0 + A * delta, where
/// delta stacks the local coordinates of the retained variables relative to
/// the stored linearization point. A is the square root of the condensed
/// information matrix, so the residual is already whitened.
class MarginalPriorFactor : public Factor {
 public:
  MarginalPriorFactor(std::vector<VariableKey> keys, Values linearization,
                      Eigen::MatrixXd sqrt_info, Eigen::VectorXd r0)
      : lin_(std::move(linearization)), A_(std::move(sqrt_info)),
        r0_(std::move(r0)) {
    keys_ = std::move(keys);
    int dim = 0;
    for (const auto& key : keys_) {
      offsets_.push_back(dim);
      dim += variable_dim(key.kind);
    }
    if (A_.cols() != dim || A_.rows() != r0_.size()) {
      throw Error("marginal prior dimensions do not match key set");
    }
  }

  int residual_dim() const override { return static_cast<int>(r0_.size()); }
  bool fixes_gauge() const override { return true; }
  const Eigen::MatrixXd& sqrt_information() const { return A_; }
  Eigen::MatrixXd information() const { return A_.transpose() * A_; }
  const Eigen::VectorXd& linearized_residual() const { return r0_; }
  const Values& linearization_point() const { return lin_; }

  Eigen::VectorXd evaluate(
      const Values& values,
      std::vector<Eigen::MatrixXd>* jacobians) const override {
    Eigen::VectorXd delta(A_.cols());
    if (jacobians) jacobians->resize(keys_.size());
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      const VariableKey& key = keys_[k];
      const int dim = variable_dim(key.kind);
      const int off = offsets_[k];
      const NavState& lin = lin_.at(key.epoch);
      const NavState& cur = values.at(key.epoch);
      switch (key.kind) {
        case VariableKind::kPose: {
          const Eigen::Vector3d dtheta = so3_log(lin.R.inverse() * cur.R);
          delta.segment<3>(off) = dtheta;
          delta.segment<3>(off + 3) = cur.p - lin.p;
          if (jacobians) {
            Eigen::MatrixXd D = Eigen::MatrixXd::Identity(6, 6);
            D.block<3, 3>(0, 0) = so3_right_jacobian_inverse(dtheta);
            (*jacobians)[k] = A_.middleCols(off, dim) * D;
          }
          break;
        }
        case VariableKind::kVelocity:
          delta.segment<3>(off) = cur.v - lin.v;
          if (jacobians) (*jacobians)[k] = A_.middleCols(off, dim);
          break;
        case VariableKind::kBias:
          delta.segment<6>(off) = cur.bias.vector() - lin.bias.vector();
          if (jacobians) (*jacobians)[k] = A_.middleCols(off, dim);
          break;
      }
    }
    return r0_ + A_ * delta;
  }

 private:
  Values lin_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd r0_;
  std::vector<int> offsets_;
};

/// Whitened block-sparse linearization of the whole graph.
struct LinearSystem {
  std::vector<VariableKey> ordering;       // chronological
  std::map<VariableKey, int> col_offset;
  int dim = 0;
  Eigen::SparseMatrix<double> J;
  Eigen::VectorXd r;
};

class FactorGraph {
 public:
  using FactorId = std::int64_t;

  void add_variable(const VariableKey& key, const NavState& initial) {
    if (key.epoch < 0) throw Error("variable epoch index must be >= 0");
    if (variables_.count(key)) {
      throw DuplicateKey("variable already present: epoch " +
                         std::to_string(key.epoch));
    }
    variables_.emplace(key, initial);
  }

  bool has_variable(const VariableKey& key) const {
    return variables_.count(key) > 0;
  }
  std::size_t variable_count() const { return variables_.size(); }
  std::size_t factor_count() const { return factors_.size(); }

  FactorId add_factor(std::shared_ptr<const Factor> factor) {
    for (const auto& key : factor->keys()) {
      if (!variables_.count(key)) {
        throw UnknownKey("factor references missing variable at epoch " +
                         std::to_string(key.epoch));
      }
    }
    const FactorId id = next_id_++;
    factors_.emplace_back(id, std::move(factor));
    return id;
  }

  void remove_factor(FactorId id) {
    for (auto it = factors_.begin(); it != factors_.end(); ++it) {
      if (it->first == id) {
        factors_.erase(it);
        return;
      }
    }
    throw UnknownKey("no factor with id " + std::to_string(id));
  }

  void remove_variable(const VariableKey& key) {
    if (variables_.erase(key) == 0) {
      throw UnknownKey("no variable to remove at epoch " +
                       std::to_string(key.epoch));
    }
  }

  const std::map<VariableKey, NavState>& variables() const {
    return variables_;
  }
  const std::vector<std::pair<FactorId, std::shared_ptr<const Factor>>>&
  factors() const {
    return factors_;
  }

  /// Per-epoch merge of the registered fragments.
  Values initial_values() const {
    Values out;
    for (const auto& [key, state] : variables_) out.set_fragment(key, state);
    return out;
  }

  bool gauge_fixed() const {
    for (const auto& [id, f] : factors_) {
      if (f->fixes_gauge()) return true;
    }
    return false;
  }

  double total_cost(const Values& values) const {
    double cost = 0.0;
    for (const auto& [id, f] : factors_) cost += f->cost(values);
    return cost;
  }

  /// Chronological variable order: by epoch, then pose < velocity < bias.
  std::vector<VariableKey> ordered_keys() const {
    std::vector<VariableKey> keys;
    keys.reserve(variables_.size());
    for (const auto& [key, state] : variables_) keys.push_back(key);
    return keys;  // std::map's VariableKey ordering is already chronological
  }

  LinearSystem linearize(const Values& values) const {
    LinearSystem sys;
    sys.ordering = ordered_keys();
    for (const auto& key : sys.ordering) {
      sys.col_offset[key] = sys.dim;
      sys.dim += variable_dim(key.kind);
    }
    int rows = 0;
    for (const auto& [id, f] : factors_) rows += f->residual_dim();

    sys.r.resize(rows);
    std::vector<Eigen::Triplet<double>> triplets;
    int row = 0;
    std::vector<Eigen::MatrixXd> jacs;
    for (const auto& [id, f] : factors_) {
      const Eigen::VectorXd r = f->evaluate(values, &jacs);
      sys.r.segment(row, r.size()) = r;
      const auto& keys = f->keys();
      for (std::size_t k = 0; k < keys.size(); ++k) {
        const int col = sys.col_offset.at(keys[k]);
        const Eigen::MatrixXd& Jb = jacs[k];
        for (int i = 0; i < Jb.rows(); ++i) {
          for (int j = 0; j < Jb.cols(); ++j) {
            if (Jb(i, j) != 0.0) {
              triplets.emplace_back(row + i, col + j, Jb(i, j));
            }
          }
        }
      }
      row += f->residual_dim();
    }
    sys.J.resize(rows, sys.dim);
    sys.J.setFromTriplets(triplets.begin(), triplets.end());
    return sys;
  }

 private:
  std::map<VariableKey, NavState> variables_;
  std::vector<std::pair<FactorId, std::shared_ptr<const Factor>>> factors_;
  FactorId next_id_ = 0;
};

}  // namespace fgnav
