// Levenberg-Marquardt on the factor graph plus fixed-lag marginalization.
// The normal equations use sparse Cholesky with the natural (chronological)
// elimination order; damping scales the diagonal of J^T J so heterogeneous
// units (radians vs meters) are handled per-coordinate.

#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "fgnav/errors.hpp"
#include "fgnav/factor_graph.hpp"

namespace fgnav {

struct SolverConfig {
  int max_iterations = 20;
  double cost_rel_tol = 1e-6;
  double delta_norm_tol = 1e-8;
  double lm_initial_lambda = 1e-4;
  double lm_lambda_factor = 10.0;
};

struct SolveSummary {
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Solves (J^T J + lambda * diag(J^T J)) delta = -J^T r.
inline Eigen::VectorXd solve_normal_equations(
    const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& r,
    double lambda) {
  Eigen::SparseMatrix<double> H =
      (Eigen::SparseMatrix<double>(J.transpose()) * J).pruned();
  if (lambda != 0.0) {
    for (int i = 0; i < H.rows(); ++i) H.coeffRef(i, i) *= (1.0 + lambda);
  }
  H.makeCompressed();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                       Eigen::NaturalOrdering<int>>
      chol(H);
  if (chol.info() != Eigen::Success) {
    throw LinearSolveFailure("sparse Cholesky of the normal equations failed");
  }
  const Eigen::VectorXd delta = chol.solve(-J.transpose() * r);
  if (chol.info() != Eigen::Success || !delta.allFinite()) {
    throw LinearSolveFailure("normal-equation backsubstitution failed");
  }
  return delta;
}

inline void apply_update(Values& values, const LinearSystem& sys,
                         const Eigen::VectorXd& delta) {
  for (const auto& key : sys.ordering) {
    const int off = sys.col_offset.at(key);
    values.apply_delta(key, delta.segment(off, variable_dim(key.kind)));
  }
}

/// Damped Gauss-Newton over the manifold. Mutates `values` in place; accepted
/// steps never increase the cost.
inline SolveSummary optimize(const FactorGraph& graph, Values& values,
                             const SolverConfig& config = {}) {
  if (!graph.gauge_fixed()) {
    throw NotGaugeFixed("graph has no prior; the MAP problem is unanchored");
  }
  SolveSummary summary;
  double cost = graph.total_cost(values);
  double lambda = config.lm_initial_lambda;
  constexpr int kMaxRetries = 12;

  while (summary.iterations < config.max_iterations) {
    ++summary.iterations;
    const LinearSystem sys = graph.linearize(values);

    bool accepted = false;
    double new_cost = cost;
    double step_norm = 0.0;
    Values candidate;
    for (int tries = 0; tries < kMaxRetries && !accepted; ++tries) {
      Eigen::VectorXd delta;
      try {
        delta = solve_normal_equations(sys.J, sys.r, lambda);
      } catch (const LinearSolveFailure&) {
        lambda *= config.lm_lambda_factor;
        continue;
      }
      candidate = values;
      apply_update(candidate, sys, delta);
      new_cost = graph.total_cost(candidate);
      if (new_cost <= cost * (1.0 + 1e-14) + 1e-15) {
        accepted = true;
        step_norm = delta.norm();
      } else {
        lambda *= config.lm_lambda_factor;
      }
    }
    if (!accepted) break;  // damping exhausted: already at a local minimum

    values = std::move(candidate);
    lambda = std::max(lambda / config.lm_lambda_factor, 1e-12);
    const double decrease = cost - new_cost;
    cost = new_cost;
    if (step_norm < config.delta_norm_tol ||
        decrease < config.cost_rel_tol * std::max(cost, 1e-12)) {
      summary.converged = true;
      break;
    }
  }
  summary.final_cost = cost;
  return summary;
}

struct MarginalizationResult {
  std::shared_ptr<const MarginalPriorFactor> condensed;  // null if none needed
  FactorGraph::FactorId condensed_id = -1;
  std::vector<VariableKey> removed_keys;
  std::vector<FactorGraph::FactorId> removed_factor_ids;
};

/// Removes every variable whose state time is older than cutoff_time.
/// All factors touching a removed variable are linearized at `values` and
/// Schur-complemented onto the retained boundary variables, which keeps the
/// boundary cost gradient intact at the linearization point.
inline MarginalizationResult marginalize(FactorGraph& graph,
                                         const Values& values,
                                         double cutoff_time) {
  MarginalizationResult result;

  std::set<int> removed_epochs;
  std::set<int> retained_epochs;
  for (const auto& [key, initial] : graph.variables()) {
    if (values.at(key.epoch).t < cutoff_time) {
      removed_epochs.insert(key.epoch);
    } else {
      retained_epochs.insert(key.epoch);
    }
  }
  if (removed_epochs.empty()) return result;
  if (retained_epochs.empty()) {
    throw EmptyGraphAfterMarginalization(
        "cutoff would remove every epoch in the graph");
  }

  std::set<VariableKey> removed_keys;
  for (const auto& [key, initial] : graph.variables()) {
    if (removed_epochs.count(key.epoch)) removed_keys.insert(key);
  }

  // Factors touching any removed variable, and the boundary keys they drag in.
  std::vector<std::pair<FactorGraph::FactorId, std::shared_ptr<const Factor>>>
      affected;
  std::set<VariableKey> boundary_keys;
  for (const auto& [id, f] : graph.factors()) {
    bool touches = false;
    for (const auto& key : f->keys()) {
      if (removed_keys.count(key)) touches = true;
    }
    if (!touches) continue;
    affected.emplace_back(id, f);
    for (const auto& key : f->keys()) {
      if (!removed_keys.count(key)) boundary_keys.insert(key);
    }
  }

  // Column layout: removed keys first, then boundary keys (both chronological).
  std::map<VariableKey, int> offset;
  int m = 0;
  for (const auto& key : removed_keys) {
    offset[key] = m;
    m += variable_dim(key.kind);
  }
  int n = m;
  for (const auto& key : boundary_keys) {
    offset[key] = n;
    n += variable_dim(key.kind);
  }

  // Dense joint normal equations of the affected factors at `values`.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::MatrixXd> jacs;
  for (const auto& [id, f] : affected) {
    const Eigen::VectorXd r = f->evaluate(values, &jacs);
    const auto& keys = f->keys();
    for (std::size_t a = 0; a < keys.size(); ++a) {
      const int oa = offset.at(keys[a]);
      const int da = variable_dim(keys[a].kind);
      b.segment(oa, da) += jacs[a].transpose() * r;
      for (std::size_t c = 0; c < keys.size(); ++c) {
        const int oc = offset.at(keys[c]);
        const int dc = variable_dim(keys[c].kind);
        H.block(oa, oc, da, dc) += jacs[a].transpose() * jacs[c];
      }
    }
  }

  const int nb = n - m;
  if (nb > 0) {
    const Eigen::MatrixXd Hmm = H.topLeftCorner(m, m);
    const Eigen::MatrixXd Hbm = H.bottomLeftCorner(nb, m);
    const Eigen::MatrixXd Hbb = H.bottomRightCorner(nb, nb);
    const Eigen::VectorXd bm = b.head(m);
    const Eigen::VectorXd bb = b.tail(nb);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hmm);
    if (ldlt.info() != Eigen::Success) {
      throw LinearSolveFailure(
          "marginalized block is not factorizable; removed states are "
          "insufficiently constrained");
    }
    Eigen::MatrixXd Ht =
        Hbb - Hbm * ldlt.solve(Hbm.transpose());
    Eigen::VectorXd bt = bb - Hbm * ldlt.solve(bm);
    Ht = 0.5 * (Ht + Ht.transpose()).eval();

    // Square root via eigendecomposition, dropping the numerical null space.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Ht);
    const Eigen::VectorXd& evals = eig.eigenvalues();
    const double lmax = std::max(evals.cwiseAbs().maxCoeff(), 0.0);
    const double tol = std::max(lmax * 1e-12, 1e-14);
    std::vector<int> kept;
    for (int i = 0; i < evals.size(); ++i) {
      if (evals(i) > tol) kept.push_back(i);
    }
    if (!kept.empty()) {
      Eigen::MatrixXd A(static_cast<int>(kept.size()), nb);
      Eigen::VectorXd r0(static_cast<int>(kept.size()));
      for (std::size_t i = 0; i < kept.size(); ++i) {
        const double lam = evals(kept[i]);
        const Eigen::VectorXd v = eig.eigenvectors().col(kept[i]);
        A.row(static_cast<int>(i)) = std::sqrt(lam) * v.transpose();
        r0(static_cast<int>(i)) = v.dot(bt) / std::sqrt(lam);
      }
      Values lin;
      std::vector<VariableKey> bkeys(boundary_keys.begin(),
                                     boundary_keys.end());
      for (const auto& key : bkeys) {
        if (!lin.has(key.epoch)) lin.set(key.epoch, values.at(key.epoch));
      }
      result.condensed = std::make_shared<MarginalPriorFactor>(
          bkeys, std::move(lin), std::move(A), std::move(r0));
    }
  }

  // Mutate the graph: drop affected factors and removed variables, then add
  // the condensed prior.
  for (const auto& [id, f] : affected) {
    graph.remove_factor(id);
    result.removed_factor_ids.push_back(id);
  }
  for (const auto& key : removed_keys) {
    graph.remove_variable(key);
    result.removed_keys.push_back(key);
  }
  if (result.condensed) {
    result.condensed_id = graph.add_factor(result.condensed);
  }
  return result;
}

}  // namespace fgnav
