// Trajectory evaluation: time alignment of estimates against ground truth,
// RMSE metrics, threshold-based service availability, and solver timing
// statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fgnav/engine.hpp"
#include "fgnav/errors.hpp"

namespace fgnav {

struct GtSeries {
  std::vector<double> t;
  std::vector<Eigen::Vector3d> p;
};

/// One written/read row of an estimate file, independent of engine internals.
struct EstimateRow {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  EstimateSource source = EstimateSource::kOptimized;
  double latency_s = 0.0;
  double factor_cost = 0.0;
};

inline std::vector<EstimateRow> to_rows(
    const std::vector<OutputEstimate>& outputs) {
  std::vector<EstimateRow> rows;
  rows.reserve(outputs.size());
  for (const auto& o : outputs) {
    EstimateRow r;
    r.t = o.t;
    r.p = o.state.p;
    r.v = o.state.v;
    r.source = o.source;
    r.latency_s = o.latency_s;
    r.factor_cost = o.factor_cost;
    rows.push_back(r);
  }
  return rows;
}

struct PairedSample {
  double t = 0.0;
  Eigen::Vector3d estimate = Eigen::Vector3d::Zero();
  Eigen::Vector3d truth = Eigen::Vector3d::Zero();
  Eigen::Vector3d error = Eigen::Vector3d::Zero();
  EstimateSource source = EstimateSource::kOptimized;
  double factor_cost = 0.0;
};

struct PairedSeries {
  std::vector<PairedSample> samples;
  int dropped_outside_gt = 0;
};

/// Linear interpolation of the ground-truth position at time t.
/// Pre: gt.t is strictly increasing and brackets t.
inline Eigen::Vector3d interpolate_gt(const GtSeries& gt, double t) {
  const auto it = std::lower_bound(gt.t.begin(), gt.t.end(), t);
  if (it == gt.t.begin()) return gt.p.front();
  if (it == gt.t.end()) return gt.p.back();
  const std::size_t hi = static_cast<std::size_t>(it - gt.t.begin());
  const std::size_t lo = hi - 1;
  const double span = gt.t[hi] - gt.t[lo];
  const double w = span > 0.0 ? (t - gt.t[lo]) / span : 0.0;
  return (1.0 - w) * gt.p[lo] + w * gt.p[hi];
}

/// Pairs each estimate with the interpolated ground truth at its timestamp.
/// Estimates outside the ground-truth span are dropped (and counted).
inline PairedSeries align_to_ground_truth(const std::vector<EstimateRow>& est,
                                          const GtSeries& gt) {
  if (gt.t.empty()) throw EmptyInput("ground truth is empty");
  PairedSeries out;
  for (const auto& row : est) {
    if (row.t < gt.t.front() - 1e-9 || row.t > gt.t.back() + 1e-9) {
      ++out.dropped_outside_gt;
      continue;
    }
    PairedSample s;
    s.t = row.t;
    s.estimate = row.p;
    s.truth = interpolate_gt(gt, row.t);
    s.error = s.estimate - s.truth;
    s.source = row.source;
    s.factor_cost = row.factor_cost;
    out.samples.push_back(s);
  }
  if (out.samples.empty()) {
    throw EmptyOverlap("no estimates fall inside the ground-truth span");
  }
  return out;
}

inline double rmse_3d(const PairedSeries& paired) {
  if (paired.samples.empty()) throw EmptyInput("no paired samples");
  double acc = 0.0;
  for (const auto& s : paired.samples) acc += s.error.squaredNorm();
  return std::sqrt(acc / static_cast<double>(paired.samples.size()));
}

inline Eigen::Vector3d rmse_per_axis(const PairedSeries& paired) {
  if (paired.samples.empty()) throw EmptyInput("no paired samples");
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (const auto& s : paired.samples) {
    acc += s.error.cwiseProduct(s.error);
  }
  return (acc / static_cast<double>(paired.samples.size())).cwiseSqrt();
}

/// Service availability A(threshold): the percentage of ground-truth-grid
/// epochs for which some estimate lies within half a grid step of the epoch
/// and its 3-D position error (against truth interpolated at the estimate's
/// own timestamp) is below the threshold.
inline double service_availability(const std::vector<EstimateRow>& est,
                                   const GtSeries& gt, double threshold_m) {
  if (gt.t.size() < 2) throw EmptyInput("ground truth needs >= 2 epochs");
  const double grid_dt =
      (gt.t.back() - gt.t.front()) / static_cast<double>(gt.t.size() - 1);

  std::vector<double> est_t;
  est_t.reserve(est.size());
  for (const auto& row : est) est_t.push_back(row.t);

  int served = 0;
  for (std::size_t k = 0; k < gt.t.size(); ++k) {
    const double tk = gt.t[k];
    const auto it = std::lower_bound(est_t.begin(), est_t.end(), tk);
    double best_dt = std::numeric_limits<double>::infinity();
    std::size_t best = est.size();
    if (it != est_t.end()) {
      best = static_cast<std::size_t>(it - est_t.begin());
      best_dt = std::abs(*it - tk);
    }
    if (it != est_t.begin()) {
      const std::size_t lo = static_cast<std::size_t>(it - est_t.begin()) - 1;
      if (std::abs(est_t[lo] - tk) < best_dt) {
        best = lo;
        best_dt = std::abs(est_t[lo] - tk);
      }
    }
    if (best >= est.size() || best_dt > 0.5 * grid_dt + 1e-9) continue;
    const Eigen::Vector3d truth = interpolate_gt(gt, est[best].t);
    if ((est[best].p - truth).norm() < threshold_m) ++served;
  }
  return 100.0 * static_cast<double>(served) /
         static_cast<double>(gt.t.size());
}

inline const std::vector<double>& availability_thresholds() {
  static const std::vector<double> kThresholds = {1.0,  2.0,  5.0,
                                                  10.0, 15.0, 20.0,
                                                  30.0, 50.0, 100.0};
  return kThresholds;
}

struct TimingStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  int count = 0;
};

inline TimingStats timing_stats(std::vector<double> times_ms) {
  TimingStats st;
  st.count = static_cast<int>(times_ms.size());
  if (times_ms.empty()) return st;
  std::sort(times_ms.begin(), times_ms.end());
  double total = 0.0;
  for (double v : times_ms) total += v;
  st.mean_ms = total / static_cast<double>(times_ms.size());
  // Nearest-rank 95th percentile.
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(times_ms.size())));
  st.p95_ms = times_ms[std::min(times_ms.size() - 1,
                                std::max<std::size_t>(rank, 1) - 1)];
  st.max_ms = times_ms.back();
  return st;
}

struct EvaluationReport {
  double rmse_3d_m = 0.0;
  Eigen::Vector3d rmse_axes_m = Eigen::Vector3d::Zero();
  std::vector<double> thresholds_m;
  std::vector<double> availability_pct;
  int n_estimates = 0;
  int n_optimized = 0;
  int n_propagated = 0;
  int dropped_outside_gt = 0;
  double mean_latency_s = 0.0;
};

inline EvaluationReport evaluate_estimates(const std::vector<EstimateRow>& est,
                                           const GtSeries& gt) {
  if (est.empty()) throw EmptyInput("no estimates to evaluate");
  const PairedSeries paired = align_to_ground_truth(est, gt);
  EvaluationReport rep;
  rep.rmse_3d_m = rmse_3d(paired);
  rep.rmse_axes_m = rmse_per_axis(paired);
  rep.thresholds_m = availability_thresholds();
  for (double thr : rep.thresholds_m) {
    rep.availability_pct.push_back(service_availability(est, gt, thr));
  }
  rep.n_estimates = static_cast<int>(est.size());
  double latency = 0.0;
  for (const auto& row : est) {
    if (row.source == EstimateSource::kOptimized) {
      ++rep.n_optimized;
    } else {
      ++rep.n_propagated;
    }
    latency += row.latency_s;
  }
  rep.mean_latency_s = latency / static_cast<double>(est.size());
  rep.dropped_outside_gt = paired.dropped_outside_gt;
  return rep;
}

}  // namespace fgnav
