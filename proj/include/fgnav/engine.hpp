// Streaming GNSS/IMU fusion engine. Each accepted GNSS fix becomes a graph
// epoch (pose/velocity/bias variables) tied to its predecessor by a
// preintegrated IMU factor and a bias random walk; the window is re-solved on
// every fix and optionally truncated by time-based marginalization.
//
// Output policy:
//  - smoothing latency tau counts GNSS epochs: the fix with epoch index k
//    releases the state of epoch k - tau at its latest optimized value;
//  - with tau = 0, IMU-only predictions fill the 1 Hz GPST-aligned output
//    grid during GNSS gaps, up to max_imu_propagation seconds per gap;
//  - timestamps strictly increase across the whole output stream; callers
//    must push a GNSS fix before an IMU sample bearing the same timestamp.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fgnav/errors.hpp"
#include "fgnav/factor_graph.hpp"
#include "fgnav/preintegration.hpp"
#include "fgnav/solver.hpp"
#include "fgnav/types.hpp"

namespace fgnav {

/// The window's total cost grows with its epoch count, so a relative-decrease
/// stopping rule tuned for small problems quits while the newest states are
/// still mid-correction. The engine therefore runs the solver harder than the
/// generic defaults.
inline SolverConfig engine_solver_defaults() {
  SolverConfig cfg;
  cfg.max_iterations = 50;
  cfg.cost_rel_tol = 1e-12;
  cfg.delta_norm_tol = 1e-10;
  return cfg;
}

struct EngineConfig {
  int smoothing_latency_tau = 0;  // in GNSS epochs
  double marginalization_lag = std::numeric_limits<double>::infinity();  // s
  double max_imu_propagation = 4.0;  // s of IMU-only output per GNSS gap
  int cold_start_fix_count = 4;
  double gnss_cov_scale = 2.0;
  double output_rate_hz = 1.0;
  double max_imu_gap = 0.1;            // s; larger gaps invalidate the bridge
  double min_init_displacement = 1.0;  // m of horizontal motion for heading

  // Cold-start prior standard deviations.
  double init_yaw_std = 0.3;     // rad
  double init_tilt_std = 0.05;   // rad
  double init_vel_std = 1.0;     // m/s
  double init_accel_bias_std = 0.1;   // m/s^2
  double init_gyro_bias_std = 0.01;   // rad/s

  ImuNoiseParams imu_noise;
  SolverConfig solver = engine_solver_defaults();
};

enum class EngineMode { kColdStart, kTracking, kOutagePropagation,
                        kOutageSuspended };

struct EngineStatus {
  EngineMode mode = EngineMode::kColdStart;
  int epochs_in_graph = 0;
  double last_gnss_t = 0.0;
  double last_imu_t = 0.0;
};

enum class EstimateSource { kOptimized, kImuPropagated };

inline const char* to_string(EstimateSource s) {
  return s == EstimateSource::kOptimized ? "optimized" : "imu_propagated";
}

struct OutputEstimate {
  double t = 0.0;
  NavState state;
  EstimateSource source = EstimateSource::kOptimized;
  double latency_s = 0.0;
  // Sum of the costs of all factors connected to this state at emission time
  // (zero for IMU-propagated outputs, which have no factors).
  double factor_cost = 0.0;
};

struct ColdStartInit {
  NavState state0;     // at the first buffered fix
  Matrix15 prior_cov;  // for the anchoring prior
  Rotation attitude;   // initial attitude shared by the buffered window
  std::vector<Eigen::Vector3d> velocities;  // one per buffered fix
};

/// Derives the initial state from buffered fixes and IMU: position/velocity
/// by finite differences, yaw from the horizontal displacement direction,
/// roll/pitch from the averaged accelerometer, biases zero.
inline ColdStartInit initialize_cold_start(const std::vector<GnssFix>& fixes,
                                           const std::vector<ImuSample>& imu,
                                           const EngineConfig& cfg) {
  if (static_cast<int>(fixes.size()) < cfg.cold_start_fix_count) {
    throw Error("cold start needs at least " +
                std::to_string(cfg.cold_start_fix_count) + " fixes");
  }
  const Eigen::Vector3d disp = fixes.back().p - fixes.front().p;
  if (disp.head<2>().norm() < cfg.min_init_displacement) {
    throw InsufficientMotion(
        "horizontal displacement across the cold-start window is below " +
        std::to_string(cfg.min_init_displacement) + " m");
  }
  const double heading = std::atan2(disp.y(), disp.x());

  double roll = 0.0, pitch = 0.0;
  if (!imu.empty()) {
    Eigen::Vector3d mean_accel = Eigen::Vector3d::Zero();
    for (const auto& s : imu) mean_accel += s.accel;
    mean_accel /= static_cast<double>(imu.size());
    const double g = mean_accel.norm();
    if (g > 1e-6) {
      pitch = -std::asin(std::clamp(mean_accel.x() / g, -1.0, 1.0));
      roll = std::atan2(mean_accel.y(), mean_accel.z());
    }
  }

  ColdStartInit init;
  init.attitude = so3_exp(Eigen::Vector3d(0.0, 0.0, heading)) *
                  so3_exp(Eigen::Vector3d(0.0, pitch, 0.0)) *
                  so3_exp(Eigen::Vector3d(roll, 0.0, 0.0));

  init.velocities.resize(fixes.size());
  for (std::size_t k = 0; k < fixes.size(); ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 < fixes.size() ? k + 1 : k;
    const double dt = fixes[hi].t - fixes[lo].t;
    init.velocities[k] =
        dt > 1e-9 ? ((fixes[hi].p - fixes[lo].p) / dt).eval()
                  : Eigen::Vector3d::Zero();
  }

  init.state0.R = init.attitude;
  init.state0.p = fixes.front().p;
  init.state0.v = init.velocities.front();
  init.state0.t = fixes.front().t;

  // The yaw and velocity guesses above are finite differences of noisy
  // fixes, so their prior widths must carry the differenced fix noise on
  // top of the configured floors; otherwise the anchoring prior locks the
  // whole window onto the noise of two fixes.
  const double lat_var =
      0.5 * cfg.gnss_cov_scale *
      (fixes.front().cov(0, 0) + fixes.front().cov(1, 1) +
       fixes.back().cov(0, 0) + fixes.back().cov(1, 1));
  const double yaw_var = cfg.init_yaw_std * cfg.init_yaw_std +
                         lat_var / disp.head<2>().squaredNorm();
  const double fd_dt = std::max(fixes[1].t - fixes[0].t, 1e-3);
  const Eigen::Matrix3d vel_cov =
      Eigen::Matrix3d::Identity() * cfg.init_vel_std * cfg.init_vel_std +
      cfg.gnss_cov_scale * (fixes[0].cov + fixes[1].cov) / (fd_dt * fd_dt);

  init.prior_cov = Matrix15::Zero();
  init.prior_cov(0, 0) = cfg.init_tilt_std * cfg.init_tilt_std;
  init.prior_cov(1, 1) = cfg.init_tilt_std * cfg.init_tilt_std;
  init.prior_cov(2, 2) = yaw_var;
  init.prior_cov.block<3, 3>(3, 3) = fixes.front().cov * cfg.gnss_cov_scale;
  init.prior_cov.block<3, 3>(6, 6) = vel_cov;
  init.prior_cov.block<3, 3>(9, 9) = Eigen::Matrix3d::Identity() *
                                     cfg.init_accel_bias_std *
                                     cfg.init_accel_bias_std;
  init.prior_cov.block<3, 3>(12, 12) = Eigen::Matrix3d::Identity() *
                                       cfg.init_gyro_bias_std *
                                       cfg.init_gyro_bias_std;
  return init;
}

class FusionEngine {
 public:
  explicit FusionEngine(EngineConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.smoothing_latency_tau < 0) throw Error("tau must be >= 0");
    if (!(cfg_.max_imu_propagation > 0.0)) {
      throw Error("max_imu_propagation must be positive");
    }
    if (cfg_.cold_start_fix_count < 2) {
      throw Error("cold_start_fix_count must be >= 2");
    }
    if (!(cfg_.gnss_cov_scale > 0.0)) {
      throw Error("gnss_cov_scale must be positive");
    }
  }

  std::optional<OutputEstimate> push_imu(const ImuSample& sample) {
    if (have_imu_ && sample.t <= last_imu_t_) {
      throw NonMonotonicTime("imu sample time must strictly increase");
    }
    last_imu_t_ = sample.t;
    have_imu_ = true;

    if (!initialized_) {
      imu_buffer_.push_back(sample);
      trim_cold_buffers();
      return std::nullopt;
    }

    update_mode(sample.t);
    std::optional<OutputEstimate> out = maybe_emit_propagated(sample.t);
    advance_to(sample.t);
    pending_ = sample;
    pending_start_ = sample.t;
    return out;
  }

  std::vector<OutputEstimate> push_gnss(const GnssFix& fix) {
    if (have_gnss_ && fix.t < last_gnss_t_) {
      throw NonMonotonicTime("gnss fix time regressed");
    }
    if (have_gnss_ && fix.t <= last_gnss_t_ + 1e-12) {
      return {};  // duplicate epoch time: outputs must strictly increase
    }
    last_gnss_t_ = fix.t;
    have_gnss_ = true;

    if (initialized_ && accumulator_stale_) reset_to_cold_start();
    if (!initialized_) return cold_start_push(fix);
    return tracking_push(fix);
  }

  /// Releases every state still held back by the smoothing latency.
  std::vector<OutputEstimate> finalize() {
    std::vector<OutputEstimate> outs;
    if (!initialized_) return outs;
    const double now = std::max(last_imu_t_, last_gnss_t_);
    for (int e = last_emitted_ + 1; e <= newest_epoch_; ++e) {
      outs.push_back(make_output(e, EstimateSource::kOptimized, now));
    }
    last_emitted_ = newest_epoch_;
    return outs;
  }

  EngineStatus status() const {
    EngineStatus st;
    st.mode = mode_;
    st.epochs_in_graph = static_cast<int>(values_.size());
    st.last_gnss_t = last_gnss_t_;
    st.last_imu_t = last_imu_t_;
    return st;
  }

  const FactorGraph& graph() const { return graph_; }
  const Values& values() const { return values_; }
  const std::vector<double>& optimize_times_ms() const {
    return opt_times_ms_;
  }
  int total_epochs() const { return epoch_count_; }
  int newest_epoch() const { return newest_epoch_; }
  int last_emitted_epoch() const { return last_emitted_; }
  double epoch_time(int epoch) const { return epoch_times_.at(epoch); }
  const EngineConfig& config() const { return cfg_; }

 private:
  // --- preintegration bookkeeping -----------------------------------------
  // `pending_` is the newest IMU sample; under zero-order hold it covers
  // [pending_start_, next event). advance_to() consumes that interval.
  void advance_to(double t) {
    if (!pending_ || t <= pending_start_ + 1e-12) return;
    ImuSample step = *pending_;
    step.t = pending_start_;
    try {
      accum_.integrate(step, t - pending_start_, cfg_.imu_noise);
    } catch (const ExcessiveGap&) {
      accumulator_stale_ = true;
    }
    pending_start_ = t;
  }

  void update_mode(double now) {
    const double gap = now - last_gnss_t_;
    if (gap > cfg_.max_imu_propagation + 1e-9) {
      mode_ = EngineMode::kOutageSuspended;
    } else if (gap > 1.5 / cfg_.output_rate_hz) {
      mode_ = EngineMode::kOutagePropagation;
    } else {
      mode_ = EngineMode::kTracking;
    }
  }

  // Fills the next uncovered GPST-aligned grid point in (pending_start_, now]
  // with an IMU-only prediction, if within the propagation budget.
  std::optional<OutputEstimate> maybe_emit_propagated(double now) {
    if (cfg_.smoothing_latency_tau != 0 || !pending_ || accumulator_stale_) {
      return std::nullopt;
    }
    const double rate = cfg_.output_rate_hz;
    const double newest_t = epoch_times_[newest_epoch_];
    double g = (std::floor(pending_start_ * rate + 1e-9) + 1.0) / rate;
    for (; g <= now + 1e-9; g += 1.0 / rate) {
      if (g <= last_output_t_ + 1e-9 || g <= newest_t + 1e-9) continue;
      if (g - newest_t > cfg_.max_imu_propagation + 1e-9) return std::nullopt;

      PreintegratedImu bridge = accum_;
      if (g > pending_start_ + 1e-12) {
        ImuSample step = *pending_;
        step.t = pending_start_;
        try {
          bridge.integrate(step, g - pending_start_, cfg_.imu_noise);
        } catch (const ExcessiveGap&) {
          accumulator_stale_ = true;
          return std::nullopt;
        }
      }
      OutputEstimate out;
      out.state = bridge.predict(values_.at(newest_epoch_),
                                 cfg_.imu_noise.gravity);
      out.t = g;
      out.state.t = g;
      out.source = EstimateSource::kImuPropagated;
      out.latency_s = std::max(0.0, now - g);
      out.factor_cost = 0.0;
      last_output_t_ = g;
      mode_ = EngineMode::kOutagePropagation;
      return out;
    }
    return std::nullopt;
  }

  // --- cold start ----------------------------------------------------------
  void trim_cold_buffers() {
    const std::size_t keep =
        std::max<std::size_t>(cfg_.cold_start_fix_count, 8);
    if (fix_buffer_.size() > keep) {
      fix_buffer_.erase(fix_buffer_.begin(),
                        fix_buffer_.end() - static_cast<long>(keep));
    }
    if (!fix_buffer_.empty()) {
      const double horizon = fix_buffer_.front().t - 1.0;
      while (!imu_buffer_.empty() && imu_buffer_.front().t < horizon) {
        imu_buffer_.erase(imu_buffer_.begin());
      }
    }
  }

  void reset_to_cold_start() {
    graph_ = FactorGraph();
    values_ = Values();
    fix_buffer_.clear();
    imu_buffer_.clear();
    accum_ = PreintegratedImu(ImuBias{}, cfg_.max_imu_gap);
    accumulator_stale_ = false;
    initialized_ = false;
    newest_epoch_ = -1;
    mode_ = EngineMode::kColdStart;
  }

  std::vector<OutputEstimate> cold_start_push(const GnssFix& fix) {
    fix_buffer_.push_back(fix);
    trim_cold_buffers();
    if (static_cast<int>(fix_buffer_.size()) < cfg_.cold_start_fix_count) {
      return {};
    }
    ColdStartInit init;
    try {
      init = initialize_cold_start(fix_buffer_, imu_buffer_, cfg_);
    } catch (const InsufficientMotion&) {
      return {};  // keep buffering until the platform moves
    }

    std::vector<PreintegratedImu> segments;
    if (!replay_segments(&segments)) {
      // An IMU hole inside the buffered window: slide past it.
      fix_buffer_.erase(fix_buffer_.begin());
      return {};
    }

    const int n = static_cast<int>(fix_buffer_.size());
    const int first = epoch_count_;
    for (int k = 0; k < n; ++k) {
      const GnssFix& f = fix_buffer_[k];
      const int e = epoch_count_++;
      epoch_times_.push_back(f.t);
      NavState x;
      x.R = init.attitude;
      x.p = f.p;
      x.v = init.velocities[k];
      x.t = f.t;
      graph_.add_variable({e, VariableKind::kPose}, x);
      graph_.add_variable({e, VariableKind::kVelocity}, x);
      graph_.add_variable({e, VariableKind::kBias}, x);
      values_.set(e, x);
      graph_.add_factor(std::make_shared<GnssFactor>(
          e, f.p, (f.cov * cfg_.gnss_cov_scale).eval()));
      if (k > 0) {
        graph_.add_factor(std::make_shared<ImuFactor>(
            e - 1, e, segments[k - 1], cfg_.imu_noise.gravity));
        add_bias_walk(e - 1, e);
      }
    }
    graph_.add_factor(
        std::make_shared<PriorFactor>(first, init.state0, init.prior_cov));
    newest_epoch_ = epoch_count_ - 1;

    run_optimize();

    accum_ = PreintegratedImu(values_.at(newest_epoch_).bias,
                              cfg_.max_imu_gap);
    if (!imu_buffer_.empty() &&
        imu_buffer_.back().t <= fix_buffer_.back().t + 1e-12) {
      pending_ = imu_buffer_.back();
      pending_start_ = fix_buffer_.back().t;
    }
    fix_buffer_.clear();
    imu_buffer_.clear();
    initialized_ = true;
    mode_ = EngineMode::kTracking;
    last_emitted_ = newest_epoch_ - 1;
    return emit_ready(last_gnss_t_);
  }

  /// Preintegrates the buffered IMU between consecutive buffered fixes.
  /// Returns false if any interval lacks samples or contains a gap.
  bool replay_segments(std::vector<PreintegratedImu>* segments) {
    segments->clear();
    PreintegratedImu seg(ImuBias{}, cfg_.max_imu_gap);
    std::optional<ImuSample> pend;
    double pend_start = fix_buffer_.front().t;
    std::size_t next_fix = 1;
    try {
      for (const auto& s : imu_buffer_) {
        while (next_fix < fix_buffer_.size() &&
               s.t >= fix_buffer_[next_fix].t - 1e-12) {
          const double ft = fix_buffer_[next_fix].t;
          if (pend && ft > pend_start + 1e-12) {
            ImuSample step = *pend;
            step.t = pend_start;
            seg.integrate(step, ft - pend_start, cfg_.imu_noise);
            pend_start = ft;
          }
          if (seg.sample_count() == 0) return false;
          segments->push_back(seg);
          seg = PreintegratedImu(ImuBias{}, cfg_.max_imu_gap);
          ++next_fix;
        }
        if (s.t < fix_buffer_.front().t) {
          pend = s;
          pend_start = fix_buffer_.front().t;
          continue;
        }
        if (pend && s.t > pend_start + 1e-12) {
          ImuSample step = *pend;
          step.t = pend_start;
          seg.integrate(step, s.t - pend_start, cfg_.imu_noise);
        }
        pend = s;
        pend_start = s.t;
      }
      // Close any intervals not reached by the sample loop.
      while (next_fix < fix_buffer_.size()) {
        const double ft = fix_buffer_[next_fix].t;
        if (pend && ft > pend_start + 1e-12) {
          ImuSample step = *pend;
          step.t = pend_start;
          seg.integrate(step, ft - pend_start, cfg_.imu_noise);
          pend_start = ft;
        }
        if (seg.sample_count() == 0) return false;
        segments->push_back(seg);
        seg = PreintegratedImu(ImuBias{}, cfg_.max_imu_gap);
        ++next_fix;
      }
    } catch (const ExcessiveGap&) {
      return false;
    }
    return segments->size() + 1 == fix_buffer_.size();
  }

  // --- tracking ------------------------------------------------------------
  void add_bias_walk(int i, int j) {
    const double dt = epoch_times_[j] - epoch_times_[i];
    const double va = cfg_.imu_noise.accel_bias_rw *
                      cfg_.imu_noise.accel_bias_rw * dt;
    const double vg =
        cfg_.imu_noise.gyro_bias_rw * cfg_.imu_noise.gyro_bias_rw * dt;
    graph_.add_factor(std::make_shared<BiasWalkFactor>(
        i, j, (Eigen::Matrix3d::Identity() * va).eval(),
        (Eigen::Matrix3d::Identity() * vg).eval()));
  }

  std::vector<OutputEstimate> tracking_push(const GnssFix& fix) {
    advance_to(fix.t);
    if (accumulator_stale_) {
      reset_to_cold_start();
      return cold_start_push(fix);
    }
    if (accum_.sample_count() == 0) {
      return {};  // no inertial bridge to the previous epoch: drop the fix
    }

    const int i = newest_epoch_;
    const int e = epoch_count_++;
    epoch_times_.push_back(fix.t);

    NavState predicted =
        accum_.predict(values_.at(i), cfg_.imu_noise.gravity);
    predicted.t = fix.t;
    graph_.add_variable({e, VariableKind::kPose}, predicted);
    graph_.add_variable({e, VariableKind::kVelocity}, predicted);
    graph_.add_variable({e, VariableKind::kBias}, predicted);
    values_.set(e, predicted);

    graph_.add_factor(std::make_shared<ImuFactor>(
        i, e, accum_, cfg_.imu_noise.gravity));
    add_bias_walk(i, e);
    graph_.add_factor(std::make_shared<GnssFactor>(
        e, fix.p, (fix.cov * cfg_.gnss_cov_scale).eval()));
    newest_epoch_ = e;

    run_optimize();

    if (std::isfinite(cfg_.marginalization_lag)) {
      double cutoff = fix.t - cfg_.marginalization_lag;
      const int first_unreleased =
          std::min(last_emitted_ + 1, newest_epoch_);
      cutoff = std::min(cutoff, epoch_times_[first_unreleased]);
      const MarginalizationResult res = marginalize(graph_, values_, cutoff);
      std::set<int> removed;
      for (const auto& key : res.removed_keys) removed.insert(key.epoch);
      for (int epoch : removed) values_.erase(epoch);
    }

    accum_ = PreintegratedImu(values_.at(e).bias, cfg_.max_imu_gap);
    mode_ = EngineMode::kTracking;
    return emit_ready(fix.t);
  }

  // --- emission ------------------------------------------------------------
  std::vector<OutputEstimate> emit_ready(double now) {
    std::vector<OutputEstimate> outs;
    const long target =
        static_cast<long>(newest_epoch_) - cfg_.smoothing_latency_tau;
    for (int e = last_emitted_ + 1; e <= target; ++e) {
      outs.push_back(make_output(e, EstimateSource::kOptimized, now));
      last_emitted_ = e;
    }
    return outs;
  }

  OutputEstimate make_output(int epoch, EstimateSource source, double now) {
    OutputEstimate out;
    out.state = values_.at(epoch);
    out.t = out.state.t;
    out.source = source;
    out.latency_s = std::max(0.0, now - out.t);
    out.factor_cost = epoch_factor_cost(epoch);
    last_output_t_ = out.t;
    return out;
  }

  /// Per-state cost: sum of the costs of all factors connected to the
  /// epoch, at the current estimates.
  double epoch_factor_cost(int epoch) const {
    double cost = 0.0;
    for (const auto& [id, f] : graph_.factors()) {
      for (const auto& key : f->keys()) {
        if (key.epoch == epoch) {
          cost += f->cost(values_);
          break;
        }
      }
    }
    return cost;
  }

  void run_optimize() {
    const auto t0 = std::chrono::steady_clock::now();
    optimize(graph_, values_, cfg_.solver);
    const auto t1 = std::chrono::steady_clock::now();
    opt_times_ms_.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }

  EngineConfig cfg_;
  EngineMode mode_ = EngineMode::kColdStart;
  bool initialized_ = false;

  bool have_imu_ = false, have_gnss_ = false;
  double last_imu_t_ = 0.0, last_gnss_t_ = 0.0;

  std::vector<GnssFix> fix_buffer_;
  std::vector<ImuSample> imu_buffer_;

  std::optional<ImuSample> pending_;
  double pending_start_ = 0.0;
  PreintegratedImu accum_;
  bool accumulator_stale_ = false;

  FactorGraph graph_;
  Values values_;
  int epoch_count_ = 0;
  std::vector<double> epoch_times_;
  int newest_epoch_ = -1;
  int last_emitted_ = -1;
  double last_output_t_ = -std::numeric_limits<double>::infinity();

  std::vector<double> opt_times_ms_;
};

struct RunResult {
  std::vector<OutputEstimate> outputs;
  std::vector<double> optimize_times_ms;
  EngineStatus final_status;
};

/// Feeds both streams through an engine in time order (GNSS first on ties)
/// and flushes the smoothing buffer at the end.
inline RunResult run_streams(const std::vector<ImuSample>& imu,
                             const std::vector<GnssFix>& gnss,
                             const EngineConfig& cfg) {
  FusionEngine engine(cfg);
  RunResult res;
  std::size_t i = 0, j = 0;
  while (i < imu.size() || j < gnss.size()) {
    const bool take_gnss =
        j < gnss.size() && (i >= imu.size() || gnss[j].t <= imu[i].t);
    if (take_gnss) {
      auto outs = engine.push_gnss(gnss[j++]);
      res.outputs.insert(res.outputs.end(), outs.begin(), outs.end());
    } else {
      if (auto out = engine.push_imu(imu[i++])) {
        res.outputs.push_back(*out);
      }
    }
  }
  auto flushed = engine.finalize();
  res.outputs.insert(res.outputs.end(), flushed.begin(), flushed.end());
  res.optimize_times_ms = engine.optimize_times_ms();
  res.final_status = engine.status();
  return res;
}

}  // namespace fgnav
