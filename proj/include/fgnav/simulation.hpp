// Synthetic-data oracle: analytic trajectories (straight / arc / stop
// segments at constant speed), exact closed-form IMU forward models, and
// noisy GNSS fixes with configurable outage bursts. Everything is a pure
// function of (spec, seed).

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fgnav/errors.hpp"
#include "fgnav/lie.hpp"
#include "fgnav/types.hpp"

namespace fgnav {

enum class MotionType { kStraight, kArc, kStop };

struct SegmentSpec {
  MotionType motion = MotionType::kStraight;
  double duration_s = 0.0;
  double speed_mps = 0.0;      // ignored for stop
  double yaw_rate_radps = 0.0; // arc only
};

struct TrajectorySpec {
  Eigen::Vector3d initial_position = Eigen::Vector3d::Zero();  // ENU, m
  double initial_heading_rad = 0.0;  // from +east, counterclockwise about up
  double start_t = 0.0;              // seconds, GPST
  double sample_rate_hz = 1.0;       // ground-truth output rate
  std::vector<SegmentSpec> segments;
};

/// Piecewise-analytic planar kinematics at constant altitude and level
/// attitude; heading follows the path tangent.
class TrajectoryModel {
 public:
  explicit TrajectoryModel(TrajectorySpec spec) : spec_(std::move(spec)) {
    if (spec_.segments.empty()) throw Error("trajectory has no segments");
    double t = spec_.start_t;
    Eigen::Vector3d p = spec_.initial_position;
    double heading = spec_.initial_heading_rad;
    double prev_speed = -1.0;
    for (const auto& seg : spec_.segments) {
      if (!(seg.duration_s > 0.0)) {
        throw Error("segment durations must be positive");
      }
      if (seg.motion == MotionType::kArc && seg.yaw_rate_radps == 0.0) {
        throw Error("arc segment requires a nonzero yaw rate");
      }
      const double speed = seg.motion == MotionType::kStop ? 0.0 : seg.speed_mps;
      if (speed < 0.0) throw Error("segment speed must be non-negative");
      if (prev_speed >= 0.0 && std::abs(speed - prev_speed) > 1e-9) {
        throw Error("speed discontinuity across segment boundary");
      }
      nodes_.push_back({t, p, heading, seg});
      const State end = eval(nodes_.back(), seg.duration_s);
      t += seg.duration_s;
      p = end.p;
      heading = end.heading;
      prev_speed = speed;
    }
    end_t_ = t;
  }

  double start_t() const { return spec_.start_t; }
  double end_t() const { return end_t_; }
  double duration() const { return end_t_ - spec_.start_t; }
  const TrajectorySpec& spec() const { return spec_; }

  NavState state_at(double t) const {
    const Node& node = node_for(t);
    const State s = eval(node, clamp_tau(node, t));
    NavState x;
    x.t = t;
    x.p = s.p;
    x.v = s.v;
    x.R = so3_exp(Eigen::Vector3d(0.0, 0.0, s.heading));
    return x;
  }

  /// Inertial acceleration in the navigation frame (gravity not included).
  Eigen::Vector3d accel_at(double t) const {
    const Node& node = node_for(t);
    if (node.seg.motion != MotionType::kArc) return Eigen::Vector3d::Zero();
    const double h = node.heading0 + node.seg.yaw_rate_radps * clamp_tau(node, t);
    const double vw = node.seg.speed_mps * node.seg.yaw_rate_radps;
    return {-vw * std::sin(h), vw * std::cos(h), 0.0};
  }

  /// Angular velocity in the navigation frame.
  Eigen::Vector3d gyro_at(double t) const {
    const Node& node = node_for(t);
    const double w =
        node.seg.motion == MotionType::kArc ? node.seg.yaw_rate_radps : 0.0;
    return {0.0, 0.0, w};
  }

 private:
  struct Node {
    double t0;
    Eigen::Vector3d p0;
    double heading0;
    SegmentSpec seg;
  };
  struct State {
    Eigen::Vector3d p;
    Eigen::Vector3d v;
    double heading;
  };

  static State eval(const Node& node, double tau) {
    const auto& seg = node.seg;
    State s{node.p0, Eigen::Vector3d::Zero(), node.heading0};
    switch (seg.motion) {
      case MotionType::kStop:
        break;
      case MotionType::kStraight: {
        const Eigen::Vector3d u(std::cos(node.heading0),
                                std::sin(node.heading0), 0.0);
        s.p += seg.speed_mps * tau * u;
        s.v = seg.speed_mps * u;
        break;
      }
      case MotionType::kArc: {
        const double w = seg.yaw_rate_radps;
        const double h = node.heading0 + w * tau;
        const double r = seg.speed_mps / w;
        s.p += Eigen::Vector3d(r * (std::sin(h) - std::sin(node.heading0)),
                               r * (std::cos(node.heading0) - std::cos(h)),
                               0.0);
        s.v = seg.speed_mps * Eigen::Vector3d(std::cos(h), std::sin(h), 0.0);
        s.heading = h;
        break;
      }
    }
    return s;
  }

  const Node& node_for(double t) const {
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      if (t >= it->t0 - 1e-12) return *it;
    }
    return nodes_.front();
  }
  double clamp_tau(const Node& node, double t) const {
    return std::clamp(t - node.t0, 0.0, node.seg.duration_s);
  }

  TrajectorySpec spec_;
  std::vector<Node> nodes_;
  double end_t_ = 0.0;
};

struct GroundTruth {
  double rate_hz = 1.0;
  std::vector<NavState> states;
  std::shared_ptr<const TrajectoryModel> model;
};

inline GroundTruth generate_trajectory(const TrajectorySpec& spec) {
  GroundTruth gt;
  gt.rate_hz = spec.sample_rate_hz;
  gt.model = std::make_shared<TrajectoryModel>(spec);
  const auto n = static_cast<std::int64_t>(
      std::floor(gt.model->duration() * spec.sample_rate_hz + 1e-9));
  gt.states.reserve(n + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    gt.states.push_back(
        gt.model->state_at(spec.start_t + k / spec.sample_rate_hz));
  }
  return gt;
}

/// Forward IMU model: f = R^T (a - g) + b_a + n_a, w = R^T omega + b_g + n_g,
/// white noise std = density * sqrt(rate). One extra sample is emitted at the
/// trajectory end so the final GNSS epoch is fully covered.
inline std::vector<ImuSample> simulate_imu(const GroundTruth& gt,
                                           const ImuNoiseParams& params,
                                           const ImuBias& true_bias,
                                           double rate_hz, unsigned seed) {
  if (!gt.model) throw Error("ground truth carries no analytic model");
  if (rate_hz < 2.0 * gt.rate_hz) {
    throw Error("imu rate must be at least twice the ground-truth rate");
  }
  const TrajectoryModel& model = *gt.model;
  std::mt19937 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double sa = params.accel_noise_density * std::sqrt(rate_hz);
  const double sg = params.gyro_noise_density * std::sqrt(rate_hz);

  const auto n =
      static_cast<std::int64_t>(std::llround(model.duration() * rate_hz));
  std::vector<ImuSample> out;
  out.reserve(n + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    const double t = model.start_t() + k / rate_hz;
    const NavState x = model.state_at(t);
    const Eigen::Matrix3d RT = x.R.matrix().transpose();
    ImuSample s;
    s.t = t;
    s.accel = RT * (model.accel_at(t) - params.gravity) + true_bias.accel;
    s.gyro = RT * model.gyro_at(t) + true_bias.gyro;
    for (int i = 0; i < 3; ++i) s.accel(i) += sa * unit(rng);
    for (int i = 0; i < 3; ++i) s.gyro(i) += sg * unit(rng);
    out.push_back(s);
  }
  return out;
}

struct OutagePattern {
  std::vector<std::pair<double, double>> intervals;  // [start, end) seconds

  bool suppressed(double t) const {
    for (const auto& [s, e] : intervals) {
      if (t >= s && t < e) return true;
    }
    return false;
  }
  static OutagePattern none() { return {}; }
};

inline void validate(const OutagePattern& pattern, double t0, double t1) {
  double last_end = t0;
  for (const auto& [s, e] : pattern.intervals) {
    if (!(s < e)) throw Error("outage interval must have positive length");
    if (s < last_end - 1e-9) throw Error("outage intervals overlap");
    if (s < t0 - 1e-9 || e > t1 + 1e-9) {
      throw Error("outage interval outside trajectory span");
    }
    last_end = e;
  }
}

/// Urban-style outage generator: bursts of 5-22 s separated by 5-14.5 s of
/// coverage, after an always-available head for cold start. Yields roughly
/// 40% GNSS availability on long runs.
inline OutagePattern draw_outage_bursts(double t0, double t1,
                                        double head_clear_s, unsigned seed) {
  OutagePattern pattern;
  std::mt19937 rng(seed ^ 0x9e3779b9u);
  std::uniform_real_distribution<double> burst(5.0, 22.0);
  std::uniform_real_distribution<double> gap(5.0, 14.5);
  double t = t0 + head_clear_s;
  while (t < t1) {
    const double end = std::min(t + burst(rng), t1);
    pattern.intervals.emplace_back(t, end);
    t = end + gap(rng);
  }
  validate(pattern, t0, t1);
  return pattern;
}

/// Noisy position fixes on the GNSS epoch grid, suppressed inside outages.
/// The attached covariance is diag(sigma^2) with a 1e-4 m^2 floor.
inline std::vector<GnssFix> simulate_gnss(const GroundTruth& gt,
                                          const Eigen::Vector3d& sigma,
                                          const OutagePattern& pattern,
                                          double rate_hz, unsigned seed) {
  if (!gt.model) throw Error("ground truth carries no analytic model");
  if (rate_hz > gt.rate_hz + 1e-12) {
    throw Error("gnss rate must not exceed the ground-truth rate");
  }
  const TrajectoryModel& model = *gt.model;
  validate(pattern, model.start_t(), model.end_t());
  std::mt19937 rng(seed ^ 0x7f4a7c15u);
  std::normal_distribution<double> unit(0.0, 1.0);
  constexpr double kCovFloor = 1e-4;  // m^2

  std::vector<GnssFix> out;
  const auto n =
      static_cast<std::int64_t>(std::floor(model.duration() * rate_hz + 1e-9));
  for (std::int64_t k = 0; k <= n; ++k) {
    const double t = model.start_t() + k / rate_hz;
    // Noise is drawn on every epoch so the stream past an outage does not
    // depend on the outage pattern.
    Eigen::Vector3d noise;
    for (int i = 0; i < 3; ++i) noise(i) = sigma(i) * unit(rng);
    if (pattern.suppressed(t)) continue;
    GnssFix fix;
    fix.t = t;
    fix.p = model.state_at(t).p + noise;
    fix.cov = Eigen::Vector3d(std::max(sigma(0) * sigma(0), kCovFloor),
                              std::max(sigma(1) * sigma(1), kCovFloor),
                              std::max(sigma(2) * sigma(2), kCovFloor))
                  .asDiagonal();
    fix.quality = GnssQuality::kFix;
    out.push_back(fix);
  }
  return out;
}

/// A fully specified simulation: trajectory, sensor characteristics, outages.
struct Scenario {
  std::string name;
  TrajectorySpec trajectory;
  ImuNoiseParams imu_noise;
  ImuBias true_bias;
  double imu_rate_hz = 200.0;
  double gnss_rate_hz = 1.0;
  Eigen::Vector3d gnss_sigma = Eigen::Vector3d(5.0, 5.0, 10.0);
  bool with_outages = false;
  double head_clear_s = 12.0;
};

struct SimulatedDataset {
  GroundTruth gt;
  std::vector<ImuSample> imu;
  std::vector<GnssFix> gnss;
  OutagePattern outages;
};

inline SimulatedDataset simulate_scenario(const Scenario& scenario,
                                          unsigned seed) {
  SimulatedDataset data;
  data.gt = generate_trajectory(scenario.trajectory);
  data.imu = simulate_imu(data.gt, scenario.imu_noise, scenario.true_bias,
                          scenario.imu_rate_hz, seed);
  data.outages = scenario.with_outages
                     ? draw_outage_bursts(data.gt.model->start_t(),
                                          data.gt.model->end_t(),
                                          scenario.head_clear_s, seed)
                     : OutagePattern::none();
  data.gnss = simulate_gnss(data.gt, scenario.gnss_sigma, data.outages,
                            scenario.gnss_rate_hz, seed);
  return data;
}

/// Two rounded-rectangle loops at 5 m/s with outage bursts shaped for roughly
/// 40% GNSS availability. The acceptance scenario for availability and
/// marginalization trade-offs.
inline Scenario urban_scenario() {
  Scenario s;
  s.name = "urban";
  s.trajectory.sample_rate_hz = 1.0;
  const double speed = 5.0;
  const double yaw_rate = 0.1;
  const double quarter_turn = (M_PI / 2.0) / yaw_rate;
  for (int loop = 0; loop < 2; ++loop) {
    for (int leg = 0; leg < 4; ++leg) {
      s.trajectory.segments.push_back(
          {MotionType::kStraight, 35.0, speed, 0.0});
      s.trajectory.segments.push_back(
          {MotionType::kArc, quarter_turn, speed, yaw_rate});
    }
  }
  s.true_bias.accel = Eigen::Vector3d(0.05, -0.03, 0.08);
  s.true_bias.gyro = Eigen::Vector3d(2e-3, -1e-3, 1.5e-3);
  s.gnss_sigma = Eigen::Vector3d(5.0, 5.0, 10.0);
  s.with_outages = true;
  s.head_clear_s = 12.0;
  return s;
}

/// 60 s single-turn run with full GNSS coverage; used for the batch
/// equivalence check.
inline Scenario short60_scenario() {
  Scenario s;
  s.name = "short60";
  s.trajectory.sample_rate_hz = 1.0;
  const double speed = 5.0;
  s.trajectory.segments.push_back({MotionType::kStraight, 20.0, speed, 0.0});
  s.trajectory.segments.push_back(
      {MotionType::kArc, (M_PI / 2.0) / 0.1, speed, 0.1});
  s.trajectory.segments.push_back(
      {MotionType::kStraight, 40.0 - (M_PI / 2.0) / 0.1, speed, 0.0});
  s.true_bias.accel = Eigen::Vector3d(0.03, -0.02, 0.05);
  s.true_bias.gyro = Eigen::Vector3d(1e-3, 5e-4, -8e-4);
  s.gnss_sigma = Eigen::Vector3d(2.0, 2.0, 4.0);
  s.with_outages = false;
  return s;
}

}  // namespace fgnav
