// File formats: CSV readers/writers for IMU, GNSS, ground-truth, and
// estimate streams; dataset directory bundles with a JSON meta sidecar;
// evaluation report emission; scenario (de)serialization.
//
// All numeric CSV fields are written with nine fixed decimals and parsed
// with std::from_chars; any malformed row raises ParseError carrying the
// 1-based line number.

#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "fgnav/errors.hpp"
#include "fgnav/geodesy.hpp"
#include "fgnav/metrics.hpp"
#include "fgnav/simulation.hpp"
#include "fgnav/types.hpp"

namespace fgnav {

namespace io_detail {

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.9f", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

inline double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError(line_no,
                     "expected a number, got '" + std::string(field) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

/// Reads a CSV file, validates the exact header, and hands each data row
/// (split into fields) to `row_fn(fields, line_no)`.
template <typename RowFn>
void read_csv(const std::filesystem::path& path, std::string_view header,
              std::size_t n_fields, RowFn&& row_fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError(1, "missing header in " + path.string());
  }
  ++line_no;
  if (strip_cr(line) != header) {
    throw ParseError(1, "bad header in " + path.string() + ": expected '" +
                            std::string(header) + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = strip_cr(line);
    if (row.empty()) continue;
    const auto fields = split_fields(row);
    if (fields.size() != n_fields) {
      throw ParseError(line_no, "expected " + std::to_string(n_fields) +
                                    " fields, got " +
                                    std::to_string(fields.size()));
    }
    row_fn(fields, line_no);
  }
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

template <typename GetT>
void require_strictly_increasing(std::size_t n, GetT&& t_of,
                                 const std::string& what) {
  for (std::size_t k = 1; k < n; ++k) {
    if (!(t_of(k) > t_of(k - 1))) {
      throw NonMonotonicTime(what + " times must strictly increase (row " +
                             std::to_string(k + 1) + ")");
    }
  }
}

}  // namespace io_detail

// --- IMU -------------------------------------------------------------------

inline constexpr std::string_view kImuHeader =
    "t_gpst_s,acc_x,acc_y,acc_z,gyr_x,gyr_y,gyr_z";

inline void write_imu_csv(const std::filesystem::path& path,
                          const std::vector<ImuSample>& samples) {
  auto out = io_detail::open_out(path);
  out << kImuHeader << '\n';
  for (const auto& s : samples) {
    out << io_detail::format_double(s.t);
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(s.accel[i]);
    }
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(s.gyro[i]);
    }
    out << '\n';
  }
}

inline std::vector<ImuSample> read_imu_csv(
    const std::filesystem::path& path) {
  std::vector<ImuSample> samples;
  io_detail::read_csv(path, kImuHeader, 7, [&](const auto& f,
                                               std::size_t line_no) {
    ImuSample s;
    s.t = io_detail::parse_double(f[0], line_no);
    for (int i = 0; i < 3; ++i) {
      s.accel[i] = io_detail::parse_double(f[1 + i], line_no);
      s.gyro[i] = io_detail::parse_double(f[4 + i], line_no);
    }
    samples.push_back(s);
  });
  io_detail::require_strictly_increasing(
      samples.size(), [&](std::size_t k) { return samples[k].t; }, "imu");
  return samples;
}

// --- GNSS ------------------------------------------------------------------

inline constexpr std::string_view kGnssHeader =
    "t_gpst_s,east_m,north_m,up_m,cov_ee,cov_nn,cov_uu,cov_en,cov_eu,cov_nu,"
    "quality";

inline int quality_code(GnssQuality q) {
  switch (q) {
    case GnssQuality::kFix: return 1;
    case GnssQuality::kFloat: return 2;
    case GnssQuality::kSingle: return 5;
  }
  return 5;
}

inline GnssQuality quality_from_code(int code, std::size_t line_no) {
  switch (code) {
    case 1: return GnssQuality::kFix;
    case 2: return GnssQuality::kFloat;
    case 5: return GnssQuality::kSingle;
    default:
      throw ParseError(line_no, "unknown gnss quality code " +
                                    std::to_string(code) +
                                    " (expected 1, 2, or 5)");
  }
}

inline void write_gnss_csv(const std::filesystem::path& path,
                           const std::vector<GnssFix>& fixes) {
  auto out = io_detail::open_out(path);
  out << kGnssHeader << '\n';
  for (const auto& f : fixes) {
    out << io_detail::format_double(f.t);
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(f.p[i]);
    }
    out << ',' << io_detail::format_double(f.cov(0, 0)) << ','
        << io_detail::format_double(f.cov(1, 1)) << ','
        << io_detail::format_double(f.cov(2, 2)) << ','
        << io_detail::format_double(f.cov(0, 1)) << ','
        << io_detail::format_double(f.cov(0, 2)) << ','
        << io_detail::format_double(f.cov(1, 2));
    out << ',' << quality_code(f.quality) << '\n';
  }
}

inline std::vector<GnssFix> read_gnss_csv(const std::filesystem::path& path) {
  std::vector<GnssFix> fixes;
  io_detail::read_csv(path, kGnssHeader, 11, [&](const auto& f,
                                                 std::size_t line_no) {
    GnssFix fix;
    fix.t = io_detail::parse_double(f[0], line_no);
    for (int i = 0; i < 3; ++i) {
      fix.p[i] = io_detail::parse_double(f[1 + i], line_no);
    }
    const double ee = io_detail::parse_double(f[4], line_no);
    const double nn = io_detail::parse_double(f[5], line_no);
    const double uu = io_detail::parse_double(f[6], line_no);
    const double en = io_detail::parse_double(f[7], line_no);
    const double eu = io_detail::parse_double(f[8], line_no);
    const double nu = io_detail::parse_double(f[9], line_no);
    fix.cov << ee, en, eu, en, nn, nu, eu, nu, uu;
    const double code = io_detail::parse_double(f[10], line_no);
    fix.quality = quality_from_code(static_cast<int>(code), line_no);
    fixes.push_back(fix);
  });
  io_detail::require_strictly_increasing(
      fixes.size(), [&](std::size_t k) { return fixes[k].t; }, "gnss");
  return fixes;
}

// --- ground truth ----------------------------------------------------------

inline constexpr std::string_view kGtHeader = "t_gpst_s,east_m,north_m,up_m";

inline void write_gt_csv(const std::filesystem::path& path,
                         const GtSeries& gt) {
  auto out = io_detail::open_out(path);
  out << kGtHeader << '\n';
  for (std::size_t k = 0; k < gt.t.size(); ++k) {
    out << io_detail::format_double(gt.t[k]);
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(gt.p[k][i]);
    }
    out << '\n';
  }
}

inline GtSeries read_gt_csv(const std::filesystem::path& path) {
  GtSeries gt;
  io_detail::read_csv(path, kGtHeader, 4,
                      [&](const auto& f, std::size_t line_no) {
                        gt.t.push_back(io_detail::parse_double(f[0], line_no));
                        Eigen::Vector3d p;
                        for (int i = 0; i < 3; ++i) {
                          p[i] = io_detail::parse_double(f[1 + i], line_no);
                        }
                        gt.p.push_back(p);
                      });
  io_detail::require_strictly_increasing(
      gt.t.size(), [&](std::size_t k) { return gt.t[k]; }, "ground-truth");
  return gt;
}

inline GtSeries to_gt_series(const GroundTruth& gt) {
  GtSeries out;
  out.t.reserve(gt.states.size());
  out.p.reserve(gt.states.size());
  for (const auto& s : gt.states) {
    out.t.push_back(s.t);
    out.p.push_back(s.p);
  }
  return out;
}

// --- estimates -------------------------------------------------------------

inline constexpr std::string_view kEstimatesHeader =
    "t_gpst_s,east_m,north_m,up_m,v_east,v_north,v_up,source,latency_s,"
    "factor_cost";

inline void write_estimates_csv(const std::filesystem::path& path,
                                const std::vector<EstimateRow>& rows) {
  auto out = io_detail::open_out(path);
  out << kEstimatesHeader << '\n';
  for (const auto& r : rows) {
    out << io_detail::format_double(r.t);
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(r.p[i]);
    }
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(r.v[i]);
    }
    out << ',' << to_string(r.source) << ','
        << io_detail::format_double(r.latency_s) << ','
        << io_detail::format_double(r.factor_cost) << '\n';
  }
}

inline std::vector<EstimateRow> read_estimates_csv(
    const std::filesystem::path& path) {
  std::vector<EstimateRow> rows;
  io_detail::read_csv(path, kEstimatesHeader, 10, [&](const auto& f,
                                                      std::size_t line_no) {
    EstimateRow r;
    r.t = io_detail::parse_double(f[0], line_no);
    for (int i = 0; i < 3; ++i) {
      r.p[i] = io_detail::parse_double(f[1 + i], line_no);
      r.v[i] = io_detail::parse_double(f[4 + i], line_no);
    }
    if (f[7] == "optimized") {
      r.source = EstimateSource::kOptimized;
    } else if (f[7] == "imu_propagated") {
      r.source = EstimateSource::kImuPropagated;
    } else {
      throw ParseError(line_no,
                       "unknown source '" + std::string(f[7]) + "'");
    }
    r.latency_s = io_detail::parse_double(f[8], line_no);
    r.factor_cost = io_detail::parse_double(f[9], line_no);
    rows.push_back(r);
  });
  io_detail::require_strictly_increasing(
      rows.size(), [&](std::size_t k) { return rows[k].t; }, "estimate");
  return rows;
}

// --- dataset bundle --------------------------------------------------------

struct DatasetMeta {
  std::string name = "unknown";
  Geodetic anchor;  // ENU origin; defaults to lat/lon/alt zero
  unsigned seed = 0;
};

inline void write_meta_json(const std::filesystem::path& path,
                            const DatasetMeta& meta) {
  nlohmann::ordered_json j;
  j["name"] = meta.name;
  j["anchor_lat_deg"] = meta.anchor.lat_deg;
  j["anchor_lon_deg"] = meta.anchor.lon_deg;
  j["anchor_alt_m"] = meta.anchor.alt_m;
  j["seed"] = meta.seed;
  auto out = io_detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline DatasetMeta read_meta_json(const std::filesystem::path& path) {
  DatasetMeta meta;
  if (!std::filesystem::exists(path)) return meta;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, "invalid JSON in " + path.string() + ": " + e.what());
  }
  meta.name = j.value("name", meta.name);
  meta.anchor.lat_deg = j.value("anchor_lat_deg", meta.anchor.lat_deg);
  meta.anchor.lon_deg = j.value("anchor_lon_deg", meta.anchor.lon_deg);
  meta.anchor.alt_m = j.value("anchor_alt_m", meta.anchor.alt_m);
  meta.seed = j.value("seed", meta.seed);
  return meta;
}

struct DatasetBundle {
  std::vector<ImuSample> imu;
  std::vector<GnssFix> gnss;
  std::optional<GtSeries> gt;
  DatasetMeta meta;
};

inline DatasetBundle load_dataset(const std::filesystem::path& dir) {
  DatasetBundle bundle;
  bundle.imu = read_imu_csv(dir / "imu.csv");
  bundle.gnss = read_gnss_csv(dir / "gnss.csv");
  if (std::filesystem::exists(dir / "gt.csv")) {
    bundle.gt = read_gt_csv(dir / "gt.csv");
  }
  bundle.meta = read_meta_json(dir / "meta.json");
  if (bundle.imu.empty()) throw EmptyInput("imu.csv has no samples");
  if (bundle.gnss.empty()) throw EmptyInput("gnss.csv has no fixes");
  return bundle;
}

inline void save_dataset(const std::filesystem::path& dir,
                         const SimulatedDataset& data,
                         const DatasetMeta& meta) {
  std::filesystem::create_directories(dir);
  write_imu_csv(dir / "imu.csv", data.imu);
  write_gnss_csv(dir / "gnss.csv", data.gnss);
  write_gt_csv(dir / "gt.csv", to_gt_series(data.gt));
  write_meta_json(dir / "meta.json", meta);
}

// --- evaluation outputs ----------------------------------------------------

/// metrics.json carries only deterministic quantities so that repeated runs
/// on the same inputs produce byte-identical files; wall-clock timing goes
/// to timing.json.
inline void write_metrics_json(const std::filesystem::path& path,
                               const EvaluationReport& rep) {
  nlohmann::ordered_json j;
  j["rmse_3d_m"] = rep.rmse_3d_m;
  j["rmse_east_m"] = rep.rmse_axes_m.x();
  j["rmse_north_m"] = rep.rmse_axes_m.y();
  j["rmse_up_m"] = rep.rmse_axes_m.z();
  nlohmann::ordered_json avail;
  for (std::size_t k = 0; k < rep.thresholds_m.size(); ++k) {
    nlohmann::ordered_json row;
    row["threshold_m"] = rep.thresholds_m[k];
    row["availability_pct"] = rep.availability_pct[k];
    avail.push_back(row);
  }
  j["availability"] = std::move(avail);
  j["n_estimates"] = rep.n_estimates;
  j["n_optimized"] = rep.n_optimized;
  j["n_propagated"] = rep.n_propagated;
  j["dropped_outside_gt"] = rep.dropped_outside_gt;
  j["mean_latency_s"] = rep.mean_latency_s;
  auto out = io_detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline void write_timing_json(const std::filesystem::path& path,
                              const TimingStats& st) {
  nlohmann::ordered_json j;
  j["mean_ms"] = st.mean_ms;
  j["p95_ms"] = st.p95_ms;
  j["max_ms"] = st.max_ms;
  j["count"] = st.count;
  auto out = io_detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline constexpr std::string_view kAvailabilityHeader =
    "threshold_m,availability_pct";

inline void write_availability_csv(const std::filesystem::path& path,
                                   const EvaluationReport& rep) {
  auto out = io_detail::open_out(path);
  out << kAvailabilityHeader << '\n';
  for (std::size_t k = 0; k < rep.thresholds_m.size(); ++k) {
    out << io_detail::format_double(rep.thresholds_m[k]) << ','
        << io_detail::format_double(rep.availability_pct[k]) << '\n';
  }
}

inline constexpr std::string_view kTrajectoryHeader =
    "t_gpst_s,est_east_m,est_north_m,est_up_m,gt_east_m,gt_north_m,gt_up_m,"
    "err_east_m,err_north_m,err_up_m,err_3d_m";

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const PairedSeries& paired) {
  auto out = io_detail::open_out(path);
  out << kTrajectoryHeader << '\n';
  for (const auto& s : paired.samples) {
    out << io_detail::format_double(s.t);
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(s.estimate[i]);
    }
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(s.truth[i]);
    }
    for (int i = 0; i < 3; ++i) {
      out << ',' << io_detail::format_double(s.error[i]);
    }
    out << ',' << io_detail::format_double(s.error.norm()) << '\n';
  }
}

// --- scenario files --------------------------------------------------------

inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["name"] = sc.name;
  nlohmann::ordered_json traj;
  traj["initial_position"] = {sc.trajectory.initial_position.x(),
                              sc.trajectory.initial_position.y(),
                              sc.trajectory.initial_position.z()};
  traj["initial_heading_rad"] = sc.trajectory.initial_heading_rad;
  traj["start_t"] = sc.trajectory.start_t;
  traj["sample_rate_hz"] = sc.trajectory.sample_rate_hz;
  nlohmann::ordered_json segs = nlohmann::ordered_json::array();
  for (const auto& seg : sc.trajectory.segments) {
    nlohmann::ordered_json s;
    switch (seg.motion) {
      case MotionType::kStraight: s["type"] = "straight"; break;
      case MotionType::kArc: s["type"] = "arc"; break;
      case MotionType::kStop: s["type"] = "stop"; break;
    }
    s["duration_s"] = seg.duration_s;
    if (seg.motion != MotionType::kStop) s["speed_mps"] = seg.speed_mps;
    if (seg.motion == MotionType::kArc) {
      s["yaw_rate_radps"] = seg.yaw_rate_radps;
    }
    segs.push_back(s);
  }
  traj["segments"] = std::move(segs);
  j["trajectory"] = std::move(traj);
  nlohmann::ordered_json imu;
  imu["accel_noise_density"] = sc.imu_noise.accel_noise_density;
  imu["gyro_noise_density"] = sc.imu_noise.gyro_noise_density;
  imu["accel_bias_rw"] = sc.imu_noise.accel_bias_rw;
  imu["gyro_bias_rw"] = sc.imu_noise.gyro_bias_rw;
  j["imu_noise"] = std::move(imu);
  j["true_bias"] = {{"accel",
                     {sc.true_bias.accel.x(), sc.true_bias.accel.y(),
                      sc.true_bias.accel.z()}},
                    {"gyro",
                     {sc.true_bias.gyro.x(), sc.true_bias.gyro.y(),
                      sc.true_bias.gyro.z()}}};
  j["imu_rate_hz"] = sc.imu_rate_hz;
  j["gnss_rate_hz"] = sc.gnss_rate_hz;
  j["gnss_sigma_enu"] = {sc.gnss_sigma.x(), sc.gnss_sigma.y(),
                         sc.gnss_sigma.z()};
  j["with_outages"] = sc.with_outages;
  j["head_clear_s"] = sc.head_clear_s;
  return j;
}

inline Eigen::Vector3d vector3_from_json(const nlohmann::json& j,
                                         const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(what + " must be an array of three numbers");
  }
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(),
                         j[2].get<double>());
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.name = j.value("name", std::string("custom"));
  if (!j.contains("trajectory")) {
    throw Error("scenario is missing the 'trajectory' object");
  }
  const auto& traj = j.at("trajectory");
  if (traj.contains("initial_position")) {
    sc.trajectory.initial_position =
        vector3_from_json(traj.at("initial_position"), "initial_position");
  }
  sc.trajectory.initial_heading_rad =
      traj.value("initial_heading_rad", sc.trajectory.initial_heading_rad);
  sc.trajectory.start_t = traj.value("start_t", sc.trajectory.start_t);
  sc.trajectory.sample_rate_hz =
      traj.value("sample_rate_hz", sc.trajectory.sample_rate_hz);
  if (!traj.contains("segments") || !traj.at("segments").is_array() ||
      traj.at("segments").empty()) {
    throw Error("scenario trajectory needs a non-empty 'segments' array");
  }
  for (const auto& s : traj.at("segments")) {
    SegmentSpec seg;
    const std::string type = s.value("type", std::string());
    if (type == "straight") {
      seg.motion = MotionType::kStraight;
    } else if (type == "arc") {
      seg.motion = MotionType::kArc;
    } else if (type == "stop") {
      seg.motion = MotionType::kStop;
    } else {
      throw Error("unknown segment type '" + type +
                  "' (expected straight, arc, or stop)");
    }
    if (!s.contains("duration_s")) {
      throw Error("segment is missing 'duration_s'");
    }
    seg.duration_s = s.at("duration_s").get<double>();
    seg.speed_mps = s.value("speed_mps", 0.0);
    seg.yaw_rate_radps = s.value("yaw_rate_radps", 0.0);
    sc.trajectory.segments.push_back(seg);
  }
  if (j.contains("imu_noise")) {
    const auto& n = j.at("imu_noise");
    sc.imu_noise.accel_noise_density =
        n.value("accel_noise_density", sc.imu_noise.accel_noise_density);
    sc.imu_noise.gyro_noise_density =
        n.value("gyro_noise_density", sc.imu_noise.gyro_noise_density);
    sc.imu_noise.accel_bias_rw =
        n.value("accel_bias_rw", sc.imu_noise.accel_bias_rw);
    sc.imu_noise.gyro_bias_rw =
        n.value("gyro_bias_rw", sc.imu_noise.gyro_bias_rw);
  }
  if (j.contains("true_bias")) {
    const auto& b = j.at("true_bias");
    if (b.contains("accel")) {
      sc.true_bias.accel = vector3_from_json(b.at("accel"), "true_bias.accel");
    }
    if (b.contains("gyro")) {
      sc.true_bias.gyro = vector3_from_json(b.at("gyro"), "true_bias.gyro");
    }
  }
  sc.imu_rate_hz = j.value("imu_rate_hz", sc.imu_rate_hz);
  sc.gnss_rate_hz = j.value("gnss_rate_hz", sc.gnss_rate_hz);
  if (j.contains("gnss_sigma_enu")) {
    sc.gnss_sigma = vector3_from_json(j.at("gnss_sigma_enu"),
                                      "gnss_sigma_enu");
  }
  sc.with_outages = j.value("with_outages", sc.with_outages);
  sc.head_clear_s = j.value("head_clear_s", sc.head_clear_s);
  return sc;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, "invalid JSON in " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario_file(const std::filesystem::path& path,
                               const Scenario& sc) {
  auto out = io_detail::open_out(path);
  out << scenario_to_json(sc).dump(2) << '\n';
}

}  // namespace fgnav
