#include "fgnav/csv_io.hpp"
#include "fgnav/metrics.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fgnav/simulation.hpp"
#include "support/helpers.hpp"

namespace fgnav {
namespace {

namespace fs = std::filesystem;

fs::path tmp_dir(const std::string& name) {
  const fs::path dir = fs::path("io_test_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::vector<ImuSample> sample_imu() {
  std::vector<ImuSample> samples;
  for (int k = 0; k < 5; ++k) {
    ImuSample s;
    s.t = 0.005 * k;
    s.accel = Eigen::Vector3d(0.123456789 + k, -1.5, 9.80665);
    s.gyro = Eigen::Vector3d(1e-3 * k, -2e-3, 0.25);
    samples.push_back(s);
  }
  return samples;
}

std::vector<GnssFix> sample_gnss() {
  std::vector<GnssFix> fixes;
  for (int k = 0; k < 4; ++k) {
    GnssFix f;
    f.t = static_cast<double>(k);
    f.p = Eigen::Vector3d(1.5 * k, -0.25 * k, 4.0);
    Eigen::Matrix3d cov;
    cov << 4.0, 0.5, 0.1, 0.5, 4.0, 0.2, 0.1, 0.2, 16.0;
    f.cov = cov;
    f.quality = k % 2 == 0 ? GnssQuality::kFix : GnssQuality::kFloat;
    fixes.push_back(f);
  }
  return fixes;
}

TEST(CsvRoundTrip, ImuIsByteStable) {
  const fs::path dir = tmp_dir("imu_rt");
  write_imu_csv(dir / "a.csv", sample_imu());
  const auto restored = read_imu_csv(dir / "a.csv");
  write_imu_csv(dir / "b.csv", restored);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  ASSERT_EQ(restored.size(), 5u);
  EXPECT_NEAR(restored[1].accel.x(), 1.123456789, 1e-9);
}

TEST(CsvRoundTrip, GnssPreservesCovarianceAndQuality) {
  const fs::path dir = tmp_dir("gnss_rt");
  const auto fixes = sample_gnss();
  write_gnss_csv(dir / "a.csv", fixes);
  const auto restored = read_gnss_csv(dir / "a.csv");
  write_gnss_csv(dir / "b.csv", restored);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  ASSERT_EQ(restored.size(), fixes.size());
  for (std::size_t k = 0; k < fixes.size(); ++k) {
    EXPECT_LT((restored[k].cov - fixes[k].cov).norm(), 1e-9);
    EXPECT_EQ(restored[k].quality, fixes[k].quality);
  }
}

TEST(CsvRoundTrip, EstimatesPreserveSourceLabels) {
  const fs::path dir = tmp_dir("est_rt");
  std::vector<EstimateRow> rows(3);
  rows[0] = {1.0, {1, 2, 3}, {0.1, 0.2, 0.3}, EstimateSource::kOptimized,
             0.0, 12.5};
  rows[1] = {2.0, {4, 5, 6}, {0.2, 0.1, 0.0},
             EstimateSource::kImuPropagated, 0.4, 0.0};
  rows[2] = {3.0, {7, 8, 9}, {0.0, 0.0, 0.0}, EstimateSource::kOptimized,
             2.0, 3.25};
  write_estimates_csv(dir / "a.csv", rows);
  const auto restored = read_estimates_csv(dir / "a.csv");
  write_estimates_csv(dir / "b.csv", restored);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  ASSERT_EQ(restored.size(), 3u);
  EXPECT_EQ(restored[0].source, EstimateSource::kOptimized);
  EXPECT_EQ(restored[1].source, EstimateSource::kImuPropagated);
  EXPECT_NEAR(restored[2].factor_cost, 3.25, 1e-9);
}

TEST(CsvErrors, ReportOneBasedLineNumbers) {
  const fs::path dir = tmp_dir("errors");

  spit(dir / "bad_header.csv", "time,ax\n1,2\n");
  try {
    read_imu_csv(dir / "bad_header.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 1u);
  }

  spit(dir / "bad_fields.csv",
       std::string(kImuHeader) + "\n0,1,2,3,4,5,6\n0.1,1,2,3\n");
  try {
    read_imu_csv(dir / "bad_fields.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
  }

  spit(dir / "bad_number.csv",
       std::string(kGtHeader) + "\n0,1,2,3\n1,x,2,3\n");
  try {
    read_gt_csv(dir / "bad_number.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }

  spit(dir / "bad_quality.csv",
       std::string(kGnssHeader) + "\n0,1,2,3,1,1,1,0,0,0,9\n");
  EXPECT_THROW(read_gnss_csv(dir / "bad_quality.csv"), ParseError);

  EXPECT_THROW(read_imu_csv(dir / "missing.csv"), IoError);
}

TEST(CsvErrors, NonMonotonicTimesAreRejectedOnIngest) {
  const fs::path dir = tmp_dir("monotonic");
  spit(dir / "gt.csv", std::string(kGtHeader) + "\n0,0,0,0\n2,0,0,0\n1,0,0,0\n");
  EXPECT_THROW(read_gt_csv(dir / "gt.csv"), NonMonotonicTime);

  auto samples = sample_imu();
  samples[3].t = samples[2].t;  // duplicate timestamp
  write_imu_csv(dir / "imu.csv", samples);
  EXPECT_THROW(read_imu_csv(dir / "imu.csv"), NonMonotonicTime);
}

TEST(DatasetBundle, SaveLoadRoundTripWithMeta) {
  const fs::path dir = tmp_dir("bundle");
  const SimulatedDataset data = simulate_scenario(short60_scenario(), 12);
  DatasetMeta meta;
  meta.name = "short60";
  meta.anchor = Geodetic{22.3, 114.17, 5.0};
  meta.seed = 12;
  save_dataset(dir, data, meta);

  const DatasetBundle bundle = load_dataset(dir);
  EXPECT_EQ(bundle.imu.size(), data.imu.size());
  EXPECT_EQ(bundle.gnss.size(), data.gnss.size());
  ASSERT_TRUE(bundle.gt.has_value());
  EXPECT_EQ(bundle.gt->t.size(), data.gt.states.size());
  EXPECT_EQ(bundle.meta.name, "short60");
  EXPECT_NEAR(bundle.meta.anchor.lat_deg, 22.3, 1e-12);
  EXPECT_EQ(bundle.meta.seed, 12u);

  // Values survive the fixed-decimal encoding to within half an ulp of it.
  EXPECT_LT((bundle.imu[100].accel - data.imu[100].accel).norm(), 1e-8);
}

TEST(DatasetBundle, MissingMetaFallsBackToDefaults) {
  const fs::path dir = tmp_dir("nometa");
  const SimulatedDataset data = simulate_scenario(short60_scenario(), 13);
  save_dataset(dir, data, DatasetMeta{});
  fs::remove(dir / "meta.json");
  const DatasetBundle bundle = load_dataset(dir);
  EXPECT_EQ(bundle.meta.name, "unknown");
  EXPECT_EQ(bundle.meta.anchor.lat_deg, 0.0);
}

TEST(Alignment, LinearInterpolationBetweenTruthEpochs) {
  GtSeries gt;
  gt.t = {0.0, 2.0};
  gt.p = {Eigen::Vector3d::Zero(), Eigen::Vector3d(2.0, 4.0, 6.0)};
  EXPECT_LT((interpolate_gt(gt, 0.5) - Eigen::Vector3d(0.5, 1.0, 1.5))
                .norm(),
            1e-12);
  EXPECT_LT((interpolate_gt(gt, 2.0) - Eigen::Vector3d(2.0, 4.0, 6.0))
                .norm(),
            1e-12);
}

TEST(Alignment, DropsEstimatesOutsideTruthSpan) {
  GtSeries gt;
  gt.t = {10.0, 11.0, 12.0};
  gt.p = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
          Eigen::Vector3d::Zero()};
  std::vector<EstimateRow> rows(4);
  rows[0].t = 9.0;   // before
  rows[1].t = 10.5;  // inside
  rows[2].t = 11.5;  // inside
  rows[3].t = 13.0;  // after
  const PairedSeries paired = align_to_ground_truth(rows, gt);
  EXPECT_EQ(paired.samples.size(), 2u);
  EXPECT_EQ(paired.dropped_outside_gt, 2);

  std::vector<EstimateRow> disjoint(1);
  disjoint[0].t = 100.0;
  EXPECT_THROW(align_to_ground_truth(disjoint, gt), EmptyOverlap);
  EXPECT_THROW(align_to_ground_truth(rows, GtSeries{}), EmptyInput);
}

TEST(Rmse, MatchesHandComputedValues) {
  GtSeries gt;
  gt.t = {0.0, 1.0};
  gt.p = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  std::vector<EstimateRow> rows(2);
  rows[0].t = 0.0;
  rows[0].p = Eigen::Vector3d(3.0, 4.0, 0.0);  // error 5
  rows[1].t = 1.0;
  rows[1].p = Eigen::Vector3d(0.0, 0.0, 5.0);  // error 5
  const PairedSeries paired = align_to_ground_truth(rows, gt);
  EXPECT_NEAR(rmse_3d(paired), 5.0, 1e-12);

  const Eigen::Vector3d axes = rmse_per_axis(paired);
  // 3-D RMSE^2 equals the sum of per-axis RMSE^2.
  EXPECT_NEAR(axes.squaredNorm(), rmse_3d(paired) * rmse_3d(paired), 1e-9);
  EXPECT_THROW(rmse_3d(PairedSeries{}), EmptyInput);
}

TEST(Availability, CountsServedTruthEpochs) {
  GtSeries gt;
  for (int k = 0; k < 10; ++k) {
    gt.t.push_back(static_cast<double>(k));
    gt.p.push_back(Eigen::Vector3d::Zero());
  }
  // Estimates for the first five epochs only, each with a 1 m error.
  std::vector<EstimateRow> rows;
  for (int k = 0; k < 5; ++k) {
    EstimateRow r;
    r.t = static_cast<double>(k);
    r.p = Eigen::Vector3d(1.0, 0.0, 0.0);
    rows.push_back(r);
  }
  EXPECT_NEAR(service_availability(rows, gt, 2.0), 50.0, 1e-9);
  EXPECT_NEAR(service_availability(rows, gt, 0.5), 0.0, 1e-9);

  // Half-grid association: an estimate 0.4 s from the epoch still serves
  // it, one 0.6 s away does not.
  std::vector<EstimateRow> offset(1);
  offset[0].t = 6.4;
  offset[0].p = Eigen::Vector3d::Zero();
  EXPECT_NEAR(service_availability(offset, gt, 1.0), 10.0, 1e-9);
  offset[0].t = 6.6;  // 0.4 from epoch 7: still exactly one served epoch
  EXPECT_NEAR(service_availability(offset, gt, 1.0), 10.0, 1e-9);
  offset[0].t = 5.5;  // equidistant: half-grid tie goes to one epoch only
  EXPECT_NEAR(service_availability(offset, gt, 1.0), 20.0, 1e-9);
}

TEST(Timing, NearestRankPercentiles) {
  std::vector<double> times;
  for (int k = 1; k <= 100; ++k) times.push_back(static_cast<double>(k));
  const TimingStats st = timing_stats(times);
  EXPECT_NEAR(st.mean_ms, 50.5, 1e-12);
  EXPECT_NEAR(st.p95_ms, 95.0, 1e-12);
  EXPECT_NEAR(st.max_ms, 100.0, 1e-12);
  EXPECT_EQ(st.count, 100);
  EXPECT_EQ(timing_stats({}).count, 0);
}

TEST(Reports, MetricsJsonIsByteDeterministic) {
  const fs::path dir = tmp_dir("metrics");
  const SimulatedDataset data = simulate_scenario(short60_scenario(), 14);
  std::vector<EstimateRow> rows;
  for (const auto& f : data.gnss) {
    EstimateRow r;
    r.t = f.t;
    r.p = f.p;
    rows.push_back(r);
  }
  const GtSeries gt = to_gt_series(data.gt);
  const EvaluationReport rep = evaluate_estimates(rows, gt);
  write_metrics_json(dir / "a.json", rep);
  write_metrics_json(dir / "b.json", rep);
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));

  const EvaluationReport rep2 = evaluate_estimates(rows, gt);
  write_metrics_json(dir / "c.json", rep2);
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "c.json"));
}

TEST(Reports, MetricsJsonMatchesSchema) {
  // Structural check against the published schema: every required key is
  // present with the declared JSON type.
  const fs::path schema_path =
      fs::path(FGNAV_SOURCE_DIR) / "config" / "report.schema.json";
  ASSERT_TRUE(fs::exists(schema_path)) << schema_path;
  std::ifstream in(schema_path);
  nlohmann::json schema;
  in >> schema;

  const fs::path dir = tmp_dir("schema");
  const SimulatedDataset data = simulate_scenario(short60_scenario(), 15);
  std::vector<EstimateRow> rows;
  for (const auto& f : data.gnss) {
    EstimateRow r;
    r.t = f.t;
    r.p = f.p;
    rows.push_back(r);
  }
  const EvaluationReport rep = evaluate_estimates(rows, to_gt_series(data.gt));
  write_metrics_json(dir / "metrics.json", rep);
  std::ifstream rin(dir / "metrics.json");
  nlohmann::json report;
  rin >> report;

  auto type_matches = [](const nlohmann::json& value,
                         const std::string& type) {
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer();
    if (type == "array") return value.is_array();
    if (type == "object") return value.is_object();
    if (type == "string") return value.is_string();
    return false;
  };
  ASSERT_TRUE(schema.contains("required"));
  for (const auto& key : schema.at("required")) {
    const std::string name = key.get<std::string>();
    ASSERT_TRUE(report.contains(name)) << "missing key " << name;
    const auto& prop = schema.at("properties").at(name);
    EXPECT_TRUE(type_matches(report.at(name),
                             prop.at("type").get<std::string>()))
        << "wrong type for " << name;
  }
  // Availability rows carry both fields.
  for (const auto& row : report.at("availability")) {
    EXPECT_TRUE(row.contains("threshold_m"));
    EXPECT_TRUE(row.contains("availability_pct"));
  }
}

TEST(Scenarios, CheckedInFilesMatchTheBuiltins) {
  for (const std::string name : {"urban", "short60"}) {
    const fs::path path = fs::path(FGNAV_SOURCE_DIR) / "config" /
                          "scenarios" / (name + ".json");
    ASSERT_TRUE(fs::exists(path)) << path;
    const Scenario loaded = load_scenario_file(path);
    const Scenario builtin =
        name == "urban" ? urban_scenario() : short60_scenario();
    // Same generator inputs produce identical datasets.
    const SimulatedDataset a = simulate_scenario(loaded, 99);
    const SimulatedDataset b = simulate_scenario(builtin, 99);
    ASSERT_EQ(a.imu.size(), b.imu.size()) << name;
    ASSERT_EQ(a.gnss.size(), b.gnss.size()) << name;
    for (std::size_t k = 0; k < a.gnss.size(); k += 7) {
      EXPECT_EQ(a.gnss[k].p, b.gnss[k].p) << name << " fix " << k;
    }
    for (std::size_t k = 0; k < a.imu.size(); k += 997) {
      EXPECT_EQ(a.imu[k].accel, b.imu[k].accel) << name << " imu " << k;
    }
  }
}

TEST(Scenarios, JsonRoundTripPreservesTheScenario) {
  const fs::path dir = tmp_dir("scenario_rt");
  const Scenario sc = urban_scenario();
  save_scenario_file(dir / "urban.json", sc);
  const Scenario restored = load_scenario_file(dir / "urban.json");
  EXPECT_EQ(restored.name, sc.name);
  ASSERT_EQ(restored.trajectory.segments.size(),
            sc.trajectory.segments.size());
  EXPECT_EQ(restored.with_outages, sc.with_outages);
  const SimulatedDataset a = simulate_scenario(sc, 3);
  const SimulatedDataset b = simulate_scenario(restored, 3);
  ASSERT_EQ(a.imu.size(), b.imu.size());
  EXPECT_EQ(a.imu.back().gyro, b.imu.back().gyro);
}

TEST(Scenarios, MalformedScenarioJsonIsRejected) {
  nlohmann::json no_traj = {{"name", "x"}};
  EXPECT_THROW(scenario_from_json(no_traj), Error);
  nlohmann::json bad_type = {
      {"trajectory",
       {{"segments",
         {{{"type", "wiggle"}, {"duration_s", 1.0}}}}}}};
  EXPECT_THROW(scenario_from_json(bad_type), Error);
}

}  // namespace
}  // namespace fgnav
