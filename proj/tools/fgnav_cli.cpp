// fgnav command-line front end.
//
// Subcommands:
//   simulate  generate a synthetic GNSS/IMU dataset from a scenario
//   run       fuse a dataset into an estimate stream
//   evaluate  compare an estimate stream against ground truth
//   sweep     re-run one dataset across a parameter range
//
// Exit codes: 0 success, 1 usage error, 2 data error (I/O, parsing,
// inconsistent streams), 3 numerical failure inside the optimizer.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fgnav/csv_io.hpp"
#include "fgnav/engine.hpp"
#include "fgnav/metrics.hpp"
#include "fgnav/simulation.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fgnav;

Scenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "urban") return urban_scenario();
  if (name_or_path == "short60") return short60_scenario();
  if (!fs::exists(name_or_path)) {
    throw IoError("unknown scenario '" + name_or_path +
                  "': not a built-in name (urban, short60) and no such file");
  }
  return load_scenario_file(name_or_path);
}

double parse_lag(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !(value > 0.0)) {
    throw Error("marginalization lag must be a positive number of seconds "
                "or 'inf', got '" +
                text + "'");
  }
  return value;
}

int parse_int(const std::string& text, const std::string& what) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(what + " must be an integer, got '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string item = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int cmd_simulate(const std::string& scenario_arg, const std::string& out_dir,
                 unsigned seed) {
  const Scenario scenario = resolve_scenario(scenario_arg);
  const SimulatedDataset data = simulate_scenario(scenario, seed);
  DatasetMeta meta;
  meta.name = scenario.name;
  meta.anchor = Geodetic{22.3193, 114.1694, 5.0};
  meta.seed = seed;
  save_dataset(out_dir, data, meta);
  std::cout << "wrote " << data.imu.size() << " imu samples, "
            << data.gnss.size() << " gnss fixes, " << data.gt.states.size()
            << " truth states to " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& dataset_dir, int tau,
            const std::string& marg_lag, double max_imu_prop,
            const std::string& mode, const std::string& out_dir) {
  const DatasetBundle ds = load_dataset(dataset_dir);
  EngineConfig cfg;
  if (mode == "batch") {
    // Full smoothing: hold every state back until the end, keep the whole
    // window, and emit no IMU-only predictions.
    cfg.smoothing_latency_tau = std::numeric_limits<int>::max() / 2;
    cfg.marginalization_lag = std::numeric_limits<double>::infinity();
  } else {
    cfg.smoothing_latency_tau = tau;
    cfg.marginalization_lag = parse_lag(marg_lag);
    cfg.max_imu_propagation = max_imu_prop;
  }
  const RunResult res = run_streams(ds.imu, ds.gnss, cfg);
  if (res.outputs.empty()) {
    throw EmptyInput("run produced no outputs; the engine never initialized "
                     "(too few fixes or no motion?)");
  }
  write_estimates_csv(fs::path(out_dir) / "estimates.csv",
                      to_rows(res.outputs));
  write_timing_json(fs::path(out_dir) / "timing.json",
                    timing_stats(res.optimize_times_ms));
  const TimingStats st = timing_stats(res.optimize_times_ms);
  std::printf("emitted %zu estimates (%d graph epochs); optimize mean %.2f "
              "ms, p95 %.2f ms, max %.2f ms\n",
              res.outputs.size(), res.final_status.epochs_in_graph,
              st.mean_ms, st.p95_ms, st.max_ms);
  return 0;
}

int cmd_evaluate(const std::string& estimates_path, const std::string& gt_path,
                 const std::string& out_dir) {
  const std::vector<EstimateRow> est = read_estimates_csv(estimates_path);
  const GtSeries gt = read_gt_csv(gt_path);
  const EvaluationReport rep = evaluate_estimates(est, gt);
  write_metrics_json(fs::path(out_dir) / "metrics.json", rep);
  write_availability_csv(fs::path(out_dir) / "availability.csv", rep);
  write_trajectory_csv(fs::path(out_dir) / "trajectory.csv",
                       align_to_ground_truth(est, gt));
  std::printf("rmse_3d %.3f m (E %.3f, N %.3f, U %.3f)\n", rep.rmse_3d_m,
              rep.rmse_axes_m.x(), rep.rmse_axes_m.y(), rep.rmse_axes_m.z());
  for (std::size_t k = 0; k < rep.thresholds_m.size(); ++k) {
    std::printf("A(%g m) = %.1f%%\n", rep.thresholds_m[k],
                rep.availability_pct[k]);
  }
  return 0;
}

double availability_at(const EvaluationReport& rep, double threshold) {
  for (std::size_t k = 0; k < rep.thresholds_m.size(); ++k) {
    if (std::abs(rep.thresholds_m[k] - threshold) < 1e-9) {
      return rep.availability_pct[k];
    }
  }
  return 0.0;
}

int cmd_sweep(const std::string& dataset_dir, const std::string& param,
              const std::string& values_csv, const std::string& out_dir) {
  const DatasetBundle ds = load_dataset(dataset_dir);
  if (!ds.gt) {
    throw EmptyInput("sweep needs gt.csv in the dataset directory");
  }
  const std::vector<std::string> values = split_list(values_csv);
  if (values.empty()) throw Error("--values list is empty");

  fs::create_directories(out_dir);
  auto out = io_detail::open_out(fs::path(out_dir) / "sweep.csv");
  out << "param,value,rmse_3d_m,rmse_east_m,rmse_north_m,rmse_up_m,"
         "availability_50m_pct,mean_opt_ms,p95_opt_ms,max_opt_ms,"
         "n_optimized,n_propagated\n";
  for (const std::string& value : values) {
    EngineConfig cfg;
    std::string label;
    if (param == "tau") {
      const int tau = parse_int(value, "tau");
      if (tau < 0) throw Error("tau must be >= 0");
      cfg.smoothing_latency_tau = tau;
      label = std::to_string(tau);
    } else {
      cfg.marginalization_lag = parse_lag(value);
      label = value;
    }
    const RunResult res = run_streams(ds.imu, ds.gnss, cfg);
    if (res.outputs.empty()) {
      throw EmptyInput("sweep value '" + value + "' produced no outputs");
    }
    const EvaluationReport rep =
        evaluate_estimates(to_rows(res.outputs), *ds.gt);
    const TimingStats st = timing_stats(res.optimize_times_ms);
    out << param << ',' << label << ','
        << io_detail::format_double(rep.rmse_3d_m) << ','
        << io_detail::format_double(rep.rmse_axes_m.x()) << ','
        << io_detail::format_double(rep.rmse_axes_m.y()) << ','
        << io_detail::format_double(rep.rmse_axes_m.z()) << ','
        << io_detail::format_double(availability_at(rep, 50.0)) << ','
        << io_detail::format_double(st.mean_ms) << ','
        << io_detail::format_double(st.p95_ms) << ','
        << io_detail::format_double(st.max_ms) << ',' << rep.n_optimized
        << ',' << rep.n_propagated << '\n';
    std::printf("%s=%s: rmse_3d %.3f m, A(50) %.1f%%, mean opt %.2f ms\n",
                param.c_str(), label.c_str(), rep.rmse_3d_m,
                availability_at(rep, 50.0), st.mean_ms);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-graph GNSS/IMU fusion"};
  app.require_subcommand(1);

  std::string scenario = "urban";
  std::string out_dir;
  unsigned seed = 0;
  auto* sim = app.add_subcommand("simulate",
                                 "Generate a synthetic GNSS/IMU dataset");
  sim->add_option("--scenario", scenario,
                  "Built-in scenario (urban, short60) or a JSON file")
      ->required();
  sim->add_option("--out", out_dir, "Output dataset directory")->required();
  sim->add_option("--seed", seed, "RNG seed");

  std::string dataset_dir;
  int tau = 0;
  std::string marg_lag = "inf";
  double max_imu_prop = 4.0;
  std::string mode = "rt";
  auto* run = app.add_subcommand("run", "Fuse a dataset into estimates");
  run->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  run->add_option("--tau", tau, "Smoothing latency in GNSS epochs")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--marg-lag", marg_lag,
                  "Marginalization lag in seconds, or 'inf'");
  run->add_option("--max-imu-prop", max_imu_prop,
                  "Max seconds of IMU-only output per GNSS gap")
      ->check(CLI::PositiveNumber);
  run->add_option("--mode", mode, "rt (streaming) or batch (full smoothing)")
      ->check(CLI::IsMember({"rt", "batch"}));
  run->add_option("--out", out_dir, "Output directory")->required();

  std::string estimates_path, gt_path;
  auto* eval = app.add_subcommand("evaluate",
                                  "Compare estimates against ground truth");
  eval->add_option("--estimates", estimates_path, "estimates.csv path")
      ->required();
  eval->add_option("--gt", gt_path, "gt.csv path")->required();
  eval->add_option("--out", out_dir, "Output directory")->required();

  std::string param, values_csv;
  auto* sweep = app.add_subcommand("sweep",
                                   "Run a dataset across a parameter range");
  sweep->add_option("--dataset", dataset_dir, "Dataset directory")
      ->required();
  sweep->add_option("--param", param, "Parameter to vary: tau or marg-lag")
      ->required()
      ->check(CLI::IsMember({"tau", "marg-lag"}));
  sweep->add_option("--values", values_csv, "Comma-separated value list")
      ->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(scenario, out_dir, seed);
    if (run->parsed()) {
      return cmd_run(dataset_dir, tau, marg_lag, max_imu_prop, mode, out_dir);
    }
    if (eval->parsed()) return cmd_evaluate(estimates_path, gt_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(dataset_dir, param, values_csv,
                                          out_dir);
  } catch (const NonPositiveDefinite& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const LinearSolveFailure& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const NotGaugeFixed& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const EmptyGraphAfterMarginalization& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
