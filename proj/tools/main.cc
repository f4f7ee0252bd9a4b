// Copyright 2026 The cmbi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cmbi: phase scans, calibration and cross-checks for collective many-body
// interference in disjoint beam-splitter networks.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 output error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmbi/calibration.h"
#include "config.h"
#include "output.h"

namespace {

using namespace cmbi;
using namespace cmbi::cli;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitOutput = 4;

// Values below this are printed as 0 so that exact zeros of the closed form
// do not show up as rounding noise.
constexpr double kPrintFloor = 1e-15;

std::string show(double v) { return format_number(std::abs(v) < kPrintFloor ? 0.0 : v); }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_atomically(path, j.dump(2) + "\n");
}

int cmd_predict(const std::string& chi, const std::string& varphi, const std::string& theta) {
  const PhaseSetting setting{parse_angle(chi), parse_angle(varphi), parse_angle(theta)};
  std::cout << "collective_phase_rad " << show(setting.collective_phase()) << "\n"
            << "four_point " << show(four_point_closed_form(setting)) << "\n";
  return 0;
}

int cmd_scan(const std::string& config_path, int blocked) {
  const RunConfig config = load_config(config_path);
  const auto spec = build_experiment_network(config.network);
  const auto layout = make_detector_layout(spec, config.network.rejection_threshold);
  const SourceModel sources = config.sources();
  const auto& dir = config.output_directory;
  // Independent Poisson streams for the three measurements.
  auto mode_for = [&](std::uint64_t offset) {
    SamplingMode m = config.mode;
    m.seed += offset;
    return m;
  };

  if (blocked != 0) {
    const auto scan = measure_background(config.scan, sources, spec, layout, blocked, mode_for(blocked));
    const auto path = dir / ("blocked" + std::to_string(blocked) + ".csv");
    write_atomically(path, scan_to_csv(scan));
    const auto four = scan.series("fourfold_ABCD");
    const auto [lo, hi] = std::minmax_element(four.begin(), four.end(),
                                              [](const auto& a, const auto& b) { return a.second < b.second; });
    std::cout << "wrote " << path.string() << "\nfourfold_ABCD range " << show(hi->second - lo->second) << "\n";
    return 0;
  }

  const auto main = run_phase_scan(config.scan, sources, spec, layout, mode_for(0));
  const auto bg1 = measure_background(config.scan, sources, spec, layout, 1, mode_for(1));
  const auto bg2 = measure_background(config.scan, sources, spec, layout, 2, mode_for(2));
  const auto corrected = background_subtract(main, bg1, bg2);
  const FitResult raw_fit = fit_cosine(main.series("fourfold_ABCD"));
  const FitResult corrected_fit = fit_cosine(corrected.series("fourfold_ABCD"));

  write_atomically(dir / "main.csv", scan_to_csv(main));
  write_atomically(dir / "background1.csv", scan_to_csv(bg1));
  write_atomically(dir / "background2.csv", scan_to_csv(bg2));
  write_atomically(dir / "corrected.csv", scan_to_csv(corrected));
  write_json(dir / "fit_raw.json", fit_to_json(raw_fit));
  write_json(dir / "fit_corrected.json", fit_to_json(corrected_fit));
  if (config.write_svg) {
    write_atomically(dir / "fringe.svg", fringe_svg(main, raw_fit, corrected, corrected_fit, "fourfold_ABCD"));
  }
  std::cout << "raw_visibility " << show(raw_fit.visibility) << "\n"
            << "corrected_visibility " << show(corrected_fit.visibility) << "\n"
            << "corrected_delta_rad " << show(corrected_fit.phase) << "\n"
            << "outputs " << dir.string() << "\n";
  return 0;
}

int cmd_calibrate(const std::string& config_path, const std::string& targets_path,
                  const std::string& write_targets) {
  const RunConfig config = load_config(config_path);
  const CalibrationModel model = config.calibration_model();
  if (!write_targets.empty()) {
    if (!config.network.transmissions) throw ConfigError("network.transmissions are needed to simulate targets");
    const CalibrationParameters truth{*config.network.transmissions, config.network.splitting_ratios};
    write_json(write_targets, targets_to_json(simulate_calibration_targets(model, truth)));
    std::cout << "wrote " << write_targets << "\n";
    return 0;
  }
  if (targets_path.empty()) throw ConfigError("calibrate needs --targets or --write-targets");
  const CalibrationTargets targets = targets_from_json(read_json_file(targets_path));
  const auto& cal = config.calibration;
  CalibrationResult result;
  try {
    result = calibrate_unitary(targets, model, cal.initial_guess, cal.bounds, cal.options);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto path = config.output_directory / "calibration.json";
  write_json(path, calibration_to_json(result));
  std::cout << "objective " << format_number(result.objective_value) << "\n"
            << "iterations " << result.iterations << "\n"
            << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_check_n(std::size_t n, std::size_t budget, std::size_t points, const std::string& json_path) {
  GeneralizedCheckOptions options;
  options.max_particles = budget;
  if (points < 3) throw ConfigError("--points must be >= 3");
  options.varphi_grid.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    options.varphi_grid[i] = -std::numbers::pi / 2 + 3 * std::numbers::pi * double(i) / double(points - 1);
  }
  GeneralizedReport report;
  try {
    report = generalized_scheme_check(n, options);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const BudgetExceeded& e) {
    throw ConfigError(e.what());
  }
  std::cout << "n_particles " << report.n_particles << "\n"
            << "visibility " << format_number(report.fit.visibility) << "\n"
            << "minimum " << show(report.minimum) << "\n"
            << "fitted_minimum " << show(report.fitted_minimum) << "\n"
            << "fitted_delta_rad " << show(report.fit.phase) << "\n"
            << "max_lower_order_deviation " << show(report.max_lower_order_deviation) << "\n";
  if (!json_path.empty()) {
    write_json(json_path, {{"n_particles", report.n_particles},
                           {"varphi_rad", report.varphi},
                           {"n_point", report.n_point},
                           {"fit", fit_to_json(report.fit)},
                           {"minimum", report.minimum},
                           {"fitted_minimum", report.fitted_minimum},
                           {"max_lower_order_deviation", report.max_lower_order_deviation}});
  }
  return 0;
}

struct OracleRow {
  std::string name;
  double value;
  double reference;
};

int cmd_oracle(const std::string& chi, const std::string& varphi, const std::string& theta) {
  constexpr double kTolerance = 1e-9;
  const PhaseSetting setting{parse_angle(chi), parse_angle(varphi), parse_angle(theta)};
  const auto spec = build_disjoint_scheme(4, {0.5, 0.5});
  const auto input = build_input_state(setting, 1, 1, spec.mode_space());
  const auto output = apply_network(input, spec);

  auto a_op = [&](std::vector<std::size_t> ket) {
    const std::vector<std::size_t> bra{0, 1, 2, 3};
    for (auto& m : ket) --m;
    return a_operator_expectation(input, bra, ket).real();
  };
  const double a1234 = a_op({1, 2, 3, 4});
  const double a1243 = a_op({1, 2, 4, 3});
  const double a2134 = a_op({2, 1, 3, 4});
  const double a2143 = a_op({2, 1, 4, 3});
  const std::size_t all[] = {0, 1, 2, 3};

  std::vector<OracleRow> rows{
      {"A_1234_1234", a1234, 1.0},
      {"A_1234_1243", a1243, 0.5},
      {"A_1234_2134", a2134, 0.5},
      {"A_1234_2143", a2143, 0.25 * (1 + std::cos(setting.collective_phase()))},
      {"four_point_decomposition", 0.25 * (a1234 - a1243 - a2134 + a2143), four_point_closed_form(setting)},
      {"four_point_evolved", k_point_correlator(output, all), four_point_closed_form(setting)},
  };

  // Threshold-operator expansion against click statistics on lossy outputs.
  NetworkConfig lossy;
  lossy.transmissions = std::vector<double>{0.9, 0.85, 0.8, 0.75, 0.7, 0.95, 0.65, 0.88};
  const auto lossy_spec = build_experiment_network(lossy);
  const auto layout = make_detector_layout(lossy_spec);
  for (auto [r1, r2] : {std::pair{1u, 1u}, std::pair{2u, 1u}, std::pair{1u, 2u}}) {
    const auto in = build_input_state(setting, r1, r2, lossy_spec.mode_space());
    const auto out = apply_network(in, lossy_spec);
    const double series = threshold_series_expectation(out, lossy_spec.channel_output_modes, 2 * (r1 + r2));
    const double brute = coincidence_weight(click_distribution(out, layout), layout, all);
    rows.push_back({"threshold_series_" + std::to_string(r1) + std::to_string(r2), series, brute});
  }

  bool ok = true;
  std::printf("%-28s %-20s %-20s %s\n", "check", "value", "reference", "abs_diff");
  for (const auto& row : rows) {
    const double diff = std::abs(row.value - row.reference);
    ok = ok && diff <= kTolerance;
    std::printf("%-28s %-20s %-20s %s\n", row.name.c_str(), show(row.value).c_str(), show(row.reference).c_str(),
                format_number(diff).c_str());
  }
  std::cout << (ok ? "all checks agree" : "MISMATCH") << "\n";
  return ok ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective many-body interference simulator"};
  app.require_subcommand(1);

  std::string chi = "0", varphi = "0", theta = "0";
  auto* predict = app.add_subcommand("predict", "Closed-form four-point correlator");
  predict->add_option("--chi", chi, "Entangled-pair phase (radians, 'pi' allowed)");
  predict->add_option("--varphi", varphi, "Phase of the photon in port 1");
  predict->add_option("--theta", theta, "Phase of the photon in port 4");

  std::string config_path;
  int blocked = 0;
  auto* scan = app.add_subcommand("scan", "Phase scan with backgrounds, subtraction and fits");
  scan->add_option("config", config_path, "Run configuration (JSON)")->required();
  scan->add_option("--blocked", blocked, "Only measure with this source blocked")->check(CLI::IsMember({1, 2}));

  std::string targets_path, write_targets;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the ten network parameters to single-source rates");
  calibrate->add_option("config", config_path, "Run configuration (JSON)")->required();
  auto* targets_opt = calibrate->add_option("--targets", targets_path, "Measured single-source rates (JSON)");
  calibrate->add_option("--write-targets", write_targets, "Simulate targets from the configured network and write them")
      ->excludes(targets_opt);

  std::size_t n_particles = 6, budget = 10, points = 31;
  std::string json_path;
  auto* check_n = app.add_subcommand("check-n", "N-particle generalization check");
  check_n->add_option("--n", n_particles, "Even particle number >= 4");
  check_n->add_option("--budget", budget, "Largest particle number allowed");
  check_n->add_option("--points", points, "Scan points over (-pi/2, 5pi/2)");
  check_n->add_option("--json", json_path, "Write the report as JSON");

  auto* oracle = app.add_subcommand("oracle", "Operator-algebra and threshold-series cross-checks");
  oracle->add_option("--chi", chi);
  oracle->add_option("--varphi", varphi);
  oracle->add_option("--theta", theta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*predict) return cmd_predict(chi, varphi, theta);
    if (*scan) return cmd_scan(config_path, blocked);
    if (*calibrate) return cmd_calibrate(config_path, targets_path, write_targets);
    if (*check_n) return cmd_check_n(n_particles, budget, points, json_path);
    if (*oracle) return cmd_oracle(chi, varphi, theta);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitOutput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
