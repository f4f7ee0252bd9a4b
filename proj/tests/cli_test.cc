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

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "config.h"
#include "output.h"

namespace cmbi::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

json ideal_doc() {
  return json::parse(R"({
    "sources": {"source1": {"gamma": 0.102}, "source2": {"gamma": 0.094}, "rep_rate": 80e6, "truncation": 2},
    "network": {"splitting_ratios": [0.5, 0.5], "transmissions": null, "multiplex": false,
                "rejection_threshold": 4},
    "scan": {"chi": 0, "theta": 0, "varphi": {"start": "-pi/2", "stop": "3pi/2", "points": 31},
             "integration_time": 60},
    "mode": {"type": "expectation"},
    "outputs": {"directory": "out", "svg": true}
  })");
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(ConfigTest, Angles) {
  EXPECT_DOUBLE_EQ(parse_angle("pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_angle("-pi/2"), -kPi / 2);
  EXPECT_DOUBLE_EQ(parse_angle("3pi/2"), 3 * kPi / 2);
  EXPECT_DOUBLE_EQ(parse_angle("1.5*pi"), 1.5 * kPi);
  EXPECT_DOUBLE_EQ(parse_angle("0.25"), 0.25);
  EXPECT_DOUBLE_EQ(parse_angle(json(-1.0)), -1.0);
  EXPECT_THROW(parse_angle("tau"), ConfigError);
  EXPECT_THROW(parse_angle("pi/0"), ConfigError);
  EXPECT_THROW(parse_angle(json(true)), ConfigError);
}

TEST(ConfigTest, ParsesIdealDocument) {
  const auto config = config_from_json(ideal_doc());
  EXPECT_EQ(config.truncation, 2u);
  EXPECT_EQ(config.scan.varphi_grid.size(), 31u);
  EXPECT_DOUBLE_EQ(config.scan.varphi_grid.front(), -kPi / 2);
  EXPECT_DOUBLE_EQ(config.scan.varphi_grid.back(), 3 * kPi / 2);
  EXPECT_FALSE(config.network.transmissions.has_value());
  EXPECT_FALSE(config.mode.sampled);
  EXPECT_NEAR(config.sources().source1.gamma(), 0.102, 1e-15);
}

TEST(ConfigTest, RejectsUnknownKeys) {
  auto doc = ideal_doc();
  doc["network"]["splitting_ratio"] = 0.5;
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = ideal_doc();
  doc["extras"] = json::object();
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = ideal_doc();
  doc.erase("mode");
  EXPECT_THROW(config_from_json(doc), ConfigError);
}

TEST(ConfigTest, SourceParametrizationIsExclusive) {
  auto doc = ideal_doc();
  doc["sources"]["source1"] = {{"tau", 0.02}, {"power", 0.5}};
  EXPECT_NEAR(config_from_json(doc).sources().source1.gamma(), 0.1, 1e-15);
  doc["sources"]["source1"] = {{"gamma", 0.1}, {"tau", 0.02}, {"power", 0.5}};
  EXPECT_THROW(config_from_json(doc).sources(), ConfigError);
  doc["sources"]["source1"] = {{"tau", 0.02}};
  EXPECT_THROW(config_from_json(doc).sources(), ConfigError);
}

TEST(ConfigTest, RoundTripsLosslessly) {
  auto doc = ideal_doc();
  doc["network"]["transmissions"] = {0.81, 0.7, 0.9, 0.65, 0.77, 0.92, 0.6, 0.85};
  doc["scan"]["chi"] = "pi/3";
  doc["mode"] = {{"type", "sampled"}, {"seed", 17}};
  const auto first = config_from_json(doc);
  const auto second = config_from_json(config_to_json(first));
  EXPECT_EQ(config_to_json(first), config_to_json(second));
  EXPECT_EQ(second.scan.varphi_grid, first.scan.varphi_grid);
  EXPECT_EQ(second.scan.chi, first.scan.chi);
  EXPECT_EQ(*second.network.transmissions, *first.network.transmissions);
  EXPECT_EQ(second.mode.seed, 17u);
}

TEST(TargetsTest, SchemaIsEnforced) {
  const CalibrationModel model;
  const auto targets = simulate_calibration_targets(model, CalibrationParameters{});
  const auto back = targets_from_json(targets_to_json(targets));
  EXPECT_EQ(back.source1_only.values, targets.source1_only.values);
  EXPECT_EQ(back.source2_only.values, targets.source2_only.values);

  EXPECT_THROW(targets_from_json(json::object()), ConfigError);
  auto doc = targets_to_json(targets);
  doc["source1_only"].erase("fourfold_ABCD");
  EXPECT_THROW(targets_from_json(doc), ConfigError);
  doc = targets_to_json(targets);
  doc["source2_only"]["singles_A"] = -1.0;
  EXPECT_THROW(targets_from_json(doc), ConfigError);
}

TEST(OutputTest, CsvHeaderAndPrecision) {
  ScanResult scan;
  scan.counter_names = counter_names({"A", "B", "C", "D"});
  ScanPoint p;
  p.varphi = 1.0 / 3.0;
  p.collective_phase = -0.0;
  p.counts.values.assign(15, 2.0 / 3.0);
  scan.points.push_back(p);
  const std::string csv = scan_to_csv(scan);
  const std::string header =
      "varphi_rad,collective_phase_rad,singles_A,singles_B,singles_C,singles_D,twofold_AB,twofold_AC,"
      "twofold_AD,twofold_BC,twofold_BD,twofold_CD,threefold_ABC,threefold_ABD,threefold_ACD,threefold_BCD,"
      "fourfold_ABCD\n";
  ASSERT_EQ(csv.substr(0, header.size()), header);
  EXPECT_EQ(csv.substr(header.size(), 30), "0.333333333333,0,0.66666666666");
}

TEST(OutputTest, FitSummaryFields) {
  const auto j = fit_to_json(FitResult{});
  for (const char* key : {"A", "B", "delta_rad", "visibility", "residual_norm", "n_points"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.size(), 6u);
}

TEST(OutputTest, AtomicWriteFailsOnBlockedPath) {
  const fs::path dir = fs::temp_directory_path() / "cmbi_cli_test_atomic";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_atomically(dir / "sub" / "file.txt", "hello");
  EXPECT_EQ(slurp(dir / "sub" / "file.txt"), "hello");
  std::ofstream(dir / "blocker") << "x";
  EXPECT_THROW(write_atomically(dir / "blocker" / "file.txt", "x"), OutputError);
  fs::remove_all(dir);
}

// End-to-end runs of the installed binary.
class BinaryTest : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("cmbi_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  // Runs the binary with stdout captured to dir/stdout.txt; returns the exit code.
  int run(const std::string& args) {
    const std::string cmd = std::string(CMBI_BINARY) + " " + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string out() const { return slurp(dir / "stdout.txt"); }

  fs::path write_config(json doc, const std::string& name = "config.json") {
    if (doc["outputs"]["directory"] == "out") doc["outputs"]["directory"] = (dir / "out").string();
    const auto path = dir / name;
    std::ofstream(path) << doc.dump(2);
    return path;
  }

  // Last number on the stdout line that starts with `key`.
  double printed(const std::string& key) const {
    std::istringstream in(out());
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(line.rfind(' ') + 1));
    }
    ADD_FAILURE() << "missing " << key << " in\n" << out();
    return std::nan("");
  }
};

TEST_F(BinaryTest, Predict) {
  EXPECT_EQ(run("predict --chi 0 --varphi 0 --theta 0"), 0);
  EXPECT_DOUBLE_EQ(printed("four_point"), 0.125);
  EXPECT_EQ(run("predict --chi pi --varphi 0 --theta 0"), 0);
  EXPECT_EQ(printed("four_point"), 0.0);
  EXPECT_EQ(run("predict --chi pi --varphi pi --theta 0"), 0);
  EXPECT_DOUBLE_EQ(printed("four_point"), 0.125);
  EXPECT_EQ(run("predict --chi 'pi/2' --varphi 0 --theta 0"), 0);
  EXPECT_NEAR(printed("collective_phase_rad"), kPi / 2, 1e-11);
  EXPECT_NEAR(printed("four_point"), 0.0625, 1e-11);
}

TEST_F(BinaryTest, ExitCodes) {
  EXPECT_EQ(run("predict --chi banana"), 2);
  EXPECT_EQ(run("scan " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  std::ofstream(dir / "empty.json") << "";
  EXPECT_EQ(run("scan " + (dir / "empty.json").string()), 2);

  auto doc = ideal_doc();
  std::ofstream(dir / "blocker") << "x";
  doc["outputs"]["directory"] = (dir / "blocker" / "out").string();
  EXPECT_EQ(run("scan " + write_config(doc).string()), 4);

  EXPECT_EQ(run("check-n --n 12"), 2);
  EXPECT_EQ(run("check-n --n 5"), 2);
}

TEST_F(BinaryTest, IdealScan) {
  const auto config = write_config(ideal_doc());
  ASSERT_EQ(run("scan " + config.string()), 0) << slurp(dir / "stderr.txt");
  EXPECT_NEAR(printed("corrected_visibility"), 1.0, 1e-9);
  for (const char* file : {"main.csv", "background1.csv", "background2.csv", "corrected.csv", "fit_raw.json",
                           "fit_corrected.json", "fringe.svg"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / file)) << file;
  }
  const auto fit = json::parse(slurp(dir / "out" / "fit_corrected.json"));
  EXPECT_NEAR(fit["visibility"].get<double>(), 1.0, 1e-9);
  EXPECT_EQ(fit["n_points"].get<int>(), 31);
  // 31 rows plus header.
  const std::string csv = slurp(dir / "out" / "corrected.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 32);
}

TEST_F(BinaryTest, SampledScanIsByteIdentical) {
  auto doc = ideal_doc();
  doc["mode"] = {{"type", "sampled"}, {"seed", 5}};
  doc["outputs"]["svg"] = false;
  doc["outputs"]["directory"] = (dir / "a").string();
  ASSERT_EQ(run("scan " + write_config(doc, "a.json").string()), 0);
  doc["outputs"]["directory"] = (dir / "b").string();
  ASSERT_EQ(run("scan " + write_config(doc, "b.json").string()), 0);
  for (const char* file : {"main.csv", "background1.csv", "corrected.csv", "fit_raw.json", "fit_corrected.json"}) {
    EXPECT_EQ(slurp(dir / "a" / file), slurp(dir / "b" / file)) << file;
  }
  EXPECT_FALSE(fs::exists(dir / "a" / "fringe.svg"));
}

TEST_F(BinaryTest, BlockedScanIsFlat) {
  const auto config = write_config(ideal_doc());
  ASSERT_EQ(run("scan " + config.string() + " --blocked 1"), 0);
  // Flat up to rounding: the printed range is tiny next to the rate itself.
  std::istringstream csv(slurp(dir / "out" / "blocked1.csv"));
  std::string line;
  std::getline(csv, line);
  double largest = 0;
  while (std::getline(csv, line)) largest = std::max(largest, std::stod(line.substr(line.rfind(',') + 1)));
  EXPECT_GT(largest, 0.0);
  EXPECT_LE(printed("fourfold_ABCD"), 1e-12 * largest);
  EXPECT_EQ(run("scan " + config.string() + " --blocked 3"), 2);
}

TEST_F(BinaryTest, CalibrateRoundTrip) {
  auto doc = ideal_doc();
  doc["sources"]["truncation"] = 3;
  doc["network"]["transmissions"] = {0.9, 0.85, 0.8, 0.7, 0.75, 0.95, 0.65, 0.88};
  doc["network"]["splitting_ratios"] = {0.48, 0.53};
  doc["calibration"] = {{"starts", 1}};
  const auto config = write_config(doc);
  const auto targets = dir / "targets.json";
  ASSERT_EQ(run("calibrate " + config.string() + " --write-targets " + targets.string()), 0);
  ASSERT_EQ(run("calibrate " + config.string() + " --targets " + targets.string()), 0)
      << slurp(dir / "stderr.txt");
  EXPECT_LT(printed("objective"), 1e-8);
  const auto result = json::parse(slurp(dir / "out" / "calibration.json"));
  EXPECT_LT(result["objective_value"].get<double>(), 1e-8);

  // A single rate scaled by 0.75 leaves its own residual the largest.
  auto scaled = json::parse(slurp(targets));
  scaled["source2_only"]["threefold_ABC"] = scaled["source2_only"]["threefold_ABC"].get<double>() * 0.75;
  std::ofstream(dir / "scaled.json") << scaled.dump();
  ASSERT_EQ(run("calibrate " + config.string() + " --targets " + (dir / "scaled.json").string()), 0);
  EXPECT_GT(printed("objective"), 1e-4);
  const auto bad = json::parse(slurp(dir / "out" / "calibration.json"));
  std::string worst;
  double largest = 0;
  for (const auto& [name, value] : bad["residuals"].items()) {
    if (std::abs(value.get<double>()) > largest) {
      largest = std::abs(value.get<double>());
      worst = name;
    }
  }
  EXPECT_EQ(worst, "source2_only.threefold_ABC");

  std::ofstream(dir / "empty.json") << "";
  EXPECT_NE(run("calibrate " + config.string() + " --targets " + (dir / "empty.json").string()), 0);
  std::ofstream(dir / "object.json") << "{}";
  EXPECT_EQ(run("calibrate " + config.string() + " --targets " + (dir / "object.json").string()), 2);
}

TEST_F(BinaryTest, CheckN) {
  const auto report = dir / "n6.json";
  ASSERT_EQ(run("check-n --n 6 --json " + report.string()), 0);
  EXPECT_NEAR(printed("visibility"), 1.0, 1e-9);
  EXPECT_LE(printed("max_lower_order_deviation"), 1e-9);
  const auto j = json::parse(slurp(report));
  EXPECT_EQ(j["n_point"].size(), 31u);
}

TEST_F(BinaryTest, Oracle) {
  EXPECT_EQ(run("oracle --chi 0.3 --varphi 1.1 --theta -0.4"), 0) << out();
}

}  // namespace
}  // namespace cmbi::cli
