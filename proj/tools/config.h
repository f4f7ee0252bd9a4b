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

#ifndef CMBI_TOOLS_CONFIG_H_
#define CMBI_TOOLS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmbi/calibration.h"
#include "cmbi/experiment.h"

namespace cmbi::cli {

/// Malformed, unreadable or schema-invalid input. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Angle in radians from a number or a string such as "pi", "-pi/2", "3pi/2",
/// "1.5*pi" or "0.25".
double parse_angle(const std::string& text);
double parse_angle(const nlohmann::json& value);
inline double parse_angle(const char* text) { return parse_angle(std::string(text)); }

struct SourceBlock {
  std::optional<double> gamma;
  std::optional<double> tau;
  std::optional<double> power;

  SpdcSource build(double rep_rate) const;
};

struct CalibrationSection {
  CalibrationParameters initial_guess{std::vector<double>(8, 0.8), {0.5, 0.5}};
  CalibrationBounds bounds;
  CalibrationOptions options;
};

struct RunConfig {
  SourceBlock source1{0.102, {}, {}};
  SourceBlock source2{0.094, {}, {}};
  double rep_rate = 80e6;
  unsigned truncation = 3;
  double rate_floor = 0;

  NetworkConfig network;
  ScanConfig scan;
  SamplingMode mode;

  std::filesystem::path output_directory = "cmbi_out";
  bool write_svg = true;

  CalibrationSection calibration;

  SourceModel sources() const;
  CalibrationModel calibration_model() const;
};

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
/// Reads and validates a config file; relative output paths resolve against
/// the working directory.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

CalibrationTargets targets_from_json(const nlohmann::json& doc);
nlohmann::json targets_to_json(const CalibrationTargets& targets);

}  // namespace cmbi::cli

#endif  // CMBI_TOOLS_CONFIG_H_
