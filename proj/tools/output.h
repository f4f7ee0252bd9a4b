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

#ifndef CMBI_TOOLS_OUTPUT_H_
#define CMBI_TOOLS_OUTPUT_H_

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmbi/calibration.h"
#include "cmbi/experiment.h"

namespace cmbi::cli {

/// Output path could not be written. Maps to exit code 4.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.12g, with -0 printed as 0.
std::string format_number(double v);

/// Header `varphi_rad,collective_phase_rad,<counters>` then one row per point.
std::string scan_to_csv(const ScanResult& scan);

/// Keys A, B, delta_rad, visibility, residual_norm, n_points.
nlohmann::json fit_to_json(const FitResult& fit);

nlohmann::json calibration_to_json(const CalibrationResult& result);

/// Fringe plot of `counter` with the fitted curves of the raw and corrected scans.
std::string fringe_svg(const ScanResult& raw, const FitResult& raw_fit, const ScanResult& corrected,
                       const FitResult& corrected_fit, const std::string& counter);

/// Writes to a sibling temp file and renames it over `path`. Creates the
/// parent directory if needed.
void write_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace cmbi::cli

#endif  // CMBI_TOOLS_OUTPUT_H_
