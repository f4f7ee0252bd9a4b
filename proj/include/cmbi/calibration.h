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

#ifndef CMBI_CALIBRATION_H_
#define CMBI_CALIBRATION_H_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmbi/experiment.h"

namespace cmbi {

/// Ten network parameters: transmissions of inputs 1-4 and outputs A-D, then
/// the two splitting ratios.
struct CalibrationParameters {
  std::vector<double> eta = std::vector<double>(8, 1.0);
  std::vector<double> splitting_ratios{0.5, 0.5};

  static constexpr std::size_t kSize = 10;
  std::vector<double> to_vector() const;
  static CalibrationParameters from_vector(const std::vector<double>& x);
  NetworkConfig network(bool multiplex, std::size_t rejection_threshold) const;
};

struct CalibrationBounds {
  std::vector<double> lower = std::vector<double>(CalibrationParameters::kSize, 0.0);
  std::vector<double> upper = std::vector<double>(CalibrationParameters::kSize, 1.0);

  /// Throws std::invalid_argument on wrong sizes, values outside [0, 1] or lower > upper.
  void validate() const;
};

/// Fixed experimental context shared by target generation and fitting.
struct CalibrationModel {
  SourceModel sources;
  PhaseSetting setting;
  bool multiplex = false;
  std::size_t rejection_threshold = 4;
};

/// Counter records of the two single-source configurations.
struct CalibrationTargets {
  /// Source 2 blocked: only source 1 emits.
  CountsRecord source1_only;
  /// Source 1 blocked: only source 2 emits.
  CountsRecord source2_only;

  void validate(std::size_t n_counters) const;
};

struct CalibrationOptions {
  unsigned n_starts = 4;
  std::uint64_t seed = 1;
  unsigned max_iterations = 4000;
  /// Simplex size at which a local search stops, in the unbounded coordinates.
  double simplex_tolerance = 1e-9;
  double initial_step = 0.3;
};

struct CalibrationResult {
  std::vector<double> eta;
  std::vector<double> splitting_ratios;
  double objective_value = 0;
  std::size_t iterations = 0;
  std::vector<std::string> observable_names;
  /// (model - target) / target for every observable, source1_only first.
  std::vector<double> residuals;

  CalibrationParameters parameters() const;
};

/// Expected rates of both single-source configurations.
CalibrationTargets simulate_calibration_targets(const CalibrationModel& model,
                                                const CalibrationParameters& params);

/// Sum of squared relative deviations over all observables with non-zero target.
double calibration_objective(const CalibrationModel& model, const CalibrationTargets& targets,
                             const CalibrationParameters& params);

/// Bounded Nelder-Mead with multi-start. The first start is `initial_guess`,
/// the rest are uniform draws inside the bounds from `options.seed`.
CalibrationResult calibrate_unitary(const CalibrationTargets& targets, const CalibrationModel& model,
                                    const CalibrationParameters& initial_guess,
                                    const CalibrationBounds& bounds = {},
                                    const CalibrationOptions& options = {});

struct PowerDriftResult {
  double factor = 1;
  double residual = 0;
  std::size_t evaluations = 0;
};

/// Common pump-power multiplier on both sources that best explains a main
/// scan under a calibrated network. Searches [lower, upper] with Brent.
PowerDriftResult fit_power_drift(const ScanResult& main_targets, const ScanConfig& scan,
                                 const SourceModel& nominal, const CalibrationResult& calibrated,
                                 bool multiplex = false, std::size_t rejection_threshold = 4,
                                 double lower = 0.5, double upper = 1.5);

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneralizedCheckOptions {
  std::size_t max_particles = 10;
  /// 31 points from -pi/2 to 5pi/2; contains the fringe minimum at pi.
  std::vector<double> varphi_grid = default_grid();
  /// One phase per inner entangled pair; empty means all zero.
  std::vector<double> chis;
  double theta = 0;

  static std::vector<double> default_grid();
};

struct GeneralizedReport {
  std::size_t n_particles = 0;
  std::vector<double> varphi;
  std::vector<double> n_point;
  FitResult fit;
  /// Smallest sampled N-point value.
  double minimum = 0;
  /// A - B of the fit.
  double fitted_minimum = 0;
  /// max over (N-1)-subsets of (max - min) across the grid.
  double max_lower_order_deviation = 0;
};

/// Lossless N-particle disjoint scheme scanned in varphi.
GeneralizedReport generalized_scheme_check(std::size_t n_particles,
                                           const GeneralizedCheckOptions& options = {});

}  // namespace cmbi

#endif  // CMBI_CALIBRATION_H_
