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

#ifndef CMBI_EXPERIMENT_H_
#define CMBI_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmbi/network.h"
#include "cmbi/observables.h"
#include "cmbi/sources.h"

namespace cmbi {

/// Raised when an objective or fit produces non-finite or degenerate numbers.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-source configuration driving the ensemble of emission terms.
struct SourceModel {
  SpdcSource source1 = SpdcSource::from_gamma(0.102, 80e6);
  SpdcSource source2 = SpdcSource::from_gamma(0.094, 80e6);
  unsigned truncation = 3;
  double rate_floor = 0.0;

  SourceModel with_power_factor(double factor) const;
};

/// Physical N = 4 setup: two splitters, optional per-port losses and one
/// optional multiplex layer.
struct NetworkConfig {
  std::vector<double> splitting_ratios{0.5, 0.5};
  /// 8 transmissions (inputs 1-4, then outputs A-D); none = lossless, no ancillas.
  std::optional<std::vector<double>> transmissions;
  bool multiplex = false;
  std::size_t rejection_threshold = 4;
};

InterferometerSpec build_experiment_network(const NetworkConfig& config);

/// Channel subsets counted per scan point: all singles, then every 2-, 3- and
/// 4-fold combination, lexicographic within each order.
std::vector<std::vector<std::size_t>> counter_subsets(std::size_t n_channels, std::size_t max_order = 4);
/// singles_A, twofold_AB, ..., fourfold_ABCD
std::vector<std::string> counter_names(const std::vector<std::string>& channels, std::size_t max_order = 4);

/// One value per counter, ordered as counter_subsets.
struct CountsRecord {
  std::vector<double> values;
};

/// Rates (1/s) of every counter for an ensemble. One detection pass per term.
CountsRecord ensemble_rates(const SpdcEnsemble& ensemble, const InterferometerSpec& spec,
                            const DetectorLayout& layout,
                            DetectionRoute route = DetectionRoute::kOutputMarginal);

struct ScanConfig {
  double chi = 0;
  double theta = 0;
  std::vector<double> varphi_grid = default_grid();
  double integration_time = 60;
  unsigned repetitions = 1;

  /// 31 points from -pi/2 to 3pi/2.
  static std::vector<double> default_grid();
  void validate() const;
};

struct SamplingMode {
  bool sampled = false;
  std::uint64_t seed = 0;

  static SamplingMode expectation() { return {}; }
  static SamplingMode poisson(std::uint64_t seed) { return {true, seed}; }
};

struct ScanPoint {
  double varphi = 0;
  double collective_phase = 0;
  CountsRecord counts;
};

struct ScanResult {
  std::vector<std::string> counter_names;
  std::vector<ScanPoint> points;

  std::size_t counter_index(const std::string& name) const;
  std::vector<std::pair<double, double>> series(const std::string& counter) const;
};

/// Expected counts (rate x integration time) or Poisson samples averaged over
/// the repetitions. `blocked_sources` lists sources removed from the ensemble.
ScanResult run_phase_scan(const ScanConfig& config, const SourceModel& sources,
                          const InterferometerSpec& spec, const DetectorLayout& layout,
                          const SamplingMode& mode = SamplingMode::expectation(),
                          const std::vector<int>& blocked_sources = {});

ScanResult measure_background(const ScanConfig& config, const SourceModel& sources,
                              const InterferometerSpec& spec, const DetectorLayout& layout,
                              int blocked_source,
                              const SamplingMode& mode = SamplingMode::expectation());

/// main - bg1 - bg2 pointwise; negative values are kept.
ScanResult background_subtract(const ScanResult& main, const ScanResult& bg1, const ScanResult& bg2);

/// Least-squares fit of A + B cos(phase - delta).
struct FitResult {
  double offset = 0;     // A
  double amplitude = 0;  // B >= 0
  double phase = 0;      // delta, radians in (-pi, pi]
  double visibility = 0; // B / A
  double residual_norm = 0;
  std::size_t n_points = 0;

  double operator()(double x) const;
};

FitResult fit_cosine(const std::vector<std::pair<double, double>>& points);

}  // namespace cmbi

#endif  // CMBI_EXPERIMENT_H_
