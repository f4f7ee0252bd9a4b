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

#ifndef CMBI_NETWORK_H_
#define CMBI_NETWORK_H_

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmbi/fock.h"

namespace cmbi {

enum class GateRole { kInputLoss, kSignal, kOutputLoss, kMultiplex };

struct Gate {
  std::size_t mode_a;
  std::size_t mode_b;
  double transmissivity;
  GateRole role = GateRole::kSignal;
};

/// Per-port transmissions: first the N input ports, then the N output ports.
struct LossModel {
  std::vector<double> transmissions;

  static LossModel uniform(std::size_t n_ports, double eta);
  void validate() const;
};

/// Ordered two-mode gate list over signal modes plus any ancilla and
/// detector modes appended by dilation or multiplexing.
///
/// Mode layout: [0, n_signal_modes) are the interferometer ports; loss
/// ancillas follow (one per input port, then one per output port); multiplex
/// detector modes come last.
struct InterferometerSpec {
  std::size_t n_signal_modes = 0;
  std::size_t n_modes = 0;
  std::vector<Gate> gates;
  std::vector<double> splitting_ratios;
  std::optional<LossModel> loss;
  int multiplex_depth = 0;

  std::vector<std::string> channel_names;
  /// Signal output mode feeding each channel.
  std::vector<std::size_t> channel_output_modes;
  /// Detector modes of each channel (one, or two after multiplexing).
  std::vector<std::vector<std::size_t>> channel_modes;
  std::vector<std::size_t> ancilla_modes;

  ModeSpace mode_space(std::size_t n_internal = 2) const { return {n_modes, n_internal}; }
  std::size_t channel_index(const std::string& name) const;
  /// Output transmission of channel `c` (1 without a loss model).
  double output_transmission(std::size_t c) const;
};

/// N/2 disjoint splitters on ports (0,1), (2,3), ...
InterferometerSpec build_disjoint_scheme(std::size_t n_particles,
                                         const std::vector<double>& splitting_ratios);

/// Couples every input and output port to its own vacuum ancilla.
InterferometerSpec dilate_with_loss(const InterferometerSpec& spec, const LossModel& loss);

/// Routes each channel's output onto two detector modes through a balanced
/// splitter. Only one layer is supported.
InterferometerSpec add_multiplex_layer(const InterferometerSpec& spec);

/// Composed single-particle transfer matrix over all modes, with column m
/// holding the image of a^dag_m.
Eigen::MatrixXd single_particle_matrix(const InterferometerSpec& spec);

/// Sequential gate-by-gate evolution.
SparseStateVector apply_network(const SparseStateVector& state, const InterferometerSpec& spec);

/// Evolution restricted to gates with one of the given roles, in order.
SparseStateVector apply_network(const SparseStateVector& state, const InterferometerSpec& spec,
                                std::initializer_list<GateRole> roles);

struct DetectorLayout {
  std::vector<std::string> channels;
  std::size_t detectors_per_channel = 1;
  std::size_t rejection_threshold = 4;
  std::vector<std::vector<std::size_t>> detector_modes;

  std::size_t n_detectors() const { return channels.size() * detectors_per_channel; }
  /// Flat detector id of detector `k` of channel `c`.
  std::size_t detector_id(std::size_t c, std::size_t k) const {
    return c * detectors_per_channel + k;
  }
};

DetectorLayout make_detector_layout(const InterferometerSpec& spec,
                                    std::size_t rejection_threshold = 4);

}  // namespace cmbi

#endif  // CMBI_NETWORK_H_
