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

#include "cmbi/network.h"

#include <algorithm>
#include <stdexcept>

namespace cmbi {

LossModel LossModel::uniform(std::size_t n_ports, double eta) {
  LossModel m{std::vector<double>(n_ports, eta)};
  m.validate();
  return m;
}

void LossModel::validate() const {
  for (double eta : transmissions) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("transmission must lie in [0, 1]");
  }
}

std::size_t InterferometerSpec::channel_index(const std::string& name) const {
  auto it = std::find(channel_names.begin(), channel_names.end(), name);
  if (it == channel_names.end()) throw std::invalid_argument("unknown channel '" + name + "'");
  return static_cast<std::size_t>(it - channel_names.begin());
}

double InterferometerSpec::output_transmission(std::size_t c) const {
  if (!loss) return 1.0;
  return loss->transmissions.at(n_signal_modes + channel_output_modes.at(c));
}

InterferometerSpec build_disjoint_scheme(std::size_t n_particles,
                                         const std::vector<double>& splitting_ratios) {
  if (n_particles < 4 || n_particles % 2 != 0) {
    throw std::invalid_argument("disjoint scheme needs an even particle number >= 4");
  }
  if (splitting_ratios.size() != n_particles / 2) {
    throw std::invalid_argument("need one splitting ratio per beam splitter");
  }
  InterferometerSpec spec;
  spec.n_signal_modes = n_particles;
  spec.n_modes = n_particles;
  spec.splitting_ratios = splitting_ratios;
  for (std::size_t b = 0; b < n_particles / 2; ++b) {
    const double t = splitting_ratios[b];
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("splitting ratio must lie in [0, 1]");
    spec.gates.push_back({2 * b, 2 * b + 1, t, GateRole::kSignal});
  }
  for (std::size_t p = 0; p < n_particles; ++p) {
    spec.channel_names.push_back(p < 26 ? std::string(1, char('A' + p)) : "ch" + std::to_string(p));
    spec.channel_output_modes.push_back(p);
    spec.channel_modes.push_back({p});
  }
  return spec;
}

InterferometerSpec dilate_with_loss(const InterferometerSpec& spec, const LossModel& loss) {
  const std::size_t n = spec.n_signal_modes;
  if (spec.loss) throw std::logic_error("spec already carries a loss model");
  if (spec.multiplex_depth != 0) throw std::logic_error("dilate losses before multiplexing");
  if (loss.transmissions.size() != 2 * n) {
    throw std::invalid_argument("loss model needs one transmission per input and output port");
  }
  loss.validate();

  InterferometerSpec out = spec;
  out.loss = loss;
  out.gates.clear();
  const std::size_t first_ancilla = spec.n_modes;
  out.n_modes = spec.n_modes + 2 * n;
  for (std::size_t j = 0; j < 2 * n; ++j) out.ancilla_modes.push_back(first_ancilla + j);

  for (std::size_t j = 0; j < n; ++j) {
    out.gates.push_back({j, first_ancilla + j, loss.transmissions[j], GateRole::kInputLoss});
  }
  for (const Gate& g : spec.gates) out.gates.push_back(g);
  for (std::size_t p = 0; p < n; ++p) {
    out.gates.push_back({p, first_ancilla + n + p, loss.transmissions[n + p], GateRole::kOutputLoss});
  }
  return out;
}

InterferometerSpec add_multiplex_layer(const InterferometerSpec& spec) {
  if (spec.multiplex_depth != 0) throw std::logic_error("only one multiplex layer is modeled");
  InterferometerSpec out = spec;
  out.multiplex_depth = 1;
  for (std::size_t c = 0; c < spec.channel_names.size(); ++c) {
    const std::size_t primary = spec.channel_output_modes[c];
    const std::size_t extra = out.n_modes++;
    out.gates.push_back({primary, extra, 0.5, GateRole::kMultiplex});
    out.channel_modes[c] = {primary, extra};
  }
  return out;
}

Eigen::MatrixXd single_particle_matrix(const InterferometerSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.n_modes);
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(n, n);
  for (const Gate& g : spec.gates) {
    const auto bs = beam_splitter_matrix(g.transmissivity);
    const auto a = static_cast<Eigen::Index>(g.mode_a);
    const auto b = static_cast<Eigen::Index>(g.mode_b);
    const Eigen::RowVectorXd row_a = u.row(a), row_b = u.row(b);
    u.row(a) = bs[0][0] * row_a + bs[0][1] * row_b;
    u.row(b) = bs[1][0] * row_a + bs[1][1] * row_b;
  }
  return u;
}

namespace {

void check_dimensions(const SparseStateVector& state, const InterferometerSpec& spec) {
  if (state.mode_space().n_external() != spec.n_modes) {
    throw std::invalid_argument("state has " + std::to_string(state.mode_space().n_external()) +
                                " external modes, network has " + std::to_string(spec.n_modes));
  }
}

}  // namespace

SparseStateVector apply_network(const SparseStateVector& state, const InterferometerSpec& spec) {
  check_dimensions(state, spec);
  SparseStateVector out = state;
  for (const Gate& g : spec.gates) out = apply_beam_splitter(out, g.mode_a, g.mode_b, g.transmissivity);
  return out;
}

SparseStateVector apply_network(const SparseStateVector& state, const InterferometerSpec& spec,
                                std::initializer_list<GateRole> roles) {
  check_dimensions(state, spec);
  SparseStateVector out = state;
  for (const Gate& g : spec.gates) {
    if (std::find(roles.begin(), roles.end(), g.role) == roles.end()) continue;
    out = apply_beam_splitter(out, g.mode_a, g.mode_b, g.transmissivity);
  }
  return out;
}

DetectorLayout make_detector_layout(const InterferometerSpec& spec,
                                    std::size_t rejection_threshold) {
  DetectorLayout layout;
  layout.channels = spec.channel_names;
  layout.detectors_per_channel = spec.multiplex_depth == 0 ? 1 : 2;
  layout.rejection_threshold = rejection_threshold;
  layout.detector_modes = spec.channel_modes;
  return layout;
}

}  // namespace cmbi
