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

#include "cmbi/observables.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cmbi {

namespace {

unsigned external_count(const OccupationBasisState& basis, const ModeSpace& space,
                        std::size_t ext_mode) {
  unsigned n = 0;
  for (std::size_t alpha = 0; alpha < space.n_internal(); ++alpha) {
    n += basis[ext_mode * space.n_internal() + alpha];
  }
  return n;
}

void check_distinct_modes(std::span<const std::size_t> modes, const ModeSpace& space) {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] >= space.n_external()) throw std::out_of_range("mode outside mode space");
    for (std::size_t j = 0; j < i; ++j) {
      if (modes[i] == modes[j]) throw std::invalid_argument("correlator modes must be distinct");
    }
  }
}

}  // namespace

double k_point_correlator(const SparseStateVector& state, std::span<const std::size_t> modes) {
  const ModeSpace& space = state.mode_space();
  if (modes.empty()) throw std::invalid_argument("correlator needs at least one mode");
  check_distinct_modes(modes, space);
  double sum = 0;
  for (const auto& [basis, amp] : state.terms()) {
    double product = std::norm(amp);
    for (std::size_t p : modes) {
      product *= external_count(basis, space, p);
      if (product == 0) break;
    }
    sum += product;
  }
  return sum;
}

double four_point_closed_form(const PhaseSetting& setting) {
  const double c = std::cos(setting.collective_phase() / 2.0);
  return c * c / 8.0;
}

complex a_operator_expectation(const SparseStateVector& state, std::span<const std::size_t> bra,
                               std::span<const std::size_t> ket) {
  if (bra.size() != ket.size() || (bra.size() != 2 && bra.size() != 4)) {
    throw std::invalid_argument("A operator needs bra and ket tuples of length 2 or 4");
  }
  const ModeSpace& space = state.mode_space();
  for (std::size_t m : bra) {
    if (m >= space.n_external()) throw std::out_of_range("A operator mode outside mode space");
  }
  for (std::size_t m : ket) {
    if (m >= space.n_external()) throw std::out_of_range("A operator mode outside mode space");
  }
  const std::size_t k = bra.size();
  const std::size_t n_int = space.n_internal();
  std::size_t n_labelings = 1;
  for (std::size_t i = 0; i < k; ++i) n_labelings *= n_int;

  complex sum = 0;
  std::vector<std::size_t> labels(k);
  for (std::size_t code = 0; code < n_labelings; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < k; ++i) {
      labels[i] = c % n_int;
      c /= n_int;
    }
    SparseStateVector bra_vec = state;
    SparseStateVector ket_vec = state;
    for (std::size_t i = k; i-- > 0;) {
      bra_vec = annihilate_combined(bra_vec, space.index(bra[i], labels[i]));
      ket_vec = annihilate_combined(ket_vec, space.index(ket[i], labels[i]));
    }
    sum += inner_product(bra_vec, ket_vec);
  }
  return sum;
}

ReducedCoherence reduced_coherence(const SparseStateVector& state, std::vector<std::size_t> bra_modes,
                                   std::vector<std::size_t> ket_modes) {
  const unsigned n = state.fixed_photon_number();
  const std::size_t k = bra_modes.size();
  if (k > n) throw std::invalid_argument("coherence order exceeds photon number");
  double falling = 1;
  for (std::size_t i = 0; i < k; ++i) falling *= double(n - i);
  const complex value = a_operator_expectation(state, bra_modes, ket_modes) / falling;
  return {std::move(bra_modes), std::move(ket_modes), value};
}

complex product_state_coherence(std::span<const InternalState> internal_states,
                                std::span<const std::size_t> bra_modes,
                                std::span<const std::size_t> permutation) {
  const std::size_t k = bra_modes.size();
  if (permutation.size() != k) throw std::invalid_argument("permutation size does not match tuple");
  std::vector<std::size_t> inverse(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    if (permutation[i] >= k || inverse[permutation[i]] != k) {
      throw std::invalid_argument("malformed permutation");
    }
    inverse[permutation[i]] = i;
  }
  complex value = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t m = bra_modes[i];
    const std::size_t n = bra_modes[inverse[i]];
    if (m >= internal_states.size() || n >= internal_states.size()) {
      throw std::out_of_range("mode has no internal state");
    }
    value *= internal_states[m].overlap(internal_states[n]);
  }
  return value;
}

// ---------------------------------------------------------------------------

std::size_t ClickEvent::n_clicks() const { return static_cast<std::size_t>(std::popcount(clicked)); }

double ClickDistribution::total() const {
  double sum = 0;
  for (const auto& [e, p] : events) sum += p;
  return sum;
}

double ClickDistribution::probability(const ClickEvent& e) const {
  auto it = std::lower_bound(events.begin(), events.end(), e,
                             [](const auto& kv, const ClickEvent& x) { return kv.first < x; });
  return (it != events.end() && it->first == e) ? it->second : 0.0;
}

namespace {

void check_layout(const DetectorLayout& layout, const ModeSpace& space) {
  if (layout.detector_modes.size() != layout.channels.size()) {
    throw std::invalid_argument("layout has no detector modes for some channel");
  }
  if (layout.n_detectors() > 64) throw std::invalid_argument("at most 64 detectors supported");
  for (const auto& modes : layout.detector_modes) {
    if (modes.size() != layout.detectors_per_channel) {
      throw std::invalid_argument("detector count per channel does not match layout");
    }
    for (std::size_t m : modes) {
      if (m >= space.n_external()) throw std::invalid_argument("detector mode outside mode space");
    }
  }
}

ClickDistribution to_distribution(const std::map<std::uint64_t, double>& probs,
                                  const DetectorLayout& layout) {
  ClickDistribution out;
  out.rejection_threshold = layout.rejection_threshold;
  out.events.reserve(probs.size());
  for (const auto& [mask, p] : probs) out.events.push_back({ClickEvent{mask}, p});
  return out;
}

// Probability of each click subset of one channel's detectors given n photons
// arriving at its output port, with transmission eta before the detectors.
// Index = detector bitmask within the channel.
std::array<double, 4> channel_click_probabilities(unsigned n, double eta, std::size_t detectors) {
  const double none = std::pow(1.0 - eta, n);
  if (detectors == 1) return {none, 1.0 - none, 0.0, 0.0};
  const double miss_one = std::pow(1.0 - eta / 2.0, n);
  const double only = miss_one - none;
  return {none, only, only, 1.0 - 2.0 * miss_one + none};
}

}  // namespace

ClickDistribution click_distribution(const SparseStateVector& state, const DetectorLayout& layout) {
  const ModeSpace& space = state.mode_space();
  check_layout(layout, space);
  std::map<std::uint64_t, double> probs;
  for (const auto& [basis, amp] : state.terms()) {
    std::uint64_t mask = 0;
    for (std::size_t c = 0; c < layout.channels.size(); ++c) {
      for (std::size_t k = 0; k < layout.detectors_per_channel; ++k) {
        if (external_count(basis, space, layout.detector_modes[c][k]) > 0) {
          mask |= std::uint64_t{1} << layout.detector_id(c, k);
        }
      }
    }
    probs[mask] += std::norm(amp);
  }
  return to_distribution(probs, layout);
}

ClickDistribution detect(const SparseStateVector& input, const InterferometerSpec& spec,
                         const DetectorLayout& layout, DetectionRoute route) {
  const std::size_t dets = layout.detectors_per_channel;
  if (dets != (spec.multiplex_depth == 0 ? 1u : 2u) || layout.channels.size() != spec.channel_names.size()) {
    throw std::invalid_argument("detector layout does not match the interferometer");
  }
  if (route == DetectionRoute::kFullDilation) {
    return click_distribution(apply_network(input, spec), layout);
  }

  const SparseStateVector front =
      apply_network(input, spec, {GateRole::kInputLoss, GateRole::kSignal});
  const ModeSpace& space = front.mode_space();
  check_layout(layout, space);
  const std::size_t n_channels = spec.channel_names.size();

  // Photon-number marginal on the channel output ports.
  std::map<std::vector<unsigned>, double> marginal;
  std::vector<unsigned> counts(n_channels);
  for (const auto& [basis, amp] : front.terms()) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      counts[c] = external_count(basis, space, spec.channel_output_modes[c]);
    }
    marginal[counts] += std::norm(amp);
  }

  std::vector<double> etas(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) etas[c] = spec.output_transmission(c);

  std::map<std::uint64_t, double> probs;
  std::vector<std::array<double, 4>> per_channel(n_channels);
  const std::size_t n_sub = std::size_t{1} << dets;
  for (const auto& [n, p] : marginal) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      per_channel[c] = channel_click_probabilities(n[c], etas[c], dets);
    }
    // Depth-first product over channels.
    auto recurse = [&](auto&& self, std::size_t c, std::uint64_t mask, double weight) -> void {
      if (weight == 0.0) return;
      if (c == n_channels) {
        probs[mask] += weight;
        return;
      }
      for (std::size_t sub = 0; sub < n_sub; ++sub) {
        const double q = per_channel[c][sub];
        if (q == 0.0) continue;
        self(self, c + 1, mask | (std::uint64_t(sub) << (c * dets)), weight * q);
      }
    };
    recurse(recurse, 0, 0, p);
  }
  return to_distribution(probs, layout);
}

double coincidence_weight(const ClickDistribution& dist, const DetectorLayout& layout,
                          std::span<const std::size_t> channels) {
  if (channels.empty()) throw std::invalid_argument("coincidence needs at least one channel");
  std::vector<std::uint64_t> channel_masks;
  const std::uint64_t one_channel = (std::uint64_t{1} << layout.detectors_per_channel) - 1;
  for (std::size_t c : channels) {
    if (c >= layout.channels.size()) throw std::out_of_range("channel index outside layout");
    channel_masks.push_back(one_channel << layout.detector_id(c, 0));
  }
  double sum = 0;
  for (const auto& [event, p] : dist.events) {
    if (dist.rejected(event)) continue;
    double w = p;
    for (std::uint64_t m : channel_masks) {
      w *= std::popcount(event.clicked & m);
      if (w == 0) break;
    }
    sum += w;
  }
  return sum;
}

double coincidence_rate(const SpdcEnsemble& ensemble, const InterferometerSpec& spec,
                        const std::vector<std::string>& channels, const DetectorLayout& layout,
                        DetectionRoute route) {
  if (channels.empty()) throw std::invalid_argument("coincidence needs at least one channel");
  std::vector<std::size_t> idx;
  for (const auto& name : channels) idx.push_back(spec.channel_index(name));
  double rate = 0;
  for (const auto& term : ensemble.terms) {
    rate += term.rate * coincidence_weight(detect(term.state, spec, layout, route), layout, idx);
  }
  return rate;
}

double threshold_series_expectation(const SparseStateVector& state,
                                    std::span<const std::size_t> modes, unsigned max_order) {
  const ModeSpace& space = state.mode_space();
  check_distinct_modes(modes, space);
  if (max_order < modes.size()) throw std::invalid_argument("max_order below number of channels");
  std::vector<double> inv_factorial(max_order + 1, 1.0);
  for (unsigned j = 1; j <= max_order; ++j) inv_factorial[j] = inv_factorial[j - 1] / j;

  double sum = 0;
  std::vector<double> poly, next;
  for (const auto& [basis, amp] : state.terms()) {
    // poly[j]: summed coefficient of all kept products with total order j.
    poly.assign(max_order + 1, 0.0);
    poly[0] = 1.0;
    for (std::size_t p : modes) {
      const unsigned n = external_count(basis, space, p);
      next.assign(max_order + 1, 0.0);
      double falling = 1.0;
      for (unsigned j = 1; j <= max_order && j <= n; ++j) {
        falling *= double(n - j + 1);
        const double term = ((j % 2 == 1) ? 1.0 : -1.0) * inv_factorial[j] * falling;
        for (unsigned o = 0; o + j <= max_order; ++o) next[o + j] += poly[o] * term;
      }
      poly.swap(next);
    }
    double value = 0;
    for (double v : poly) value += v;
    sum += std::norm(amp) * value;
  }
  return sum;
}

}  // namespace cmbi
