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

#ifndef CMBI_OBSERVABLES_H_
#define CMBI_OBSERVABLES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmbi/fock.h"
#include "cmbi/network.h"
#include "cmbi/sources.h"

namespace cmbi {

/// <N_{p1} ... N_{pk}> over distinct external modes; N_p sums all internal labels.
double k_point_correlator(const SparseStateVector& state, std::span<const std::size_t> modes);

/// (1/8) cos^2((chi + varphi - theta) / 2)
double four_point_closed_form(const PhaseSetting& setting);

/// <state| A_{bra, ket} |state> with
/// A_{i..l, m..p} = sum_{alpha..} a^dag_{i alpha} .. a^dag_{l delta} a_{m alpha} .. a_{p delta}.
/// Tuples of length 2 or 4.
complex a_operator_expectation(const SparseStateVector& state, std::span<const std::size_t> bra,
                               std::span<const std::size_t> ket);

struct ReducedCoherence {
  std::vector<std::size_t> bra_modes;
  std::vector<std::size_t> ket_modes;
  complex value;
};

/// <m| rho_ext^(k) |n>, normalized so the reduced state has unit trace.
ReducedCoherence reduced_coherence(const SparseStateVector& state, std::vector<std::size_t> bra_modes,
                                   std::vector<std::size_t> ket_modes);

/// prod_i <xi_{m_i} | xi_{m_{pi^-1(i)}}> for a product input with one
/// particle per mode. `internal_states[m]` is the state of the particle in
/// mode m; `permutation[i]` is pi(i) on tuple positions.
complex product_state_coherence(std::span<const InternalState> internal_states,
                                std::span<const std::size_t> bra_modes,
                                std::span<const std::size_t> permutation);

/// Set bits are clicked detectors (flat ids from DetectorLayout).
struct ClickEvent {
  std::uint64_t clicked = 0;

  std::size_t n_clicks() const;
  bool operator==(const ClickEvent&) const = default;
  auto operator<=>(const ClickEvent&) const = default;
};

/// Probabilities over click patterns, sorted by pattern.
struct ClickDistribution {
  std::vector<std::pair<ClickEvent, double>> events;
  std::size_t rejection_threshold = 0;

  bool rejected(const ClickEvent& e) const { return e.n_clicks() > rejection_threshold; }
  double total() const;
  double probability(const ClickEvent& e) const;
};

/// Click statistics of a post-network state: internal labels and ancilla
/// occupations are marginalized, occupation > 0 on a detector mode clicks.
ClickDistribution click_distribution(const SparseStateVector& state, const DetectorLayout& layout);

enum class DetectionRoute {
  /// Evolve through every gate including output losses and the multiplex layer.
  kFullDilation,
  /// Evolve through input losses and signal gates only; output losses and
  /// multiplex splitting are applied to the photon-number marginal in closed form.
  kOutputMarginal,
};

/// Click statistics of an input state sent through `spec`.
ClickDistribution detect(const SparseStateVector& input, const InterferometerSpec& spec,
                         const DetectorLayout& layout,
                         DetectionRoute route = DetectionRoute::kOutputMarginal);

/// Expected coincidence weight of `channels` on one click distribution: the
/// sum over detector tuples (one detector per listed channel) of the
/// probability that all of them click, rejected events excluded.
double coincidence_weight(const ClickDistribution& dist, const DetectorLayout& layout,
                          std::span<const std::size_t> channels);

/// Sum over emission terms of rate x coincidence_weight. Singles are k = 1.
double coincidence_rate(const SpdcEnsemble& ensemble, const InterferometerSpec& spec,
                        const std::vector<std::string>& channels, const DetectorLayout& layout,
                        DetectionRoute route = DetectionRoute::kOutputMarginal);

/// Factorial-moment expansion of M_{p1} ... M_{pk}, keeping all terms of total
/// order <= max_order. Exact for states with at most max_order photons.
double threshold_series_expectation(const SparseStateVector& state,
                                    std::span<const std::size_t> modes, unsigned max_order);

}  // namespace cmbi

#endif  // CMBI_OBSERVABLES_H_
