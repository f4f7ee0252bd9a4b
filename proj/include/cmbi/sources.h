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

#ifndef CMBI_SOURCES_H_
#define CMBI_SOURCES_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "cmbi/fock.h"

namespace cmbi {

/// Pulsed SPDC source with two-mode squeezed vacuum pair statistics.
class SpdcSource {
 public:
  static SpdcSource from_gamma(double gamma, double rep_rate);
  /// gamma = sqrt(tau * pump_power).
  static SpdcSource from_interaction(double tau, double pump_power, double rep_rate);

  double gamma() const { return gamma_; }
  double rep_rate() const { return rep_rate_; }
  std::optional<double> tau() const { return tau_; }
  std::optional<double> pump_power() const { return pump_power_; }

  /// Same source with the pump power multiplied by `factor` (gamma^2 scales linearly).
  SpdcSource with_power_factor(double factor) const;

 private:
  SpdcSource(double gamma, double rep_rate, std::optional<double> tau,
             std::optional<double> pump_power);

  double gamma_;
  double rep_rate_;
  std::optional<double> tau_;
  std::optional<double> pump_power_;
};

/// (1 - gamma^2) gamma^(2n)
double pair_probability(double gamma, unsigned n);

/// Phases of the entangled pair (chi) and the two separable photons
/// (varphi on port 1, theta on port 4).
struct PhaseSetting {
  double chi = 0;
  double varphi = 0;
  double theta = 0;

  double collective_phase() const { return chi + varphi - theta; }
};

/// Source 1 emits r_s1 entangled pairs into ports 2 and 3, source 2 emits
/// r_s2 separable pairs into ports 1 and 4. Ports are 1-based in the
/// physics; state mode indices are 0-based (port p -> external mode p-1).
SparseStateVector build_input_state(const PhaseSetting& setting, unsigned r_s1, unsigned r_s2,
                                    const ModeSpace& mode_space);

/// Generalized N-particle input: entangled pairs on ports (2,3), (4,5), ...,
/// (N-2, N-1) with phases `chis`, separable photons on ports 1 and N.
SparseStateVector build_generalized_input(std::size_t n_particles, const std::vector<double>& chis,
                                          double varphi, double theta,
                                          const ModeSpace& mode_space);

struct EmissionTerm {
  unsigned pairs_source1 = 0;
  unsigned pairs_source2 = 0;
  double rate = 0;
  SparseStateVector state;
};

struct SpdcEnsemble {
  std::vector<EmissionTerm> terms;
  unsigned truncation = 3;
};

/// All (r1, r2) with 1 <= r1 + r2 <= truncation, rates f P1(r1) P2(r2).
/// Terms with rate below `rate_floor` are dropped.
SpdcEnsemble enumerate_ensemble(const SpdcSource& source1, const SpdcSource& source2,
                                const PhaseSetting& setting, unsigned truncation,
                                const ModeSpace& mode_space, double rate_floor = 0.0);

/// Keeps only terms with no pairs from `blocked_source` (1 or 2).
SpdcEnsemble blocked_ensemble(const SpdcEnsemble& ensemble, int blocked_source);

}  // namespace cmbi

#endif  // CMBI_SOURCES_H_
