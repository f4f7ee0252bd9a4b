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

#include "cmbi/sources.h"

#include <cmath>
#include <stdexcept>

namespace cmbi {

SpdcSource::SpdcSource(double gamma, double rep_rate, std::optional<double> tau,
                       std::optional<double> pump_power)
    : gamma_(gamma), rep_rate_(rep_rate), tau_(tau), pump_power_(pump_power) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("squeezing parameter must lie in [0, 1)");
  if (!(rep_rate >= 0.0) || !std::isfinite(rep_rate)) throw std::invalid_argument("repetition rate must be finite and >= 0");
}

SpdcSource SpdcSource::from_gamma(double gamma, double rep_rate) {
  return SpdcSource(gamma, rep_rate, std::nullopt, std::nullopt);
}

SpdcSource SpdcSource::from_interaction(double tau, double pump_power, double rep_rate) {
  if (!(tau >= 0.0) || !(pump_power >= 0.0)) {
    throw std::invalid_argument("tau and pump power must be non-negative");
  }
  return SpdcSource(std::sqrt(tau * pump_power), rep_rate, tau, pump_power);
}

SpdcSource SpdcSource::with_power_factor(double factor) const {
  if (!(factor >= 0.0)) throw std::invalid_argument("power factor must be non-negative");
  std::optional<double> power;
  if (pump_power_) power = *pump_power_ * factor;
  return SpdcSource(gamma_ * std::sqrt(factor), rep_rate_, tau_, power);
}

double pair_probability(double gamma, unsigned n) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("squeezing parameter must lie in [0, 1)");
  const double g2 = gamma * gamma;
  return (1.0 - g2) * std::pow(g2, n);
}

namespace {

constexpr std::size_t kH = 0;
constexpr std::size_t kV = 1;

// (a^dag_{m1,H} a^dag_{m2,V} + e^{-i chi} a^dag_{m1,V} a^dag_{m2,H}) / sqrt(2)
SparseStateVector create_entangled_pair(const SparseStateVector& s, std::size_t m1, std::size_t m2,
                                        double chi) {
  const ModeSpace& space = s.mode_space();
  auto hv = create_combined(create_combined(s, space.index(m2, kV)), space.index(m1, kH));
  auto vh = create_combined(create_combined(s, space.index(m2, kH)), space.index(m1, kV));
  return hv.plus(vh.scaled(std::polar(1.0, -chi))).scaled(1.0 / std::sqrt(2.0));
}

void check_polarization_space(const ModeSpace& space, std::size_t min_external) {
  if (space.n_internal() != 2) throw std::invalid_argument("input states need a two-label polarization space");
  if (space.n_external() < min_external) throw std::invalid_argument("mode space has too few external modes");
}

}  // namespace

SparseStateVector build_input_state(const PhaseSetting& setting, unsigned r_s1, unsigned r_s2,
                                    const ModeSpace& mode_space) {
  if (r_s1 == 0 && r_s2 == 0) throw std::invalid_argument("input state needs at least one pair");
  check_polarization_space(mode_space, 4);
  auto state = SparseStateVector::vacuum(mode_space);
  const auto s1 = InternalState::balanced(setting.varphi);
  const auto s4 = InternalState::balanced(setting.theta);
  for (unsigned r = 0; r < r_s2; ++r) state = create(create(state, 3, s4), 0, s1);
  for (unsigned r = 0; r < r_s1; ++r) state = create_entangled_pair(state, 1, 2, setting.chi);
  return state.normalized();
}

SparseStateVector build_generalized_input(std::size_t n_particles, const std::vector<double>& chis,
                                          double varphi, double theta,
                                          const ModeSpace& mode_space) {
  if (n_particles < 4 || n_particles % 2 != 0) {
    throw std::invalid_argument("generalized scheme needs an even particle number >= 4");
  }
  if (chis.size() != n_particles / 2 - 1) {
    throw std::invalid_argument("need one entangled-pair phase per inner pair");
  }
  check_polarization_space(mode_space, n_particles);
  auto state = SparseStateVector::vacuum(mode_space);
  state = create(state, n_particles - 1, InternalState::balanced(theta));
  for (std::size_t k = chis.size(); k-- > 0;) {
    state = create_entangled_pair(state, 2 * k + 1, 2 * k + 2, chis[k]);
  }
  state = create(state, 0, InternalState::balanced(varphi));
  return state.normalized();
}

SpdcEnsemble enumerate_ensemble(const SpdcSource& source1, const SpdcSource& source2,
                                const PhaseSetting& setting, unsigned truncation,
                                const ModeSpace& mode_space, double rate_floor) {
  if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
  if (source1.rep_rate() != source2.rep_rate()) {
    throw std::invalid_argument("both sources are pumped by the same laser; repetition rates must agree");
  }
  SpdcEnsemble ensemble;
  ensemble.truncation = truncation;
  const double f = source1.rep_rate();
  for (unsigned total = 1; total <= truncation; ++total) {
    for (unsigned r1 = total + 1; r1-- > 0;) {
      const unsigned r2 = total - r1;
      const double rate =
          f * pair_probability(source1.gamma(), r1) * pair_probability(source2.gamma(), r2);
      if (rate < rate_floor) continue;
      ensemble.terms.push_back({r1, r2, rate, build_input_state(setting, r1, r2, mode_space)});
    }
  }
  return ensemble;
}

SpdcEnsemble blocked_ensemble(const SpdcEnsemble& ensemble, int blocked_source) {
  if (blocked_source != 1 && blocked_source != 2) throw std::invalid_argument("source id must be 1 or 2");
  SpdcEnsemble out;
  out.truncation = ensemble.truncation;
  for (const auto& term : ensemble.terms) {
    const unsigned blocked_pairs = blocked_source == 1 ? term.pairs_source1 : term.pairs_source2;
    if (blocked_pairs == 0) out.terms.push_back(term);
  }
  return out;
}

}  // namespace cmbi
