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

#ifndef CMBI_FOCK_H_
#define CMBI_FOCK_H_

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cmbi {

using complex = std::complex<double>;

inline constexpr double kDefaultPruneThreshold = 1e-14;

/// External (spatial) modes times internal labels. Combined index is
/// `external * n_internal + internal`.
class ModeSpace {
 public:
  ModeSpace(std::size_t n_external, std::size_t n_internal);

  std::size_t n_external() const { return n_external_; }
  std::size_t n_internal() const { return n_internal_; }
  std::size_t combined() const { return n_external_ * n_internal_; }

  std::size_t index(std::size_t external, std::size_t internal) const;
  std::pair<std::size_t, std::size_t> split(std::size_t combined_index) const;

  bool operator==(const ModeSpace&) const = default;

 private:
  std::size_t n_external_;
  std::size_t n_internal_;
};

/// Single-particle internal state, e.g. a polarization in the {H, V} basis.
class InternalState {
 public:
  explicit InternalState(std::vector<complex> amplitudes);

  static InternalState basis(std::size_t dim, std::size_t label);
  static InternalState horizontal() { return basis(2, 0); }
  static InternalState vertical() { return basis(2, 1); }
  /// (|H> + e^{i phase}|V>) / sqrt(2)
  static InternalState balanced(double phase);

  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const complex> amplitudes() const { return amplitudes_; }
  const complex& operator[](std::size_t i) const { return amplitudes_[i]; }
  double norm() const;
  bool is_normalized(double tol = 1e-12) const;

  /// <this|other>
  complex overlap(const InternalState& other) const;

 private:
  std::vector<complex> amplitudes_;
};

/// Photon counts over combined modes, packed four bits per mode. Holds up to
/// kMaxModes combined modes with at most kMaxOccupation photons each.
class OccupationBasisState {
 public:
  static constexpr std::size_t kMaxModes = 64;
  static constexpr unsigned kMaxOccupation = 15;

  OccupationBasisState() = default;
  explicit OccupationBasisState(std::span<const unsigned> occupations);

  unsigned operator[](std::size_t mode) const {
    return static_cast<unsigned>((words_[mode >> 4] >> ((mode & 15) * 4)) & 0xFu);
  }
  /// Copy with `mode` set to `count`.
  OccupationBasisState with(std::size_t mode, unsigned count) const;

  unsigned total() const;
  std::vector<unsigned> occupations(std::size_t n_modes) const;

  bool operator==(const OccupationBasisState&) const = default;
  auto operator<=>(const OccupationBasisState& o) const = default;

  std::size_t hash() const;

 private:
  std::array<std::uint64_t, 4> words_{};
};

struct OccupationHash {
  std::size_t operator()(const OccupationBasisState& s) const { return s.hash(); }
};

/// Sparse superposition of occupation basis states.
class SparseStateVector {
 public:
  using TermMap =
      std::unordered_map<OccupationBasisState, complex, OccupationHash>;

  explicit SparseStateVector(ModeSpace space,
                             double prune_threshold = kDefaultPruneThreshold);

  static SparseStateVector vacuum(ModeSpace space);

  const ModeSpace& mode_space() const { return space_; }
  double prune_threshold() const { return prune_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  complex amplitude(const OccupationBasisState& basis) const;
  /// Adds `value` to the amplitude of `basis`; drops it if the result prunes.
  void accumulate(const OccupationBasisState& basis, complex value);

  double norm() const;
  SparseStateVector normalized() const;
  SparseStateVector scaled(complex factor) const;
  SparseStateVector plus(const SparseStateVector& other) const;

  /// Total photon number common to every term; throws if terms disagree.
  unsigned fixed_photon_number() const;

  /// Terms ordered by basis state, for deterministic output.
  std::vector<std::pair<OccupationBasisState, complex>> sorted_terms() const;

  void prune();

 private:
  ModeSpace space_;
  double prune_;
  TermMap terms_;
};

/// Applies sum_alpha c_alpha a^dag_{ext_mode, alpha}.
SparseStateVector create(const SparseStateVector& state, std::size_t ext_mode,
                         const InternalState& internal);

/// Applies a^dag on one combined mode.
SparseStateVector create_combined(const SparseStateVector& state,
                                  std::size_t combined_mode);
/// Applies a on one combined mode.
SparseStateVector annihilate_combined(const SparseStateVector& state,
                                      std::size_t combined_mode);

/// <a|b>, conjugate-linear in `a`.
complex inner_product(const SparseStateVector& a, const SparseStateVector& b);

/// Real two-mode splitter [[sqrt(t), sqrt(1-t)], [sqrt(1-t), -sqrt(t)]],
/// acting on creation operators as a^dag_m -> sum_p G(p, m) a^dag_p.
std::array<std::array<double, 2>, 2> beam_splitter_matrix(double transmissivity);

/// Applies the splitter on external modes (mode_a, mode_b), identically on
/// every internal label.
SparseStateVector apply_beam_splitter(const SparseStateVector& state,
                                      std::size_t mode_a, std::size_t mode_b,
                                      double transmissivity);

}  // namespace cmbi

#endif  // CMBI_FOCK_H_
