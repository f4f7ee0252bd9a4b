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

#include "cmbi/fock.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cmbi {

ModeSpace::ModeSpace(std::size_t n_external, std::size_t n_internal)
    : n_external_(n_external), n_internal_(n_internal) {
  if (n_external == 0 || n_internal == 0) {
    throw std::invalid_argument("ModeSpace needs at least one external and one internal mode");
  }
  if (combined() > OccupationBasisState::kMaxModes) {
    throw std::invalid_argument("ModeSpace exceeds " +
                                std::to_string(OccupationBasisState::kMaxModes) +
                                " combined modes");
  }
}

std::size_t ModeSpace::index(std::size_t external, std::size_t internal) const {
  if (external >= n_external_ || internal >= n_internal_) {
    throw std::out_of_range("mode (" + std::to_string(external) + ", " +
                            std::to_string(internal) + ") outside mode space");
  }
  return external * n_internal_ + internal;
}

std::pair<std::size_t, std::size_t> ModeSpace::split(std::size_t combined_index) const {
  if (combined_index >= combined()) {
    throw std::out_of_range("combined mode index outside mode space");
  }
  return {combined_index / n_internal_, combined_index % n_internal_};
}

// ---------------------------------------------------------------------------

InternalState::InternalState(std::vector<complex> amplitudes)
    : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.empty()) {
    throw std::invalid_argument("InternalState needs at least one amplitude");
  }
}

InternalState InternalState::basis(std::size_t dim, std::size_t label) {
  if (label >= dim) {
    throw std::out_of_range("internal basis label outside dimension");
  }
  std::vector<complex> v(dim, 0.0);
  v[label] = 1.0;
  return InternalState(std::move(v));
}

InternalState InternalState::balanced(double phase) {
  const double s = 1.0 / std::sqrt(2.0);
  return InternalState({s, s * std::polar(1.0, phase)});
}

double InternalState::norm() const {
  double sum = 0;
  for (const auto& c : amplitudes_) sum += std::norm(c);
  return std::sqrt(sum);
}

bool InternalState::is_normalized(double tol) const {
  return std::abs(norm() - 1.0) <= tol;
}

complex InternalState::overlap(const InternalState& other) const {
  if (other.dim() != dim()) {
    throw std::invalid_argument("overlap of internal states with different dimension");
  }
  complex sum = 0;
  for (std::size_t i = 0; i < dim(); ++i) sum += std::conj(amplitudes_[i]) * other.amplitudes_[i];
  return sum;
}

// ---------------------------------------------------------------------------

OccupationBasisState::OccupationBasisState(std::span<const unsigned> occupations) {
  if (occupations.size() > kMaxModes) {
    throw std::invalid_argument("too many modes for OccupationBasisState");
  }
  for (std::size_t m = 0; m < occupations.size(); ++m) {
    if (occupations[m] > kMaxOccupation) {
      throw std::overflow_error("mode occupation above " + std::to_string(kMaxOccupation));
    }
    words_[m >> 4] |= static_cast<std::uint64_t>(occupations[m]) << ((m & 15) * 4);
  }
}

OccupationBasisState OccupationBasisState::with(std::size_t mode, unsigned count) const {
  if (count > kMaxOccupation) {
    throw std::overflow_error("mode occupation above " + std::to_string(kMaxOccupation));
  }
  OccupationBasisState out = *this;
  const unsigned shift = (mode & 15) * 4;
  auto& w = out.words_[mode >> 4];
  w = (w & ~(std::uint64_t{0xF} << shift)) | (static_cast<std::uint64_t>(count) << shift);
  return out;
}

unsigned OccupationBasisState::total() const {
  unsigned sum = 0;
  for (std::uint64_t w : words_) {
    while (w != 0) {
      sum += static_cast<unsigned>(w & 0xFu);
      w >>= 4;
    }
  }
  return sum;
}

std::vector<unsigned> OccupationBasisState::occupations(std::size_t n_modes) const {
  std::vector<unsigned> out(n_modes);
  for (std::size_t m = 0; m < n_modes; ++m) out[m] = (*this)[m];
  return out;
}

std::size_t OccupationBasisState::hash() const {
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (std::uint64_t w : words_) {
    h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ull;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

// ---------------------------------------------------------------------------

SparseStateVector::SparseStateVector(ModeSpace space, double prune_threshold)
    : space_(space), prune_(prune_threshold) {}

SparseStateVector SparseStateVector::vacuum(ModeSpace space) {
  SparseStateVector out(space);
  out.terms_.emplace(OccupationBasisState{}, 1.0);
  return out;
}

complex SparseStateVector::amplitude(const OccupationBasisState& basis) const {
  auto it = terms_.find(basis);
  return it == terms_.end() ? complex{0.0} : it->second;
}

void SparseStateVector::accumulate(const OccupationBasisState& basis, complex value) {
  auto [it, inserted] = terms_.try_emplace(basis, value);
  if (!inserted) it->second += value;
  if (std::abs(it->second) < prune_) terms_.erase(it);
}

double SparseStateVector::norm() const {
  double sum = 0;
  for (const auto& [basis, amp] : sorted_terms()) sum += std::norm(amp);
  return std::sqrt(sum);
}

SparseStateVector SparseStateVector::normalized() const {
  const double n = norm();
  if (n == 0) throw std::domain_error("cannot normalize the zero vector");
  return scaled(1.0 / n);
}

SparseStateVector SparseStateVector::scaled(complex factor) const {
  SparseStateVector out(space_, prune_);
  out.terms_.reserve(terms_.size());
  for (const auto& [basis, amp] : terms_) {
    const complex v = amp * factor;
    if (std::abs(v) >= prune_) out.terms_.emplace(basis, v);
  }
  return out;
}

SparseStateVector SparseStateVector::plus(const SparseStateVector& other) const {
  if (!(other.space_ == space_)) throw std::invalid_argument("adding states on different mode spaces");
  SparseStateVector out = *this;
  for (const auto& [basis, amp] : other.terms_) out.accumulate(basis, amp);
  return out;
}

unsigned SparseStateVector::fixed_photon_number() const {
  if (terms_.empty()) throw std::domain_error("empty state has no photon number");
  const unsigned n = terms_.begin()->first.total();
  for (const auto& [basis, amp] : terms_) {
    if (basis.total() != n) throw std::domain_error("state mixes photon numbers");
  }
  return n;
}

std::vector<std::pair<OccupationBasisState, complex>> SparseStateVector::sorted_terms() const {
  std::vector<std::pair<OccupationBasisState, complex>> out(terms_.begin(), terms_.end());
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

void SparseStateVector::prune() {
  std::erase_if(terms_, [this](const auto& kv) { return std::abs(kv.second) < prune_; });
}

// ---------------------------------------------------------------------------

SparseStateVector create_combined(const SparseStateVector& state, std::size_t combined_mode) {
  if (combined_mode >= state.mode_space().combined()) {
    throw std::out_of_range("combined mode index outside mode space");
  }
  SparseStateVector out(state.mode_space(), state.prune_threshold());
  for (const auto& [basis, amp] : state.terms()) {
    const unsigned n = basis[combined_mode];
    out.accumulate(basis.with(combined_mode, n + 1), amp * std::sqrt(double(n + 1)));
  }
  return out;
}

SparseStateVector annihilate_combined(const SparseStateVector& state, std::size_t combined_mode) {
  if (combined_mode >= state.mode_space().combined()) {
    throw std::out_of_range("combined mode index outside mode space");
  }
  SparseStateVector out(state.mode_space(), state.prune_threshold());
  for (const auto& [basis, amp] : state.terms()) {
    const unsigned n = basis[combined_mode];
    if (n == 0) continue;
    out.accumulate(basis.with(combined_mode, n - 1), amp * std::sqrt(double(n)));
  }
  return out;
}

SparseStateVector create(const SparseStateVector& state, std::size_t ext_mode,
                         const InternalState& internal) {
  const ModeSpace& space = state.mode_space();
  if (ext_mode >= space.n_external()) {
    throw std::out_of_range("external mode " + std::to_string(ext_mode) + " outside mode space");
  }
  if (internal.dim() != space.n_internal()) {
    throw std::invalid_argument("internal state dimension does not match mode space");
  }
  if (!internal.is_normalized(1e-9)) {
    throw std::invalid_argument("internal state is not normalized");
  }
  SparseStateVector out(space, state.prune_threshold());
  for (const auto& [basis, amp] : state.terms()) {
    for (std::size_t alpha = 0; alpha < space.n_internal(); ++alpha) {
      if (internal[alpha] == complex{0.0}) continue;
      const std::size_t m = space.index(ext_mode, alpha);
      const unsigned n = basis[m];
      out.accumulate(basis.with(m, n + 1), amp * internal[alpha] * std::sqrt(double(n + 1)));
    }
  }
  return out;
}

complex inner_product(const SparseStateVector& a, const SparseStateVector& b) {
  if (!(a.mode_space() == b.mode_space())) {
    throw std::invalid_argument("inner product of states on different mode spaces");
  }
  const bool a_smaller = a.size() <= b.size();
  const auto& small = a_smaller ? a : b;
  const auto& large = a_smaller ? b : a;
  // Sorted traversal keeps the reduction order independent of hashing.
  complex sum = 0;
  for (const auto& [basis, amp] : small.sorted_terms()) {
    auto it = large.terms().find(basis);
    if (it == large.terms().end()) continue;
    sum += a_smaller ? std::conj(amp) * it->second : std::conj(it->second) * amp;
  }
  return sum;
}

// ---------------------------------------------------------------------------

std::array<std::array<double, 2>, 2> beam_splitter_matrix(double transmissivity) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
    throw std::invalid_argument("transmissivity must lie in [0, 1]");
  }
  const double t = std::sqrt(transmissivity);
  const double r = std::sqrt(1.0 - transmissivity);
  return {{{t, r}, {r, -t}}};
}

namespace {

double factorial(unsigned n) {
  double f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(unsigned n, unsigned k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// Two-mode Fock amplitudes <k, n-k| G |na, nb>, indexed [na][nb][k].
class SplitterTable {
 public:
  explicit SplitterTable(double transmissivity) : g_(beam_splitter_matrix(transmissivity)) {}

  const std::vector<double>& row(unsigned na, unsigned nb) {
    auto& slot = cache_[na][nb];
    if (slot.empty()) slot = compute(na, nb);
    return slot;
  }

 private:
  std::vector<double> compute(unsigned na, unsigned nb) const {
    const unsigned n = na + nb;
    const double gaa = g_[0][0], gba = g_[1][0], gab = g_[0][1], gbb = g_[1][1];
    std::vector<double> out(n + 1, 0.0);
    for (unsigned i = 0; i <= na; ++i) {
      const double from_a = binomial(na, i) * std::pow(gaa, i) * std::pow(gba, na - i);
      for (unsigned j = 0; j <= nb; ++j) {
        const double from_b = binomial(nb, j) * std::pow(gab, j) * std::pow(gbb, nb - j);
        out[i + j] += from_a * from_b;
      }
    }
    const double in_norm = std::sqrt(factorial(na) * factorial(nb));
    for (unsigned k = 0; k <= n; ++k) {
      out[k] *= std::sqrt(factorial(k) * factorial(n - k)) / in_norm;
    }
    return out;
  }

  std::array<std::array<double, 2>, 2> g_;
  std::array<std::array<std::vector<double>, OccupationBasisState::kMaxOccupation + 1>,
             OccupationBasisState::kMaxOccupation + 1>
      cache_;
};

}  // namespace

SparseStateVector apply_beam_splitter(const SparseStateVector& state, std::size_t mode_a,
                                      std::size_t mode_b, double transmissivity) {
  const ModeSpace& space = state.mode_space();
  if (mode_a == mode_b) throw std::invalid_argument("beam splitter needs two distinct modes");
  if (mode_a >= space.n_external() || mode_b >= space.n_external()) {
    throw std::out_of_range("beam splitter mode outside mode space");
  }
  SplitterTable table(transmissivity);
  const std::size_t n_int = space.n_internal();

  SparseStateVector out(space, state.prune_threshold());
  // Partial products over internal labels: (basis, amplitude).
  std::vector<std::pair<OccupationBasisState, complex>> stage, next;
  for (const auto& [basis, amp] : state.terms()) {
    stage.assign(1, {basis, amp});
    for (std::size_t alpha = 0; alpha < n_int; ++alpha) {
      const std::size_t ma = space.index(mode_a, alpha);
      const std::size_t mb = space.index(mode_b, alpha);
      const unsigned na = basis[ma], nb = basis[mb];
      if (na == 0 && nb == 0) continue;
      const unsigned n = na + nb;
      if (n > OccupationBasisState::kMaxOccupation) {
        throw std::overflow_error("beam splitter output exceeds per-mode occupation limit");
      }
      const auto& coeffs = table.row(na, nb);
      next.clear();
      for (const auto& [b, v] : stage) {
        for (unsigned k = 0; k <= n; ++k) {
          if (coeffs[k] == 0.0) continue;
          next.emplace_back(b.with(ma, k).with(mb, n - k), v * coeffs[k]);
        }
      }
      stage.swap(next);
    }
    for (const auto& [b, v] : stage) out.accumulate(b, v);
  }
  out.prune();
  return out;
}

}  // namespace cmbi
