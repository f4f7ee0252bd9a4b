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

#include "cmbi/experiment.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace cmbi {

SourceModel SourceModel::with_power_factor(double factor) const {
  SourceModel out = *this;
  out.source1 = source1.with_power_factor(factor);
  out.source2 = source2.with_power_factor(factor);
  return out;
}

InterferometerSpec build_experiment_network(const NetworkConfig& config) {
  InterferometerSpec spec = build_disjoint_scheme(4, config.splitting_ratios);
  if (config.transmissions) spec = dilate_with_loss(spec, LossModel{*config.transmissions});
  if (config.multiplex) spec = add_multiplex_layer(spec);
  return spec;
}

std::vector<std::vector<std::size_t>> counter_subsets(std::size_t n_channels, std::size_t max_order) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  auto extend = [&](auto&& self, std::size_t start, std::size_t order) -> void {
    if (current.size() == order) {
      out.push_back(current);
      return;
    }
    for (std::size_t c = start; c < n_channels; ++c) {
      current.push_back(c);
      self(self, c + 1, order);
      current.pop_back();
    }
  };
  for (std::size_t order = 1; order <= std::min(max_order, n_channels); ++order) extend(extend, 0, order);
  return out;
}

std::vector<std::string> counter_names(const std::vector<std::string>& channels, std::size_t max_order) {
  static const char* kPrefix[] = {"", "singles_", "twofold_", "threefold_", "fourfold_"};
  std::vector<std::string> names;
  for (const auto& subset : counter_subsets(channels.size(), max_order)) {
    std::string name = subset.size() < 5 ? kPrefix[subset.size()]
                                         : std::to_string(subset.size()) + "fold_";
    for (std::size_t c : subset) name += channels[c];
    names.push_back(name);
  }
  return names;
}

CountsRecord ensemble_rates(const SpdcEnsemble& ensemble, const InterferometerSpec& spec,
                            const DetectorLayout& layout, DetectionRoute route) {
  const auto subsets = counter_subsets(layout.channels.size());
  CountsRecord out{std::vector<double>(subsets.size(), 0.0)};
  for (const auto& term : ensemble.terms) {
    const ClickDistribution dist = detect(term.state, spec, layout, route);
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      out.values[i] += term.rate * coincidence_weight(dist, layout, subsets[i]);
    }
  }
  return out;
}

std::vector<double> ScanConfig::default_grid() {
  std::vector<double> grid(31);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = -std::numbers::pi / 2 + 2 * std::numbers::pi * double(i) / 30.0;
  }
  return grid;
}

void ScanConfig::validate() const {
  if (varphi_grid.empty()) throw std::invalid_argument("scan grid is empty");
  for (std::size_t i = 1; i < varphi_grid.size(); ++i) {
    if (!(varphi_grid[i] > varphi_grid[i - 1])) throw std::invalid_argument("scan grid must be strictly increasing");
  }
  if (!(integration_time >= 0.0)) throw std::invalid_argument("integration time must be >= 0");
  if (repetitions == 0) throw std::invalid_argument("need at least one repetition");
}

std::size_t ScanResult::counter_index(const std::string& name) const {
  auto it = std::find(counter_names.begin(), counter_names.end(), name);
  if (it == counter_names.end()) throw std::invalid_argument("unknown counter '" + name + "'");
  return static_cast<std::size_t>(it - counter_names.begin());
}

std::vector<std::pair<double, double>> ScanResult::series(const std::string& counter) const {
  const std::size_t idx = counter_index(counter);
  std::vector<std::pair<double, double>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.emplace_back(p.collective_phase, p.counts.values[idx]);
  return out;
}

ScanResult run_phase_scan(const ScanConfig& config, const SourceModel& sources,
                          const InterferometerSpec& spec, const DetectorLayout& layout,
                          const SamplingMode& mode, const std::vector<int>& blocked_sources) {
  config.validate();
  ScanResult result;
  result.counter_names = counter_names(layout.channels);
  std::mt19937_64 rng(mode.seed);
  const ModeSpace space = spec.mode_space();

  for (double varphi : config.varphi_grid) {
    const PhaseSetting setting{config.chi, varphi, config.theta};
    SpdcEnsemble ensemble = enumerate_ensemble(sources.source1, sources.source2, setting,
                                               sources.truncation, space, sources.rate_floor);
    for (int b : blocked_sources) ensemble = blocked_ensemble(ensemble, b);

    ScanPoint point{varphi, setting.collective_phase(), ensemble_rates(ensemble, spec, layout)};
    for (double& v : point.counts.values) {
      const double mean = v * config.integration_time;
      if (!mode.sampled) {
        v = mean;
        continue;
      }
      double sum = 0;
      for (unsigned r = 0; r < config.repetitions; ++r) {
        if (mean > 0) sum += double(std::poisson_distribution<long long>(mean)(rng));
      }
      v = sum / config.repetitions;
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

ScanResult measure_background(const ScanConfig& config, const SourceModel& sources,
                              const InterferometerSpec& spec, const DetectorLayout& layout,
                              int blocked_source, const SamplingMode& mode) {
  return run_phase_scan(config, sources, spec, layout, mode, {blocked_source});
}

ScanResult background_subtract(const ScanResult& main, const ScanResult& bg1, const ScanResult& bg2) {
  auto same_grid = [&](const ScanResult& other) {
    if (other.points.size() != main.points.size() || other.counter_names != main.counter_names) return false;
    for (std::size_t i = 0; i < main.points.size(); ++i) {
      if (other.points[i].varphi != main.points[i].varphi) return false;
    }
    return true;
  };
  if (!same_grid(bg1) || !same_grid(bg2)) throw std::invalid_argument("background grids do not match the main scan");
  ScanResult out = main;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    auto& values = out.points[i].counts.values;
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] -= bg1.points[i].counts.values[k] + bg2.points[i].counts.values[k];
    }
  }
  return out;
}

double FitResult::operator()(double x) const { return offset + amplitude * std::cos(x - phase); }

FitResult fit_cosine(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("cosine fit needs at least 3 points");
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (!(hi->first - lo->first > std::numbers::pi)) {
    throw NumericalError("cosine fit needs phases spanning more than pi");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[static_cast<std::size_t>(i)].first;
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(x);
    design(i, 2) = std::sin(x);
    y(i) = points[static_cast<std::size_t>(i)].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw NumericalError("degenerate cosine design matrix");
  const Eigen::Vector3d coef = qr.solve(y);
  if (!coef.allFinite()) throw NumericalError("cosine fit produced non-finite parameters");

  FitResult fit;
  fit.offset = coef(0);
  fit.amplitude = std::hypot(coef(1), coef(2));
  fit.phase = fit.amplitude > 0 ? std::atan2(coef(2), coef(1)) : 0.0;
  fit.visibility = fit.offset != 0 ? std::abs(fit.amplitude) / fit.offset : 0.0;
  fit.residual_norm = (design * coef - y).norm();
  fit.n_points = points.size();
  return fit;
}

}  // namespace cmbi
