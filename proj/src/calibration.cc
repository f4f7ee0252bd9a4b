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

#include "cmbi/calibration.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace cmbi {

std::vector<double> CalibrationParameters::to_vector() const {
  if (eta.size() != 8 || splitting_ratios.size() != 2) {
    throw std::invalid_argument("calibration needs 8 transmissions and 2 splitting ratios");
  }
  std::vector<double> x = eta;
  x.insert(x.end(), splitting_ratios.begin(), splitting_ratios.end());
  return x;
}

CalibrationParameters CalibrationParameters::from_vector(const std::vector<double>& x) {
  if (x.size() != kSize) throw std::invalid_argument("calibration vector must have 10 entries");
  CalibrationParameters p;
  p.eta.assign(x.begin(), x.begin() + 8);
  p.splitting_ratios.assign(x.begin() + 8, x.end());
  return p;
}

NetworkConfig CalibrationParameters::network(bool multiplex, std::size_t rejection_threshold) const {
  NetworkConfig config;
  config.splitting_ratios = splitting_ratios;
  config.transmissions = eta;
  config.multiplex = multiplex;
  config.rejection_threshold = rejection_threshold;
  return config;
}

void CalibrationBounds::validate() const {
  if (lower.size() != CalibrationParameters::kSize || upper.size() != CalibrationParameters::kSize) {
    throw std::invalid_argument("bounds must have 10 entries each");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] >= 0.0 && upper[i] <= 1.0 && lower[i] <= upper[i])) {
      throw std::invalid_argument("infeasible bounds for parameter " + std::to_string(i));
    }
  }
}

void CalibrationTargets::validate(std::size_t n_counters) const {
  for (const auto* record : {&source1_only, &source2_only}) {
    if (record->values.size() != n_counters) throw std::invalid_argument("targets have the wrong number of counters");
    for (double v : record->values) {
      if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("targets must be finite and non-negative");
    }
  }
}

CalibrationParameters CalibrationResult::parameters() const { return {eta, splitting_ratios}; }

namespace {

// Emission terms of the two single-source configurations, built once per run.
struct CalibrationContext {
  const CalibrationModel& model;
  SpdcEnsemble source1_only;
  SpdcEnsemble source2_only;

  explicit CalibrationContext(const CalibrationModel& m) : model(m) {
    const auto spec = build_experiment_network(CalibrationParameters{}.network(m.multiplex, m.rejection_threshold));
    const auto full = enumerate_ensemble(m.sources.source1, m.sources.source2, m.setting,
                                         m.sources.truncation, spec.mode_space(), m.sources.rate_floor);
    source1_only = blocked_ensemble(full, 2);
    source2_only = blocked_ensemble(full, 1);
  }

  CalibrationTargets simulate(const CalibrationParameters& params) const {
    const auto spec = build_experiment_network(params.network(model.multiplex, model.rejection_threshold));
    const auto layout = make_detector_layout(spec, model.rejection_threshold);
    return {ensemble_rates(source1_only, spec, layout), ensemble_rates(source2_only, spec, layout)};
  }
};

void accumulate_relative(const CountsRecord& sim, const CountsRecord& target, double& sum,
                         std::vector<double>* residuals) {
  for (std::size_t i = 0; i < target.values.size(); ++i) {
    const double t = target.values[i];
    const double r = t > 0 ? (sim.values[i] - t) / t : 0.0;
    if (t > 0) sum += r * r;
    if (residuals) residuals->push_back(r);
  }
}

double objective(const CalibrationContext& ctx, const CalibrationTargets& targets,
                 const CalibrationParameters& params, std::vector<double>* residuals = nullptr) {
  const CalibrationTargets sim = ctx.simulate(params);
  double sum = 0;
  accumulate_relative(sim.source1_only, targets.source1_only, sum, residuals);
  accumulate_relative(sim.source2_only, targets.source2_only, sum, residuals);
  if (!std::isfinite(sum)) throw NumericalError("calibration objective is not finite");
  return sum;
}

// x = lo + (hi - lo) (1 + sin u) / 2 keeps every iterate inside the box.
struct BoxMap {
  const CalibrationBounds& bounds;

  std::vector<double> to_box(const gsl_vector* u) const {
    std::vector<double> x(bounds.lower.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = 0.5 * (1.0 + std::sin(gsl_vector_get(u, i)));
      x[i] = bounds.lower[i] + (bounds.upper[i] - bounds.lower[i]) * s;
    }
    return x;
  }

  void to_free(const std::vector<double>& x, gsl_vector* u) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = bounds.upper[i] - bounds.lower[i];
      const double s = w > 0 ? std::clamp(2.0 * (x[i] - bounds.lower[i]) / w - 1.0, -1.0, 1.0) : 0.0;
      gsl_vector_set(u, i, std::asin(s));
    }
  }
};

struct SearchState {
  const CalibrationContext& ctx;
  const CalibrationTargets& targets;
  BoxMap map;
  std::exception_ptr error;
};

double gsl_objective(const gsl_vector* u, void* params) {
  auto* state = static_cast<SearchState*>(params);
  if (state->error) return GSL_NAN;
  try {
    return objective(state->ctx, state->targets, CalibrationParameters::from_vector(state->map.to_box(u)));
  } catch (...) {
    state->error = std::current_exception();
    return GSL_NAN;
  }
}

struct LocalResult {
  std::vector<double> x;
  double value;
  std::size_t iterations;
};

LocalResult nelder_mead(SearchState& state, const std::vector<double>& start, const CalibrationOptions& options) {
  const std::size_t n = start.size();
  gsl_multimin_function fn{&gsl_objective, n, &state};
  gsl_vector* u = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);

  LocalResult best{start, std::numeric_limits<double>::infinity(), 0};
  std::vector<double> x = start;
  // A fresh simplex around the incumbent guards against premature collapse.
  for (int restart = 0; restart < 3 && best.iterations < options.max_iterations; ++restart) {
    state.map.to_free(x, u);
    gsl_vector_set_all(step, options.initial_step);
    gsl_multimin_fminimizer_set(s, &fn, u, step);
    int status = GSL_CONTINUE;
    while (status == GSL_CONTINUE && best.iterations < options.max_iterations) {
      ++best.iterations;
      if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
      status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), options.simplex_tolerance);
    }
    if (state.error) break;
    const double value = gsl_multimin_fminimizer_minimum(s);
    const std::vector<double> found = state.map.to_box(gsl_multimin_fminimizer_x(s));
    const bool improved = value < best.value * (1 - 1e-6) || !std::isfinite(best.value);
    if (value < best.value) {
      best.value = value;
      best.x = found;
    }
    if (!improved) break;
    x = found;
  }

  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(u);
  if (state.error) std::rethrow_exception(state.error);
  if (!std::isfinite(best.value)) throw NumericalError("calibration objective is not finite");
  return best;
}

}  // namespace

CalibrationTargets simulate_calibration_targets(const CalibrationModel& model,
                                                const CalibrationParameters& params) {
  params.to_vector();
  return CalibrationContext(model).simulate(params);
}

double calibration_objective(const CalibrationModel& model, const CalibrationTargets& targets,
                             const CalibrationParameters& params) {
  const std::size_t n_counters = counter_subsets(4).size();
  targets.validate(n_counters);
  params.to_vector();
  return objective(CalibrationContext(model), targets, params);
}

CalibrationResult calibrate_unitary(const CalibrationTargets& targets, const CalibrationModel& model,
                                    const CalibrationParameters& initial_guess,
                                    const CalibrationBounds& bounds, const CalibrationOptions& options) {
  bounds.validate();
  targets.validate(counter_subsets(4).size());
  if (options.n_starts == 0) throw std::invalid_argument("need at least one start");
  std::vector<double> guess = initial_guess.to_vector();
  for (std::size_t i = 0; i < guess.size(); ++i) guess[i] = std::clamp(guess[i], bounds.lower[i], bounds.upper[i]);

  const CalibrationContext ctx(model);
  SearchState state{ctx, targets, BoxMap{bounds}, nullptr};
  std::mt19937_64 rng(options.seed);

  LocalResult best{guess, std::numeric_limits<double>::infinity(), 0};
  std::size_t iterations = 0;
  for (unsigned k = 0; k < options.n_starts; ++k) {
    std::vector<double> start = guess;
    if (k > 0) {
      for (std::size_t i = 0; i < start.size(); ++i) {
        start[i] = std::uniform_real_distribution<double>(bounds.lower[i], bounds.upper[i])(rng);
      }
    }
    LocalResult local = nelder_mead(state, start, options);
    iterations += local.iterations;
    if (local.value < best.value) best = std::move(local);
  }

  CalibrationResult result;
  const auto params = CalibrationParameters::from_vector(best.x);
  result.eta = params.eta;
  result.splitting_ratios = params.splitting_ratios;
  result.iterations = iterations;
  result.objective_value = objective(ctx, targets, params, &result.residuals);
  for (const char* prefix : {"source1_only.", "source2_only."}) {
    for (const auto& name : counter_names({"A", "B", "C", "D"})) result.observable_names.push_back(prefix + name);
  }
  return result;
}

PowerDriftResult fit_power_drift(const ScanResult& main_targets, const ScanConfig& scan,
                                 const SourceModel& nominal, const CalibrationResult& calibrated,
                                 bool multiplex, std::size_t rejection_threshold, double lower,
                                 double upper) {
  if (!(lower > 0 && lower < upper)) throw std::invalid_argument("power factor bracket must satisfy 0 < lower < upper");
  if (main_targets.points.size() != scan.varphi_grid.size()) {
    throw std::invalid_argument("targets do not match the scan grid");
  }
  const auto spec = build_experiment_network(calibrated.parameters().network(multiplex, rejection_threshold));
  const auto layout = make_detector_layout(spec, rejection_threshold);

  PowerDriftResult result;
  auto residual = [&](double factor) {
    ++result.evaluations;
    const ScanResult sim = run_phase_scan(scan, nominal.with_power_factor(factor), spec, layout);
    double sum = 0;
    for (std::size_t p = 0; p < sim.points.size(); ++p) {
      const auto& target = main_targets.points[p].counts.values;
      const auto& model = sim.points[p].counts.values;
      if (target.size() != model.size()) throw std::invalid_argument("targets have the wrong number of counters");
      for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] > 0) sum += std::pow((model[i] - target[i]) / target[i], 2);
      }
    }
    return sum;
  };
  std::uintmax_t max_iter = 200;
  const auto [x, fx] = boost::math::tools::brent_find_minima(
      residual, lower, upper, std::numeric_limits<double>::digits / 2, max_iter);
  result.factor = x;
  result.residual = fx;
  return result;
}

std::vector<double> GeneralizedCheckOptions::default_grid() {
  std::vector<double> grid(31);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = -std::numbers::pi / 2 + 3 * std::numbers::pi * double(i) / 30.0;
  }
  return grid;
}

GeneralizedReport generalized_scheme_check(std::size_t n_particles, const GeneralizedCheckOptions& options) {
  if (n_particles < 4 || n_particles % 2 != 0) {
    throw std::invalid_argument("generalized scheme needs an even particle number >= 4");
  }
  if (n_particles > options.max_particles) {
    throw BudgetExceeded("N = " + std::to_string(n_particles) + " exceeds the budget of " +
                         std::to_string(options.max_particles) + " particles");
  }
  std::vector<double> chis = options.chis;
  if (chis.empty()) chis.assign(n_particles / 2 - 1, 0.0);

  const auto spec = build_disjoint_scheme(n_particles, std::vector<double>(n_particles / 2, 0.5));
  const ModeSpace space = spec.mode_space();
  std::vector<std::size_t> all(n_particles);
  for (std::size_t i = 0; i < n_particles; ++i) all[i] = i;

  GeneralizedReport report;
  report.n_particles = n_particles;
  std::vector<double> lower_min(n_particles, std::numeric_limits<double>::infinity());
  std::vector<double> lower_max(n_particles, -std::numeric_limits<double>::infinity());
  std::vector<std::pair<double, double>> series;
  for (double varphi : options.varphi_grid) {
    const auto out = apply_network(build_generalized_input(n_particles, chis, varphi, options.theta, space), spec);
    const double value = k_point_correlator(out, all);
    report.varphi.push_back(varphi);
    report.n_point.push_back(value);
    series.emplace_back(varphi, value);
    for (std::size_t skip = 0; skip < n_particles; ++skip) {
      std::vector<std::size_t> subset;
      for (std::size_t m : all) {
        if (m != skip) subset.push_back(m);
      }
      const double v = k_point_correlator(out, subset);
      lower_min[skip] = std::min(lower_min[skip], v);
      lower_max[skip] = std::max(lower_max[skip], v);
    }
  }
  report.fit = fit_cosine(series);
  report.minimum = *std::min_element(report.n_point.begin(), report.n_point.end());
  report.fitted_minimum = report.fit.offset - report.fit.amplitude;
  for (std::size_t s = 0; s < n_particles; ++s) {
    report.max_lower_order_deviation = std::max(report.max_lower_order_deviation, lower_max[s] - lower_min[s]);
  }
  return report;
}

}  // namespace cmbi
