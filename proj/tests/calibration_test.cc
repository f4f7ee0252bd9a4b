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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

namespace cmbi {
namespace {

CalibrationParameters truth() {
  return {{0.9, 0.85, 0.8, 0.7, 0.75, 0.95, 0.65, 0.88}, {0.48, 0.53}};
}

CalibrationParameters generic_guess() { return {std::vector<double>(8, 0.8), {0.5, 0.5}}; }

// eta_in(port) * eta_out(output) for the four in/out pairs of each block:
// the loss combinations the click statistics can see.
std::vector<double> visible_products(const std::vector<double>& eta) {
  std::vector<double> out;
  for (std::size_t block = 0; block < 2; ++block) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t o = 0; o < 2; ++o) out.push_back(eta[2 * block + i] * eta[4 + 2 * block + o]);
    }
  }
  return out;
}

CalibrationOptions quick() {
  CalibrationOptions o;
  o.n_starts = 1;
  return o;
}

TEST(CalibrationObjectiveTest, VanishesAtTruth) {
  const CalibrationModel model;
  const auto targets = simulate_calibration_targets(model, truth());
  EXPECT_EQ(calibration_objective(model, targets, truth()), 0.0);
  EXPECT_GT(calibration_objective(model, targets, generic_guess()), 1e-3);
  EXPECT_EQ(targets.source1_only.values.size(), 15u);
}

TEST(CalibrationObjectiveTest, GaugeInvariance) {
  // Scaling a block's input transmissions by lambda and its output
  // transmissions by 1 / lambda leaves every rate unchanged.
  const CalibrationModel model;
  const auto targets = simulate_calibration_targets(model, truth());
  auto shifted = truth();
  for (std::size_t i : {0, 1}) shifted.eta[i] *= 1.05;
  for (std::size_t i : {4, 5}) shifted.eta[i] /= 1.05;
  for (std::size_t i : {2, 3}) shifted.eta[i] /= 1.1;
  for (std::size_t i : {6, 7}) shifted.eta[i] *= 1.1;
  EXPECT_LT(calibration_objective(model, targets, shifted), 1e-24);
}

TEST(CalibrationTest, RoundTripRecoversVisibleParameters) {
  const CalibrationModel model;
  const auto targets = simulate_calibration_targets(model, truth());
  const auto result = calibrate_unitary(targets, model, generic_guess(), {}, quick());
  EXPECT_LT(result.objective_value, 1e-8);
  EXPECT_NEAR(result.splitting_ratios[0], 0.48, 5e-3);
  EXPECT_NEAR(result.splitting_ratios[1], 0.53, 5e-3);
  const auto want = visible_products(truth().eta);
  const auto got = visible_products(result.eta);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-3) << "product " << i;
  for (double e : result.eta) {
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
  ASSERT_EQ(result.residuals.size(), 30u);
  EXPECT_EQ(result.observable_names.front(), "source1_only.singles_A");
}

TEST(CalibrationTest, BalancedSplittersAreRecognized) {
  const CalibrationModel model;
  const CalibrationParameters balanced{std::vector<double>(8, 0.8), {0.5, 0.5}};
  const auto targets = simulate_calibration_targets(model, balanced);
  CalibrationParameters guess{{0.7, 0.9, 0.75, 0.85, 0.9, 0.7, 0.8, 0.8}, {0.46, 0.54}};
  const auto result = calibrate_unitary(targets, model, guess, {}, quick());
  EXPECT_NEAR(result.splitting_ratios[0], 0.5, 5e-3);
  EXPECT_NEAR(result.splitting_ratios[1], 0.5, 5e-3);
}

TEST(CalibrationTest, ExtraLossIsAttributedToTheRightChannel) {
  const CalibrationModel model;
  auto degraded = truth();
  degraded.eta[6] -= 0.2;  // output C
  const auto targets = simulate_calibration_targets(model, degraded);
  const auto nominal = calibrate_unitary(simulate_calibration_targets(model, truth()), model, generic_guess(), {},
                                         quick());
  const auto result = calibrate_unitary(targets, model, generic_guess(), {}, quick());
  const auto before = visible_products(nominal.eta);
  const auto after = visible_products(result.eta);
  // Products 4 and 6 involve output C: both drop by 0.45 / 0.65; the rest stay.
  for (std::size_t i = 0; i < after.size(); ++i) {
    const double expected = (i == 4 || i == 6) ? before[i] * 0.45 / 0.65 : before[i];
    EXPECT_NEAR(after[i], expected, 2e-3) << "product " << i;
  }
}

TEST(CalibrationTest, ScaledObservableLeavesLocalizedResidual) {
  const CalibrationModel model;
  auto targets = simulate_calibration_targets(model, truth());
  targets.source1_only.values[14] *= 0.75;  // four-fold of source 1 only
  const auto result = calibrate_unitary(targets, model, truth(), {}, quick());
  EXPECT_GT(result.objective_value, 1e-4);
  double largest = 0;
  std::size_t where = 0;
  for (std::size_t i = 0; i < result.residuals.size(); ++i) {
    if (std::abs(result.residuals[i]) > largest) {
      largest = std::abs(result.residuals[i]);
      where = i;
    }
  }
  EXPECT_EQ(result.observable_names[where], "source1_only.fourfold_ABCD");
}

TEST(CalibrationTest, DeterministicGivenSeed) {
  const CalibrationModel model;
  const auto targets = simulate_calibration_targets(model, truth());
  CalibrationOptions o;
  o.n_starts = 2;
  o.max_iterations = 300;
  const auto a = calibrate_unitary(targets, model, generic_guess(), {}, o);
  const auto b = calibrate_unitary(targets, model, generic_guess(), {}, o);
  EXPECT_EQ(a.eta, b.eta);
  EXPECT_EQ(a.objective_value, b.objective_value);
}

TEST(CalibrationTest, RejectsBadInput) {
  const CalibrationModel model;
  const auto targets = simulate_calibration_targets(model, truth());
  CalibrationBounds infeasible;
  infeasible.lower[3] = 0.9;
  infeasible.upper[3] = 0.8;
  EXPECT_THROW(calibrate_unitary(targets, model, generic_guess(), infeasible), std::invalid_argument);
  auto bad = targets;
  bad.source2_only.values[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(calibrate_unitary(bad, model, generic_guess()), std::invalid_argument);
  bad = targets;
  bad.source1_only.values.pop_back();
  EXPECT_THROW(calibrate_unitary(bad, model, generic_guess()), std::invalid_argument);
}

class PowerDriftTest : public ::testing::Test {
 protected:
  ScanConfig scan;
  SourceModel nominal;
  CalibrationResult calibrated;

  void SetUp() override {
    scan.varphi_grid = {-1.5, -0.5, 0.5, 1.5, 2.5, 3.5, 4.5};
    calibrated.eta = truth().eta;
    calibrated.splitting_ratios = truth().splitting_ratios;
  }

  ScanResult targets(double factor) const {
    const auto spec = build_experiment_network(truth().network(false, 4));
    return run_phase_scan(scan, nominal.with_power_factor(factor), spec, make_detector_layout(spec, 4));
  }
};

TEST_F(PowerDriftTest, NominalPower) {
  const auto fit = fit_power_drift(targets(1.0), scan, nominal, calibrated);
  EXPECT_NEAR(fit.factor, 1.0, 1e-3);
  EXPECT_LT(fit.residual, 1e-10);
}

TEST_F(PowerDriftTest, RecoversDrift) {
  const auto fit = fit_power_drift(targets(1.023), scan, nominal, calibrated);
  EXPECT_NEAR(fit.factor, 1.023, 1e-3);
  EXPECT_GT(fit.evaluations, 0u);
}

TEST_F(PowerDriftTest, RatesAreMonotoneInPower) {
  const auto low = targets(0.9), mid = targets(1.0), high = targets(1.1);
  for (std::size_t p = 0; p < mid.points.size(); ++p) {
    for (std::size_t k = 0; k < mid.counter_names.size(); ++k) {
      EXPECT_LT(low.points[p].counts.values[k], mid.points[p].counts.values[k]);
      EXPECT_LT(mid.points[p].counts.values[k], high.points[p].counts.values[k]);
    }
  }
}

TEST(GeneralizedSchemeTest, FourParticlesReproduceClosedForm) {
  const auto report = generalized_scheme_check(4);
  for (std::size_t i = 0; i < report.varphi.size(); ++i) {
    EXPECT_NEAR(report.n_point[i], std::pow(std::cos(report.varphi[i] / 2), 2) / 8, 1e-12);
  }
  EXPECT_NEAR(report.fit.visibility, 1.0, 1e-9);
  EXPECT_NEAR(report.fit.phase, 0.0, 1e-9);
  EXPECT_LE(report.max_lower_order_deviation, 1e-12);
}

TEST(GeneralizedSchemeTest, SixParticlesKeepFullContrast) {
  const auto report = generalized_scheme_check(6);
  EXPECT_NEAR(report.fit.visibility, 1.0, 1e-9);
  EXPECT_LE(report.minimum, 1e-9);
  EXPECT_LE(report.max_lower_order_deviation, 1e-9);
}

TEST(GeneralizedSchemeTest, SixParticleFringeByHand) {
  // Brute-force expansion by hand gives (1/32) sin^2((varphi + chi1 + chi2 - theta) / 2).
  GeneralizedCheckOptions options;
  options.chis = {0.3, -0.8};
  options.theta = 0.2;
  const auto report = generalized_scheme_check(6, options);
  for (std::size_t i = 0; i < report.varphi.size(); ++i) {
    const double x = report.varphi[i] + 0.3 - 0.8 - 0.2;
    EXPECT_NEAR(report.n_point[i], std::pow(std::sin(x / 2), 2) / 32, 1e-12);
  }
}

TEST(GeneralizedSchemeTest, Budget) {
  GeneralizedCheckOptions options;
  options.max_particles = 6;
  EXPECT_THROW(generalized_scheme_check(8, options), BudgetExceeded);
  EXPECT_THROW(generalized_scheme_check(5), std::invalid_argument);
}

}  // namespace
}  // namespace cmbi
