// Copyright 2026 The dpmaint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cmath>
#include <vector>

#include "dpmaint/convergence_monitor.h"
#include "dpmaint/dp_mechanism.h"
#include "dpmaint/error.h"
#include "gtest/gtest.h"

namespace dpmaint {
namespace {

// P(|Z| > 1) for a standard normal.
double TwoSidedOneSigma() { return std::erfc(1.0 / std::sqrt(2.0)); }

TEST(ChartConfigTest, GammaMapsOntoChart) {
  const ChartConfig c = ChartConfig::FromGamma(12, 20);
  EXPECT_EQ(c.points_per_block, 12);
  EXPECT_EQ(c.window, 20);
  EXPECT_EQ(c.decision_interval(), 240);
  EXPECT_THROW(ChartConfig::FromGamma(0, 20), Error);
  ChartConfig bad;
  bad.cl = 0.0;
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(AlarmThresholdTest, ClosedForms) {
  ChartConfig c;
  c.window = 20;
  c.noise_multiplier = 2.0;
  c.threshold_multiplier = 3.0;
  const double b = 0.05;
  EXPECT_NEAR(AlarmThreshold(c, b, 1),
              3.0 * std::sqrt(2 * (2 * b) * (2 * b) / 20.0), 1e-15);
  EXPECT_NEAR(AlarmThreshold(c, b, 24),
              3.0 * std::sqrt(2 * (2 * b) * (2 * b) / (20.0 * 24)), 1e-15);
  c.mode = StatisticMode::kSum;
  EXPECT_NEAR(AlarmThreshold(c, b, 4),
              3.0 * std::sqrt(2 * (2 * b) * (2 * b) * 20.0 / 4), 1e-15);
  c.min_threshold = 100.0;
  EXPECT_EQ(AlarmThreshold(c, b, 4), 100.0);
  c.min_threshold = 0.0;
  EXPECT_EQ(AlarmThreshold(c, 0.0, 4), 0.0);
  EXPECT_THROW(AlarmThreshold(c, b, 0), Error);
}

TEST(AlarmCheckTest, StrictlyOutside) {
  EXPECT_FALSE(AlarmCheck(1.0, 1.0));
  EXPECT_TRUE(AlarmCheck(-1.0000001, 1.0));
  EXPECT_FALSE(AlarmCheck(0.0, 0.0));
}

// Alarm rate over `points` chart points fed with Laplace(b) + shift records.
double AlarmRate(double shift, int points, uint64_t seed) {
  ChartConfig c;
  c.window = 20;
  c.points_per_block = 1;
  c.threshold_multiplier = 1.0;
  c.noise_scale = 0.02;
  const double thr = AlarmThreshold(c, c.noise_scale, 1);
  ChartState chart(c, {0}, {thr});
  NoiseStream rng(seed);
  int alarms = 0, seen = 0;
  while (seen < points) {
    // Difference of two Exp(b) angle offsets, as between two regions.
    const double d = shift + rng.Exponential(c.noise_scale) -
                     rng.Exponential(c.noise_scale);
    for (const ChartPoint& p : chart.RecordIteration(std::vector{d})) {
      ++seen;
      alarms += p.alarm;
    }
  }
  return static_cast<double>(alarms) / points;
}

TEST(ChartCalibrationTest, InControlAlarmRate) {
  EXPECT_NEAR(AlarmRate(0.0, 10000, 1), TwoSidedOneSigma(), 0.02);
  EXPECT_NEAR(AlarmRate(0.0, 10000, 2), TwoSidedOneSigma(), 0.02);
}

TEST(ChartCalibrationTest, ShiftedMeanAlarms) {
  const double sd = std::sqrt(2 * 0.02 * 0.02 / 20.0);
  EXPECT_GE(AlarmRate(5 * sd, 10000, 3), 0.99);
  EXPECT_GE(AlarmRate(-5 * sd, 10000, 4), 0.99);
}

TEST(ChartStateTest, PointsBlocksAndKappa) {
  ChartConfig c;
  c.window = 2;
  c.points_per_block = 3;
  ChartState chart(c, {7, 9}, {1.0, 1.0});
  // Bus 7 alarms on every point, bus 9 on one point only.
  const std::vector<std::vector<double>> records = {
      {5, 0}, {5, 0}, {5, 3}, {5, 3}, {5, 0}, {5, 0}};
  int points = 0;
  for (size_t k = 0; k < records.size(); ++k) {
    EXPECT_FALSE(chart.AtDecision());
    const auto pts = chart.RecordIteration(records[k]);
    if (k % 2 == 0) {
      EXPECT_TRUE(pts.empty());
    } else {
      ASSERT_EQ(pts.size(), 2u);
      EXPECT_EQ(pts[0].bus, 7);
      EXPECT_DOUBLE_EQ(pts[0].value, 5.0);
      EXPECT_TRUE(pts[0].alarm);
      points += 1;
    }
  }
  EXPECT_EQ(points, 3);
  EXPECT_TRUE(chart.AtDecision());
  EXPECT_EQ(chart.total_alarms(), 4);
  EXPECT_EQ(chart.kappa(), 1);  // only bus 7 has more than one alarm

  // Quiet block: kappa resets.
  for (int k = 0; k < 6; ++k) chart.RecordIteration(std::vector{0.0, 0.0});
  EXPECT_TRUE(chart.AtDecision());
  EXPECT_EQ(chart.kappa(), 0);
  EXPECT_EQ(chart.total_alarms(), 0);
  EXPECT_THROW(chart.RecordIteration(std::vector{0.0}), Error);
}

TEST(ChartStateTest, SumModeAccumulates) {
  ChartConfig c;
  c.window = 4;
  c.points_per_block = 1;
  c.mode = StatisticMode::kSum;
  ChartState chart(c, {0}, {10.0});
  std::vector<ChartPoint> pts;
  for (double v : {1.0, 2.0, 3.0, 4.5}) pts = chart.RecordIteration(std::vector{v});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_DOUBLE_EQ(pts[0].value, 10.5);
  EXPECT_TRUE(pts[0].alarm);
}

TEST(LocalConvergenceTest, OnlyAtDecisionIterations) {
  ChartConfig c;
  c.window = 5;
  c.points_per_block = 4;
  c.cl = 0.1;
  ChartState chart(c, {1, 2}, {1.0, 1.0});
  const int hours = 24;
  const double tol = Tolerance(c.cl, 2, hours);
  EXPECT_DOUBLE_EQ(tol, 4.8);
  std::vector<int> verdicts;
  for (int k = 1; k <= 100; ++k) {
    chart.RecordIteration(std::vector{0.0, 0.0});
    if (LocalConvergence(c, chart, 0.0, 0.0, 2, hours)) verdicts.push_back(k);
  }
  EXPECT_EQ(verdicts, (std::vector<int>{20, 40, 60, 80, 100}));
  EXPECT_FALSE(LocalConvergence(c, chart, tol, 0.0, 2, hours));
  EXPECT_FALSE(LocalConvergence(c, chart, 0.0, tol, 2, hours));
  EXPECT_TRUE(LocalConvergence(c, chart, 0.99 * tol, 0.99 * tol, 2, hours));
}

TEST(LocalConvergenceTest, AllBusesTrippedBlocksVerdict) {
  ChartConfig c;
  c.window = 1;
  c.points_per_block = 2;
  ChartState chart(c, {1, 2}, {0.5, 0.5});
  chart.RecordIteration(std::vector{1.0, 1.0});
  chart.RecordIteration(std::vector{1.0, 1.0});
  ASSERT_TRUE(chart.AtDecision());
  EXPECT_EQ(chart.kappa(), 2);
  EXPECT_FALSE(LocalConvergence(c, chart, 0.0, 0.0, 2, 24));
  chart.RecordIteration(std::vector{1.0, 0.0});
  chart.RecordIteration(std::vector{1.0, 0.0});
  EXPECT_EQ(chart.kappa(), 1);
  EXPECT_TRUE(LocalConvergence(c, chart, 0.0, 0.0, 2, 24));
}

TEST(LocalConvergenceTest, NoSharedBusesIsVacuous) {
  ChartConfig c;
  c.window = 2;
  c.points_per_block = 2;
  ChartState chart(c, {}, {});
  for (int k = 0; k < 3; ++k) chart.RecordIteration(std::vector<double>{});
  EXPECT_FALSE(LocalConvergence(c, chart, 1e9, 1e9, 0, 24));
  chart.RecordIteration(std::vector<double>{});
  EXPECT_TRUE(LocalConvergence(c, chart, 1e9, 1e9, 0, 24));
}

}  // namespace
}  // namespace dpmaint
