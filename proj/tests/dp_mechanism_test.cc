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
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpmaint/dp_mechanism.h"
#include "dpmaint/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpmaint {
namespace {

TEST(PrivacyConfigTest, ScaleInterpretation) {
  const PrivacyConfig c = PrivacyConfig::FromScale(0.075, 0.5);
  EXPECT_DOUBLE_EQ(c.flow_scale(), 0.075);
  EXPECT_DOUBLE_EQ(c.sensitivity, 0.0375);
  EXPECT_DOUBLE_EQ(c.LineScale(-5.0), 0.015);
  EXPECT_THROW(c.LineScale(0.0), Error);
  EXPECT_THROW(PrivacyConfig::FromScale(0.0), Error);
  EXPECT_THROW(PrivacyConfig::FromScale(0.1, -1.0), Error);
  EXPECT_THROW(PrivacyConfig::FromScale(0.1, 1.0, -2.0), Error);
}

TEST(NoiseStreamTest, ExponentialMoments) {
  NoiseStream rng(42);
  const double b = 0.3;
  const int n = 400000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleExponential(b, rng);
    ASSERT_GE(x, 0.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // Exp(b): mean b, variance b^2; standard error of the mean is b / sqrt(n).
  EXPECT_NEAR(mean, b, 5 * b / std::sqrt(n));
  EXPECT_NEAR(var, b * b, 0.02 * b * b);
  EXPECT_THROW(SampleExponential(0.0, rng), Error);
}

TEST(NoiseStreamTest, StreamsAreSeededIndependently) {
  NoiseStream a(7, 0), b(7, 0), c(7, 1), d(8, 0);
  const double x = a.Uniform();
  EXPECT_EQ(x, b.Uniform());
  EXPECT_NE(x, c.Uniform());
  EXPECT_NE(x, d.Uniform());
}

TEST(StatisticsTest, LaplaceCdfClosedForm) {
  EXPECT_DOUBLE_EQ(LaplaceCdf(0.0, 2.0), 0.5);
  EXPECT_NEAR(LaplaceCdf(2.0, 2.0), 1.0 - 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(LaplaceCdf(-4.0, 2.0), 0.5 * std::exp(-2.0), 1e-15);
}

TEST(StatisticsTest, KsStatisticOfExactQuantiles) {
  // Points at the (i + 1/2)/n quantiles sit exactly 1/(2n) from the
  // empirical CDF steps on both sides.
  const int n = 1000;
  const double s = 0.7;
  std::vector<double> x;
  for (int i = 0; i < n; ++i) {
    const double p = (i + 0.5) / n;
    x.push_back(p < 0.5 ? s * std::log(2 * p) : -s * std::log(2 * (1 - p)));
  }
  EXPECT_NEAR(KsStatistic(x, s), 0.5 / n, 1e-12);
}

TEST(StatisticsTest, KolmogorovCriticalValues) {
  // Asymptotic critical values of the Kolmogorov distribution.
  const size_t n = 100000000;
  const double sn = std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(KolmogorovPValue(1.3581 / sn, n), 0.05, 5e-4);
  EXPECT_NEAR(KolmogorovPValue(1.6276 / sn, n), 0.01, 2e-4);
  EXPECT_NEAR(KolmogorovPValue(1.2238 / sn, n), 0.10, 5e-4);
  EXPECT_DOUBLE_EQ(KolmogorovPValue(0.0, n), 1.0);
}

TEST(StatisticsTest, KsRejectsWrongScale) {
  NoiseStream rng(3);
  std::vector<double> x(200000);
  for (double& v : x) v = rng.Laplace(1.1);
  std::vector<double> y = x;
  EXPECT_GT(KolmogorovPValue(KsStatistic(x, 1.1), x.size()), 0.01);
  EXPECT_LT(KolmogorovPValue(KsStatistic(y, 1.0), y.size()), 1e-6);
}

TEST(BusNoiseScalesTest, LargestIncidentLineScale) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  const PowerCase& c = lc.power_case;
  const PrivacyConfig cfg = PrivacyConfig::FromScale(0.3);
  const auto all = BusNoiseScales(c, lc.partition, cfg);
  // Tie lines B-G (gamma 8), C-E (10), E-F (9).
  ASSERT_EQ(all.size(), 5u);
  EXPECT_DOUBLE_EQ(all.at(c.BusIndex("B")), 0.3 / 8);
  EXPECT_DOUBLE_EQ(all.at(c.BusIndex("G")), 0.3 / 8);
  EXPECT_DOUBLE_EQ(all.at(c.BusIndex("C")), 0.3 / 10);
  EXPECT_DOUBLE_EQ(all.at(c.BusIndex("E")), 0.3 / 9);
  EXPECT_DOUBLE_EQ(all.at(c.BusIndex("F")), 0.3 / 9);
  EXPECT_EQ(all.count(c.BusIndex("A")), 0u);

  const auto r1 = BusNoiseScales(c, lc.partition, 0, cfg);
  EXPECT_EQ(r1.size(), 4u);  // B, C and foreign E, G
  EXPECT_DOUBLE_EQ(r1.at(c.BusIndex("E")), all.at(c.BusIndex("E")));
}

AngleTable Table() {
  AngleTable t;
  t.buses = {3, 5};
  t.hours = 3;
  t.values = {0.1, 0.2, 0.3, -0.1, -0.2, -0.3};
  return t;
}

TEST(PerturbAnglesTest, DrawOrderAndOffsets) {
  const AngleTable t = Table();
  const std::map<int, double> scales = {{3, 0.01}, {5, 0.02}};
  PrivacyConfig cfg = PrivacyConfig::FromScale(0.1, 1.0, 2.0, 9);
  NoiseStream rng(9, 4);
  const NoisyAngleMessage msg = PerturbAngles(t, scales, cfg, 12, 1, rng);
  EXPECT_EQ(msg.sender(), 1);
  EXPECT_EQ(msg.iteration(), 12);
  ASSERT_EQ(msg.entries().size(), 6u);
  // Replays the draws on a fresh stream: bus-major, hour-minor.
  NoiseStream replay(9, 4);
  for (size_t i = 0; i < 6; ++i) {
    const auto& e = msg.entries()[i];
    EXPECT_EQ(e.bus, t.buses[i / 3]);
    EXPECT_EQ(e.hour, static_cast<int>(i % 3));
    const double alpha = replay.Exponential(scales.at(e.bus));
    EXPECT_DOUBLE_EQ(e.theta_hat, t.values[i] + 2.0 * alpha);
    EXPECT_GT(e.theta_hat, t.values[i]);
  }
}

TEST(PerturbAnglesTest, ZeroMultiplierMakesNoDraws) {
  const AngleTable t = Table();
  PrivacyConfig cfg = PrivacyConfig::FromScale(0.1, 1.0, 0.0);
  NoiseStream rng(1), untouched(1);
  const auto msg = PerturbAngles(t, {{3, 1.0}, {5, 1.0}}, cfg, 0, 0, rng);
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(msg.entries()[i].theta_hat, t.values[i]);
  }
  EXPECT_EQ(rng.Uniform(), untouched.Uniform());
}

TEST(PerturbAnglesTest, MissingScaleThrows) {
  NoiseStream rng(1);
  EXPECT_THROW(PerturbAngles(Table(), {{3, 1.0}}, PrivacyConfig{}, 0, 0, rng),
               Error);
}

TEST(NoisyAngleMessageTest, SubsetAndWireFormat) {
  NoiseStream rng(5);
  const auto msg = PerturbAngles(Table(), {{3, 0.5}, {5, 0.5}},
                                 PrivacyConfig{}, 2, 1, rng);
  const std::vector<int> keep = {5};
  const NoisyAngleMessage sub = msg.Subset(4, keep);
  EXPECT_EQ(sub.receiver(), 4);
  EXPECT_EQ(sub.sender(), 1);
  ASSERT_EQ(sub.entries().size(), 3u);
  for (const auto& e : sub.entries()) EXPECT_EQ(e.bus, 5);

  const std::string wire = sub.ToWire();
  EXPECT_EQ(wire.rfind("sender 1 receiver 4 iteration 2\n", 0), 0u);
  std::istringstream in(wire);
  std::string line;
  std::getline(in, line);
  int records = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.rfind("theta_hat ", 0), 0u) << line;
    ++records;
  }
  EXPECT_EQ(records, 3);
}

TEST(FlowNoiseTest, DifferenceOfExponentialsIsLaplace) {
  for (double scale : {0.015, 0.3}) {
    const PrivacyConfig cfg = PrivacyConfig::FromScale(scale, 1.0, 1.0, 11);
    const KsReport r = VerifyFlowNoise(cfg, 7.5, 200000);
    EXPECT_TRUE(r.pass) << "scale " << scale << " p " << r.p_value;
  }
  // With m = 2 the flow noise is Laplace(2 * omega / epsilon).
  const PrivacyConfig m2 = PrivacyConfig::FromScale(0.075, 1.0, 2.0, 4);
  EXPECT_TRUE(VerifyFlowNoise(m2, 3.0, 200000).pass);
  EXPECT_THROW(VerifyFlowNoise(PrivacyConfig::FromScale(0.1, 1, 0), 1.0, 10),
               Error);
}

TEST(FlowNoiseTest, VarianceMatchesLaplace) {
  // Var(gamma (a - b)) with a, b ~ Exp(s / gamma) is 2 s^2.
  const PrivacyConfig cfg = PrivacyConfig::FromScale(0.2);
  const double gamma = 4.0;
  const double b = cfg.LineScale(gamma);
  NoiseStream rng(99);
  const int n = 400000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = NoisyFlow(rng.Exponential(b), rng.Exponential(b), gamma);
    sq += f * f;
  }
  EXPECT_NEAR(sq / n, 2 * 0.2 * 0.2, 0.02 * 2 * 0.2 * 0.2);
}

TEST(DpRatioTest, NeighbouringInputsStayWithinBound) {
  const DpRatioReport r = VerifyDpRatio(0.5, 0.5, 1.0, 0.5, 1000000, 3);
  EXPECT_TRUE(r.pass) << r.ToText();
  EXPECT_GE(r.bins_used, 50);
  EXPECT_LE(r.max_ratio, std::exp(1.0) * 1.1);
}

TEST(DpRatioTest, TwiceTheSensitivityIsDetected) {
  const DpRatioReport r = VerifyDpRatio(0.5, 0.5, 1.0, 1.0, 1000000, 3);
  EXPECT_FALSE(r.pass) << r.ToText();
  EXPECT_GT(r.max_ratio, std::exp(1.0) * 1.5);
}

TEST(DpRatioTest, RejectsSmallSamples) {
  EXPECT_THROW(VerifyDpRatio(1, 1, 1, 1, 1000, 1), Error);
}

}  // namespace
}  // namespace dpmaint
