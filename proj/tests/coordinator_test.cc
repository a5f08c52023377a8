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
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpmaint/bench.h"
#include "dpmaint/coordinator.h"
#include "dpmaint/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpmaint {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

// A message from `sender` to `receiver` at iteration k about `buses`.
NoisyAngleMessage MakeMessage(int sender, int receiver, int k,
                              const std::vector<int>& buses, int hours = 1) {
  AngleTable t;
  t.buses = buses;
  t.hours = hours;
  t.values.assign(buses.size() * hours, 0.0);
  std::map<int, double> scales;
  for (int b : buses) scales[b] = 1.0;
  NoiseStream rng(1);
  return PerturbAngles(t, scales, PrivacyConfig{}, k, sender, rng)
      .Subset(receiver, buses);
}

class RouterTest : public ::testing::Test {
 protected:
  void SetUp() override {
    c_ = LoadCase(testing::CasePath("ieee14_t24.json"));
    p_ = Partition(c_, LoadPartitionMap(
                           testing::CasePath("ieee14_4region.partition")));
  }
  PowerCase c_;
  RegionPartition p_;
};

TEST_F(RouterTest, NonNeighbourMessageIsProtocolError) {
  ASSERT_FALSE(p_.AreNeighbors(0, 2));
  ASSERT_TRUE(p_.AreNeighbors(0, 1));
  Router router(p_);
  router.BeginIteration(0);
  EXPECT_EQ(CodeOf([&] { router.Send(MakeMessage(0, 2, 0, {1})); }),
            ErrorCode::kProtocol);
  EXPECT_EQ(CodeOf([&] { router.Send(MakeMessage(3, 1, 0, {1})); }),
            ErrorCode::kProtocol);
  EXPECT_NO_THROW(router.Send(MakeMessage(0, 1, 0, {1})));
}

TEST_F(RouterTest, RejectsMalformedTraffic) {
  Router router(p_);
  EXPECT_EQ(CodeOf([&] { router.Send(MakeMessage(0, 1, 0, {1})); }),
            ErrorCode::kProtocol);  // no open iteration
  router.BeginIteration(4);
  EXPECT_EQ(CodeOf([&] { router.Send(MakeMessage(1, 1, 4, {1})); }),
            ErrorCode::kProtocol);
  EXPECT_EQ(CodeOf([&] { router.Send(MakeMessage(0, 1, 3, {1})); }),
            ErrorCode::kProtocol);
  EXPECT_EQ(CodeOf([&] { router.Send(MakeMessage(0, 9, 4, {1})); }),
            ErrorCode::kProtocol);
  router.Send(MakeMessage(0, 1, 4, {1}));
  EXPECT_EQ(CodeOf([&] { router.Send(MakeMessage(0, 1, 4, {2})); }),
            ErrorCode::kProtocol);
  EXPECT_EQ(CodeOf([&] { router.Deliver(1); }), ErrorCode::kProtocol);
}

TEST_F(RouterTest, DeliversAfterBarrierInSenderOrder) {
  Router router(p_);
  std::vector<int> observed;
  router.set_observer(
      [&](const NoisyAngleMessage& m) { observed.push_back(m.sender()); });
  router.BeginIteration(0);
  router.Send(MakeMessage(2, 1, 0, {5}));
  router.Send(MakeMessage(0, 1, 0, {4}));
  router.Barrier();
  const auto box = router.Deliver(1);
  ASSERT_EQ(box.size(), 2u);
  EXPECT_EQ(box[0].sender(), 0);
  EXPECT_EQ(box[1].sender(), 2);
  EXPECT_TRUE(router.Deliver(0).empty());
  EXPECT_EQ(observed, (std::vector<int>{2, 0}));
  router.BeginIteration(1);
  router.Barrier();
  EXPECT_TRUE(router.Deliver(1).empty());
}

RunConfig SevenBusConfig(double scale, double m, uint64_t seed) {
  RunConfig cfg;
  cfg.privacy = PrivacyConfig::FromScale(scale, 1.0, m, seed);
  cfg.chart = ChartConfig::FromGamma(2, 3);
  cfg.chart.min_threshold = 1e-3;
  cfg.chart.cl = 0.1;
  cfg.rho_theta = 3000;
  cfg.rho_f = 3000;
  cfg.eta = 0.9;
  cfg.two_phase = false;
  return cfg;
}

std::string TraceCsv(const RunResult& r) {
  CellResult cell;
  cell.key = {0.075, 0.1, 2, 1};
  cell.trace = r.trace;
  std::ostringstream out;
  WriteTraceCsv({cell}, false, out);
  return out.str();
}

TEST(CoordinatorTest, SeededRunsAreByteIdentical) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  RunConfig cfg = SevenBusConfig(0.075, 1.0, 17);
  cfg.max_iterations = 24;
  const RunResult a = RunTwoPhase(lc.power_case, lc.partition, cfg);
  const RunResult b = RunTwoPhase(lc.power_case, lc.partition, cfg);
  EXPECT_EQ(TraceCsv(a), TraceCsv(b));
  EXPECT_FALSE(a.trace.empty());
  cfg.privacy.seed = 18;
  const RunResult c = RunTwoPhase(lc.power_case, lc.partition, cfg);
  EXPECT_NE(TraceCsv(a), TraceCsv(c));
}

TEST(CoordinatorTest, PayloadsCarryOnlyPerturbedAngles) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  RunConfig cfg = SevenBusConfig(0.075, 1.0, 5);
  cfg.max_iterations = 1;
  Coordinator coord(lc.power_case, lc.partition, cfg);
  std::vector<NoisyAngleMessage> seen;
  coord.router().set_observer(
      [&](const NoisyAngleMessage& m) { seen.push_back(m); });
  const RunResult r = coord.RunTwoPhase();
  ASSERT_EQ(r.phases.size(), 1u);
  ASSERT_FALSE(seen.empty());
  const auto& sol = r.phases[0].solutions;
  for (const NoisyAngleMessage& m : seen) {
    EXPECT_TRUE(lc.partition.AreNeighbors(m.sender(), m.receiver()));
    const auto shared = lc.partition.regions[m.receiver()].SharedBuses();
    for (const auto& e : m.entries()) {
      EXPECT_NE(std::find(shared.begin(), shared.end(), e.bus), shared.end());
      const double raw = sol[m.sender()].Theta(e.bus, e.hour);
      EXPECT_GT(e.theta_hat - raw, 0.0) << "bus " << e.bus;
    }
  }
}

TEST(CoordinatorTest, VerdictsOnlyAtDecisionIterations) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  RunConfig cfg = SevenBusConfig(0.015, 0.0, 1);
  cfg.max_iterations = 120;
  const int interval = cfg.chart.decision_interval();
  ASSERT_EQ(interval, 6);
  const RunResult r = RunTwoPhase(lc.power_case, lc.partition, cfg);
  int verdicts = 0;
  for (const TraceRecord& row : r.trace) {
    if (row.local_converged) {
      ++verdicts;
      EXPECT_EQ(row.iteration % interval, 0) << row.iteration;
    }
    if (row.global_converged) {
      EXPECT_EQ(row.iteration % interval, 0);
    }
  }
  EXPECT_GT(verdicts, 0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.status, "converged");
  EXPECT_EQ(r.phases[0].iterations % interval, 0);
}

TEST(CoordinatorTest, TinyBudgetStopsWithPartialTrace) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  RunConfig cfg = SevenBusConfig(0.015, 1.0, 1);
  cfg.time_budget_seconds = 1e-6;
  cfg.two_phase = true;
  const RunResult r = RunTwoPhase(lc.power_case, lc.partition, cfg);
  EXPECT_EQ(r.status, "budget");
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.phases.size(), 1u);
  EXPECT_EQ(r.trace.size(), 3u);  // one iteration, three regions
}

TEST(CoordinatorTest, SingleRegionStopsAtFirstDecision) {
  const PowerCase c = ParseCase(testing::kOneBusCase);
  const RegionPartition p = SingleRegion(c);
  RunConfig cfg;
  cfg.chart = ChartConfig::FromGamma(2, 2);
  const RunResult r = RunTwoPhase(c, p, cfg);
  ASSERT_EQ(r.phases.size(), 2u);
  EXPECT_EQ(r.phases[0].iterations, 4);
  EXPECT_EQ(r.phases[1].iterations, 4);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.objective, 0.0);
  EXPECT_TRUE(r.final_flows.empty());
}

TEST(CoordinatorTest, ThreadedSolvesMatchSequential) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  RunConfig cfg = SevenBusConfig(0.03, 1.0, 3);
  cfg.max_iterations = 8;
  const RunResult seq = RunTwoPhase(lc.power_case, lc.partition, cfg);
  cfg.threads = 3;
  const RunResult par = RunTwoPhase(lc.power_case, lc.partition, cfg);
  EXPECT_EQ(TraceCsv(seq), TraceCsv(par));
}

}  // namespace
}  // namespace dpmaint
