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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dpmaint/error.h"
#include "dpmaint/regional_model.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpmaint {
namespace {

// Run-length check of a commitment pattern; the unit starts off with no
// history, so only runs that start inside the horizon are constrained and
// runs cut off by the horizon end are allowed.
bool RespectsMinUpDown(const std::vector<int>& x, int min_up, int min_down) {
  const int n = static_cast<int>(x.size());
  int t = 0;
  while (t < n) {
    int e = t;
    while (e < n && x[e] == x[t]) ++e;
    const int len = e - t;
    const bool truncated = e == n;
    if (x[t] == 1 && !truncated && len < min_up) return false;
    if (x[t] == 0 && t > 0 && !truncated && len < min_down) return false;
    t = e;
  }
  return true;
}

// Exhaustive optimum of the one-bus case: every commitment pattern of both
// units and every maintenance window, with merit-order dispatch.
double OneBusOptimum(const PowerCase& c, double slack_penalty) {
  const int h = c.horizon_hours;
  const Generator& g1 = c.generators[0];
  const Generator& g2 = c.generators[1];
  const MaintenanceSpec& spec = c.maintenance[0];
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < c.num_windows(); ++m) {
    for (int a = 0; a < (1 << h); ++a) {
      std::vector<int> x1(h);
      bool ok = true;
      for (int t = 0; t < h; ++t) {
        x1[t] = (a >> t) & 1;
        if (x1[t] && t / c.window_hours == m) ok = false;
      }
      if (!ok || !RespectsMinUpDown(x1, g1.min_up, g1.min_down)) continue;
      for (int b = 0; b < (1 << h); ++b) {
        std::vector<int> x2(h);
        for (int t = 0; t < h; ++t) x2[t] = (b >> t) & 1;
        if (!RespectsMinUpDown(x2, g2.min_up, g2.min_down)) continue;
        double cost = spec.window_costs[m];
        for (int t = 0; t < h && ok; ++t) {
          const double d = c.demand[0][t];
          double y1 = g1.p_min * x1[t], y2 = g2.p_min * x2[t];
          if (y1 + y2 > d) {
            ok = false;
            break;
          }
          // Cheapest unit first (G1 is cheaper).
          double rest = d - y1 - y2;
          const double add1 = std::min(rest, g1.p_max * x1[t] - y1);
          y1 += add1;
          rest -= add1;
          const double add2 = std::min(rest, g2.p_max * x2[t] - y2);
          y2 += add2;
          rest -= add2;
          cost += g1.commitment_cost * x1[t] + g2.commitment_cost * x2[t] +
                  g1.dispatch_cost * y1 + g2.dispatch_cost * y2 +
                  slack_penalty * rest;
        }
        if (ok) best = std::min(best, cost);
        ok = true;
      }
    }
  }
  return best;
}

TEST(RespectsMinUpDownTest, Oracle) {
  EXPECT_TRUE(RespectsMinUpDown({0, 1, 1, 0, 0, 1}, 2, 2));
  EXPECT_FALSE(RespectsMinUpDown({0, 1, 0, 0, 1, 1}, 2, 2));
  EXPECT_FALSE(RespectsMinUpDown({1, 1, 0, 1, 1, 1}, 2, 2));
  EXPECT_TRUE(RespectsMinUpDown({1, 1, 1, 1, 1, 1}, 3, 3));
}

class OneBusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    c_ = ParseCase(testing::kOneBusCase);
    p_ = SingleRegion(c_);
    cs_ = ConsensusState(c_, p_.regions[0], 1.0, 1.0, 1.0);
  }
  PowerCase c_;
  RegionPartition p_;
  ConsensusState cs_;
};

TEST_F(OneBusTest, BinaryOptimumMatchesEnumeration) {
  const RegionalProblem rp =
      BuildSubproblem(c_, p_, 0, cs_, Phase::kBinary, ModelConfig{});
  EXPECT_EQ(rp.problem.num_integer(), 2 * 6 + 3);
  const MiqpSolution s = SolveMiqp(rp.problem);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  const double want = OneBusOptimum(c_, 1e4);
  EXPECT_NEAR(s.objective, want, 1e-6 * want);

  const RegionalVariables v = ExtractSolution(rp, s);
  double slack = 0.0;
  for (double x : v.slack[0]) slack += x;
  EXPECT_NEAR(LocalCost(c_, v) + 1e4 * slack, s.objective, 1e-6 * want);
  // Exactly one maintenance window and no commitment inside it.
  double zsum = 0.0;
  for (double z : v.z[0]) zsum += z;
  EXPECT_EQ(zsum, 1.0);
  for (int t = 0; t < 6; ++t) {
    if (v.z[0][t / 2] == 1.0) {
      EXPECT_EQ(v.x[0][t], 0.0);
    }
    EXPECT_NEAR(v.y[0][t] + v.y[1][t] + v.slack[0][t], c_.demand[0][t], 1e-6);
  }
}

TEST_F(OneBusTest, TightCapacityUsesSlackAtPenalty) {
  // Without G2 the peak of 90 MW still fits G1; shrink G1 so it does not.
  PowerCase c = c_;
  c.generators[0].p_max = 70.0;
  c.generators[1].p_max = 10.0;
  const RegionPartition p = SingleRegion(c);
  ModelConfig mc;
  mc.slack_penalty = 500.0;
  const RegionalProblem rp = BuildSubproblem(
      c, p, 0, ConsensusState(c, p.regions[0], 1, 1, 1), Phase::kBinary, mc);
  const MiqpSolution s = SolveMiqp(rp.problem);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, OneBusOptimum(c, 500.0), 1e-6 * s.objective);
}

TEST_F(OneBusTest, RelaxationBoundsBinary) {
  const RegionalProblem relaxed =
      BuildSubproblem(c_, p_, 0, cs_, Phase::kRelaxed);
  const RegionalProblem binary = BuildSubproblem(c_, p_, 0, cs_, Phase::kBinary);
  EXPECT_EQ(relaxed.problem.num_integer(), 0);
  const MiqpSolution r = SolveMiqp(relaxed.problem);
  const MiqpSolution b = SolveMiqp(binary.problem);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_LE(r.objective, b.objective + 1e-6);
}

TEST_F(OneBusTest, RoundedWarmStartIsIntegral) {
  const RegionalProblem relaxed =
      BuildSubproblem(c_, p_, 0, cs_, Phase::kRelaxed);
  const RegionalVariables v =
      ExtractSolution(relaxed, SolveMiqp(relaxed.problem));
  const RegionalProblem binary = BuildSubproblem(c_, p_, 0, cs_, Phase::kBinary);
  const WarmStart w = RoundedWarmStart(binary, v);
  ASSERT_EQ(w.values.size(), static_cast<size_t>(binary.problem.num_variables()));
  EXPECT_EQ(binary.problem.MaxFractionality(w.values), 0.0);
  double zsum = 0.0;
  for (int var : binary.z[0]) zsum += w.values[var];
  EXPECT_EQ(zsum, 1.0);
}

TEST_F(OneBusTest, NoSlackWithoutGenerationIsRejected) {
  PowerCase c = c_;
  c.generators.clear();
  c.maintenance.clear();
  const RegionPartition p = SingleRegion(c);
  ModelConfig mc;
  mc.slack_enabled = false;
  EXPECT_THROW(BuildSubproblem(c, p, 0, ConsensusState(c, p.regions[0], 1, 1, 1),
                               Phase::kRelaxed, mc),
               Error);
}

TEST(SevenBusModelTest, PenaltiesFlowsAndBalance) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  const PowerCase& c = lc.power_case;
  const Region& reg = lc.partition.regions[0];
  const int h = c.horizon_hours;
  const double rho_t = 50.0, rho_f = 20.0;
  ConsensusState cs(c, reg, rho_t, rho_f, 1.0);
  for (size_t i = 0; i < cs.lambda().size(); ++i) {
    cs.lambda()[i] = 3.0 * std::sin(0.3 * i);
    cs.theta_bar()[i] = 0.01 * std::cos(0.2 * i);
  }
  for (size_t i = 0; i < cs.phi().size(); ++i) {
    cs.phi()[i] = 2.0 * std::cos(0.5 * i);
    cs.flow_bar()[i] = 0.1 * std::sin(0.1 * i);
  }
  const RegionalProblem rp =
      BuildSubproblem(c, lc.partition, 0, cs, Phase::kRelaxed);
  const MiqpSolution s = SolveMiqp(rp.problem);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  const RegionalVariables v = ExtractSolution(rp, s);

  // Objective = local cost + slack + signed augmented-Lagrangian terms.
  double want = LocalCost(c, v);
  for (const auto& row : v.slack) {
    for (double x : row) want += 1e4 * x;
  }
  const std::vector<double> th = v.Angles(cs.buses());
  for (size_t i = 0; i < th.size(); ++i) {
    const double d = th[i] - cs.theta_bar()[i];
    want += cs.lambda()[i] * d + 0.5 * rho_t * d * d;
  }
  const std::vector<double> f = v.Flows();
  for (size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - cs.flow_bar()[i];
    want += cs.phi()[i] * d + 0.5 * rho_f * d * d;
  }
  EXPECT_NEAR(v.objective, want, 1e-6 * std::abs(want));

  // Flow definition in line orientation and nodal balance at owned buses.
  for (size_t k = 0; k < v.tie_lines.size(); ++k) {
    const Line& line = c.lines[v.tie_lines[k].line];
    for (int t = 0; t < h; ++t) {
      EXPECT_NEAR(v.flow[k][t],
                  line.gamma * (v.Theta(line.from, t) - v.Theta(line.to, t)),
                  1e-7);
    }
  }
  for (size_t s_idx = 0; s_idx < v.slack_buses.size(); ++s_idx) {
    const int b = v.slack_buses[s_idx];
    for (int t = 0; t < h; ++t) {
      double net = v.slack[s_idx][t];
      for (size_t gi = 0; gi < v.generators.size(); ++gi) {
        if (c.generators[v.generators[gi]].bus == b) net += v.y[gi][t];
      }
      for (const Line& line : c.lines) {
        if (line.from == b) {
          net -= c.base_mva * line.gamma *
                 (v.Theta(b, t) - v.Theta(line.to, t));
        } else if (line.to == b) {
          net -= c.base_mva * line.gamma *
                 (v.Theta(b, t) - v.Theta(line.from, t));
        }
      }
      EXPECT_NEAR(net, c.demand[b][t], 1e-5) << c.buses[b] << " " << t;
    }
  }
  // Reference bus A is fixed.
  for (int t = 0; t < h; ++t) EXPECT_EQ(v.Theta(c.BusIndex("A"), t), 0.0);
}

TEST(SevenBusModelTest, AbsoluteDualTermMatchesDefinition) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  const PowerCase& c = lc.power_case;
  ConsensusState cs(c, lc.partition.regions[1], 30.0, 30.0, 1.0);
  for (size_t i = 0; i < cs.lambda().size(); ++i) {
    cs.lambda()[i] = 5.0 + (i % 7);
    cs.theta_bar()[i] = 0.02;
  }
  ModelConfig mc;
  mc.abs_dual_term = true;
  const RegionalProblem rp =
      BuildSubproblem(c, lc.partition, 1, cs, Phase::kRelaxed, mc);
  const MiqpSolution s = SolveMiqp(rp.problem);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  const RegionalVariables v = ExtractSolution(rp, s);
  double want = LocalCost(c, v);
  for (const auto& row : v.slack) {
    for (double x : row) want += 1e4 * x;
  }
  const std::vector<double> th = v.Angles(cs.buses());
  for (size_t i = 0; i < th.size(); ++i) {
    const double d = th[i] - cs.theta_bar()[i];
    want += cs.lambda()[i] * std::abs(d) + 15.0 * d * d;
  }
  for (double x : v.Flows()) want += 15.0 * x * x;
  EXPECT_NEAR(v.objective, want, 1e-5 * std::abs(want));

  cs.lambda()[0] = -1.0;
  EXPECT_THROW(BuildSubproblem(c, lc.partition, 1, cs, Phase::kRelaxed, mc),
               Error);
}

TEST(SevenBusModelTest, RejectsForeignConsensusState) {
  const testing::LoadedCase lc = testing::LoadSevenBus();
  const ConsensusState other(lc.power_case, lc.partition.regions[2], 1, 1, 1);
  EXPECT_THROW(BuildSubproblem(lc.power_case, lc.partition, 0, other,
                               Phase::kRelaxed),
               Error);
  EXPECT_THROW(BuildSubproblem(lc.power_case, lc.partition, 5, other,
                               Phase::kRelaxed),
               Error);
}

}  // namespace
}  // namespace dpmaint
