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

// One region's unit-commitment and maintenance subproblem.
//
// Units: y, psi and demand in MW; theta in rad; tie-line flow f in p.u. in
// the stored line orientation. Nodal balance converts angle differences to
// MW with base_mva * gamma.

#ifndef DPMAINT_REGIONAL_MODEL_H_
#define DPMAINT_REGIONAL_MODEL_H_

#include <vector>

#include "dpmaint/consensus.h"
#include "dpmaint/grid_case.h"
#include "dpmaint/miqp.h"

namespace dpmaint {

enum class Phase { kRelaxed, kBinary };
const char* ToString(Phase phase);

struct ModelConfig {
  bool slack_enabled = true;
  double slack_penalty = 1e4;  // $/MWh of unserved demand
  // Use lambda * |theta - theta_bar| (epigraph form) instead of the signed
  // augmented-Lagrangian term. Requires nonnegative multipliers.
  bool abs_dual_term = false;
};

struct RegionalVariables {
  int region = 0;
  int hours = 0;
  Phase phase = Phase::kRelaxed;
  std::vector<int> generators;  // G_r
  // [generator slot][hour]
  std::vector<std::vector<double>> x, y, pi_up, pi_down;
  std::vector<int> degraded;  // G_r^d
  std::vector<std::vector<double>> z;  // [degraded slot][window]
  std::vector<int> angle_buses;  // I_r, U_r, V_r
  std::vector<std::vector<double>> theta;  // [bus slot][hour]
  std::vector<TieLine> tie_lines;
  std::vector<std::vector<double>> flow;  // [tie slot][hour], p.u.
  std::vector<int> slack_buses;  // I_r, U_r
  std::vector<std::vector<double>> slack;  // [bus slot][hour], MW
  double objective = 0.0;  // subproblem objective including penalties

  // Angles of `buses` laid out [slot * hours + t]. Throws for unknown buses.
  std::vector<double> Angles(const std::vector<int>& buses) const;
  // Tie-line flows laid out [tie * hours + t].
  std::vector<double> Flows() const;
  double Theta(int bus, int hour) const;
};

// A built subproblem plus the variable index maps needed to read it back.
struct RegionalProblem {
  MiqpProblem problem;
  int region = 0;
  int hours = 0;
  Phase phase = Phase::kRelaxed;
  std::vector<int> generators;
  std::vector<int> degraded;
  std::vector<int> angle_buses;
  std::vector<TieLine> tie_lines;
  std::vector<int> slack_buses;
  // Variable indices, same layouts as RegionalVariables.
  std::vector<std::vector<int>> x, y, pi_up, pi_down, z, theta, flow, slack;
};

// Throws Error(kInvalidArgument) when `consensus` does not cover exactly the
// region's shared buses and tie lines, and Error(kValidation) when demand in a
// region without generators, tie lines or slack cannot be met.
RegionalProblem BuildSubproblem(const PowerCase& c, const RegionPartition& p,
                                int region, const ConsensusState& consensus,
                                Phase phase, const ModelConfig& config = {});

// Throws Error(kSolver) when the solution has no values or, in the binary
// phase, an integer variable is more than 1e-6 from an integer.
RegionalVariables ExtractSolution(const RegionalProblem& rp,
                                  const MiqpSolution& raw);

// Dispatch + commitment + maintenance cost; no penalty or dual terms.
double LocalCost(const PowerCase& c, const RegionalVariables& v);

// Rounded commitment and maintenance values of `v` written into a full
// variable vector for `rp`, for use as a branch-and-bound warm start.
WarmStart RoundedWarmStart(const RegionalProblem& rp,
                           const RegionalVariables& v);

}  // namespace dpmaint

#endif  // DPMAINT_REGIONAL_MODEL_H_
