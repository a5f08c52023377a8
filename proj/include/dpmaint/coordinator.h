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

// In-process simulation of the decentralized two-phase protocol.
//
// One worker per region; all inter-region traffic is NoisyAngleMessage values
// passed through a Router that only connects neighbouring regions and
// delivers after a per-iteration barrier. Iterations run in lockstep:
// solve, perturb and send, consensus + duals + chart, local verdicts.

#ifndef DPMAINT_COORDINATOR_H_
#define DPMAINT_COORDINATOR_H_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dpmaint/consensus.h"
#include "dpmaint/convergence_monitor.h"
#include "dpmaint/dp_mechanism.h"
#include "dpmaint/grid_case.h"
#include "dpmaint/miqp.h"
#include "dpmaint/regional_model.h"

namespace dpmaint {

class Router {
 public:
  explicit Router(const RegionPartition& partition);

  // Clears the mailboxes and opens iteration k.
  void BeginIteration(int k);
  // Throws Error(kProtocol) for self-messages, non-neighbours, a second
  // message on the same (sender, receiver) pair this iteration, or a message
  // stamped with another iteration.
  void Send(NoisyAngleMessage message);
  // Closes the send window; Deliver() is only valid afterwards.
  void Barrier();
  // Messages addressed to `receiver`, ordered by sender.
  std::vector<NoisyAngleMessage> Deliver(int receiver);

  // Called with every accepted message (for auditing payloads).
  void set_observer(std::function<void(const NoisyAngleMessage&)> f) {
    observer_ = std::move(f);
  }
  // Neighbours that `region` may address.
  const std::vector<int>& AllowedReceivers(int region) const;

 private:
  const RegionPartition* partition_;
  int iteration_ = -1;
  bool open_ = false;
  std::vector<std::map<int, NoisyAngleMessage>> boxes_;  // [receiver][sender]
  std::function<void(const NoisyAngleMessage&)> observer_;
};

struct RunConfig {
  PrivacyConfig privacy;
  ChartConfig chart;
  double rho_theta = 1.0;
  double rho_f = 1.0;
  double eta = 1.0;
  // Subtract the known noise mean m * b from received angles.
  bool debias = true;
  ModelConfig model;
  std::string backend = "bundled";
  // Per regional solve in the binary phase. Every iteration re-solves with
  // moved penalties, so a bounded search from the previous schedule is
  // enough; the last iterations see near-identical problems.
  MiqpLimits limits = [] {
    MiqpLimits l;
    l.node_limit = 200;
    l.relative_gap = 1e-3;
    return l;
  }();
  double time_budget_seconds = 10600.0;
  int max_iterations = 0;  // per phase; 0 means no cap
  bool two_phase = true;   // false: stop after the relaxed phase
  int threads = 1;         // concurrent region solves per iteration
  bool record_wall_time = false;
};

struct TraceRecord {
  int iteration = 0;  // 1-based within the phase
  int region = 0;     // external region id
  Phase phase = Phase::kRelaxed;
  double local_cost = 0.0;
  double subproblem_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double flow_residual = 0.0;
  double tolerance = 0.0;
  int chart_points = 0;
  double max_abs_point = 0.0;  // largest |Theta| emitted this iteration
  int alarms = 0;
  int kappa = 0;
  double lambda_norm = 0.0;  // 2-norm
  double phi_norm = 0.0;
  double slack_mw = 0.0;
  bool local_converged = false;
  bool global_converged = false;
  double wall_seconds = 0.0;
};

struct PhaseResult {
  Phase phase = Phase::kRelaxed;
  bool converged = false;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::vector<RegionalVariables> solutions;  // per region index
  std::vector<ConsensusState> consensus;
};

// A tie-line flow as computed by its owner region and as rebuilt by the
// neighbour from the perturbed angles, both p.u. in line orientation.
struct FlowObservation {
  int line = 0;
  int hour = 0;
  int source_region = 0;
  double true_flow = 0.0;
  double dp_flow = 0.0;
};

struct RunResult {
  bool converged = false;        // last executed phase converged
  bool budget_exhausted = false;
  std::string status;            // converged | not-converged | budget
  std::vector<PhaseResult> phases;
  // Sum of regional local costs plus the slack penalty, last phase.
  double objective = 0.0;
  double slack_mw = 0.0;         // total unserved demand, last phase
  bool warm_start_used = false;  // phase 2 accepted the rounded start
  std::vector<TraceRecord> trace;
  std::vector<FlowObservation> final_flows;
  double wall_seconds = 0.0;
};

class Coordinator {
 public:
  Coordinator(const PowerCase& c, const RegionPartition& p, RunConfig config);
  ~Coordinator();

  // Runs one phase from the given consensus states (empty = fresh).
  PhaseResult RunPhase(Phase phase, std::vector<ConsensusState> initial,
                       RunResult& result);
  // Relaxed phase, then the binary phase warm-started from it.
  RunResult RunTwoPhase();

  Router& router() { return router_; }

 private:
  struct Worker;
  double Elapsed() const;

  const PowerCase& case_;
  const RegionPartition& partition_;
  RunConfig config_;
  Router router_;
  std::shared_ptr<SolverBackend> backend_;
  std::map<int, double> scales_;
  std::map<int, double> offsets_;
  std::vector<std::unique_ptr<Worker>> workers_;
  double start_ = 0.0;
};

// Convenience wrapper.
RunResult RunTwoPhase(const PowerCase& c, const RegionPartition& p,
                      const RunConfig& config);

}  // namespace dpmaint

#endif  // DPMAINT_COORDINATOR_H_
