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

#include "dpmaint/coordinator.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <optional>
#include <set>
#include <string>

#include "dpmaint/error.h"

namespace dpmaint {
namespace {

double Now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double Norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Router::Router(const RegionPartition& partition)
    : partition_(&partition), boxes_(partition.num_regions()) {}

void Router::BeginIteration(int k) {
  iteration_ = k;
  open_ = true;
  for (auto& box : boxes_) box.clear();
}

const std::vector<int>& Router::AllowedReceivers(int region) const {
  return partition_->regions.at(region).neighbors;
}

void Router::Send(NoisyAngleMessage message) {
  const int from = message.sender();
  const int to = message.receiver();
  if (!open_) throw ProtocolError("send outside an open iteration");
  if (from < 0 || from >= partition_->num_regions() || to < 0 ||
      to >= partition_->num_regions()) {
    throw ProtocolError("message between unknown regions");
  }
  if (from == to) {
    throw ProtocolError("region " + std::to_string(from) +
                        " addressed a message to itself");
  }
  if (!partition_->AreNeighbors(from, to)) {
    throw ProtocolError("region " + std::to_string(from) +
                        " is not a neighbour of region " + std::to_string(to));
  }
  if (message.iteration() != iteration_) {
    throw ProtocolError("message stamped with iteration " +
                        std::to_string(message.iteration()) + " during " +
                        std::to_string(iteration_));
  }
  if (boxes_[to].count(from)) {
    throw ProtocolError("duplicate message from region " +
                        std::to_string(from) + " to region " +
                        std::to_string(to));
  }
  if (observer_) observer_(message);
  boxes_[to].emplace(from, std::move(message));
}

void Router::Barrier() { open_ = false; }

std::vector<NoisyAngleMessage> Router::Deliver(int receiver) {
  if (open_) throw ProtocolError("delivery before the iteration barrier");
  std::vector<NoisyAngleMessage> out;
  for (auto& [sender, msg] : boxes_.at(receiver)) out.push_back(msg);
  return out;
}

struct Coordinator::Worker {
  int region = 0;
  const Region* reg = nullptr;
  std::vector<int> shared;
  std::map<int, std::vector<int>> buses_for;  // neighbour -> tie endpoints
  ConsensusState consensus;
  ChartState chart;
  NoiseStream rng;
  std::optional<RegionalVariables> latest;
  std::optional<NoisyAngleMessage> sent;
  std::vector<NoisyAngleMessage> inbox;
  bool local_converged = false;

  Worker(int r, uint64_t seed) : region(r), rng(seed, r) {}
};

Coordinator::Coordinator(const PowerCase& c, const RegionPartition& p,
                         RunConfig config)
    : case_(c), partition_(p), config_(std::move(config)), router_(p) {
  config_.privacy.Validate();
  config_.chart.noise_multiplier = config_.privacy.noise_multiplier;
  config_.chart.Validate();
  if (config_.threads < 1) throw InvalidArgument("threads must be >= 1");
  if (!(config_.time_budget_seconds > 0.0)) {
    throw InvalidArgument("time budget must be positive");
  }
  backend_ = GetBackend(config_.backend);
  scales_ = BusNoiseScales(c, p, config_.privacy);
  for (const auto& [bus, b] : scales_) {
    offsets_[bus] = config_.debias ? config_.privacy.noise_multiplier * b : 0.0;
  }
  for (const Region& reg : p.regions) {
    auto w = std::make_unique<Worker>(reg.index, config_.privacy.seed);
    w->reg = &reg;
    w->shared = reg.SharedBuses();
    for (const TieLine& tie : reg.tie_lines) {
      auto& v = w->buses_for[tie.neighbor];
      v.push_back(tie.own_bus);
      v.push_back(tie.foreign_bus);
    }
    for (auto& [n, v] : w->buses_for) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    workers_.push_back(std::move(w));
  }
  start_ = Now();
}

Coordinator::~Coordinator() = default;

double Coordinator::Elapsed() const { return Now() - start_; }

PhaseResult Coordinator::RunPhase(Phase phase,
                                  std::vector<ConsensusState> initial,
                                  RunResult& result) {
  const int hours = case_.horizon_hours;
  const double phase_start = Elapsed();
  const bool binary = phase == Phase::kBinary;
  for (auto& w : workers_) {
    if (!initial.empty()) {
      w->consensus = std::move(initial.at(w->region));
      w->consensus.ResetMemories();
    } else {
      w->consensus = ConsensusState(case_, *w->reg, config_.rho_theta,
                                    config_.rho_f, config_.eta);
    }
    std::vector<double> thresholds;
    for (int bus : w->shared) {
      thresholds.push_back(AlarmThreshold(config_.chart, scales_.at(bus), hours));
    }
    w->chart = ChartState(config_.chart, w->shared, thresholds);
    w->local_converged = false;
  }

  PhaseResult out;
  out.phase = phase;
  for (int k = 0;; ++k) {
    // 1. Local solves.
    auto solve = [&](Worker& w) {
      RegionalProblem rp =
          BuildSubproblem(case_, partition_, w.region, w.consensus, phase,
                          config_.model);
      MiqpLimits lim = config_.limits;
      lim.time_limit_seconds =
          std::min(lim.time_limit_seconds,
                   std::max(0.0, config_.time_budget_seconds - Elapsed()));
      std::optional<WarmStart> warm;
      if (binary && w.latest) warm = RoundedWarmStart(rp, *w.latest);
      MiqpSolution sol = backend_->Solve(rp.problem, lim,
                                         warm ? &*warm : nullptr);
      if (!sol.has_solution()) {
        throw SolverError("region " + std::to_string(w.reg->external_id) +
                          ", " + ToString(phase) + " iteration " +
                          std::to_string(k + 1) + ": subproblem " +
                          ToString(sol.status));
      }
      if (binary && k == 0 && warm) {
        result.warm_start_used = sol.warm_start_feasible;
      }
      w.latest = ExtractSolution(rp, sol);
    };
    if (config_.threads > 1 && workers_.size() > 1) {
      for (size_t first = 0; first < workers_.size();
           first += config_.threads) {
        std::vector<std::future<void>> jobs;
        const size_t last =
            std::min(workers_.size(), first + config_.threads);
        for (size_t i = first; i < last; ++i) {
          jobs.push_back(std::async(std::launch::async, solve,
                                    std::ref(*workers_[i])));
        }
        for (auto& j : jobs) j.get();
      }
    } else {
      for (auto& w : workers_) solve(*w);
    }

    // 2. Perturb and send shared angles.
    router_.BeginIteration(k);
    for (auto& w : workers_) {
      AngleTable table{w->shared, hours, w->latest->Angles(w->shared)};
      NoisyAngleMessage msg = PerturbAngles(table, scales_, config_.privacy, k,
                                            w->region, w->rng);
      for (const auto& [neighbor, buses] : w->buses_for) {
        router_.Send(msg.Subset(neighbor, buses));
      }
      w->sent = std::move(msg);
    }
    router_.Barrier();

    // 3. Consensus, duals and chart.
    bool all_converged = true;
    std::vector<TraceRecord> rows;
    for (auto& w : workers_) {
      w->inbox = router_.Deliver(w->region);
      const std::vector<double> own_theta = w->latest->Angles(w->shared);
      const std::vector<double> own_flow = w->latest->Flows();
      const ConsensusResiduals res = w->consensus.Update(
          own_theta, own_flow, w->inbox, offsets_, case_);
      w->consensus.DualUpdate(own_theta, own_flow);

      std::map<std::pair<int, int>, double> own_hat;
      for (const auto& e : w->sent->entries()) own_hat[{e.bus, e.hour}] = e.theta_hat;
      std::vector<double> sum(w->shared.size(), 0.0);
      std::vector<int> count(w->shared.size(), 0);
      for (const NoisyAngleMessage& m : w->inbox) {
        for (const auto& e : m.entries()) {
          const int s = w->consensus.BusSlot(e.bus);
          sum[s] += own_hat.at({e.bus, e.hour}) - e.theta_hat;
          ++count[s];
        }
      }
      for (size_t s = 0; s < sum.size(); ++s) {
        if (count[s] > 0) sum[s] /= count[s];
      }
      const std::vector<ChartPoint> points = w->chart.RecordIteration(sum);

      // 4. Local verdict.
      w->local_converged =
          LocalConvergence(config_.chart, w->chart, res.primal, res.dual,
                           static_cast<int>(w->shared.size()), hours);
      all_converged = all_converged && w->local_converged;

      TraceRecord row;
      row.iteration = k + 1;
      row.region = w->reg->external_id;
      row.phase = phase;
      row.local_cost = LocalCost(case_, *w->latest);
      row.subproblem_objective = w->latest->objective;
      row.primal_residual = res.primal;
      row.dual_residual = res.dual;
      row.flow_residual = res.flow_primal;
      row.tolerance = Tolerance(config_.chart.cl,
                                static_cast<int>(w->shared.size()), hours);
      row.chart_points = static_cast<int>(points.size());
      for (const ChartPoint& p : points) {
        row.max_abs_point = std::max(row.max_abs_point, std::abs(p.value));
        row.alarms += p.alarm ? 1 : 0;
      }
      row.kappa = w->chart.kappa();
      row.lambda_norm = Norm2(w->consensus.lambda());
      row.phi_norm = Norm2(w->consensus.phi());
      for (const auto& s : w->latest->slack) {
        for (double v : s) row.slack_mw += v;
      }
      row.local_converged = w->local_converged;
      if (config_.record_wall_time) row.wall_seconds = Elapsed();
      rows.push_back(row);
    }
    for (TraceRecord& row : rows) {
      row.global_converged = all_converged;
      result.trace.push_back(row);
    }
    out.iterations = k + 1;
    if (all_converged) {
      out.converged = true;
      break;
    }
    if (Elapsed() >= config_.time_budget_seconds) {
      result.budget_exhausted = true;
      break;
    }
    if (config_.max_iterations > 0 && k + 1 >= config_.max_iterations) break;
  }

  // Flows as owned versus as rebuilt by the neighbours at the last iteration.
  for (auto& w : workers_) {
    std::map<std::pair<int, int>, double> hat;
    for (const auto& e : w->sent->entries()) {
      hat[{e.bus, e.hour}] = e.theta_hat - offsets_.at(e.bus);
    }
    for (size_t k = 0; k < w->reg->tie_lines.size(); ++k) {
      const Line& line = case_.lines[w->reg->tie_lines[k].line];
      for (int t = 0; t < hours; ++t) {
        FlowObservation f;
        f.line = w->reg->tie_lines[k].line;
        f.hour = t;
        f.source_region = w->reg->external_id;
        f.true_flow = w->latest->flow[k][t];
        f.dp_flow = NoisyFlow(hat.at({line.from, t}), hat.at({line.to, t}),
                              line.gamma);
        result.final_flows.push_back(f);
      }
    }
  }
  if (!result.final_flows.empty()) {
    // Keep only the latest phase.
    const size_t per_phase = [&] {
      size_t n = 0;
      for (auto& w : workers_) n += w->reg->tie_lines.size() * hours;
      return n;
    }();
    result.final_flows.erase(result.final_flows.begin(),
                             result.final_flows.end() - per_phase);
  }
  for (auto& w : workers_) {
    out.solutions.push_back(*w->latest);
    out.consensus.push_back(w->consensus);
  }
  out.wall_seconds = Elapsed() - phase_start;
  return out;
}

RunResult Coordinator::RunTwoPhase() {
  start_ = Now();
  RunResult result;
  result.phases.push_back(RunPhase(Phase::kRelaxed, {}, result));
  if (config_.two_phase && !result.budget_exhausted) {
    std::vector<ConsensusState> carry = result.phases.back().consensus;
    result.phases.push_back(RunPhase(Phase::kBinary, std::move(carry), result));
  }
  const PhaseResult& last = result.phases.back();
  result.converged = last.converged && !result.budget_exhausted;
  for (const RegionalVariables& v : last.solutions) {
    result.objective += LocalCost(case_, v);
    for (const auto& s : v.slack) {
      for (double x : s) result.slack_mw += x;
    }
  }
  if (config_.model.slack_enabled) {
    result.objective += config_.model.slack_penalty * result.slack_mw;
  }
  result.status = result.converged         ? "converged"
                  : result.budget_exhausted ? "budget"
                                            : "not-converged";
  result.wall_seconds = Elapsed();
  return result;
}

RunResult RunTwoPhase(const PowerCase& c, const RegionPartition& p,
                      const RunConfig& config) {
  Coordinator coordinator(c, p, config);
  return coordinator.RunTwoPhase();
}

}  // namespace dpmaint
