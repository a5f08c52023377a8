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

#include "dpmaint/regional_model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpmaint/error.h"

namespace dpmaint {
namespace {

std::string Name(const char* what, const std::string& id, int t) {
  return std::string(what) + "(" + id + "," + std::to_string(t) + ")";
}

int Slot(const std::vector<int>& v, int value) {
  const auto it = std::find(v.begin(), v.end(), value);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

// Adds lambda * d + rho/2 * d^2 with d = var - target (signed form), or the
// epigraph version of lambda * |d| + rho/2 * d^2.
void AddPenalty(MiqpProblem& prob, int var, double lambda, double rho,
                double target, bool abs_form, const std::string& name) {
  Variable& v = prob.variables()[var];
  v.quad += rho;
  v.cost += -rho * target;
  prob.AddOffset(0.5 * rho * target * target);
  if (!abs_form) {
    v.cost += lambda;
    prob.AddOffset(-lambda * target);
    return;
  }
  if (lambda < 0.0) {
    throw InvalidArgument("absolute dual term needs nonnegative multipliers (" +
                          name + ")");
  }
  if (lambda == 0.0) return;
  const int e = prob.AddVariable("abs_" + name, 0.0, kInf, false, lambda);
  prob.AddRow("absp_" + name, {{e, 1.0}, {var, -1.0}}, Sense::kGreaterEqual,
              -target);
  prob.AddRow("absn_" + name, {{e, 1.0}, {var, 1.0}}, Sense::kGreaterEqual,
              target);
}

}  // namespace

const char* ToString(Phase phase) {
  return phase == Phase::kRelaxed ? "relaxed" : "binary";
}

RegionalProblem BuildSubproblem(const PowerCase& c, const RegionPartition& p,
                                int region, const ConsensusState& consensus,
                                Phase phase, const ModelConfig& config) {
  if (region < 0 || region >= p.num_regions()) {
    throw InvalidArgument("unknown region " + std::to_string(region));
  }
  const Region& reg = p.regions[region];
  const int hours = c.horizon_hours;
  const std::vector<int> shared = reg.SharedBuses();
  if (consensus.buses() != shared || consensus.hours() != hours ||
      consensus.tie_lines().size() != reg.tie_lines.size()) {
    throw InvalidArgument("consensus state does not match region " +
                          std::to_string(region));
  }
  for (size_t k = 0; k < reg.tie_lines.size(); ++k) {
    if (consensus.tie_lines()[k].line != reg.tie_lines[k].line) {
      throw InvalidArgument("consensus state is missing tie line " +
                            std::to_string(reg.tie_lines[k].line));
    }
  }
  if (!config.slack_enabled && reg.generators.empty() &&
      reg.tie_lines.empty()) {
    for (int b : reg.internal) {
      for (double d : c.demand[b]) {
        if (d > 0.0) {
          throw ValidationError("region " + std::to_string(reg.external_id) +
                                " has demand but no generation or slack");
        }
      }
    }
  }
  if (config.slack_enabled && !(config.slack_penalty >= 0.0)) {
    throw InvalidArgument("slack penalty must be nonnegative");
  }

  const MaintenanceWindows windows = MakeMaintenanceWindows(c);
  const bool binary = phase == Phase::kBinary;
  RegionalProblem rp;
  rp.region = region;
  rp.hours = hours;
  rp.phase = phase;
  rp.generators = reg.generators;
  rp.degraded = reg.degraded;
  rp.angle_buses = reg.ModeledBuses();
  rp.tie_lines = reg.tie_lines;
  rp.slack_buses = reg.internal;
  rp.slack_buses.insert(rp.slack_buses.end(), reg.boundary.begin(),
                        reg.boundary.end());
  MiqpProblem& prob = rp.problem;

  // Generator variables.
  for (int g : reg.generators) {
    const Generator& gen = c.generators[g];
    std::vector<int> xs, ys, ups, downs;
    for (int t = 0; t < hours; ++t) {
      xs.push_back(prob.AddVariable(Name("x", gen.id, t), 0.0, 1.0, binary,
                                    gen.commitment_cost));
      ys.push_back(prob.AddVariable(Name("y", gen.id, t), 0.0, gen.p_max,
                                    false, gen.dispatch_cost));
      ups.push_back(prob.AddVariable(Name("piU", gen.id, t), 0.0, 1.0));
      downs.push_back(prob.AddVariable(Name("piD", gen.id, t), 0.0, 1.0));
    }
    rp.x.push_back(xs);
    rp.y.push_back(ys);
    rp.pi_up.push_back(ups);
    rp.pi_down.push_back(downs);
  }
  for (int g : reg.degraded) {
    const MaintenanceSpec* spec = c.MaintenanceFor(g);
    std::vector<int> zs;
    for (int m = 0; m < windows.count(); ++m) {
      const double ub = spec->Admissible(m) ? 1.0 : 0.0;
      zs.push_back(prob.AddVariable(Name("z", c.generators[g].id, m), 0.0, ub,
                                    binary, spec->window_costs[m]));
    }
    rp.z.push_back(zs);
  }
  const bool owns_reference = reg.Owns(c.reference_bus);
  for (int b : rp.angle_buses) {
    std::vector<int> th;
    const bool fixed = owns_reference && b == c.reference_bus;
    for (int t = 0; t < hours; ++t) {
      th.push_back(prob.AddVariable(Name("theta", c.buses[b], t),
                                    fixed ? 0.0 : -kInf, fixed ? 0.0 : kInf));
    }
    rp.theta.push_back(th);
  }
  for (const TieLine& tie : reg.tie_lines) {
    std::vector<int> fs;
    for (int t = 0; t < hours; ++t) {
      fs.push_back(prob.AddVariable(Name("f", "l" + std::to_string(tie.line), t),
                                    -kInf, kInf));
    }
    rp.flow.push_back(fs);
  }
  if (config.slack_enabled) {
    for (int b : rp.slack_buses) {
      std::vector<int> ps;
      for (int t = 0; t < hours; ++t) {
        ps.push_back(prob.AddVariable(Name("psi", c.buses[b], t), 0.0, kInf,
                                      false, config.slack_penalty));
      }
      rp.slack.push_back(ps);
    }
  }
  auto theta_var = [&](int bus, int t) {
    return rp.theta[Slot(rp.angle_buses, bus)][t];
  };

  // Generator constraints.
  for (size_t gi = 0; gi < reg.generators.size(); ++gi) {
    const Generator& gen = c.generators[reg.generators[gi]];
    const std::string& id = gen.id;
    const double x0 = gen.initial_on ? 1.0 : 0.0;
    for (int t = 0; t < hours; ++t) {
      const int x = rp.x[gi][t];
      const int y = rp.y[gi][t];
      prob.AddRow(Name("pmin", id, t), {{y, 1.0}, {x, -gen.p_min}},
                  Sense::kGreaterEqual, 0.0);
      prob.AddRow(Name("pmax", id, t), {{y, 1.0}, {x, -gen.p_max}},
                  Sense::kLessEqual, 0.0);
      // x_t - x_{t-1} <= piU_t and x_t - x_{t-1} >= -piD_t.
      std::vector<Term> up = {{x, 1.0}, {rp.pi_up[gi][t], -1.0}};
      std::vector<Term> down = {{x, 1.0}, {rp.pi_down[gi][t], 1.0}};
      double rhs_up = 0.0;
      double rhs_down = 0.0;
      if (t > 0) {
        up.push_back({rp.x[gi][t - 1], -1.0});
        down.push_back({rp.x[gi][t - 1], -1.0});
      } else {
        rhs_up = x0;
        rhs_down = x0;
      }
      prob.AddRow(Name("startup", id, t), up, Sense::kLessEqual, rhs_up);
      prob.AddRow(Name("shutdown", id, t), down, Sense::kGreaterEqual,
                  rhs_down);
      // |y_t - y_{t-1}| <= R.
      std::vector<Term> ramp = {{y, 1.0}};
      double prev = 0.0;
      if (t > 0) {
        ramp.push_back({rp.y[gi][t - 1], -1.0});
      } else {
        prev = gen.initial_output;
      }
      prob.AddRow(Name("rampup", id, t), ramp, Sense::kLessEqual,
                  gen.ramp + prev);
      prob.AddRow(Name("rampdown", id, t), ramp, Sense::kGreaterEqual,
                  -gen.ramp + prev);
      // sum_{i in U_t} piU_i <= x_t <= 1 - sum_{i in D_t} piD_i.
      std::vector<Term> minup = {{x, -1.0}};
      for (int i = std::max(0, t - gen.min_up + 1); i <= t; ++i) {
        minup.push_back({rp.pi_up[gi][i], 1.0});
      }
      prob.AddRow(Name("minup", id, t), minup, Sense::kLessEqual, 0.0);
      std::vector<Term> mindown = {{x, 1.0}};
      for (int i = std::max(0, t - gen.min_down + 1); i <= t; ++i) {
        mindown.push_back({rp.pi_down[gi][i], 1.0});
      }
      prob.AddRow(Name("mindown", id, t), mindown, Sense::kLessEqual, 1.0);
    }
  }
  // Maintenance: no commitment inside the chosen window, exactly one window.
  for (size_t di = 0; di < reg.degraded.size(); ++di) {
    const int g = reg.degraded[di];
    const int gi = Slot(reg.generators, g);
    const std::string& id = c.generators[g].id;
    for (int t = 0; t < hours; ++t) {
      const int m = windows.window_of_hour[t];
      prob.AddRow(Name("maint", id, t),
                  {{rp.x[gi][t], 1.0}, {rp.z[di][m], 1.0}}, Sense::kLessEqual,
                  1.0);
    }
    std::vector<Term> one;
    for (int zv : rp.z[di]) one.push_back({zv, 1.0});
    prob.AddRow("onewindow(" + id + ")", one, Sense::kEqual, 1.0);
  }
  // Tie-line flow definition, stored orientation.
  for (size_t k = 0; k < reg.tie_lines.size(); ++k) {
    const Line& line = c.lines[reg.tie_lines[k].line];
    for (int t = 0; t < hours; ++t) {
      prob.AddRow(Name("flowdef", "l" + std::to_string(reg.tie_lines[k].line),
                       t),
                  {{theta_var(line.from, t), line.gamma},
                   {theta_var(line.to, t), -line.gamma},
                   {rp.flow[k][t], -1.0}},
                  Sense::kEqual, 0.0);
    }
  }
  // Capacity of every internal and tie line.
  std::vector<int> cap_lines = reg.internal_lines;
  for (const TieLine& tie : reg.tie_lines) cap_lines.push_back(tie.line);
  for (int li : cap_lines) {
    const Line& line = c.lines[li];
    const double limit = line.capacity_mw / c.base_mva;
    for (int t = 0; t < hours; ++t) {
      const std::vector<Term> terms = {{theta_var(line.from, t), line.gamma},
                                       {theta_var(line.to, t), -line.gamma}};
      const std::string tag = "l" + std::to_string(li);
      prob.AddRow(Name("capmax", tag, t), terms, Sense::kLessEqual, limit);
      prob.AddRow(Name("capmin", tag, t), terms, Sense::kGreaterEqual, -limit);
    }
  }
  // Nodal balance at every owned bus:
  // sum y + psi - base * sum gamma (theta_b - theta_o) = demand.
  std::vector<std::vector<int>> incident(c.num_buses());
  for (int li = 0; li < static_cast<int>(c.lines.size()); ++li) {
    incident[c.lines[li].from].push_back(li);
    incident[c.lines[li].to].push_back(li);
  }
  for (size_t s = 0; s < rp.slack_buses.size(); ++s) {
    const int b = rp.slack_buses[s];
    for (int t = 0; t < hours; ++t) {
      std::vector<Term> terms;
      for (size_t gi = 0; gi < reg.generators.size(); ++gi) {
        if (c.generators[reg.generators[gi]].bus == b) {
          terms.push_back({rp.y[gi][t], 1.0});
        }
      }
      if (config.slack_enabled) terms.push_back({rp.slack[s][t], 1.0});
      double self = 0.0;
      for (int li : incident[b]) {
        const Line& line = c.lines[li];
        const int other = line.from == b ? line.to : line.from;
        const double coef = c.base_mva * line.gamma;
        self += coef;
        terms.push_back({theta_var(other, t), coef});
      }
      terms.push_back({theta_var(b, t), -self});
      prob.AddRow(Name("balance", c.buses[b], t), terms, Sense::kEqual,
                  c.demand[b][t]);
    }
  }
  // Consensus penalties on shared angles and tie-line flows.
  for (size_t s = 0; s < shared.size(); ++s) {
    for (int t = 0; t < hours; ++t) {
      const size_t i = s * hours + t;
      AddPenalty(prob, theta_var(shared[s], t), consensus.lambda()[i],
                 consensus.rho_theta(), consensus.theta_bar()[i],
                 config.abs_dual_term, Name("theta", c.buses[shared[s]], t));
    }
  }
  for (size_t k = 0; k < reg.tie_lines.size(); ++k) {
    for (int t = 0; t < hours; ++t) {
      const size_t i = k * hours + t;
      AddPenalty(prob, rp.flow[k][t], consensus.phi()[i], consensus.rho_f(),
                 consensus.flow_bar()[i], config.abs_dual_term,
                 Name("f", "l" + std::to_string(reg.tie_lines[k].line), t));
    }
  }
  prob.Validate();
  return rp;
}

RegionalVariables ExtractSolution(const RegionalProblem& rp,
                                  const MiqpSolution& raw) {
  if (!raw.has_solution() ||
      static_cast<int>(raw.values.size()) != rp.problem.num_variables()) {
    throw SolverError("region " + std::to_string(rp.region) +
                      ": solver returned no solution (" +
                      ToString(raw.status) + ")");
  }
  const std::vector<double>& val = raw.values;
  const bool binary = rp.phase == Phase::kBinary;
  auto read = [&](const std::vector<std::vector<int>>& idx, bool integral) {
    std::vector<std::vector<double>> out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
      for (int var : idx[i]) {
        double v = val[var];
        if (integral && binary) {
          const double r = std::round(v);
          if (std::abs(v - r) > 1e-6) {
            throw SolverError("integrality violated for " +
                              rp.problem.variables()[var].name);
          }
          v = r;
        }
        out[i].push_back(v);
      }
    }
    return out;
  };
  RegionalVariables v;
  v.region = rp.region;
  v.hours = rp.hours;
  v.phase = rp.phase;
  v.generators = rp.generators;
  v.degraded = rp.degraded;
  v.angle_buses = rp.angle_buses;
  v.tie_lines = rp.tie_lines;
  v.slack_buses = rp.slack_buses;
  v.x = read(rp.x, true);
  v.y = read(rp.y, false);
  v.pi_up = read(rp.pi_up, false);
  v.pi_down = read(rp.pi_down, false);
  v.z = read(rp.z, true);
  v.theta = read(rp.theta, false);
  v.flow = read(rp.flow, false);
  v.slack = read(rp.slack, false);
  if (v.slack.empty()) {
    v.slack.assign(rp.slack_buses.size(), std::vector<double>(rp.hours, 0.0));
  }
  v.objective = rp.problem.Objective(val);
  return v;
}

std::vector<double> RegionalVariables::Angles(
    const std::vector<int>& buses) const {
  std::vector<double> out;
  out.reserve(buses.size() * hours);
  for (int b : buses) {
    const int s = Slot(angle_buses, b);
    if (s < 0) throw InvalidArgument("bus has no angle in this region");
    out.insert(out.end(), theta[s].begin(), theta[s].end());
  }
  return out;
}

std::vector<double> RegionalVariables::Flows() const {
  std::vector<double> out;
  out.reserve(flow.size() * hours);
  for (const auto& row : flow) out.insert(out.end(), row.begin(), row.end());
  return out;
}

double RegionalVariables::Theta(int bus, int hour) const {
  const int s = Slot(angle_buses, bus);
  if (s < 0) throw InvalidArgument("bus has no angle in this region");
  return theta[s].at(hour);
}

double LocalCost(const PowerCase& c, const RegionalVariables& v) {
  double cost = 0.0;
  for (size_t gi = 0; gi < v.generators.size(); ++gi) {
    const Generator& gen = c.generators[v.generators[gi]];
    for (int t = 0; t < v.hours; ++t) {
      cost += gen.dispatch_cost * v.y[gi][t] + gen.commitment_cost * v.x[gi][t];
    }
  }
  for (size_t di = 0; di < v.degraded.size(); ++di) {
    const MaintenanceSpec* spec = c.MaintenanceFor(v.degraded[di]);
    for (size_t m = 0; m < v.z[di].size(); ++m) {
      cost += spec->window_costs[m] * v.z[di][m];
    }
  }
  return cost;
}

WarmStart RoundedWarmStart(const RegionalProblem& rp,
                           const RegionalVariables& v) {
  WarmStart w;
  w.values.assign(rp.problem.num_variables(), 0.0);
  auto put = [&](const std::vector<std::vector<int>>& idx,
                 const std::vector<std::vector<double>>& vals, bool round) {
    for (size_t i = 0; i < idx.size() && i < vals.size(); ++i) {
      for (size_t j = 0; j < idx[i].size() && j < vals[i].size(); ++j) {
        w.values[idx[i][j]] = round ? std::round(vals[i][j]) : vals[i][j];
      }
    }
  };
  put(rp.x, v.x, false);
  // Commit every unit the source schedule uses at all.
  for (const auto& row : rp.x) {
    for (int var : row) w.values[var] = w.values[var] > 1e-6 ? 1.0 : 0.0;
  }
  put(rp.y, v.y, false);
  put(rp.z, v.z, true);
  // Exactly one maintenance window per degraded generator: keep the largest.
  for (size_t di = 0; di < rp.z.size() && di < v.z.size(); ++di) {
    const auto& zv = v.z[di];
    const size_t best = std::max_element(zv.begin(), zv.end()) - zv.begin();
    for (size_t m = 0; m < rp.z[di].size(); ++m) {
      w.values[rp.z[di][m]] = m == best ? 1.0 : 0.0;
    }
  }
  return w;
}

}  // namespace dpmaint
