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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "dpmaint/error.h"
#include "dpmaint/miqp.h"

namespace dpmaint {
namespace {

struct Node {
  double bound = -kInf;  // parent relaxation value
  int64_t seq = 0;
  int depth = 0;
  // Bounds of the integer variables, in the order of Search::ints.
  std::vector<double> lower;
  std::vector<double> upper;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

class Search {
 public:
  Search(const MiqpProblem& problem, const MiqpLimits& limits)
      : problem_(problem),
        limits_(limits),
        qp_(problem, limits.qp),
        start_(std::chrono::steady_clock::now()) {
    for (int i = 0; i < problem.num_variables(); ++i) {
      lower_.push_back(problem.variables()[i].lower);
      upper_.push_back(problem.variables()[i].upper);
      if (problem.variables()[i].integer) ints_.push_back(i);
    }
  }

  MiqpSolution Run(const WarmStart* warm);

 private:
  double Tolerance(double incumbent) const {
    return std::max(limits_.absolute_gap,
                    limits_.relative_gap * (1.0 + std::abs(incumbent)));
  }
  bool Prunable(double bound) const {
    return has_incumbent_ && bound >= incumbent_obj_ - Tolerance(incumbent_obj_);
  }
  bool TimeUp() const {
    const std::chrono::duration<double> el =
        std::chrono::steady_clock::now() - start_;
    return el.count() > limits_.time_limit_seconds;
  }
  MiqpSolution SolveWith(const std::vector<double>& il,
                         const std::vector<double>& iu) {
    std::vector<double> lo = lower_;
    std::vector<double> hi = upper_;
    for (size_t k = 0; k < ints_.size(); ++k) {
      lo[ints_[k]] = il[k];
      hi[ints_[k]] = iu[k];
    }
    ++qp_solves_;
    return qp_.Solve(lo, hi);
  }
  // Index into ints_ of the most fractional variable, or -1 if integral.
  int MostFractional(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = limits_.integrality_tolerance;
    for (size_t k = 0; k < ints_.size(); ++k) {
      const double v = x[ints_[k]];
      const double frac = std::abs(v - std::round(v));
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        best = static_cast<int>(k);
      }
    }
    return best;
  }
  // Fixes every integer variable to the rounded value and re-solves the
  // continuous part. Updates the incumbent on improvement.
  bool TryAssignment(const std::vector<double>& x) {
    std::vector<double> il(ints_.size()), iu(ints_.size());
    for (size_t k = 0; k < ints_.size(); ++k) {
      const int j = ints_[k];
      const double v = std::clamp(std::round(x[j]), lower_[j], upper_[j]);
      il[k] = iu[k] = v;
    }
    MiqpSolution s = SolveWith(il, iu);
    if (s.status != SolveStatus::kOptimal) return false;
    for (size_t k = 0; k < ints_.size(); ++k) s.values[ints_[k]] = il[k];
    if (!has_incumbent_ || s.objective < incumbent_obj_) {
      has_incumbent_ = true;
      incumbent_obj_ = s.objective;
      incumbent_ = std::move(s.values);
    }
    return true;
  }
  void Dive(const MiqpSolution& root);

  const MiqpProblem& problem_;
  MiqpLimits limits_;
  QpSolver qp_;
  std::chrono::steady_clock::time_point start_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> ints_;
  bool has_incumbent_ = false;
  double incumbent_obj_ = kInf;
  std::vector<double> incumbent_;
  int64_t qp_solves_ = 0;
};

// Fractional diving: fix the most fractional variable to whichever rounding
// gives the smaller relaxation value, re-solve, repeat. Both children are
// solved because committing to the nearest rounding walks into schedules
// that can only be completed by shedding load.
void Search::Dive(const MiqpSolution& root) {
  std::vector<double> il(ints_.size()), iu(ints_.size());
  for (size_t k = 0; k < ints_.size(); ++k) {
    il[k] = lower_[ints_[k]];
    iu[k] = upper_[ints_[k]];
  }
  std::vector<double> x = root.values;
  for (size_t step = 0; step <= ints_.size(); ++step) {
    int pick = -1;
    double pick_frac = kInf;
    for (size_t k = 0; k < ints_.size(); ++k) {
      if (il[k] == iu[k]) continue;
      const double v = x[ints_[k]];
      const double frac = std::abs(v - std::round(v));
      if (frac <= limits_.integrality_tolerance) continue;
      if (-frac < pick_frac) {
        pick_frac = -frac;
        pick = static_cast<int>(k);
      }
    }
    if (pick < 0) {
      TryAssignment(x);
      return;
    }
    const double v = x[ints_[pick]];
    const double near = std::round(v);
    const double far = near > v ? std::floor(v) : std::ceil(v);
    il[pick] = iu[pick] = near;
    MiqpSolution a = SolveWith(il, iu);
    il[pick] = iu[pick] = far;
    MiqpSolution b = SolveWith(il, iu);
    const bool a_ok = a.status == SolveStatus::kOptimal;
    const bool b_ok = b.status == SolveStatus::kOptimal;
    if (!a_ok && !b_ok) return;
    const bool take_a = a_ok && (!b_ok || a.objective <= b.objective);
    il[pick] = iu[pick] = take_a ? near : far;
    MiqpSolution& s = take_a ? a : b;
    if (Prunable(s.objective)) return;
    x = std::move(s.values);
  }
}

MiqpSolution Search::Run(const WarmStart* warm) {
  MiqpSolution out;
  std::vector<double> il(ints_.size()), iu(ints_.size());
  for (size_t k = 0; k < ints_.size(); ++k) {
    il[k] = lower_[ints_[k]];
    iu[k] = upper_[ints_[k]];
  }
  MiqpSolution root = SolveWith(il, iu);
  if (root.status == SolveStatus::kInfeasible ||
      root.status == SolveStatus::kUnbounded ||
      root.status == SolveStatus::kNumericalError) {
    root.nodes = 1;
    root.values.clear();
    return root;
  }
  out.root_bound = root.objective;

  if (warm != nullptr &&
      static_cast<int>(warm->values.size()) == problem_.num_variables()) {
    out.warm_start_feasible = TryAssignment(warm->values);
  }
  if (limits_.root_dive && incumbent_.empty() &&
      MostFractional(root.values) >= 0) {
    Dive(root);
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  int64_t seq = 0;
  int64_t nodes = 0;
  SolveStatus stop = SolveStatus::kOptimal;

  // The root relaxation is already solved; expand it in place.
  auto expand = [&](const Node& node, const MiqpSolution& sol) {
    if (Prunable(sol.objective)) return;
    const int k = MostFractional(sol.values);
    if (k < 0) {
      TryAssignment(sol.values);
      return;
    }
    const double v = sol.values[ints_[k]];
    Node down = node;
    down.bound = sol.objective;
    down.depth = node.depth + 1;
    down.upper[k] = std::floor(v);
    down.seq = seq++;
    Node up = node;
    up.bound = sol.objective;
    up.depth = node.depth + 1;
    up.lower[k] = std::ceil(v);
    up.seq = seq++;
    open.push(std::move(down));
    open.push(std::move(up));
  };

  Node root_node;
  root_node.lower = il;
  root_node.upper = iu;
  root_node.bound = root.objective;
  ++nodes;
  expand(root_node, root);

  while (!open.empty()) {
    if (Prunable(open.top().bound)) {
      // Best-bound order: every remaining node is prunable too.
      while (!open.empty()) open.pop();
      break;
    }
    if (nodes >= limits_.node_limit) {
      stop = SolveStatus::kNodeLimit;
      break;
    }
    if (TimeUp()) {
      stop = SolveStatus::kTimeLimit;
      break;
    }
    Node node = open.top();
    open.pop();
    ++nodes;
    MiqpSolution sol = SolveWith(node.lower, node.upper);
    if (sol.status == SolveStatus::kInfeasible) continue;
    if (sol.status != SolveStatus::kOptimal) {
      // Unsolvable node: keep its parent bound as a valid bound and move on.
      out.kkt_residual = sol.kkt_residual;
      continue;
    }
    expand(node, sol);
  }

  out.nodes = nodes;
  out.iterations = static_cast<int>(qp_solves_);
  double best_open = kInf;
  if (!open.empty()) best_open = open.top().bound;
  if (has_incumbent_) {
    out.values = incumbent_;
    out.objective = incumbent_obj_;
    out.bound = std::min(best_open, incumbent_obj_);
    out.bound = std::max(out.bound, out.root_bound);
    out.bound = std::min(out.bound, incumbent_obj_);
    out.gap = out.objective - out.bound;
    out.status = stop;
    out.kkt_residual = problem_.MaxViolation(incumbent_);
  } else {
    out.status = stop == SolveStatus::kOptimal ? SolveStatus::kInfeasible : stop;
    out.bound = std::max(best_open, out.root_bound);
  }
  return out;
}

}  // namespace

MiqpSolution SolveMiqp(const MiqpProblem& problem, const MiqpLimits& limits,
                       const WarmStart* warm_start) {
  problem.Validate();
  if (problem.num_integer() == 0) return SolveQp(problem, limits.qp);
  Search search(problem, limits);
  return search.Run(warm_start);
}

}  // namespace dpmaint
