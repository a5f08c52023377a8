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

// Mixed-integer problems with a separable convex quadratic objective
//
//   minimize    offset + sum_i cost_i x_i + 1/2 sum_i quad_i x_i^2
//   subject to  rows (<=, =, >=), lower_i <= x_i <= upper_i,
//               x_i integer for integer-marked variables,
//
// and the bundled solvers for them: an interior-point method for the
// continuous relaxation and best-bound branch-and-bound on top of it.

#ifndef DPMAINT_MIQP_H_
#define DPMAINT_MIQP_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dpmaint {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  bool integer = false;
  double cost = 0.0;
  double quad = 0.0;  // diagonal Hessian entry, >= 0
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

class MiqpProblem {
 public:
  int AddVariable(Variable v);
  int AddVariable(std::string name, double lower, double upper,
                  bool integer = false, double cost = 0.0, double quad = 0.0);
  int AddRow(Row r);
  int AddRow(std::string name, std::vector<Term> terms, Sense sense,
             double rhs);

  std::vector<Variable>& variables() { return variables_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::vector<Row>& rows() { return rows_; }
  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_integer() const;

  double offset() const { return offset_; }
  void set_offset(double o) { offset_ = o; }
  void AddOffset(double o) { offset_ += o; }

  double Objective(std::span<const double> x) const;
  // Largest bound or row violation of x (integrality is not considered).
  double MaxViolation(std::span<const double> x) const;
  // Largest distance of an integer-marked entry from the nearest integer.
  double MaxFractionality(std::span<const double> x) const;

  // Throws Error(kInvalidArgument) for negative quadratic terms, integer
  // variables with infinite bounds, or out-of-range variable references.
  void Validate() const;

  // Copy with every integer mark removed.
  MiqpProblem Relaxed() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Row> rows_;
  double offset_ = 0.0;
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kNodeLimit,
  kTimeLimit,
  kUnbounded,
  kNumericalError,
};

const char* ToString(SolveStatus s);

struct MiqpSolution {
  SolveStatus status = SolveStatus::kNumericalError;
  std::vector<double> values;
  double objective = kInf;
  // Best lower bound; equals objective for a continuous optimum.
  double bound = -kInf;
  double gap = kInf;  // objective - bound (absolute)
  int64_t nodes = 0;
  int iterations = 0;
  // Objective of the root relaxation (branch-and-bound only).
  double root_bound = -kInf;
  // Largest KKT residual (primal, dual, complementarity) of the last QP.
  double kkt_residual = kInf;
  // A warm start was given and its rounded assignment was feasible.
  bool warm_start_feasible = false;

  bool has_solution() const { return !values.empty(); }
};

struct QpOptions {
  int max_iterations = 200;
  double feasibility_tolerance = 1e-9;
  double gap_tolerance = 1e-9;
  double infeasibility_tolerance = 1e-8;
  double static_regularization = 1e-9;
  int refinement_steps = 3;
};

// Solves the continuous relaxation. The solver instance caches scaling and
// the symbolic factorization, so repeated solves with different variable
// bounds (branch-and-bound nodes) are cheap. Bounds passed to Solve() must
// keep finite/infinite the same as in the problem.
class QpSolver {
 public:
  explicit QpSolver(const MiqpProblem& problem, QpOptions options = {});
  ~QpSolver();
  QpSolver(const QpSolver&) = delete;
  QpSolver& operator=(const QpSolver&) = delete;

  MiqpSolution Solve();
  MiqpSolution Solve(std::span<const double> lower,
                     std::span<const double> upper);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot helper; integrality marks are ignored.
MiqpSolution SolveQp(const MiqpProblem& problem, QpOptions options = {});

struct MiqpLimits {
  int64_t node_limit = 1000000;
  double time_limit_seconds = kInf;
  // Prune when bound >= incumbent - max(absolute_gap,
  //                                     relative_gap * (1 + |incumbent|)).
  double absolute_gap = 0.0;
  double relative_gap = 1e-6;
  double integrality_tolerance = 1e-6;
  // Rounding dive at the root when the warm start gives no incumbent.
  bool root_dive = true;
  QpOptions qp;
};

// Optional starting point. Only the integer-marked entries are used: they
// are rounded, fixed, and the continuous part is re-solved.
struct WarmStart {
  std::vector<double> values;
};

// Most-fractional branching (ties to lowest variable index), best-bound node
// selection (ties to creation order). Deterministic when the time limit is
// not hit.
MiqpSolution SolveMiqp(const MiqpProblem& problem, const MiqpLimits& limits = {},
                       const WarmStart* warm_start = nullptr);

// Pluggable backend slot. The bundled backend wraps SolveQp/SolveMiqp.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual MiqpSolution Solve(const MiqpProblem& problem,
                             const MiqpLimits& limits,
                             const WarmStart* warm_start) = 0;
};

std::shared_ptr<SolverBackend> MakeBundledBackend();

using BackendFactory = std::function<std::shared_ptr<SolverBackend>()>;

// Process-wide registry. "bundled" is always present.
void RegisterBackend(const std::string& name, BackendFactory factory);
void UnregisterBackend(const std::string& name);
// Throws Error(kConfiguration) for an unknown name.
std::shared_ptr<SolverBackend> GetBackend(const std::string& name);
std::vector<std::string> BackendNames();

// LP-style text dump (CPLEX LP dialect, diagonal quadratic objective).
void WriteLp(const MiqpProblem& problem, std::ostream& out);

}  // namespace dpmaint

#endif  // DPMAINT_MIQP_H_
