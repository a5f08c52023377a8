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
#include <cctype>
#include <cmath>
#include <iomanip>

#include "dpmaint/error.h"
#include "dpmaint/miqp.h"

namespace dpmaint {

int MiqpProblem::AddVariable(Variable v) {
  variables_.push_back(std::move(v));
  return num_variables() - 1;
}

int MiqpProblem::AddVariable(std::string name, double lower, double upper,
                             bool integer, double cost, double quad) {
  return AddVariable(
      Variable{std::move(name), lower, upper, integer, cost, quad});
}

int MiqpProblem::AddRow(Row r) {
  rows_.push_back(std::move(r));
  return num_rows() - 1;
}

int MiqpProblem::AddRow(std::string name, std::vector<Term> terms, Sense sense,
                        double rhs) {
  return AddRow(Row{std::move(name), std::move(terms), sense, rhs});
}

int MiqpProblem::num_integer() const {
  return static_cast<int>(std::count_if(
      variables_.begin(), variables_.end(),
      [](const Variable& v) { return v.integer; }));
}

double MiqpProblem::Objective(std::span<const double> x) const {
  double obj = offset_;
  for (int i = 0; i < num_variables(); ++i) {
    obj += variables_[i].cost * x[i] + 0.5 * variables_[i].quad * x[i] * x[i];
  }
  return obj;
}

double MiqpProblem::MaxViolation(std::span<const double> x) const {
  double worst = 0.0;
  for (int i = 0; i < num_variables(); ++i) {
    worst = std::max(worst, variables_[i].lower - x[i]);
    worst = std::max(worst, x[i] - variables_[i].upper);
  }
  for (const Row& r : rows_) {
    double lhs = 0.0;
    for (const Term& t : r.terms) lhs += t.coef * x[t.var];
    switch (r.sense) {
      case Sense::kLessEqual:
        worst = std::max(worst, lhs - r.rhs);
        break;
      case Sense::kGreaterEqual:
        worst = std::max(worst, r.rhs - lhs);
        break;
      case Sense::kEqual:
        worst = std::max(worst, std::abs(lhs - r.rhs));
        break;
    }
  }
  return worst;
}

double MiqpProblem::MaxFractionality(std::span<const double> x) const {
  double worst = 0.0;
  for (int i = 0; i < num_variables(); ++i) {
    if (variables_[i].integer) {
      worst = std::max(worst, std::abs(x[i] - std::round(x[i])));
    }
  }
  return worst;
}

void MiqpProblem::Validate() const {
  for (const Variable& v : variables_) {
    if (!(v.quad >= 0.0)) {
      throw InvalidArgument("variable " + v.name +
                            ": negative quadratic coefficient");
    }
    if (v.integer && (!std::isfinite(v.lower) || !std::isfinite(v.upper))) {
      throw InvalidArgument("integer variable " + v.name +
                            " needs finite bounds");
    }
    if (std::isnan(v.cost) || std::isnan(v.lower) || std::isnan(v.upper)) {
      throw InvalidArgument("variable " + v.name + ": NaN data");
    }
  }
  for (const Row& r : rows_) {
    for (const Term& t : r.terms) {
      if (t.var < 0 || t.var >= num_variables()) {
        throw InvalidArgument("row " + r.name + ": unknown variable");
      }
      if (!std::isfinite(t.coef)) {
        throw InvalidArgument("row " + r.name + ": non-finite coefficient");
      }
    }
    if (!std::isfinite(r.rhs)) {
      throw InvalidArgument("row " + r.name + ": non-finite rhs");
    }
  }
}

MiqpProblem MiqpProblem::Relaxed() const {
  MiqpProblem out = *this;
  for (Variable& v : out.variables_) v.integer = false;
  return out;
}

const char* ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kNodeLimit:
      return "node-limit";
    case SolveStatus::kTimeLimit:
      return "time-limit";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kNumericalError:
      return "numerical-error";
  }
  return "unknown";
}

namespace {

std::string LpName(const std::string& raw, char prefix, int index) {
  std::string out;
  for (char ch : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
                    ch == '.' || ch == '(' || ch == ')';
    out.push_back(ok ? ch : '_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) ||
      out[0] == '.') {
    out = std::string(1, prefix) + std::to_string(index) + "_" + out;
  }
  return out;
}

void WriteCoef(std::ostream& out, double coef, bool first) {
  if (coef < 0) {
    out << (first ? "-" : "- ") << -coef;
  } else {
    out << (first ? "" : "+ ") << coef;
  }
}

}  // namespace

void WriteLp(const MiqpProblem& problem, std::ostream& out) {
  const auto& vars = problem.variables();
  std::vector<std::string> names(vars.size());
  for (size_t i = 0; i < vars.size(); ++i) {
    names[i] = LpName(vars[i].name, 'x', static_cast<int>(i));
  }
  out << std::setprecision(17);
  out << "\\ dpmaint MIQP: " << vars.size() << " variables, "
      << problem.num_rows() << " rows\n";
  out << "\\ objective offset: " << problem.offset() << "\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].cost == 0.0) continue;
    out << ' ';
    WriteCoef(out, vars[i].cost, first);
    out << ' ' << names[i];
    first = false;
  }
  bool any_quad = false;
  for (size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].quad == 0.0) continue;
    if (!any_quad) {
      out << (first ? " [ " : " + [ ");
      any_quad = true;
    } else {
      out << " + ";
    }
    out << vars[i].quad << ' ' << names[i] << " ^2";
  }
  if (any_quad) out << " ] / 2";
  if (first && !any_quad) out << " 0 " << (names.empty() ? "x0" : names[0]);
  out << "\nSubject To\n";
  for (int r = 0; r < problem.num_rows(); ++r) {
    const Row& row = problem.rows()[r];
    out << ' ' << LpName(row.name, 'r', r) << ':';
    bool f = true;
    for (const Term& t : row.terms) {
      out << ' ';
      WriteCoef(out, t.coef, f);
      out << ' ' << names[t.var];
      f = false;
    }
    if (f) out << " 0 " << (names.empty() ? "x0" : names[0]);
    switch (row.sense) {
      case Sense::kLessEqual:
        out << " <= ";
        break;
      case Sense::kEqual:
        out << " = ";
        break;
      case Sense::kGreaterEqual:
        out << " >= ";
        break;
    }
    out << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (size_t i = 0; i < vars.size(); ++i) {
    const Variable& v = vars[i];
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << names[i] << " free\n";
      continue;
    }
    out << ' ';
    if (std::isinf(v.lower)) {
      out << "-inf";
    } else {
      out << v.lower;
    }
    out << " <= " << names[i] << " <= ";
    if (std::isinf(v.upper)) {
      out << "+inf";
    } else {
      out << v.upper;
    }
    out << '\n';
  }
  bool header = false;
  for (size_t i = 0; i < vars.size(); ++i) {
    if (!vars[i].integer) continue;
    if (!header) {
      out << "General\n";
      header = true;
    }
    out << ' ' << names[i] << '\n';
  }
  out << "End\n";
}

}  // namespace dpmaint
