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

// Random small MIQPs with a closed-form enumeration oracle.
//
// Every row touches at most one continuous variable, so once the binaries
// are fixed each continuous variable sees only interval constraints and its
// separable quadratic is minimized by clamping. Enumerating all binary
// assignments then gives the exact optimum without any QP solver.

#ifndef DPMAINT_TESTS_MIQP_ORACLE_H_
#define DPMAINT_TESTS_MIQP_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dpmaint/miqp.h"

namespace dpmaint::testing {

struct OracleResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
};

// Minimizes c*y + q/2*y^2 over [lo, hi] (finite).
inline double ClampedMin(double c, double q, double lo, double hi,
                         double* y_out) {
  double y;
  if (q > 0) {
    y = std::clamp(-c / q, lo, hi);
  } else {
    y = c >= 0 ? lo : hi;
  }
  *y_out = y;
  return c * y + 0.5 * q * y * y;
}

inline OracleResult EnumerateOptimum(const MiqpProblem& p) {
  const auto& vars = p.variables();
  std::vector<int> ints, conts;
  for (int i = 0; i < p.num_variables(); ++i) {
    (vars[i].integer ? ints : conts).push_back(i);
  }
  OracleResult best;
  const uint64_t combos = uint64_t{1} << ints.size();
  std::vector<double> x(vars.size(), 0.0);
  for (uint64_t mask = 0; mask < combos; ++mask) {
    for (size_t k = 0; k < ints.size(); ++k) {
      x[ints[k]] = (mask >> k) & 1 ? vars[ints[k]].upper : vars[ints[k]].lower;
    }
    std::vector<double> lo(vars.size()), hi(vars.size());
    for (int j : conts) {
      lo[j] = vars[j].lower;
      hi[j] = vars[j].upper;
    }
    bool ok = true;
    for (const Row& r : p.rows()) {
      double fixed = 0.0;
      int cont = -1;
      double a = 0.0;
      for (const Term& t : r.terms) {
        if (vars[t.var].integer) {
          fixed += t.coef * x[t.var];
        } else {
          cont = t.var;
          a += t.coef;
        }
      }
      const double rest = r.rhs - fixed;
      if (cont < 0 || a == 0.0) {
        const bool sat = r.sense == Sense::kLessEqual ? 0.0 <= rest + 1e-12
                         : r.sense == Sense::kGreaterEqual
                             ? 0.0 >= rest - 1e-12
                             : std::abs(rest) <= 1e-12;
        if (!sat) ok = false;
        continue;
      }
      // a*y (sense) rest
      const double bound = rest / a;
      Sense s = r.sense;
      if (a < 0 && s != Sense::kEqual) {
        s = s == Sense::kLessEqual ? Sense::kGreaterEqual : Sense::kLessEqual;
      }
      if (s == Sense::kLessEqual || s == Sense::kEqual) {
        hi[cont] = std::min(hi[cont], bound);
      }
      if (s == Sense::kGreaterEqual || s == Sense::kEqual) {
        lo[cont] = std::max(lo[cont], bound);
      }
    }
    if (!ok) continue;
    double obj = p.offset();
    for (int i : ints) {
      obj += vars[i].cost * x[i] + 0.5 * vars[i].quad * x[i] * x[i];
    }
    for (int j : conts) {
      if (lo[j] > hi[j] + 1e-12) {
        ok = false;
        break;
      }
      double y;
      obj += ClampedMin(vars[j].cost, vars[j].quad, lo[j],
                        std::max(lo[j], hi[j]), &y);
    }
    if (!ok) continue;
    if (obj < best.objective) {
      best.objective = obj;
      best.feasible = true;
    }
  }
  return best;
}

// Binaries b_i, continuous y_j in [0, U_j]. Rows: y_j linked to one binary
// (on/off, min output when on), cardinality limits over the binaries, and
// per-variable demand-style lower bounds that may need some binary on.
inline MiqpProblem RandomMiqp(std::mt19937_64& rng, int max_binaries = 12,
                              int max_continuous = 30) {
  std::uniform_int_distribution<int> nb(2, max_binaries);
  std::uniform_int_distribution<int> nc(1, max_continuous);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  MiqpProblem p;
  const int b = nb(rng), c = nc(rng);
  for (int i = 0; i < b; ++i) {
    p.AddVariable("b" + std::to_string(i), 0, 1, true,
                  std::round(20 * u01(rng) - 5), u01(rng) < 0.3 ? 1.0 : 0.0);
  }
  for (int j = 0; j < c; ++j) {
    p.AddVariable("y" + std::to_string(j), 0, 1 + 9 * u01(rng), false,
                  10 * u01(rng) - 6, u01(rng) < 0.7 ? 2 * u01(rng) : 0.0);
  }
  for (int j = 0; j < c; ++j) {
    const int y = b + j;
    const int link = static_cast<int>(u01(rng) * b);
    const double ub = p.variables()[y].upper;
    // y <= ub * b_link
    p.AddRow("on" + std::to_string(j), {{y, 1.0}, {link, -ub}},
             Sense::kLessEqual, 0.0);
    if (u01(rng) < 0.4) {
      // y >= lo * b_link
      p.AddRow("min" + std::to_string(j), {{y, 1.0}, {link, -0.2 * ub}},
               Sense::kGreaterEqual, 0.0);
    }
    if (u01(rng) < 0.2) {
      p.AddRow("need" + std::to_string(j), {{y, 1.0}}, Sense::kGreaterEqual,
               0.1 * ub * u01(rng));
    }
  }
  std::vector<Term> card;
  for (int i = 0; i < b; ++i) card.push_back({i, 1.0});
  p.AddRow("card_max", card, Sense::kLessEqual,
           std::max(1, static_cast<int>(b * (0.3 + 0.6 * u01(rng)))));
  if (u01(rng) < 0.5) {
    p.AddRow("card_min", card, Sense::kGreaterEqual, 1);
  }
  if (b >= 2 && u01(rng) < 0.5) {
    // b0 + b1 = 1
    p.AddRow("choose", {{0, 1.0}, {1, 1.0}}, Sense::kEqual, 1.0);
  }
  p.set_offset(std::round(10 * u01(rng)));
  return p;
}

}  // namespace dpmaint::testing

#endif  // DPMAINT_TESTS_MIQP_ORACLE_H_
