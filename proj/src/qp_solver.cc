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

// Primal-dual interior-point method on the homogeneous self-dual embedding
//
//   P x + A'z + q tau = 0
//   A x + s   - b tau = 0
//   kappa + q'x + b'z + x'Px / tau = 0,   s, z in K,  tau, kappa >= 0
//
// with K = {0}^eq x R_+^ineq. Every general row and every finite variable
// bound becomes one row of A. The Newton system is reduced to the
// quasi-definite matrix [P + dI, A'; A, -(S/Z) - dI], factored with a sparse
// LDL' whose symbolic analysis is shared by all solves of one QpSolver.
// The embedding yields Farkas-type certificates when the problem is primal
// or dual infeasible.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "dpmaint/error.h"
#include "dpmaint/miqp.h"

namespace dpmaint {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using SpMatRow = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vec = Eigen::VectorXd;

struct QpSolver::Impl {
  QpOptions options;
  int n = 0;
  int m = 0;          // conic rows
  int m_general = 0;  // rows coming from the problem's constraint list
  double offset = 0.0;

  // Unscaled data.
  Vec p_diag;
  Vec q;
  SpMatRow a;
  Vec b_general;              // rhs of general rows (sign-normalized)
  std::vector<char> general_eq;
  std::vector<int> lower_row;  // per variable, -1 if infinite
  std::vector<int> upper_row;
  std::vector<double> base_lower;
  std::vector<double> base_upper;

  // Ruiz scaling: A_s = E A D, P_s = c D P D, q_s = c D q, b_s = E b.
  Vec d;
  Vec e;
  double c = 1.0;
  Vec p_s;
  Vec q_s;
  SpMatRow a_s;

  SpMat kkt;
  std::vector<int> diag_pos;  // value index of each KKT diagonal entry
  Eigen::SimplicialLDLT<SpMat, Eigen::Upper, Eigen::AMDOrdering<int>> ldlt;
  bool analyzed = false;

  // Per-solve data.
  Vec b;    // unscaled conic rhs
  Vec b_s;  // scaled
  std::vector<char> is_eq;
  Vec h;    // S/Z for inequality rows, 0 for equalities
  int m_ineq = 0;
  double reg = 0.0;

  void Build(const MiqpProblem& problem);
  void Scale();
  void AssembleKkt();
  bool Factor(const Vec& h_diag, double regularization);
  void KktSolve(const Vec& rhs_x, const Vec& rhs_z, Vec& out_x, Vec& out_z);
  MiqpSolution Run(std::span<const double> lower, std::span<const double> upper);
};

void QpSolver::Impl::Build(const MiqpProblem& problem) {
  n = problem.num_variables();
  m_general = problem.num_rows();
  offset = problem.offset();
  p_diag.resize(n);
  q.resize(n);
  base_lower.resize(n);
  base_upper.resize(n);
  for (int i = 0; i < n; ++i) {
    const Variable& v = problem.variables()[i];
    p_diag[i] = v.quad;
    q[i] = v.cost;
    base_lower[i] = v.lower;
    base_upper[i] = v.upper;
  }
  std::vector<Eigen::Triplet<double>> trip;
  b_general.resize(m_general);
  general_eq.resize(m_general);
  int row = 0;
  for (const Row& r : problem.rows()) {
    const double sign = r.sense == Sense::kGreaterEqual ? -1.0 : 1.0;
    for (const Term& t : r.terms) {
      if (t.coef != 0.0) trip.emplace_back(row, t.var, sign * t.coef);
    }
    b_general[row] = sign * r.rhs;
    general_eq[row] = r.sense == Sense::kEqual;
    ++row;
  }
  lower_row.assign(n, -1);
  upper_row.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(base_lower[i])) {
      lower_row[i] = row;
      trip.emplace_back(row++, i, -1.0);
    }
    if (std::isfinite(base_upper[i])) {
      upper_row[i] = row;
      trip.emplace_back(row++, i, 1.0);
    }
  }
  m = row;
  a.resize(m, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
}

void QpSolver::Impl::Scale() {
  d = Vec::Ones(n);
  e = Vec::Ones(m);
  SpMatRow as = a;
  Vec ps = p_diag;
  for (int iter = 0; iter < 15; ++iter) {
    Vec col_norm = ps.cwiseAbs();
    Vec row_norm = Vec::Zero(m);
    for (int r = 0; r < m; ++r) {
      for (SpMatRow::InnerIterator it(as, r); it; ++it) {
        const double v = std::abs(it.value());
        row_norm[r] = std::max(row_norm[r], v);
        col_norm[it.col()] = std::max(col_norm[it.col()], v);
      }
    }
    Vec dd(n);
    Vec ee(m);
    for (int i = 0; i < n; ++i) {
      dd[i] = col_norm[i] > 1e-10 ? 1.0 / std::sqrt(col_norm[i]) : 1.0;
    }
    for (int r = 0; r < m; ++r) {
      ee[r] = row_norm[r] > 1e-10 ? 1.0 / std::sqrt(row_norm[r]) : 1.0;
    }
    for (int r = 0; r < m; ++r) {
      for (SpMatRow::InnerIterator it(as, r); it; ++it) {
        it.valueRef() *= ee[r] * dd[it.col()];
      }
    }
    ps = ps.cwiseProduct(dd).cwiseProduct(dd);
    d = d.cwiseProduct(dd);
    e = e.cwiseProduct(ee);
  }
  const Vec qd = q.cwiseProduct(d);
  const double p_mean = n > 0 ? ps.cwiseAbs().mean() : 0.0;
  const double q_max = qd.size() > 0 ? qd.cwiseAbs().maxCoeff() : 0.0;
  const double denom = std::max(p_mean, q_max);
  c = denom > 1e-10 ? std::clamp(1.0 / denom, 1e-6, 1e6) : 1.0;
  p_s = c * ps;
  q_s = c * qd;
  a_s = as;
}

void QpSolver::Impl::AssembleKkt() {
  const int dim = n + m;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(dim + a_s.nonZeros());
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
  for (int r = 0; r < m; ++r) {
    for (SpMatRow::InnerIterator it(a_s, r); it; ++it) {
      trip.emplace_back(it.col(), n + r, it.value());
    }
    trip.emplace_back(n + r, n + r, -1.0);
  }
  kkt.resize(dim, dim);
  kkt.setFromTriplets(trip.begin(), trip.end());
  kkt.makeCompressed();
  diag_pos.assign(dim, -1);
  for (int col = 0; col < dim; ++col) {
    for (int k = kkt.outerIndexPtr()[col]; k < kkt.outerIndexPtr()[col + 1];
         ++k) {
      if (kkt.innerIndexPtr()[k] == col) diag_pos[col] = k;
    }
  }
}

bool QpSolver::Impl::Factor(const Vec& h_diag, double regularization) {
  double* vals = kkt.valuePtr();
  for (int i = 0; i < n; ++i) vals[diag_pos[i]] = p_s[i] + regularization;
  for (int r = 0; r < m; ++r) {
    vals[diag_pos[n + r]] = -(h_diag[r] + regularization);
  }
  if (!analyzed) {
    ldlt.analyzePattern(kkt);
    analyzed = true;
  }
  ldlt.factorize(kkt);
  return ldlt.info() == Eigen::Success;
}

// Solves the unregularized reduced system using the regularized factors plus
// iterative refinement.
void QpSolver::Impl::KktSolve(const Vec& rhs_x, const Vec& rhs_z, Vec& out_x,
                              Vec& out_z) {
  Vec rhs(n + m);
  rhs << rhs_x, rhs_z;
  Vec sol = ldlt.solve(rhs);
  for (int step = 0; step < options.refinement_steps; ++step) {
    const Vec sx = sol.head(n);
    const Vec sz = sol.tail(m);
    Vec res(n + m);
    res.head(n) = rhs_x - (p_s.cwiseProduct(sx) + a_s.transpose() * sz);
    res.tail(m) = rhs_z - (a_s * sx - h.cwiseProduct(sz));
    if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
      break;
    }
    sol += ldlt.solve(res);
  }
  out_x = sol.head(n);
  out_z = sol.tail(m);
}

namespace {

double StepToBoundary(const Vec& v, const Vec& dv,
                      const std::vector<char>& is_eq) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (is_eq[i]) continue;
    if (dv[i] < 0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

double ScalarStep(double v, double dv) { return dv < 0 ? -v / dv : 1.0; }

}  // namespace

MiqpSolution QpSolver::Impl::Run(std::span<const double> lower,
                                 std::span<const double> upper) {
  MiqpSolution out;
  // Conic rhs and cone types for these bounds.
  b.resize(m);
  is_eq.assign(m, 0);
  for (int r = 0; r < m_general; ++r) {
    b[r] = b_general[r];
    is_eq[r] = general_eq[r];
  }
  for (int i = 0; i < n; ++i) {
    if (lower[i] > upper[i] + 1e-12) {
      out.status = SolveStatus::kInfeasible;
      return out;
    }
    if (std::isfinite(lower[i]) != (lower_row[i] >= 0) ||
        std::isfinite(upper[i]) != (upper_row[i] >= 0)) {
      throw InvalidArgument("QpSolver: bound finiteness changed between solves");
    }
    const bool fixed = lower_row[i] >= 0 && upper_row[i] >= 0 &&
                       upper[i] - lower[i] <= 1e-12;
    if (lower_row[i] >= 0) {
      b[lower_row[i]] = -lower[i];
      is_eq[lower_row[i]] = fixed;
    }
    if (upper_row[i] >= 0) {
      // A fixed variable keeps its upper row as an inactive inequality so the
      // sparsity pattern does not change.
      b[upper_row[i]] = fixed ? upper[i] + 1.0 : upper[i];
    }
  }
  b_s = e.cwiseProduct(b);
  m_ineq = 0;
  for (int r = 0; r < m; ++r) m_ineq += is_eq[r] ? 0 : 1;

  reg = options.static_regularization;
  h = Vec::Zero(m);

  // Initial point: least-squares style solve with H = I on inequality rows.
  Vec h_init(m);
  for (int r = 0; r < m; ++r) h_init[r] = is_eq[r] ? 0.0 : 1.0;
  h = h_init;
  if (!Factor(h_init, reg)) {
    out.status = SolveStatus::kNumericalError;
    return out;
  }
  Vec x, z;
  KktSolve(-q_s, b_s, x, z);
  Vec s = Vec::Zero(m);
  for (int r = 0; r < m; ++r) s[r] = is_eq[r] ? 0.0 : -z[r];
  double min_s = kInf;
  double min_z = kInf;
  for (int r = 0; r < m; ++r) {
    if (is_eq[r]) continue;
    min_s = std::min(min_s, s[r]);
    min_z = std::min(min_z, z[r]);
  }
  if (m_ineq > 0) {
    const double eps = 1e-8;
    if (-min_s >= -eps) {
      for (int r = 0; r < m; ++r) {
        if (!is_eq[r]) s[r] += 1.0 - min_s;
      }
    }
    if (-min_z >= -eps) {
      for (int r = 0; r < m; ++r) {
        if (!is_eq[r]) z[r] += 1.0 - min_z;
      }
    }
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double b_norm = b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0;
  const double q_norm = q.size() ? q.lpNorm<Eigen::Infinity>() : 0.0;
  auto unscale = [&](Vec& xu, Vec& zu, Vec& su) {
    xu = d.cwiseProduct(x) / tau;
    zu = e.cwiseProduct(z) / (c * tau);
    su = s.cwiseQuotient(e) / tau;
  };
  // Fixed variables are reported exactly at their value.
  auto snap_fixed = [&](Vec& v) {
    for (int i = 0; i < n; ++i) {
      if (upper[i] - lower[i] <= 1e-12) v[i] = lower[i];
    }
  };

  double last_res = kInf;
  Vec xu, zu, su;
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    out.iterations = iter;
    // Convergence test in unscaled units.
    unscale(xu, zu, su);
    const Vec ax = a * xu;
    const Vec atz = a.transpose() * zu;
    const Vec px = p_diag.cwiseProduct(xu);
    const double pres = (ax + su - b).lpNorm<Eigen::Infinity>();
    const double dres = (px + atz + q).lpNorm<Eigen::Infinity>();
    const double xpx = xu.dot(px);
    const double pobj = 0.5 * xpx + q.dot(xu);
    const double dobj = -0.5 * xpx - b.dot(zu);
    const double gap = std::abs(pobj - dobj);
    const double ptol =
        options.feasibility_tolerance *
        (1.0 + std::max({b_norm, ax.size() ? ax.lpNorm<Eigen::Infinity>() : 0.0,
                         su.size() ? su.lpNorm<Eigen::Infinity>() : 0.0}));
    const double dtol =
        options.feasibility_tolerance *
        (1.0 + std::max({q_norm, px.size() ? px.lpNorm<Eigen::Infinity>() : 0.0,
                         atz.size() ? atz.lpNorm<Eigen::Infinity>() : 0.0}));
    const double gtol = options.gap_tolerance *
                        (1.0 + std::min(std::abs(pobj), std::abs(dobj)));
    last_res = std::max({pres, dres, gap});
    if (pres <= ptol && dres <= dtol && gap <= gtol) {
      out.status = SolveStatus::kOptimal;
      snap_fixed(xu);
      out.values.assign(xu.data(), xu.data() + n);
      out.objective = pobj + offset;
      out.bound = out.objective;
      out.gap = 0.0;
      out.kkt_residual = last_res;
      return out;
    }
    // Infeasibility certificates (unnormalized iterates).
    {
      const Vec zc = e.cwiseProduct(z);
      const double btz = b.dot(zc);
      const double zn = zc.size() ? zc.lpNorm<Eigen::Infinity>() : 0.0;
      if (btz < -options.infeasibility_tolerance * std::max(1.0, zn)) {
        const double atz_n = (a.transpose() * zc).lpNorm<Eigen::Infinity>();
        if (atz_n < -options.infeasibility_tolerance * btz) {
          out.status = SolveStatus::kInfeasible;
          out.iterations = iter;
          return out;
        }
      }
      const Vec xc = d.cwiseProduct(x);
      const double qtx = q.dot(xc);
      const double xn = xc.size() ? xc.lpNorm<Eigen::Infinity>() : 0.0;
      if (qtx < -options.infeasibility_tolerance * std::max(1.0, xn)) {
        const Vec sc = s.cwiseQuotient(e);
        const double ax_n = (a * xc + sc).lpNorm<Eigen::Infinity>();
        const double px_n =
            p_diag.cwiseProduct(xc).lpNorm<Eigen::Infinity>();
        if (ax_n < -options.infeasibility_tolerance * qtx &&
            px_n < -options.infeasibility_tolerance * qtx) {
          out.status = SolveStatus::kUnbounded;
          return out;
        }
      }
    }
    if (iter == options.max_iterations) break;

    // Residuals in scaled space.
    const Vec pxs = p_s.cwiseProduct(x);
    const Vec r_x = pxs + a_s.transpose() * z + q_s * tau;
    Vec r_z = a_s * x + s - b_s * tau;
    const double xpxs = x.dot(pxs);
    const double r_tau = kappa + q_s.dot(x) + b_s.dot(z) + xpxs / tau;

    for (int r = 0; r < m; ++r) h[r] = is_eq[r] ? 0.0 : s[r] / z[r];
    bool factored = false;
    for (int attempt = 0; attempt < 4 && !factored; ++attempt) {
      factored = Factor(h, reg);
      if (!factored) reg *= 100.0;
    }
    if (!factored) break;

    Vec x1, z1;
    KktSolve(-q_s, b_s, x1, z1);
    const Vec g = q_s + 2.0 * pxs / tau;
    const double denom =
        -kappa / tau + g.dot(x1) + b_s.dot(z1) - xpxs / (tau * tau);

    // One Newton direction for complementarity targets d_s, d_kappa and
    // residual weight w.
    auto direction = [&](const Vec& d_s, double d_kappa, double w, Vec& dx,
                         Vec& dz, Vec& ds, double& dtau, double& dkappa) {
      Vec rz(m);
      for (int r = 0; r < m; ++r) {
        rz[r] = -w * r_z[r] + (is_eq[r] ? 0.0 : d_s[r] / z[r]);
      }
      Vec x2, z2;
      KktSolve(-w * r_x, rz, x2, z2);
      dtau = (-w * r_tau + d_kappa / tau - g.dot(x2) - b_s.dot(z2)) / denom;
      dx = x2 + dtau * x1;
      dz = z2 + dtau * z1;
      ds.resize(m);
      for (int r = 0; r < m; ++r) {
        ds[r] = is_eq[r] ? 0.0 : -(d_s[r] + s[r] * dz[r]) / z[r];
      }
      dkappa = -(d_kappa + kappa * dtau) / tau;
    };

    Vec d_s = s.cwiseProduct(z);
    for (int r = 0; r < m; ++r) {
      if (is_eq[r]) d_s[r] = 0.0;
    }
    Vec dx_a, dz_a, ds_a;
    double dtau_a = 0.0, dkappa_a = 0.0;
    direction(d_s, tau * kappa, 1.0, dx_a, dz_a, ds_a, dtau_a, dkappa_a);
    double alpha_a = std::min({StepToBoundary(s, ds_a, is_eq),
                               StepToBoundary(z, dz_a, is_eq),
                               ScalarStep(tau, dtau_a),
                               ScalarStep(kappa, dkappa_a), 1.0});
    double mu = tau * kappa;
    for (int r = 0; r < m; ++r) {
      if (!is_eq[r]) mu += s[r] * z[r];
    }
    mu /= (m_ineq + 1);
    const double sigma = std::clamp(std::pow(1.0 - alpha_a, 3), 0.0, 1.0);

    Vec d_s2(m);
    for (int r = 0; r < m; ++r) {
      d_s2[r] = is_eq[r] ? 0.0 : s[r] * z[r] + ds_a[r] * dz_a[r] - sigma * mu;
    }
    const double d_kappa2 = tau * kappa + dtau_a * dkappa_a - sigma * mu;
    Vec dx, dz, ds;
    double dtau = 0.0, dkappa = 0.0;
    direction(d_s2, d_kappa2, 1.0 - sigma, dx, dz, ds, dtau, dkappa);
    double alpha = std::min({StepToBoundary(s, ds, is_eq),
                             StepToBoundary(z, dz, is_eq),
                             ScalarStep(tau, dtau), ScalarStep(kappa, dkappa)});
    alpha = std::min(1.0, 0.99 * alpha);
    if (!(alpha > 1e-12) || !std::isfinite(alpha)) break;
    x += alpha * dx;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    (void)r_z;
  }

  // Did not meet the tolerances. Accept a slightly less accurate point, but
  // say so through kkt_residual; anything worse is a numerical failure.
  unscale(xu, zu, su);
  out.kkt_residual = last_res;
  const double loose = 1e-6 * (1.0 + std::max(b_norm, q_norm));
  if (last_res <= loose && std::isfinite(last_res)) {
    out.status = SolveStatus::kOptimal;
    snap_fixed(xu);
    out.values.assign(xu.data(), xu.data() + n);
    out.objective = 0.5 * xu.dot(p_diag.cwiseProduct(xu)) + q.dot(xu) + offset;
    out.bound = out.objective;
    out.gap = 0.0;
    return out;
  }
  out.status = SolveStatus::kNumericalError;
  if (std::isfinite(xu.sum())) out.values.assign(xu.data(), xu.data() + n);
  return out;
}

QpSolver::QpSolver(const MiqpProblem& problem, QpOptions options)
    : impl_(std::make_unique<Impl>()) {
  problem.Validate();
  impl_->options = options;
  impl_->Build(problem);
  impl_->Scale();
  impl_->AssembleKkt();
}

QpSolver::~QpSolver() = default;

MiqpSolution QpSolver::Solve() {
  return Solve(impl_->base_lower, impl_->base_upper);
}

MiqpSolution QpSolver::Solve(std::span<const double> lower,
                             std::span<const double> upper) {
  if (static_cast<int>(lower.size()) != impl_->n ||
      static_cast<int>(upper.size()) != impl_->n) {
    throw InvalidArgument("QpSolver: bound vectors have the wrong size");
  }
  if (impl_->n == 0) {
    MiqpSolution out;
    out.status = SolveStatus::kOptimal;
    out.objective = impl_->offset;
    out.bound = out.objective;
    out.gap = 0.0;
    out.kkt_residual = 0.0;
    for (int r = 0; r < impl_->m_general; ++r) {
      const double rhs = impl_->b_general[r];
      if ((impl_->general_eq[r] && std::abs(rhs) > 1e-12) || rhs < -1e-12) {
        out.status = SolveStatus::kInfeasible;
      }
    }
    return out;
  }
  return impl_->Run(lower, upper);
}

MiqpSolution SolveQp(const MiqpProblem& problem, QpOptions options) {
  QpSolver solver(problem, options);
  return solver.Solve();
}

}  // namespace dpmaint
