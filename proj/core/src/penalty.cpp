// Copyright 2026 the cct authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cct/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cct {
namespace {

void require_shape(const TransportInstance& inst, const Coupling& h, const char* where) {
  if (h.rows() != inst.m || h.cols() != inst.n)
    throw DimensionError(std::string(where) + ": coupling is " + std::to_string(h.rows()) +
                         "x" + std::to_string(h.cols()) + ", instance is " +
                         std::to_string(inst.m) + "x" + std::to_string(inst.n));
}

void require_eps(double eps, const char* where) {
  if (!(eps > 0.0)) throw Error(std::string(where) + ": eps must be positive");
}

// Residual potentials of h: u_i = (rowsum_i - f_i)/eps and
// v_j = (colsum_j - g_j)/eps. The gradient of the relaxed objective is then
// c_ij + u_i + v_j, the same expression the dual recovery uses, so both
// sides see bit-identical values.
void residual_potentials(const TransportInstance& inst, const Coupling& h, double eps,
                         std::vector<double>& u, std::vector<double>& v) {
  u.assign(inst.m, 0.0);
  v.assign(inst.n, 0.0);
  for (int i = 0; i < inst.m; ++i) {
    double s = 0.0;
    for (int j = 0; j < inst.n; ++j) s += h(i, j);
    u[i] = (s - inst.f[i]) / eps;
  }
  for (int j = 0; j < inst.n; ++j) {
    double s = 0.0;
    for (int i = 0; i < inst.m; ++i) s += h(i, j);
    v[j] = (s - inst.g[j]) / eps;
  }
}

double kkt_residual_of(const TransportInstance& inst, const Coupling& h,
                       const std::vector<double>& u, const std::vector<double>& v) {
  double worst = 0.0;
  for (int i = 0; i < inst.m; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      if (inst.hbar_units(i, j) <= 0) continue;
      const double grad = inst.cost(i, j) + u[i] + v[j];
      double r;
      if (h(i, j) <= 0.0)
        r = std::max(0.0, -grad);
      else if (h(i, j) >= inst.hbar(i, j))
        r = std::max(0.0, grad);
      else
        r = std::abs(grad);
      worst = std::max(worst, r);
    }
  }
  return worst;
}

double relaxed_objective(const TransportInstance& inst, const Coupling& h, double eps) {
  const CostBreakdown cb = evaluate_costs(inst, h, eps);
  return cb.relaxed;
}

PenalizedSolution package_solution(const TransportInstance& inst, Coupling h, double eps,
                                   int iterations, double residual) {
  PenalizedSolution sol;
  sol.eps = eps;
  sol.iterations = iterations;
  sol.kkt_residual = residual;

  const CostBreakdown cb = evaluate_costs(inst, h, eps);
  sol.relaxed_value = cb.relaxed;
  sol.linear_value = cb.linear;

  double rx2 = 0.0, ry2 = 0.0;
  {
    const std::vector<double> rs = h.row_sums();
    const std::vector<double> cs = h.col_sums();
    for (int i = 0; i < inst.m; ++i) {
      const double r = rs[i] - inst.f[i];
      rx2 += r * r;
    }
    for (int j = 0; j < inst.n; ++j) {
      const double r = cs[j] - inst.g[j];
      ry2 += r * r;
    }
  }
  sol.marginal_residual_x = std::sqrt(rx2);
  sol.marginal_residual_y = std::sqrt(ry2);

  const double tau = default_tau_active(inst);
  for (int i = 0; i < inst.m; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      if (inst.hbar_units(i, j) <= 0) continue;
      if (h(i, j) >= inst.hbar(i, j) - tau) sol.active_upper.push_back({i, j});
      if (h(i, j) <= tau) sol.active_lower.push_back({i, j});
    }
  }
  sol.h_eps = std::move(h);
  return sol;
}

}  // namespace

CostBreakdown evaluate_costs(const TransportInstance& inst, const Coupling& h, double eps) {
  require_shape(inst, h, "evaluate_costs");
  require_eps(eps, "evaluate_costs");

  CostBreakdown cb;
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j) cb.linear += inst.cost(i, j) * h(i, j);

  const std::vector<double> rs = h.row_sums();
  const std::vector<double> cs = h.col_sums();
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < inst.m; ++i) {
    const double r = rs[i] - inst.f[i];
    sx += r * r;
  }
  for (int j = 0; j < inst.n; ++j) {
    const double r = cs[j] - inst.g[j];
    sy += r * r;
  }
  cb.penalty_x = sx / (2.0 * eps);
  cb.penalty_y = sy / (2.0 * eps);
  cb.relaxed = cb.linear + cb.penalty_x + cb.penalty_y;
  return cb;
}

Matrix gradient(const TransportInstance& inst, const Coupling& h, double eps) {
  require_shape(inst, h, "gradient");
  require_eps(eps, "gradient");
  std::vector<double> u, v;
  residual_potentials(inst, h, eps, u, v);
  Matrix g(inst.m, inst.n);
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j)
      g(i, j) = inst.cost(i, j) + u[i] + v[j];
  return g;
}

double kkt_residual(const TransportInstance& inst, const Coupling& h, double eps) {
  require_shape(inst, h, "kkt_residual");
  require_eps(eps, "kkt_residual");
  std::vector<double> u, v;
  residual_potentials(inst, h, eps, u, v);
  return kkt_residual_of(inst, h, u, v);
}

PenalizedSolution solve_penalized(const TransportInstance& inst, double eps,
                                  const Coupling& init, double tol_kkt, int max_iter,
                                  const SolveOptions& options) {
  require_shape(inst, init, "solve_penalized");
  require_eps(eps, "solve_penalized");
  if (!(tol_kkt > 0.0)) throw Error("solve_penalized: tol_kkt must be positive");
  if (max_iter < 1) throw Error("solve_penalized: max_iter must be >= 1");

  const int m = inst.m, n = inst.n;
  // The penalty Hessian is (R^T R + C^T C)/eps with operator norm at most
  // (m + n)/eps, so this fixed step guarantees descent.
  const double step = eps / static_cast<double>(m + n);

  auto clamp_cell = [&](int i, int j, double value) {
    return std::clamp(value, 0.0, inst.hbar(i, j));
  };

  Coupling h(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = clamp_cell(i, j, init(i, j));

  Coupling h_prev = h;      // momentum only
  double t_momentum = 1.0;  // momentum only
  double objective = (options.momentum || options.on_iteration)
                         ? relaxed_objective(inst, h, eps)
                         : 0.0;

  std::vector<double> u, v;
  double residual = 0.0;
  for (int iter = 0; iter <= max_iter; ++iter) {
    residual_potentials(inst, h, eps, u, v);
    residual = kkt_residual_of(inst, h, u, v);
    if (options.on_iteration) options.on_iteration(iter, objective);
    if (residual <= tol_kkt) return package_solution(inst, std::move(h), eps, iter, residual);
    if (iter == max_iter) break;

    if (!options.momentum) {
      bool moved = false;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
          const double next = clamp_cell(
              i, j, h(i, j) - step * (inst.cost(i, j) + u[i] + v[j]));
          moved = moved || next != h(i, j);
          h(i, j) = next;
        }
      }
      // The update is a pure function of h; a bitwise fixpoint above the
      // tolerance is the floating-point floor and further iterations
      // cannot move.
      if (!moved) return package_solution(inst, std::move(h), eps, iter + 1, residual);
      if (options.on_iteration) objective = relaxed_objective(inst, h, eps);
      continue;
    }

    // Nesterov step on the extrapolated point, restarted whenever the
    // objective would increase.
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
    const double beta = (t_momentum - 1.0) / t_next;
    const bool extrapolation_at_h = h_prev == h;
    Coupling y(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        y(i, j) = clamp_cell(i, j, h(i, j) + beta * (h(i, j) - h_prev(i, j)));
    std::vector<double> uy, vy;
    residual_potentials(inst, y, eps, uy, vy);
    Coupling h_next(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        h_next(i, j) = clamp_cell(
            i, j, y(i, j) - step * (inst.cost(i, j) + uy[i] + vy[j]));
    double objective_next = relaxed_objective(inst, h_next, eps);
    if (objective_next > objective) {
      // Restart from the plain projected gradient step at h.
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          h_next(i, j) = clamp_cell(
              i, j, h(i, j) - step * (inst.cost(i, j) + u[i] + v[j]));
      objective_next = relaxed_objective(inst, h_next, eps);
      t_momentum = 1.0;
    } else {
      t_momentum = t_next;
    }
    const bool h_unchanged = h_next == h;
    h_prev = std::move(h);
    h = std::move(h_next);
    objective = objective_next;
    // Fixpoint of the deterministic update map: no further motion possible.
    if (extrapolation_at_h && h_unchanged)
      return package_solution(inst, std::move(h), eps, iter + 1, residual);
  }

  PenalizedSolution best = package_solution(inst, std::move(h), eps, max_iter, residual);
  throw IterationLimitError("solve_penalized: KKT residual " + std::to_string(residual) +
                                " above tolerance " + std::to_string(tol_kkt) + " after " +
                                std::to_string(max_iter) + " iterations",
                            std::move(best));
}

DualTriple dual_from_primal(const TransportInstance& inst, const PenalizedSolution& sol) {
  require_shape(inst, sol.h_eps, "dual_from_primal");
  require_eps(sol.eps, "dual_from_primal");
  DualTriple t;
  t.eps = sol.eps;
  residual_potentials(inst, sol.h_eps, sol.eps, t.u, t.v);
  t.w = Matrix(inst.m, inst.n);
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j)
      t.w(i, j) = std::min(
          inst.cost(i, j) + t.u[i] + t.v[j], 0.0);
  return t;
}

bool is_dual_feasible(const TransportInstance& inst, const DualTriple& t, double tol) {
  if (static_cast<int>(t.u.size()) != inst.m || static_cast<int>(t.v.size()) != inst.n ||
      t.w.rows() != inst.m || t.w.cols() != inst.n)
    throw DimensionError("is_dual_feasible: triple shape does not match instance");
  for (int i = 0; i < inst.m; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      if (t.w(i, j) > tol) return false;
      if (inst.hbar_units(i, j) <= 0) continue;
      const double slack = inst.cost(i, j) + t.u[i] +
                           t.v[j] - t.w(i, j);
      if (slack < -tol) return false;
    }
  }
  return true;
}

DualValues dual_values(const TransportInstance& inst, const DualTriple& t, double eps) {
  if (eps < 0.0) throw Error("dual_values: eps must be nonnegative");
  if (!is_dual_feasible(inst, t, 1e-9))
    throw DualInfeasibleError("dual_values: triple violates w <= 0 or c+u+v-w >= 0");

  DualValues dv;
  double j = 0.0;
  for (int i = 0; i < inst.m; ++i) j -= t.u[i] * inst.f[i];
  for (int jj = 0; jj < inst.n; ++jj) j -= t.v[jj] * inst.g[jj];
  for (int i = 0; i < inst.m; ++i)
    for (int jj = 0; jj < inst.n; ++jj) j += t.w(i, jj) * inst.hbar(i, jj);
  dv.J = j;
  if (eps == 0.0) {
    dv.J_eps = j;
  } else {
    double nu = 0.0, nv = 0.0;
    for (const double x : t.u) nu += x * x;
    for (const double x : t.v) nv += x * x;
    dv.J_eps = j - 0.5 * eps * (nu + nv);
  }
  return dv;
}

double default_tau_active(const TransportInstance& inst) {
  double hmax = 0.0;
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j) hmax = std::max(hmax, inst.hbar(i, j));
  return 1e-7 * hmax;
}

CertificateReport certify(const TransportInstance& inst, const PenalizedSolution& sol,
                          const DualTriple& t, double tau_active) {
  require_shape(inst, sol.h_eps, "certify");
  CertificateReport report;

  const CostBreakdown cb = evaluate_costs(inst, sol.h_eps, sol.eps);
  const DualValues dv = dual_values(inst, t, sol.eps);
  report.duality_identity_residual = std::abs(cb.relaxed - dv.J_eps);

  for (int i = 0; i < inst.m; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      const double h = sol.h_eps(i, j);
      const double grad = inst.cost(i, j) + t.u[i] + t.v[j];
      report.comp_slack_1 = std::max(report.comp_slack_1, std::abs((grad - t.w(i, j)) * h));
      report.comp_slack_2 =
          std::max(report.comp_slack_2, std::abs(t.w(i, j) * (inst.hbar(i, j) - h)));
      if (inst.hbar_units(i, j) <= 0) continue;
      double violation = 0.0;
      if (h >= inst.hbar(i, j) - tau_active)
        violation = std::max(0.0, grad);  // saturated cells need c+u+v <= 0
      else if (h <= tau_active)
        violation = std::max(0.0, -grad);  // empty cells need c+u+v >= 0
      else
        violation = std::abs(grad);
      report.el_violation = std::max(report.el_violation, violation);
    }
  }

  report.dual_feasible = is_dual_feasible(inst, t, 0.0);
  return report;
}

}  // namespace cct
