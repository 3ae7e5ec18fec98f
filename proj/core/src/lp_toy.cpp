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

#include "cct/lp_toy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace cct {
namespace {

void require_lp(const LPInstance& lp, const char* where) {
  const int m = lp.A.rows(), n = lp.A.cols();
  if (m < 1 || n < 1) throw DimensionError(std::string(where) + ": A must be nonempty");
  if (static_cast<int>(lp.b.size()) != m)
    throw DimensionError(std::string(where) + ": b length does not match rows of A");
  if (static_cast<int>(lp.c.size()) != n)
    throw DimensionError(std::string(where) + ": c length does not match cols of A");
  if (lp.ycap && static_cast<int>(lp.ycap->size()) != m)
    throw DimensionError(std::string(where) + ": ycap length does not match rows of A");
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < n; ++k)
      if (!std::isfinite(lp.A(i, k))) throw Error(std::string(where) + ": non-finite entry in A");
}

// A^T y accumulated row-major; the affine recovery below and any external
// re-derivation of it use this same order.
std::vector<double> a_transpose_times(const Matrix& A, const std::vector<double>& y) {
  std::vector<double> out(A.cols(), 0.0);
  for (int i = 0; i < A.rows(); ++i)
    for (int k = 0; k < A.cols(); ++k) out[k] += A(i, k) * y[i];
  return out;
}

std::vector<double> a_times(const Matrix& A, const std::vector<double>& x) {
  std::vector<double> out(A.rows(), 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (int k = 0; k < A.cols(); ++k) s += A(i, k) * x[k];
    out[i] = s;
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(const std::vector<double>& a) { return dot(a, a); }

// Largest eigenvalue of A^T A by power iteration; a slightly skewed start
// avoids landing orthogonal to the top eigenvector.
double operator_norm_sq(const Matrix& A) {
  const int n = A.cols();
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = 1.0 + 0.01 * k;
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> w = a_transpose_times(A, a_times(A, v));
    const double nw = std::sqrt(norm_sq(w));
    if (nw == 0.0) return 0.0;
    lambda = dot(v, w) / norm_sq(v);
    for (auto& x : w) x /= nw;
    v = std::move(w);
  }
  return lambda;
}

// --- vertex enumeration ------------------------------------------------

// Solves the n x n system rows(S) * x = rhs(S) in place; returns false when
// the subsystem is numerically singular.
bool solve_square(Matrix M, std::vector<double> rhs, std::vector<double>& x) {
  const int n = M.rows();
  x.assign(n, 0.0);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(M(r, col)) > std::abs(M(pivot, col))) pivot = r;
    if (std::abs(M(pivot, col)) < 1e-11) return false;
    if (pivot != col) {
      for (int k = 0; k < n; ++k) std::swap(M(col, k), M(pivot, k));
      std::swap(rhs[col], rhs[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = M(r, col) / M(col, col);
      if (factor == 0.0) continue;
      for (int k = col; k < n; ++k) M(r, k) -= factor * M(col, k);
      rhs[r] -= factor * rhs[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int k = r + 1; k < n; ++k) s -= M(r, k) * x[k];
    x[r] = s / M(r, r);
  }
  return true;
}

struct EnumerationResult {
  bool any_feasible = false;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> argmax;
};

// Max of c.x over {Ax <= b} restricted to candidate vertices (every
// nonsingular n-subset of active rows), with feasibility slack 1e-9.
EnumerationResult enumerate_vertices(const Matrix& A, const std::vector<double>& b,
                                     const std::vector<double>& c) {
  const int m = A.rows(), n = A.cols();
  EnumerationResult result;
  if (m < n) return result;

  std::vector<int> subset(n);
  for (int k = 0; k < n; ++k) subset[k] = k;

  Matrix sub(n, n);
  std::vector<double> rhs(n), x;
  while (true) {
    for (int r = 0; r < n; ++r) {
      const int row = subset[r];
      rhs[r] = b[row];
      for (int k = 0; k < n; ++k) sub(r, k) = A(row, k);
    }
    if (solve_square(sub, rhs, x)) {
      bool feasible = true;
      for (int i = 0; i < m && feasible; ++i) {
        double ax = 0.0;
        for (int k = 0; k < n; ++k) ax += A(i, k) * x[k];
        feasible = ax <= b[i] + 1e-9;
      }
      if (feasible) {
        const double value = dot(c, x);
        if (!result.any_feasible || value > result.best) {
          result.best = value;
          result.argmax = x;
        }
        result.any_feasible = true;
      }
    }
    // next lexicographic n-subset of {0..m-1}
    int k = n - 1;
    while (k >= 0 && subset[k] == m - n + k) --k;
    if (k < 0) break;
    ++subset[k];
    for (int r = k + 1; r < n; ++r) subset[r] = subset[r - 1] + 1;
  }
  return result;
}

// Stacks [A; I; -I] and [b; box; box] for a compact enumeration domain.
void stack_box(const Matrix& A, const std::vector<double>& b, double box, Matrix& A_out,
               std::vector<double>& b_out) {
  const int m = A.rows(), n = A.cols();
  A_out = Matrix(m + 2 * n, n, 0.0);
  b_out.assign(m + 2 * n, box);
  for (int i = 0; i < m; ++i) {
    b_out[i] = b[i];
    for (int k = 0; k < n; ++k) A_out(i, k) = A(i, k);
  }
  for (int k = 0; k < n; ++k) {
    A_out(m + k, k) = 1.0;
    A_out(m + n + k, k) = -1.0;
  }
}

}  // namespace

LPPenalizedSolution solve_penalized_lp(const LPInstance& lp, double eps, double tol,
                                       int max_iter,
                                       const std::optional<std::vector<double>>& init) {
  require_lp(lp, "solve_penalized_lp");
  if (!(eps > 0.0)) throw Error("solve_penalized_lp: eps must be positive");
  if (!(tol > 0.0)) throw Error("solve_penalized_lp: tol must be positive");
  if (max_iter < 1) throw Error("solve_penalized_lp: max_iter must be >= 1");

  const int m = lp.A.rows(), n = lp.A.cols();
  const double lambda = operator_norm_sq(lp.A);
  const double step = eps / std::max(1.02 * lambda, 1e-30);
  const double guard = 1e8 * (1.0 + std::sqrt(norm_sq(lp.c)) / eps);

  auto clamp = [&](int i, double y) {
    const double hi = lp.ycap ? (*lp.ycap)[i]
                              : std::numeric_limits<double>::infinity();
    return std::clamp(y, 0.0, hi);
  };

  std::vector<double> y(m, 0.0);
  if (init) {
    if (static_cast<int>(init->size()) != m)
      throw DimensionError("solve_penalized_lp: init length does not match rows of A");
    for (int i = 0; i < m; ++i) y[i] = clamp(i, (*init)[i]);
  }

  auto package = [&](int iterations, double residual, bool diverged) {
    LPPenalizedSolution sol;
    sol.eps = eps;
    sol.iterations = iterations;
    sol.kkt_residual = residual;
    sol.diverged = diverged;
    sol.y_eps = y;
    const std::vector<double> aty = a_transpose_times(lp.A, y);
    sol.x_eps.assign(n, 0.0);
    for (int k = 0; k < n; ++k)
      sol.x_eps[k] =
          (lp.c[k] - aty[k]) / eps;
    double res_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = aty[k] - lp.c[k];
      res_sq += r * r;
    }
    sol.I_eps = dot(lp.b, y) + res_sq / (2.0 * eps);
    sol.J_eps = dot(lp.c, sol.x_eps) - 0.5 * eps * norm_sq(sol.x_eps);
    const std::vector<double> ax = a_times(lp.A, sol.x_eps);
    sol.constraint_violation = 0.0;
    for (int i = 0; i < m; ++i)
      sol.constraint_violation =
          std::max(sol.constraint_violation, ax[i] - lp.b[i]);
    sol.constraint_violation = std::max(0.0, sol.constraint_violation);
    sol.cap_active = false;
    if (lp.ycap)
      for (int i = 0; i < m; ++i)
        if (y[i] >= (*lp.ycap)[i]) sol.cap_active = true;
    return sol;
  };

  auto gradient_at = [&](const std::vector<double>& point) {
    const std::vector<double> aty = a_transpose_times(lp.A, point);
    std::vector<double> r(n);
    for (int k = 0; k < n; ++k) r[k] = aty[k] - lp.c[k];
    const std::vector<double> ar = a_times(lp.A, r);
    std::vector<double> grad(m);
    for (int i = 0; i < m; ++i) grad[i] = lp.b[i] + ar[i] / eps;
    return grad;
  };
  auto objective_at = [&](const std::vector<double>& point) {
    const std::vector<double> aty = a_transpose_times(lp.A, point);
    double res_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = aty[k] - lp.c[k];
      res_sq += r * r;
    }
    return dot(lp.b, point) + res_sq / (2.0 * eps);
  };

  // Accelerated projected gradient with restart on objective increase.
  // Random data makes A^T A arbitrarily ill conditioned; the plain method
  // needs on the order of the condition number many iterations, acceleration
  // its square root, and both stay deterministic.
  std::vector<double> y_extrapolated = y;
  double t_momentum = 1.0;
  double objective = objective_at(y);

  double residual = 0.0;
  for (int iter = 0; iter <= max_iter; ++iter) {
    const std::vector<double> grad = gradient_at(y);
    residual = 0.0;
    for (int i = 0; i < m; ++i) {
      const double yi = y[i];
      const double hi = lp.ycap ? (*lp.ycap)[i] : std::numeric_limits<double>::infinity();
      double viol;
      if (yi <= 0.0)
        viol = std::max(0.0, -grad[i]);
      else if (yi >= hi)
        viol = std::max(0.0, grad[i]);
      else
        viol = std::abs(grad[i]);
      residual = std::max(residual, viol);
    }
    if (residual <= tol) return package(iter, residual, false);
    if (std::sqrt(norm_sq(y)) > guard) return package(iter, residual, true);
    if (iter == max_iter) break;

    const bool extrapolation_at_y = y_extrapolated == y;
    const std::vector<double> grad_z = gradient_at(y_extrapolated);
    std::vector<double> y_next(m);
    for (int i = 0; i < m; ++i) y_next[i] = clamp(i, y_extrapolated[i] - step * grad_z[i]);
    double objective_next = objective_at(y_next);
    if (objective_next > objective) {
      // Momentum overshot: fall back to the plain step from y.
      for (int i = 0; i < m; ++i) y_next[i] = clamp(i, y[i] - step * grad[i]);
      objective_next = objective_at(y_next);
      t_momentum = 1.0;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
    const double beta = (t_momentum - 1.0) / t_next;
    const bool y_unchanged = y_next == y;
    for (int i = 0; i < m; ++i)
      y_extrapolated[i] = clamp(i, y_next[i] + beta * (y_next[i] - y[i]));
    y = std::move(y_next);
    objective = objective_next;
    t_momentum = t_next;
    // Once the step from (y, y) reproduces y bitwise, the deterministic
    // update map is at a fixpoint: the achieved residual is the
    // floating-point floor for this instance and step.
    if (extrapolation_at_y && y_unchanged) return package(iter + 1, residual, false);
  }

  LPPenalizedSolution best = package(max_iter, residual, false);
  throw LpIterationLimitError("solve_penalized_lp: residual " + std::to_string(residual) +
                                  " above tolerance " + std::to_string(tol) + " after " +
                                  std::to_string(max_iter) + " iterations",
                              std::move(best));
}

LPOracleResult lp_vertex_oracle(const LPInstance& lp) {
  require_lp(lp, "lp_vertex_oracle");
  const int m = lp.A.rows(), n = lp.A.cols();
  if (n > 8 || m > 14)
    throw SizeError("lp_vertex_oracle: enumeration bound is n <= 8, m <= 14, got n = " +
                    std::to_string(n) + ", m = " + std::to_string(m));

  double scale = 0.0;
  for (const double v : lp.b) scale = std::max(scale, std::abs(v));
  const double box = 1e6 * (1.0 + scale);

  LPOracleResult result;
  const EnumerationResult plain = enumerate_vertices(lp.A, lp.b, lp.c);

  bool feasible = plain.any_feasible;
  if (!feasible) {
    // Feasibility program over (x, t): minimize t subject to Ax - t <= b,
    // t >= 0, inside a large box so vertices always exist.
    Matrix A_aux(m + 1, n + 1, 0.0);
    std::vector<double> b_aux(m + 1, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < n; ++k) A_aux(i, k) = lp.A(i, k);
      A_aux(i, n) = -1.0;
      b_aux[i] = lp.b[i];
    }
    A_aux(m, n) = -1.0;  // -t <= 0
    Matrix A_boxed;
    std::vector<double> b_boxed;
    stack_box(A_aux, b_aux, box, A_boxed, b_boxed);
    std::vector<double> c_aux(n + 1, 0.0);
    c_aux[n] = -1.0;  // maximize -t
    const EnumerationResult aux = enumerate_vertices(A_boxed, b_boxed, c_aux);
    feasible = aux.any_feasible && aux.best > -1e-7;
  }
  if (!feasible) {
    result.status = LPStatus::kInfeasible;
    return result;
  }

  // Recession program: max c.d over {Ad <= 0, |d|_inf <= 1}; a positive
  // value certifies an unbounded ray.
  {
    Matrix A_rec;
    std::vector<double> b_rec;
    stack_box(lp.A, std::vector<double>(m, 0.0), 1.0, A_rec, b_rec);
    const EnumerationResult rec = enumerate_vertices(A_rec, b_rec, lp.c);
    if (rec.any_feasible && rec.best > 1e-7) {
      result.status = LPStatus::kUnbounded;
      return result;
    }
  }

  if (plain.any_feasible) {
    result.status = LPStatus::kOptimal;
    result.value = plain.best;
    result.argmax = plain.argmax;
    return result;
  }

  // Feasible, bounded, but no vertex (lineality in the constraint matrix):
  // the boxed polytope attains the same finite optimum.
  Matrix A_boxed;
  std::vector<double> b_boxed;
  stack_box(lp.A, lp.b, box, A_boxed, b_boxed);
  const EnumerationResult boxed = enumerate_vertices(A_boxed, b_boxed, lp.c);
  result.status = LPStatus::kOptimal;
  result.value = boxed.best;
  result.argmax = boxed.argmax;
  return result;
}

LPSweepReport lp_sweep(const LPInstance& lp, const SweepSchedule& sched) {
  require_lp(lp, "lp_sweep");
  if (!(sched.eps0 > 0.0) || !(sched.ratio > 0.0) || !(sched.ratio < 1.0) || sched.steps < 1 ||
      !(sched.tol_kkt > 0.0) || sched.max_iter < 1)
    throw Error("lp_sweep: invalid schedule");

  LPSweepReport report;
  report.oracle = lp_vertex_oracle(lp);

  std::optional<std::vector<double>> warm;
  double eps = sched.eps0;
  for (int k = 0; k < sched.steps; ++k) {
    const double scaled = std::ceil(static_cast<double>(sched.max_iter) * std::max(1.0, 1.0 / eps));
    const int budget = scaled > static_cast<double>(std::numeric_limits<int>::max())
                           ? std::numeric_limits<int>::max()
                           : static_cast<int>(scaled);
    const LPPenalizedSolution sol = solve_penalized_lp(lp, eps, sched.tol_kkt, budget, warm);

    LPSweepRow row;
    row.eps = eps;
    row.I_eps = sol.I_eps;
    row.J_eps = sol.J_eps;
    row.constraint_violation = sol.constraint_violation;
    row.cap_active = sol.cap_active;
    row.diverged = sol.diverged;
    if (!sol.diverged && report.oracle.status == LPStatus::kOptimal)
      row.gap_vs_oracle = std::abs(sol.J_eps - report.oracle.value);
    report.rows.push_back(std::move(row));

    if (!sol.diverged) warm = sol.y_eps;
    eps *= sched.ratio;
  }
  return report;
}

}  // namespace cct
