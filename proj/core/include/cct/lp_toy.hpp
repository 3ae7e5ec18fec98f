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

#ifndef CCT_LP_TOY_HPP
#define CCT_LP_TOY_HPP

#include <optional>
#include <vector>

#include "cct/continuation.hpp"
#include "cct/errors.hpp"
#include "cct/matrix.hpp"

namespace cct {

// Finite-dimensional model of the penalization scheme: the pair
//   min b.y over y >= 0 with A^T y = c   <->   max c.x over Ax <= b
// is approached through the penalized objective
//   I_eps(y) = b.y + (1/2eps)|A^T y - c|^2,
// whose minimizer maps affinely to a dual-feasible x. A vertex-enumeration
// oracle provides the exact LP value for comparison.

struct LPInstance {
  Matrix A;               // m x n
  std::vector<double> b;  // m
  std::vector<double> c;  // n
  std::optional<std::vector<double>> ycap;  // optional upper bound on y
};

struct LPPenalizedSolution {
  std::vector<double> y_eps;  // m, >= 0 (and <= ycap when present)
  std::vector<double> x_eps;  // n, exactly (c - A^T y)/eps
  double eps = 0.0;
  double I_eps = 0.0;
  double J_eps = 0.0;
  double constraint_violation = 0.0;  // max(0, max_i (A x - b)_i)
  bool cap_active = false;
  bool diverged = false;
  int iterations = 0;
  double kkt_residual = 0.0;
};

class LpIterationLimitError : public Error {
 public:
  LpIterationLimitError(const std::string& what, LPPenalizedSolution best)
      : Error(what), best(std::move(best)) {}
  LPPenalizedSolution best;
};

/// Projected gradient descent on the orthant (or box when ycap is present)
/// with fixed step eps/||A^T A||, the operator norm estimated by power
/// iteration; steps are accelerated with deterministic restarts to cope with
/// ill-conditioned A^T A. Unbounded instances are detected by a norm guard
/// and returned with diverged = true rather than thrown. `init` warm-starts
/// the iteration (zeros when absent).
LPPenalizedSolution solve_penalized_lp(const LPInstance& lp, double eps, double tol,
                                       int max_iter,
                                       const std::optional<std::vector<double>>& init = {});

enum class LPStatus { kOptimal, kUnbounded, kInfeasible };

struct LPOracleResult {
  LPStatus status = LPStatus::kOptimal;
  double value = 0.0;
  std::vector<double> argmax;
};

/// Exact value of max c.x subject to Ax <= b by enumerating all n-subsets of
/// rows as candidate vertices; unboundedness is decided by maximizing c.d
/// over the recession directions {Ad <= 0, |d|_inf <= 1}, and infeasibility
/// by an auxiliary feasibility program through the same enumeration.
/// Throws SizeError when n > 8 or m > 14.
LPOracleResult lp_vertex_oracle(const LPInstance& lp);

struct LPSweepRow {
  double eps = 0.0;
  double I_eps = 0.0;
  double J_eps = 0.0;
  double constraint_violation = 0.0;
  std::optional<double> gap_vs_oracle;
  bool cap_active = false;
  bool diverged = false;
};

struct LPSweepReport {
  std::vector<LPSweepRow> rows;
  LPOracleResult oracle;
};

/// Warm-started eps sweep of the penalized problem, with the vertex oracle
/// solved once for the per-row gaps. Diverged rows are flagged and excluded
/// from warm starting.
LPSweepReport lp_sweep(const LPInstance& lp, const SweepSchedule& sched);

}  // namespace cct

#endif  // CCT_LP_TOY_HPP
