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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "cct/feasibility.hpp"
#include "cct/penalty.hpp"
#include "test_util.hpp"

using namespace cct;
using cct_test::TestRng;

namespace {

// Sum of hbar entries; the empirical ceiling for the duality-identity
// residual is kkt_residual times this mass.
double hbar_total(const TransportInstance& inst) {
  double s = 0.0;
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j) s += inst.hbar(i, j);
  return s;
}

// Packages an arbitrary iterate as a solution record, no solving involved.
PenalizedSolution as_solution(const TransportInstance& inst, const Coupling& h, double eps) {
  PenalizedSolution sol;
  sol.h_eps = h;
  sol.eps = eps;
  sol.kkt_residual = kkt_residual(inst, h, eps);
  const CostBreakdown cb = evaluate_costs(inst, h, eps);
  sol.relaxed_value = cb.relaxed;
  sol.linear_value = cb.linear;
  return sol;
}

}  // namespace

TEST_CASE("evaluate_costs on the saturated 2x2 instance") {
  const TransportInstance inst = cct_test::saturated_2x2();

  SUBCASE("h = hbar has exact marginals") {
    for (double eps : {1.0, 0.1, 0.003}) {
      const CostBreakdown cb = evaluate_costs(inst, inst.hbar, eps);
      CHECK(cb.linear == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(cb.penalty_x == 0.0);
      CHECK(cb.penalty_y == 0.0);
      CHECK(cb.relaxed == doctest::Approx(0.5).epsilon(1e-14));
    }
  }

  SUBCASE("h = 0 at eps = 1 pays 1/4 per side") {
    const CostBreakdown cb = evaluate_costs(inst, Coupling(2, 2, 0.0), 1.0);
    CHECK(cb.linear == 0.0);
    CHECK(cb.penalty_x == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(cb.penalty_y == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(cb.relaxed == doctest::Approx(0.5).epsilon(1e-14));
  }

  SUBCASE("feasible h has relaxed == linear for every eps") {
    for (double eps : {1.0, 0.25, 0.01}) {
      const CostBreakdown cb = evaluate_costs(inst, inst.hbar, eps);
      CHECK(cb.relaxed == cb.linear);
    }
  }

  SUBCASE("shape and eps validation") {
    CHECK_THROWS_AS(evaluate_costs(inst, Coupling(3, 2, 0.0), 1.0), DimensionError);
    CHECK_THROWS_AS(evaluate_costs(inst, Coupling(2, 2, 0.0), 0.0), Error);
  }
}

TEST_CASE("gradient closed forms") {
  const TransportInstance inst = cct_test::saturated_2x2();

  SUBCASE("at h = 0, eps = 1: c_ij - f_i - g_j") {
    const Matrix g = gradient(inst, Coupling(2, 2, 0.0), 1.0);
    CHECK(g(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(g(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g(1, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  }

  SUBCASE("exact marginals give gradient == cost for any eps") {
    for (double eps : {1.0, 0.05}) {
      const Matrix g = gradient(inst, inst.hbar, eps);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(g(i, j) == inst.cost(i, j));
    }
  }
}

TEST_CASE("gradient matches central finite differences") {
  TestRng rng(11);
  const double delta = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const TransportInstance inst =
        gen_random(100 + trial, static_cast<int>(rng.uniform_int(2, 5)),
                   static_cast<int>(rng.uniform_int(2, 5)), 0.5);
    const double eps = rng.uniform(0.05, 1.0);
    Coupling h = cct_test::random_box_coupling(inst, rng);
    const Matrix g = gradient(inst, h, eps);
    for (int i = 0; i < inst.m; ++i) {
      for (int j = 0; j < inst.n; ++j) {
        const double keep = h(i, j);
        h(i, j) = keep + delta;
        const double up = evaluate_costs(inst, h, eps).relaxed;
        h(i, j) = keep - delta;
        const double down = evaluate_costs(inst, h, eps).relaxed;
        h(i, j) = keep;
        const double fd = (up - down) / (2.0 * delta);
        CHECK(std::abs(g(i, j) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("solve_penalized reproduces the closed-form minimizer") {
  const TransportInstance inst = cct_test::saturated_2x2();
  for (double eps : {0.1, 0.01}) {
    const PenalizedSolution sol =
        solve_penalized(inst, eps, Coupling(2, 2, 0.0), 1e-10, 1000000);
    CHECK(sol.h_eps(0, 0) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(sol.h_eps(0, 1) == doctest::Approx(0.25 - eps / 2).epsilon(1e-6));
    CHECK(sol.h_eps(1, 0) == doctest::Approx(0.25 - eps / 2).epsilon(1e-6));
    CHECK(sol.h_eps(1, 1) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(std::abs(sol.relaxed_value - (0.5 - eps / 2)) <= 1e-8);
    CHECK(sol.kkt_residual <= 1e-10);
    CHECK(within_box(inst, sol.h_eps));

    // relaxed = linear + penalties by construction.
    const double rebuilt =
        sol.linear_value + (sol.marginal_residual_x * sol.marginal_residual_x +
                            sol.marginal_residual_y * sol.marginal_residual_y) /
                               (2.0 * eps);
    CHECK(sol.relaxed_value == doctest::Approx(rebuilt).epsilon(1e-12));

    // The diagonal stays saturated, the off-diagonal interior.
    CHECK(sol.active_upper ==
          std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
    CHECK(sol.active_lower.empty());
  }
}

TEST_CASE("zero cost makes every feasible plan optimal with value zero") {
  const TransportInstance inst = cct_test::make_instance(
      2, 2, 4, {2, 2}, {2, 2}, {{1, 1}, {1, 1}}, {{0.0, 0.0}, {0.0, 0.0}});
  const PenalizedSolution sol = solve_penalized(inst, 0.5, Coupling(2, 2, 0.0), 1e-9, 100000);
  CHECK(sol.kkt_residual <= 1e-9);
  CHECK(sol.linear_value == 0.0);
  CHECK(sol.relaxed_value >= 0.0);
  CHECK(sol.relaxed_value <= 1e-10);
}

TEST_CASE("kkt_residual closed forms") {
  const TransportInstance inst = cct_test::saturated_2x2();

  SUBCASE("the closed-form minimizer has residual ~0 at its own eps") {
    const double eps = 0.1;
    Coupling h(2, 2);
    h(0, 0) = 0.25;
    h(0, 1) = 0.25 - eps / 2;
    h(1, 0) = 0.25 - eps / 2;
    h(1, 1) = 0.25;
    CHECK(kkt_residual(inst, h, eps) <= 1e-12);
  }

  SUBCASE("h = hbar: marginals exact, residual is the worst positive cost at the bound") {
    for (double eps : {1.0, 0.01})
      CHECK(kkt_residual(inst, inst.hbar, eps) == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("zero cost and exact marginals give residual 0") {
    const TransportInstance flat = cct_test::make_instance(
        2, 2, 4, {2, 2}, {2, 2}, {{1, 1}, {1, 1}}, {{0.0, 0.0}, {0.0, 0.0}});
    CHECK(kkt_residual(flat, flat.hbar, 0.3) == 0.0);
  }
}

TEST_CASE("dual_from_primal closed forms and exact feasibility") {
  const TransportInstance inst = cct_test::saturated_2x2();

  SUBCASE("closed-form minimizer maps to u = v = -1/2, w = diag(-1)") {
    const double eps = 0.1;
    const PenalizedSolution sol =
        solve_penalized(inst, eps, Coupling(2, 2, 0.0), 1e-11, 1000000);
    const DualTriple t = dual_from_primal(inst, sol);
    CHECK(t.eps == eps);
    for (const double ui : t.u) CHECK(ui == doctest::Approx(-0.5).epsilon(1e-6));
    for (const double vj : t.v) CHECK(vj == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(t.w(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(t.w(0, 1) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(t.w(1, 0) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(t.w(1, 1) == doctest::Approx(-1.0).epsilon(1e-6));
  }

  SUBCASE("exact marginals give u = 0, v = 0, w = min(c, 0)") {
    const TransportInstance mixed = cct_test::make_instance(
        2, 2, 4, {2, 2}, {2, 2}, {{1, 1}, {1, 1}}, {{-0.5, 1.0}, {1.0, -0.25}});
    const DualTriple t = dual_from_primal(mixed, as_solution(mixed, mixed.hbar, 1.0));
    for (const double ui : t.u) CHECK(ui == 0.0);
    for (const double vj : t.v) CHECK(vj == 0.0);
    CHECK(t.w(0, 0) == -0.5);
    CHECK(t.w(0, 1) == 0.0);
    CHECK(t.w(1, 1) == -0.25);
  }

  SUBCASE("recovered triples are feasible with zero tolerance") {
    TestRng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const TransportInstance r = gen_random(300 + trial, 3, 4, 0.5);
      const Coupling h = cct_test::random_box_coupling(r, rng);
      const DualTriple t = dual_from_primal(r, as_solution(r, h, rng.uniform(0.01, 1.0)));
      CHECK(is_dual_feasible(r, t, 0.0));
    }
  }
}

TEST_CASE("affine recovery is a pure function of the primal iterate") {
  TestRng rng(8);
  const TransportInstance inst = gen_random(123, 4, 3, 0.5);
  const double eps = 0.37;
  const Coupling h = cct_test::random_box_coupling(inst, rng);
  const DualTriple t = dual_from_primal(inst, as_solution(inst, h, eps));

  // Re-derive u and v with the defining formulas; equality is bitwise.
  for (int i = 0; i < inst.m; ++i) {
    double row = 0.0;
    for (int j = 0; j < inst.n; ++j) row += h(i, j);
    CHECK(t.u[i] == (row - inst.f[i]) / eps);
  }
  for (int j = 0; j < inst.n; ++j) {
    double col = 0.0;
    for (int i = 0; i < inst.m; ++i) col += h(i, j);
    CHECK(t.v[j] == (col - inst.g[j]) / eps);
  }
  const DualTriple again = dual_from_primal(inst, as_solution(inst, h, eps));
  CHECK(t.u == again.u);
  CHECK(t.v == again.v);
  CHECK(t.w == again.w);
}

TEST_CASE("dual_values closed forms and feasibility gate") {
  const TransportInstance inst = cct_test::saturated_2x2();

  SUBCASE("zero potentials with nonnegative cost give J = 0") {
    DualTriple t;
    t.u = {0.0, 0.0};
    t.v = {0.0, 0.0};
    t.w = Matrix(2, 2, 0.0);
    const DualValues dv = dual_values(inst, t, 0.0);
    CHECK(dv.J == 0.0);
    CHECK(dv.J_eps == 0.0);
  }

  SUBCASE("closed-form triple: J = 0.5 and J_eps = 0.5 - eps/2") {
    DualTriple t;
    t.u = {-0.5, -0.5};
    t.v = {-0.5, -0.5};
    t.w = Matrix(2, 2, 0.0);
    t.w(0, 0) = -1.0;
    t.w(1, 1) = -1.0;
    for (double eps : {0.1, 0.01}) {
      const DualValues dv = dual_values(inst, t, eps);
      CHECK(dv.J == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(dv.J_eps == doctest::Approx(0.5 - eps / 2).epsilon(1e-14));
    }
  }

  SUBCASE("infeasible triples are rejected") {
    DualTriple t;
    t.u = {0.0, 0.0};
    t.v = {0.0, 0.0};
    t.w = Matrix(2, 2, 0.5);  // w > 0
    CHECK_THROWS_AS(dual_values(inst, t, 0.1), DualInfeasibleError);
  }
}

TEST_CASE("penalized duality identity on the closed form") {
  const TransportInstance inst = cct_test::saturated_2x2();
  for (double eps : {0.1, 0.01}) {
    const PenalizedSolution sol =
        solve_penalized(inst, eps, Coupling(2, 2, 0.0), 1e-11, 1000000);
    const DualTriple t = dual_from_primal(inst, sol);
    const DualValues dv = dual_values(inst, t, eps);
    CHECK(std::abs(sol.relaxed_value - dv.J_eps) <= 1e-9);
    CHECK(dv.J_eps == doctest::Approx(0.5 - eps / 2).epsilon(1e-8));
  }
}

TEST_CASE("certify: closed form is exact, residual bound holds empirically") {
  const TransportInstance inst = cct_test::saturated_2x2();

  SUBCASE("closed-form solution certifies to ~0") {
    const PenalizedSolution sol =
        solve_penalized(inst, 0.1, Coupling(2, 2, 0.0), 1e-11, 1000000);
    const DualTriple t = dual_from_primal(inst, sol);
    const CertificateReport cert = certify(inst, sol, t, default_tau_active(inst));
    CHECK(cert.duality_identity_residual <= 1e-9);
    CHECK(cert.comp_slack_1 <= 1e-9);
    CHECK(cert.comp_slack_2 <= 1e-9);
    CHECK(cert.el_violation <= 1e-9);
    CHECK(cert.dual_feasible);
  }

  SUBCASE("duality residual stays below kkt_residual * sum(hbar)") {
    TestRng rng(17);
    for (int trial = 0; trial < 15; ++trial) {
      const TransportInstance r =
          gen_random(700 + trial, static_cast<int>(rng.uniform_int(2, 6)),
                     static_cast<int>(rng.uniform_int(2, 6)), 0.5);
      const double eps = rng.uniform(0.02, 0.5);
      // A loose solve leaves a visible residual to exercise the bound.
      const double tol = rng.uniform(1e-7, 1e-4);
      const PenalizedSolution sol =
          solve_penalized(r, eps, Coupling(r.m, r.n, 0.0), tol, 2000000);
      const DualTriple t = dual_from_primal(r, sol);
      const CertificateReport cert = certify(r, sol, t, default_tau_active(r));
      CHECK(cert.duality_identity_residual <=
            sol.kkt_residual * hbar_total(r) + 1e-12);
    }
  }

  SUBCASE("exact-marginal plan: comp_slack_2 is the direct plug-in") {
    const TransportInstance mixed = cct_test::make_instance(
        2, 2, 4, {2, 2}, {2, 2}, {{2, 1}, {1, 2}}, {{-0.5, 1.0}, {1.0, -0.25}});
    const FeasibilityVerdict verdict = maxflow_feasible(mixed);
    REQUIRE(verdict.feasible);
    const Coupling& h = *verdict.witness_coupling;
    const PenalizedSolution sol = as_solution(mixed, h, 1.0);
    const DualTriple t = dual_from_primal(mixed, sol);
    const CertificateReport cert = certify(mixed, sol, t, default_tau_active(mixed));
    double expected = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        expected = std::max(expected, std::abs(std::min(mixed.cost(i, j), 0.0) *
                                               (mixed.hbar(i, j) - h(i, j))));
    CHECK(cert.comp_slack_2 == expected);
  }
}

TEST_CASE("relaxed weak duality holds for random pairs") {
  TestRng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const TransportInstance inst =
        gen_random(10000 + trial % 40, 2 + trial % 3, 2 + (trial / 3) % 3, 0.5);
    const double eps = rng.uniform(0.01, 2.0);
    const Coupling h = cct_test::random_box_coupling(inst, rng);
    const DualTriple t = cct_test::random_feasible_triple(inst, rng, eps);
    const double primal = evaluate_costs(inst, h, eps).relaxed;
    const double dual = dual_values(inst, t, eps).J_eps;
    CHECK(primal >= dual - 1e-10);
  }
}

TEST_CASE("weak duality holds for feasible plans against feasible triples") {
  TestRng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const auto [inst, witness] =
        gen_random_with_witness(20000 + trial % 50, 2 + trial % 4, 2 + (trial / 2) % 4, 0.6);
    // Blend the hidden witness with the max-flow witness: still feasible.
    const FeasibilityVerdict verdict = maxflow_feasible(inst);
    REQUIRE(verdict.feasible);
    const double lambda = rng.uniform();
    Coupling h(inst.m, inst.n);
    for (int i = 0; i < inst.m; ++i)
      for (int j = 0; j < inst.n; ++j)
        h(i, j) = lambda * witness(i, j) + (1.0 - lambda) * (*verdict.witness_coupling)(i, j);

    const DualTriple t = cct_test::random_feasible_triple(inst, rng, 0.0);
    const double linear = evaluate_costs(inst, h, 1.0).linear;
    const double dual = dual_values(inst, t, 0.0).J;
    CHECK(linear >= dual - 1e-10);
  }
}

TEST_CASE("projected gradient descent is monotone") {
  const TransportInstance inst = gen_random(55, 5, 6, 0.5);
  std::vector<double> objectives;
  SolveOptions options;
  options.on_iteration = [&](int, double obj) { objectives.push_back(obj); };
  solve_penalized(inst, 0.05, Coupling(inst.m, inst.n, 0.0), 1e-9, 1000000, options);
  REQUIRE(objectives.size() > 2);
  for (std::size_t k = 1; k < objectives.size(); ++k)
    CHECK(objectives[k] <= objectives[k - 1] + 1e-12);
}

TEST_CASE("marginals are unique across random initializations") {
  TestRng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const TransportInstance inst = gen_random(40 + trial, 3, 4, 0.5);
    const double eps = rng.uniform(0.1, 0.5);
    const double tol = 1e-10;
    const PenalizedSolution a = solve_penalized(
        inst, eps, cct_test::random_box_coupling(inst, rng), tol, 5000000);
    const PenalizedSolution b = solve_penalized(
        inst, eps, cct_test::random_box_coupling(inst, rng), tol, 5000000);
    const auto ra = a.h_eps.row_sums(), rb = b.h_eps.row_sums();
    const auto ca = a.h_eps.col_sums(), cb = b.h_eps.col_sums();
    for (int i = 0; i < inst.m; ++i) CHECK(std::abs(ra[i] - rb[i]) <= 10 * tol * eps);
    for (int j = 0; j < inst.n; ++j) CHECK(std::abs(ca[j] - cb[j]) <= 10 * tol * eps);
  }
}

TEST_CASE("momentum variant reaches the same values and stays deterministic") {
  const TransportInstance inst = gen_random(81, 5, 5, 0.5);
  SolveOptions momentum;
  momentum.momentum = true;
  const PenalizedSolution plain =
      solve_penalized(inst, 0.05, Coupling(inst.m, inst.n, 0.0), 1e-10, 2000000);
  const PenalizedSolution fast =
      solve_penalized(inst, 0.05, Coupling(inst.m, inst.n, 0.0), 1e-10, 2000000, momentum);
  const PenalizedSolution fast2 =
      solve_penalized(inst, 0.05, Coupling(inst.m, inst.n, 0.0), 1e-10, 2000000, momentum);
  CHECK(fast.relaxed_value == doctest::Approx(plain.relaxed_value).epsilon(1e-9));
  CHECK(fast.h_eps == fast2.h_eps);
  CHECK(fast.iterations == fast2.iterations);
}

TEST_CASE("iteration limit carries the best iterate") {
  const TransportInstance inst = gen_random(5, 6, 6, 0.5);
  try {
    solve_penalized(inst, 0.01, Coupling(inst.m, inst.n, 0.0), 1e-12, 5);
    FAIL("expected IterationLimitError");
  } catch (const IterationLimitError& e) {
    CHECK(e.best.kkt_residual > 1e-12);
    CHECK(e.best.iterations == 5);
    CHECK(within_box(inst, e.best.h_eps));
  }
}
