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

#include "cct/feasibility.hpp"
#include "cct/oracle.hpp"
#include "test_util.hpp"

using namespace cct;
using cct_test::TestRng;

TEST_CASE("2x2 with hbar 0.3: value 0.4 at the forced plan") {
  // Brute-forced over the one-parameter feasible family: the row constraint
  // forces h(0,1) >= 0.2, so the cost is at least 0.4 and that is attained.
  const TransportInstance inst = cct_test::make_instance(
      2, 2, 10, {5, 5}, {5, 5}, {{3, 3}, {3, 3}}, {{0.0, 1.0}, {1.0, 0.0}});
  const ExactSolution sol = mcf_solve(inst);
  CHECK(sol.value == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(sol.h_star(0, 0) == doctest::Approx(0.3));
  CHECK(sol.h_star(0, 1) == doctest::Approx(0.2));
  CHECK(sol.h_star(1, 0) == doctest::Approx(0.2));
  CHECK(sol.h_star(1, 1) == doctest::Approx(0.3));

  const auto brute = cct_test::brute_force_min_cost(inst);
  REQUIRE(brute.has_value());
  CHECK(*brute == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("saturated instance has the unique plan and no fractional cells") {
  const TransportInstance inst = cct_test::saturated_2x2();
  const ExactSolution sol = mcf_solve(inst);
  CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol.fractional_cells == 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(sol.h_star(i, j) == 0.25);
  CHECK(check_oracle_certificate(inst, sol).ok);
}

TEST_CASE("zero cost gives zero value") {
  const TransportInstance inst = cct_test::make_instance(
      2, 2, 10, {5, 5}, {5, 5}, {{3, 3}, {3, 3}}, {{0.0, 0.0}, {0.0, 0.0}});
  const ExactSolution sol = mcf_solve(inst);
  CHECK(sol.value == 0.0);
  CHECK(check_oracle_certificate(inst, sol).ok);
}

TEST_CASE("infeasible instances raise with a violating pair") {
  const TransportInstance inst = cct_test::make_instance(
      2, 2, 1, {1, 0}, {0, 1}, {{1, 0}, {0, 1}}, {{0.0, 0.0}, {0.0, 0.0}});
  try {
    mcf_solve(inst);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(cct_test::pair_violates(inst, e.pair));
    CHECK(e.pair.excess == 1.0);
  }
}

TEST_CASE("matches exhaustive search on tiny instances") {
  TestRng rng(77);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const TransportInstance inst = cct_test::tiny_instance(rng);
    const auto brute = cct_test::brute_force_min_cost(inst);
    if (!brute) {
      CHECK_THROWS_AS(mcf_solve(inst), InfeasibleError);
      continue;
    }
    const ExactSolution sol = mcf_solve(inst);
    CHECK(sol.value == doctest::Approx(*brute).epsilon(1e-12));
    CHECK(check_oracle_certificate(inst, sol).ok);
    ++compared;
  }
  CHECK(compared > 15);
}

TEST_CASE("plan is an exact coupling, certificate and sparsity hold on random instances") {
  TestRng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = static_cast<int>(rng.uniform_int(2, 8));
    const int n = static_cast<int>(rng.uniform_int(2, 8));
    const TransportInstance inst = gen_random(9000 + trial, m, n, rng.uniform(0.3, 1.0));
    const ExactSolution sol = mcf_solve(inst);

    // Exact marginals and box membership in units.
    for (int i = 0; i < m; ++i) {
      std::int64_t row = 0;
      for (int j = 0; j < n; ++j) {
        CHECK(sol.h_units(i, j) >= 0);
        CHECK(sol.h_units(i, j) <= inst.hbar_units(i, j));
        row += sol.h_units(i, j);
      }
      CHECK(row == inst.f_units[i]);
    }
    for (int j = 0; j < n; ++j) {
      std::int64_t col = 0;
      for (int i = 0; i < m; ++i) col += sol.h_units(i, j);
      CHECK(col == inst.g_units[j]);
    }

    // Reduced-cost optimality with the returned potentials, exactly.
    const OptimalityCheck cert = check_oracle_certificate(inst, sol);
    CHECK(cert.ok);
    CHECK(cert.worst_violation == 0.0);

    // Vertex solutions keep the fractional support a forest.
    CHECK(sol.fractional_cells <= m + n - 1);

    // Value agrees with a direct dot product.
    double value = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) value += inst.cost(i, j) * sol.h_star(i, j);
    CHECK(sol.value == doctest::Approx(value).epsilon(1e-14));
  }
}
