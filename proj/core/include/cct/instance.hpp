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

#ifndef CCT_INSTANCE_HPP
#define CCT_INSTANCE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cct/errors.hpp"
#include "cct/matrix.hpp"

namespace cct {

/// Discrete capacity-constrained transport instance.
///
/// Masses and capacities are rationals over a common denominator `denom`:
/// the *_units members hold exact integer numerators, and f, g, hbar are
/// the corresponding real values (units / denom) used by the numerical
/// solvers. Costs are plain doubles. Instances are immutable after
/// construction and safe to share across threads.
struct TransportInstance {
  int m = 0;  // source count
  int n = 0;  // sink count
  std::int64_t denom = 1;

  std::vector<std::int64_t> f_units;  // m entries, sum == denom
  std::vector<std::int64_t> g_units;  // n entries, sum == denom
  IntMatrix hbar_units;               // m x n, nonnegative

  Matrix cost;  // m x n, finite

  // Derived real-valued views, filled by make().
  std::vector<double> f;
  std::vector<double> g;
  Matrix hbar;

  /// Assembles an instance from exact integer units and computes the real
  /// views. Performs no validation; see validate().
  static TransportInstance make(int m, int n, std::int64_t denom,
                                std::vector<std::int64_t> f_units,
                                std::vector<std::int64_t> g_units, IntMatrix hbar_units,
                                Matrix cost);
};

struct Violation {
  std::string field;
  std::string index;
  std::string description;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, ValidationReport report)
      : Error(what), report(std::move(report)) {}
  ValidationReport report;
};

/// Checks every instance invariant (shapes, nonnegativity, exact unit mass
/// on both sides, finite costs) and reports all violations at once.
ValidationReport validate(const TransportInstance& inst);

/// Reads an instance file (JSON object or sectioned text, see README) and
/// validates it. Throws ParseError on malformed input and ValidationError
/// carrying the full report when any invariant fails.
TransportInstance load_and_validate(const std::filesystem::path& path);

/// Parses an instance from an in-memory document. Same contract as
/// load_and_validate.
TransportInstance parse_and_validate(const std::string& text);

/// Serializes an instance as a JSON document; load_and_validate on the
/// result reproduces the instance bit for bit.
std::string to_json(const TransportInstance& inst);
void save(const TransportInstance& inst, const std::filesystem::path& path);

/// Deterministic random instance on denominator m*n*1000. A hidden feasible
/// coupling is constructed first and capacities are inflated by 1/slack
/// around it, so every generated instance is feasible; smaller slack means
/// looser capacities.
TransportInstance gen_random(std::uint64_t seed, int m, int n, double slack);

/// gen_random plus the hidden witness coupling (real-valued, exact
/// marginals). The witness is for tests; gen_random discards it.
std::pair<TransportInstance, Coupling> gen_random_with_witness(std::uint64_t seed, int m,
                                                               int n, double slack);

/// True when 0 <= h <= hbar entrywise within tol.
bool within_box(const TransportInstance& inst, const Coupling& h, double tol = 0.0);

}  // namespace cct

#endif  // CCT_INSTANCE_HPP
