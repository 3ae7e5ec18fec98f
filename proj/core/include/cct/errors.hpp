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

#ifndef CCT_ERRORS_HPP
#define CCT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cct {

/// Base class for all cct errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (instance or LP data).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Problem size exceeds an enumeration bound.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Operands with incompatible shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A dual triple handed to an evaluator violates its feasibility
/// invariants; this signals a caller bug, not bad data.
class DualInfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace cct

#endif  // CCT_ERRORS_HPP
