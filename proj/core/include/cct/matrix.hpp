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

#ifndef CCT_MATRIX_HPP
#define CCT_MATRIX_HPP

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cct {

/// Dense row-major matrix. Small and value-semantic; everything at desk
/// scale, no expression templates.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    assert(rows >= 0 && cols >= 0);
  }

  static Mat from_rows(std::vector<std::vector<T>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
    Mat out(r, c);
    for (int i = 0; i < r; ++i) {
      assert(static_cast<int>(rows[i].size()) == c);
      for (int j = 0; j < c; ++j) out(i, j) = rows[i][j];
    }
    return out;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool operator==(const Mat& other) const = default;

  std::vector<T> row_sums() const {
    std::vector<T> out(rows_, T{});
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out[i] += (*this)(i, j);
    return out;
  }
  std::vector<T> col_sums() const {
    std::vector<T> out(cols_, T{});
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out[j] += (*this)(i, j);
    return out;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Matrix = Mat<double>;
using IntMatrix = Mat<std::int64_t>;

/// Candidate transport plan; entries are expected to satisfy the box
/// constraint 0 <= h <= hbar of the owning instance.
using Coupling = Matrix;

}  // namespace cct

#endif  // CCT_MATRIX_HPP
