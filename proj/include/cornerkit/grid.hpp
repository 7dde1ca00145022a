// Copyright 2026 The Cornerkit Authors
//
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cornerkit/error.hpp"

namespace cornerkit {

/// Dense rows x cols x channels array, channel-last (HWC) layout.
template <typename T>
class DenseGrid {
 public:
  DenseGrid() = default;
  DenseGrid(int rows, int cols, int channels, T fill = T{})
      : rows_(rows), cols_(cols), channels_(channels) {
    if (rows < 0 || cols < 0 || channels < 0) {
      throw ShapeError("grid dimensions must be non-negative");
    }
    values_.assign(static_cast<std::size_t>(rows) * cols * channels, fill);
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::size_t offset(int row, int col, int channel) const noexcept {
    return (static_cast<std::size_t>(row) * cols_ + col) * channels_ + channel;
  }

  T& at(int row, int col, int channel) { return values_[offset(row, col, channel)]; }
  const T& at(int row, int col, int channel) const {
    return values_[offset(row, col, channel)];
  }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && row < rows_ && col >= 0 && col < cols_;
  }

  bool same_shape(const DenseGrid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_ && channels_ == other.channels_;
  }

  std::vector<T>& values() noexcept { return values_; }
  const std::vector<T>& values() const noexcept { return values_; }

  friend bool operator==(const DenseGrid&, const DenseGrid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 0;
  std::vector<T> values_;
};

using Grid = DenseGrid<double>;
using MaskGrid = DenseGrid<std::uint8_t>;

inline std::string shape_string(int rows, int cols, int channels) {
  return std::to_string(rows) + "x" + std::to_string(cols) + "x" + std::to_string(channels);
}

template <typename A, typename B>
void require_same_shape(const DenseGrid<A>& a, const DenseGrid<B>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.channels() != b.channels()) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     shape_string(a.rows(), a.cols(), a.channels()) + " vs " +
                     shape_string(b.rows(), b.cols(), b.channels()));
  }
}

}  // namespace cornerkit
