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
/// \file
/// \brief TNS1 tensor container.
///
/// Layout (all fields little-endian):
///   bytes 0..3   magic "TNS1"
///   u32          rank
///   u32 x rank   dims
///   u32          dtype: 0 = f32, 1 = f64, 2 = u8
///   payload      prod(dims) elements, row-major
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cornerkit/grid.hpp"

namespace cornerkit {

enum class DType : std::uint32_t { kF32 = 0, kF64 = 1, kU8 = 2 };

std::size_t dtype_size(DType dtype);

struct Tensor {
  std::vector<std::uint32_t> dims;
  DType dtype = DType::kF32;
  // Element values widened to double; narrowed on encode.
  std::vector<double> values;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::byte> encode_tensor(const Tensor& tensor);

/// Throws FormatError with the offset of the first offending byte.
Tensor decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

Tensor to_tensor(const Grid& grid, DType dtype = DType::kF32);
Tensor to_tensor(const MaskGrid& mask);

/// Rank-3 tensors only; a rank-2 tensor is read as H x W x 1.
Grid grid_from_tensor(const Tensor& tensor);
MaskGrid mask_from_tensor(const Tensor& tensor);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace cornerkit
