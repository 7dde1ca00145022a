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
#include "cornerkit/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "cornerkit/error.hpp"

namespace cornerkit {
namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', '1'};
constexpr std::uint32_t kMaxRank = 16;

template <typename U>
void put_le(std::vector<std::byte>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(std::span<const std::byte> bytes, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    const auto v = get_le<std::uint32_t>(bytes_, pos_);
    pos_ += 4;
    return v;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(FormatError::Kind::kTruncated, bytes_.size(),
                        std::string("TNS1: truncated ") + what);
    }
  }

  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kF32:
      return 4;
    case DType::kF64:
      return 8;
    case DType::kU8:
      return 1;
  }
  throw ConfigError("unknown dtype");
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

std::vector<std::byte> encode_tensor(const Tensor& tensor) {
  if (tensor.values.size() != tensor.element_count()) {
    throw ShapeError("tensor holds " + std::to_string(tensor.values.size()) +
                     " values but its dims describe " + std::to_string(tensor.element_count()));
  }
  std::vector<std::byte> out;
  out.reserve(12 + 4 * tensor.dims.size() + tensor.values.size() * dtype_size(tensor.dtype));
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) put_le<std::uint32_t>(out, d);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.dtype));
  for (double v : tensor.values) {
    switch (tensor.dtype) {
      case DType::kF32:
        put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        break;
      case DType::kF64:
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
        break;
      case DType::kU8:
        out.push_back(static_cast<std::byte>(static_cast<std::uint8_t>(v)));
        break;
    }
  }
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(FormatError::Kind::kHeader, 0, "TNS1: bad magic");
  }
  Reader in(bytes);
  in.skip(4);
  const std::size_t rank_offset = in.pos();
  const std::uint32_t rank = in.u32("rank");
  if (rank > kMaxRank) {
    throw FormatError(FormatError::Kind::kHeader, rank_offset,
                      "TNS1: rank " + std::to_string(rank) + " exceeds " + std::to_string(kMaxRank));
  }
  Tensor t;
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint32_t d = in.u32("dims");
    constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 40;
    if (d != 0 && count > kMaxElements / d) {
      throw FormatError(FormatError::Kind::kHeader, in.pos() - 4, "TNS1: element count overflow");
    }
    t.dims.push_back(d);
    count *= d;
  }
  const std::size_t dtype_offset = in.pos();
  const std::uint32_t code = in.u32("dtype");
  if (code > 2) {
    throw FormatError(FormatError::Kind::kHeader, dtype_offset,
                      "TNS1: unknown dtype code " + std::to_string(code));
  }
  t.dtype = static_cast<DType>(code);
  const std::size_t width = dtype_size(t.dtype);
  in.need(count * width, "payload");
  const std::size_t base = in.pos();
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = base + i * width;
    switch (t.dtype) {
      case DType::kF32:
        t.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, at));
        break;
      case DType::kF64:
        t.values[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, at));
        break;
      case DType::kU8:
        t.values[i] = std::to_integer<std::uint8_t>(bytes[at]);
        break;
    }
  }
  const std::size_t end = base + count * width;
  if (end != bytes.size()) {
    throw FormatError(FormatError::Kind::kPayload, end, "TNS1: trailing bytes after payload");
  }
  return t;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw DataError("failed reading " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_bytes(path, encode_tensor(tensor));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file_bytes(path)); }

Tensor to_tensor(const Grid& grid, DType dtype) {
  if (dtype == DType::kU8) throw ConfigError("use the mask overload for u8 tensors");
  return {{static_cast<std::uint32_t>(grid.rows()), static_cast<std::uint32_t>(grid.cols()),
           static_cast<std::uint32_t>(grid.channels())},
          dtype,
          grid.values()};
}

Tensor to_tensor(const MaskGrid& mask) {
  Tensor t{{static_cast<std::uint32_t>(mask.rows()), static_cast<std::uint32_t>(mask.cols()),
            static_cast<std::uint32_t>(mask.channels())},
           DType::kU8,
           {}};
  t.values.assign(mask.values().begin(), mask.values().end());
  return t;
}

Grid grid_from_tensor(const Tensor& tensor) {
  if (tensor.dims.size() != 2 && tensor.dims.size() != 3) {
    throw ShapeError("expected a rank-2 or rank-3 tensor, got rank " +
                     std::to_string(tensor.dims.size()));
  }
  const int channels = tensor.dims.size() == 3 ? static_cast<int>(tensor.dims[2]) : 1;
  Grid g(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]), channels);
  g.values() = tensor.values;
  return g;
}

MaskGrid mask_from_tensor(const Tensor& tensor) {
  const Grid g = grid_from_tensor(tensor);
  MaskGrid m(g.rows(), g.cols(), g.channels());
  for (std::size_t i = 0; i < g.size(); ++i) m.values()[i] = g.values()[i] != 0.0 ? 1 : 0;
  return m;
}

}  // namespace cornerkit
