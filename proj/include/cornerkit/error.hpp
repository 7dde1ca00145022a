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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cornerkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched tensor shapes passed to a numeric routine.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or invalid domain values (e.g. non-positive dims).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be used: missing fields, unknown class names, ...
class DataError : public Error {
 public:
  using Error::Error;
};

// Binary or text file that fails to parse. Carries the byte offset at which
// the problem was detected.
class FormatError : public DataError {
 public:
  enum class Kind { kHeader, kTruncated, kPayload, kSyntax };

  FormatError(Kind kind, std::uint64_t offset, const std::string& what)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

}  // namespace cornerkit
