// Copyright 2026 The NELM Authors.
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

#ifndef NELM_TYPES_H_
#define NELM_TYPES_H_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nelm {

// Dense symbol id in [0, k).
using Symbol = std::uint32_t;
using SymbolString = std::vector<Symbol>;

// Identifies a context (state) inside an emission table. State 0 is always
// the empty context.
using StateId = std::uint32_t;
inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();
inline constexpr StateId kRootState = 0;

// Index of a tying equivalence class.
using ClassId = std::uint32_t;
inline constexpr ClassId kNoClass = std::numeric_limits<ClassId>::max();

// Highest model order supported by the fixed-size per-step buffers.
inline constexpr int kMaxOrder = 31;

// Error categories double as process exit codes for the command line tool.
enum class ErrorKind : int {
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

}  // namespace nelm

#endif  // NELM_TYPES_H_
