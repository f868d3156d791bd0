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

// Extended-exponent arithmetic for non-negative probabilities. Products of
// millions of per-symbol probabilities stay representable because the
// binary exponent lives in its own 64-bit integer.

#ifndef NELM_NUMERIC_H_
#define NELM_NUMERIC_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace nelm {

class ExtScalar {
 public:
  // Exponents beyond this magnitude are reported as a numeric error.
  static constexpr std::int64_t kMaxExponent = std::int64_t{1} << 62;
  // Addends more than this many binary orders of magnitude below the larger
  // operand are dropped.
  static constexpr std::int64_t kAddGuardBits = 64;

  // Zero.
  constexpr ExtScalar() = default;

  // `value` must be finite and non-negative.
  static ExtScalar FromDouble(double value);
  static ExtScalar FromLog2(double log2_value);
  static ExtScalar One() { return ExtScalar(1.0, 0); }
  // Exactly 2^exponent.
  static ExtScalar Pow2(std::int64_t exponent);

  // Mantissa in [1, 2), or 0 for zero.
  double mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_ == 0.0; }

  // Underflows to 0 (or overflows to inf) outside the double range.
  double ToDouble() const;
  // log2 of the value; -infinity for zero.
  double Log2() const;

  ExtScalar& operator*=(ExtScalar other);
  ExtScalar& operator*=(double factor);
  ExtScalar& operator+=(ExtScalar other);
  ExtScalar& operator/=(ExtScalar other);

  friend ExtScalar operator*(ExtScalar a, ExtScalar b) { return a *= b; }
  friend ExtScalar operator*(ExtScalar a, double b) { return a *= b; }
  friend ExtScalar operator*(double a, ExtScalar b) { return b *= a; }
  friend ExtScalar operator+(ExtScalar a, ExtScalar b) { return a += b; }
  friend ExtScalar operator/(ExtScalar a, ExtScalar b) { return a /= b; }

  // Multiplicative inverse; dividing by zero is a numeric error.
  ExtScalar Reciprocal() const;

  friend bool operator==(const ExtScalar&, const ExtScalar&) = default;
  friend bool operator<(const ExtScalar& a, const ExtScalar& b);
  friend bool operator>(const ExtScalar& a, const ExtScalar& b) { return b < a; }
  friend bool operator<=(const ExtScalar& a, const ExtScalar& b) { return !(b < a); }
  friend bool operator>=(const ExtScalar& a, const ExtScalar& b) { return !(a < b); }

 private:
  ExtScalar(double mantissa, std::int64_t exponent)
      : mantissa_(mantissa), exponent_(exponent) {}

  // Brings an arbitrary positive `m` times 2^`e` back to m in [1, 2).
  static ExtScalar Normalize(double m, std::int64_t e);

  double mantissa_ = 0.0;
  std::int64_t exponent_ = 0;
};

// a / b as an ordinary double; b must be nonzero.
double Ratio(ExtScalar a, ExtScalar b);

// "log2=<value>" with 17 significant digits; parse accepts the same form.
std::string FormatLog2(ExtScalar value);
ExtScalar ParseLog2(std::string_view text);

// Shortest-round-trip-safe decimal for a double (17 significant digits).
std::string FormatDouble17(double value);
double ParseDouble(std::string_view text);

}  // namespace nelm

#endif  // NELM_NUMERIC_H_
