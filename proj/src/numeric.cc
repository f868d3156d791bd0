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

#include "nelm/numeric.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>

#include "nelm/types.h"

namespace nelm {
namespace {

void CheckRange(std::int64_t exponent) {
  if (exponent > ExtScalar::kMaxExponent || exponent < -ExtScalar::kMaxExponent) {
    throw NumericError("extended exponent out of range");
  }
}

}  // namespace

ExtScalar ExtScalar::Normalize(double m, std::int64_t e) {
  if (m == 0.0) return ExtScalar();
  int shift = 0;
  double f = std::frexp(m, &shift);  // f in [0.5, 1)
  std::int64_t exponent = e + shift - 1;
  CheckRange(exponent);
  return ExtScalar(f * 2.0, exponent);
}

ExtScalar ExtScalar::FromDouble(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw NumericError("extended scalar requires a finite non-negative value");
  }
  return Normalize(value, 0);
}

ExtScalar ExtScalar::FromLog2(double log2_value) {
  if (log2_value == -std::numeric_limits<double>::infinity()) return ExtScalar();
  if (!std::isfinite(log2_value)) {
    throw NumericError("extended scalar requires a finite log2 value");
  }
  double whole = std::floor(log2_value);
  double frac = log2_value - whole;
  if (std::fabs(whole) > static_cast<double>(kMaxExponent)) {
    throw NumericError("extended exponent out of range");
  }
  return Normalize(std::exp2(frac), static_cast<std::int64_t>(whole));
}

ExtScalar ExtScalar::Pow2(std::int64_t exponent) {
  CheckRange(exponent);
  return ExtScalar(1.0, exponent);
}

double ExtScalar::ToDouble() const {
  if (is_zero()) return 0.0;
  if (exponent_ > 2000) return std::numeric_limits<double>::infinity();
  if (exponent_ < -2000) return 0.0;
  return std::ldexp(mantissa_, static_cast<int>(exponent_));
}

double ExtScalar::Log2() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return std::log2(mantissa_) + static_cast<double>(exponent_);
}

ExtScalar& ExtScalar::operator*=(ExtScalar other) {
  if (is_zero() || other.is_zero()) {
    *this = ExtScalar();
    return *this;
  }
  double m = mantissa_ * other.mantissa_;  // [1, 4)
  std::int64_t e = exponent_ + other.exponent_;
  if (m >= 2.0) {
    m *= 0.5;
    ++e;
  }
  CheckRange(e);
  mantissa_ = m;
  exponent_ = e;
  return *this;
}

ExtScalar& ExtScalar::operator*=(double factor) {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw NumericError("extended scalar factor must be finite and non-negative");
  }
  if (is_zero() || factor == 0.0) {
    *this = ExtScalar();
    return *this;
  }
  *this = Normalize(mantissa_ * factor, exponent_);
  return *this;
}

ExtScalar& ExtScalar::operator+=(ExtScalar other) {
  if (other.is_zero()) return *this;
  if (is_zero()) {
    *this = other;
    return *this;
  }
  // Order operands so the result does not depend on argument order.
  ExtScalar hi = *this;
  ExtScalar lo = other;
  if (lo.exponent_ > hi.exponent_ ||
      (lo.exponent_ == hi.exponent_ && lo.mantissa_ > hi.mantissa_)) {
    std::swap(hi, lo);
  }
  std::int64_t gap = hi.exponent_ - lo.exponent_;
  if (gap > kAddGuardBits) {
    *this = hi;
    return *this;
  }
  double m = hi.mantissa_ + std::ldexp(lo.mantissa_, -static_cast<int>(gap));
  std::int64_t e = hi.exponent_;
  if (m >= 2.0) {
    m *= 0.5;
    ++e;
  }
  CheckRange(e);
  mantissa_ = m;
  exponent_ = e;
  return *this;
}

ExtScalar ExtScalar::Reciprocal() const {
  if (is_zero()) throw NumericError("division by zero extended scalar");
  return Normalize(1.0 / mantissa_, -exponent_);
}

ExtScalar& ExtScalar::operator/=(ExtScalar other) {
  return *this *= other.Reciprocal();
}

bool operator<(const ExtScalar& a, const ExtScalar& b) {
  if (a.is_zero()) return !b.is_zero();
  if (b.is_zero()) return false;
  if (a.exponent_ != b.exponent_) return a.exponent_ < b.exponent_;
  return a.mantissa_ < b.mantissa_;
}

double Ratio(ExtScalar a, ExtScalar b) { return (a / b).ToDouble(); }

std::string FormatDouble17(double value) {
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double ParseDouble(std::string_view text) {
  std::string s(text);
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw DataError("malformed decimal value '" + s + "'");
  }
  return v;
}

std::string FormatLog2(ExtScalar value) {
  return "log2=" + FormatDouble17(value.Log2());
}

ExtScalar ParseLog2(std::string_view text) {
  constexpr std::string_view kPrefix = "log2=";
  if (text.substr(0, kPrefix.size()) != kPrefix) {
    throw DataError("expected log2=<value>, got '" + std::string(text) + "'");
  }
  return ExtScalar::FromLog2(ParseDouble(text.substr(kPrefix.size())));
}

}  // namespace nelm
