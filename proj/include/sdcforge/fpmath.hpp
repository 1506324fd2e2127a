// Copyright 2026 The SDC-Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "sdcforge/errors.hpp"
#include "sdcforge/formats.hpp"

// Bit-level conversions for the kernel arithmetic formats (FP32, FP16,
// BF16, TF32, UINT8, UINT32). Encoding rounds to nearest, ties to even;
// double holds every one of these values exactly, so decode is exact and
// encode is a single correct rounding of its double argument.

namespace sdcforge {

namespace fpdetail {

inline double decode_ieee(uint32_t bits, unsigned exp_bits,
                          unsigned mant_bits, unsigned sign_bit) {
  const int bias = (1 << (exp_bits - 1)) - 1;
  const uint32_t mant_mask = (1u << mant_bits) - 1u;
  const uint32_t exp_mask = (1u << exp_bits) - 1u;
  const uint32_t mant = bits & mant_mask;
  const uint32_t exp = (bits >> mant_bits) & exp_mask;
  const double sign = (bits >> sign_bit) & 1u ? -1.0 : 1.0;
  if (exp == exp_mask) {
    if (mant != 0) return std::numeric_limits<double>::quiet_NaN();
    return sign * std::numeric_limits<double>::infinity();
  }
  if (exp == 0) {
    return sign * std::ldexp(static_cast<double>(mant),
                             1 - bias - static_cast<int>(mant_bits));
  }
  return sign * std::ldexp(static_cast<double>(mant) + std::ldexp(1.0, mant_bits),
                           static_cast<int>(exp) - bias -
                               static_cast<int>(mant_bits));
}

inline uint32_t encode_ieee(double value, unsigned exp_bits,
                            unsigned mant_bits, unsigned sign_bit) {
  const int bias = (1 << (exp_bits - 1)) - 1;
  const uint32_t exp_mask = (1u << exp_bits) - 1u;
  const uint32_t sign = std::signbit(value) ? 1u << sign_bit : 0u;
  const uint32_t inf = exp_mask << mant_bits;
  if (std::isnan(value)) return sign | inf | (1u << (mant_bits - 1));
  if (std::isinf(value)) return sign | inf;
  double a = std::fabs(value);
  if (a == 0.0) return sign;
  int e2 = 0;
  std::frexp(a, &e2);
  int e = e2 - 1;  // a = f * 2^e with f in [1, 2)
  const int emin = 1 - bias;
  if (e < emin) {
    // round onto the subnormal grid; a carry into the exponent field is the
    // correct smallest-normal result
    const auto q = static_cast<uint32_t>(
        std::nearbyint(std::ldexp(a, static_cast<int>(mant_bits) - emin)));
    return sign | q;
  }
  auto q = static_cast<uint32_t>(
      std::nearbyint(std::ldexp(a, static_cast<int>(mant_bits) - e)));
  if (q == 2u << mant_bits) {
    q >>= 1;
    ++e;
  }
  if (e > bias) return sign | inf;
  const auto biased = static_cast<uint32_t>(e + bias);
  return sign | (biased << mant_bits) | (q - (1u << mant_bits));
}

}  // namespace fpdetail

inline double decode_bits(uint32_t bits, DType dtype) {
  switch (dtype) {
    case DType::FP32:
      return std::bit_cast<float>(bits);
    case DType::FP16:
      return fpdetail::decode_ieee(bits & 0xFFFFu, 5, 10, 15);
    case DType::BF16:
      return std::bit_cast<float>((bits & 0xFFFFu) << 16);
    case DType::TF32:
      return fpdetail::decode_ieee(bits & 0x7FFFFu, 8, 10, 18);
    case DType::UINT8:
      return static_cast<double>(bits & 0xFFu);
    case DType::UINT32:
      return static_cast<double>(bits);
    default:
      throw UnknownDtype("no kernel arithmetic for " +
                         std::string(dtype_name(dtype)));
  }
}

inline uint32_t encode_bits(double value, DType dtype) {
  switch (dtype) {
    case DType::FP32:
      return std::bit_cast<uint32_t>(static_cast<float>(value));
    case DType::FP16:
      return fpdetail::encode_ieee(value, 5, 10, 15);
    case DType::BF16:
      return fpdetail::encode_ieee(value, 8, 7, 15);
    case DType::TF32:
      return fpdetail::encode_ieee(value, 8, 10, 18);
    case DType::UINT8:
      return static_cast<uint32_t>(
                 static_cast<uint64_t>(std::llround(value))) &
             0xFFu;
    case DType::UINT32:
      return static_cast<uint32_t>(static_cast<uint64_t>(std::llround(value)));
    default:
      throw UnknownDtype("no kernel arithmetic for " +
                         std::string(dtype_name(dtype)));
  }
}

// Widens a value word into its storage format's bit pattern. BF16 and TF32
// expand exactly into FP32 words; UINT8 zero-extends into UINT32.
inline uint32_t widen_to_storage(uint32_t bits, DType dtype) {
  switch (dtype) {
    case DType::BF16:
      return (bits & 0xFFFFu) << 16;
    case DType::TF32: {
      const uint32_t sign = (bits >> 18) & 1u;
      const uint32_t exp = (bits >> 10) & 0xFFu;
      const uint32_t mant = bits & 0x3FFu;
      return (sign << 31) | (exp << 23) | (mant << 13);
    }
    case DType::UINT8:
      return bits & 0xFFu;
    default:
      return bits;
  }
}

}  // namespace sdcforge
