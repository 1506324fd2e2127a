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

#include "sdcforge/formats.hpp"

#include <array>
#include <bit>

namespace sdcforge {

namespace {

constexpr FormatLayout kLayouts[] = {
    // dtype             width  sign  exponent        mantissa        storage
    {DType::UINT8,        8, std::nullopt, std::nullopt,   std::nullopt,   DType::UINT32},
    {DType::UINT32,      32, std::nullopt, std::nullopt,   std::nullopt,   DType::UINT32},
    {DType::FP8_E4M3,     8, 7u,           BitRange{3, 6},  BitRange{0, 2},  DType::FP8_E4M3},
    {DType::FP8_E5M2,     8, 7u,           BitRange{2, 6},  BitRange{0, 1},  DType::FP8_E5M2},
    {DType::FP16,        16, 15u,          BitRange{10, 14}, BitRange{0, 9},  DType::FP16},
    {DType::BF16,        16, 15u,          BitRange{7, 14},  BitRange{0, 6},  DType::FP32},
    {DType::FP32,        32, 31u,          BitRange{23, 30}, BitRange{0, 22}, DType::FP32},
    {DType::TF32,        19, 18u,          BitRange{10, 17}, BitRange{0, 9},  DType::FP32},
};

constexpr std::string_view kDtypeNames[] = {
    "UINT8", "UINT32", "FP8_E4M3", "FP8_E5M2", "FP16", "BF16", "FP32", "TF32",
};

constexpr std::string_view kCategoryNames[] = {
    "Nullified", "NaN", "PlusInf", "MinusInf", "NonSpecial",
};

}  // namespace

const FormatLayout& layout_of(DType dtype) {
  return kLayouts[static_cast<std::size_t>(dtype)];
}

DType storage_of(DType dtype) { return layout_of(dtype).storage_dtype; }

unsigned width_bits_of(DType dtype) { return layout_of(dtype).width_bits; }

unsigned width_bytes_of(DType dtype) {
  return (layout_of(dtype).width_bits + 7) / 8;
}

std::string_view dtype_name(DType dtype) {
  return kDtypeNames[static_cast<std::size_t>(dtype)];
}

DType dtype_from_name(std::string_view name) {
  for (DType d : kAllDtypes) {
    if (dtype_name(d) == name) return d;
  }
  throw UnknownDtype(std::string(name));
}

std::string_view category_name(CorruptionCategory c) {
  return kCategoryNames[static_cast<std::size_t>(c)];
}

CorruptionCategory category_from_name(std::string_view name) {
  for (CorruptionCategory c : kAllCategories) {
    if (category_name(c) == name) return c;
  }
  throw InvariantViolation("unknown corruption category '" + std::string(name) +
                           "'");
}

std::optional<SpecialValue> special_of(uint32_t bits, DType dtype) {
  const FormatLayout& fmt = layout_of(dtype);
  if (fmt.is_integer()) return std::nullopt;

  const uint32_t exp_mask = fmt.exponent_bits->mask();
  const uint32_t mant_mask = fmt.mantissa_bits->mask();
  if ((bits & exp_mask) != exp_mask) return std::nullopt;

  if (dtype == DType::FP8_E4M3) {
    // No infinity encoding; S.1111.111 is the only NaN.
    if ((bits & mant_mask) == mant_mask) return SpecialValue::NaN;
    return std::nullopt;
  }
  if ((bits & mant_mask) != 0) return SpecialValue::NaN;
  const bool negative = (bits >> *fmt.sign_bit) & 1u;
  return negative ? SpecialValue::MinusInf : SpecialValue::PlusInf;
}

CorruptionCategory classify_value(uint32_t golden_bits, uint32_t corrupted_bits,
                                  DType dtype) {
  if (golden_bits == corrupted_bits) {
    throw NotACorruption("golden and corrupted words are identical");
  }
  if (corrupted_bits == 0) return CorruptionCategory::Nullified;
  if (auto sv = special_of(corrupted_bits, dtype)) {
    switch (*sv) {
      case SpecialValue::NaN:
        return CorruptionCategory::NaN;
      case SpecialValue::PlusInf:
        return CorruptionCategory::PlusInf;
      case SpecialValue::MinusInf:
        return CorruptionCategory::MinusInf;
    }
  }
  return CorruptionCategory::NonSpecial;
}

FlipStats flip_stats(uint32_t golden_bits, uint32_t corrupted_bits,
                     unsigned width) {
  const uint32_t mask =
      width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
  const uint32_t x = (golden_bits ^ corrupted_bits) & mask;
  FlipStats out;
  out.flip_count = static_cast<unsigned>(std::popcount(x));
  out.positions.reserve(out.flip_count);
  for (unsigned b = 0; b < width; ++b) {
    if ((x >> b) & 1u) out.positions.push_back(b);
  }
  return out;
}

bool is_admissible(CorruptionCategory category, DType dtype) {
  const FormatLayout& fmt = layout_of(dtype);
  switch (category) {
    case CorruptionCategory::Nullified:
    case CorruptionCategory::NonSpecial:
      return true;
    case CorruptionCategory::NaN:
      return !fmt.is_integer();
    case CorruptionCategory::PlusInf:
    case CorruptionCategory::MinusInf:
      return fmt.has_infinity();
  }
  return false;
}

bool is_observable(CorruptionCategory category, uint32_t golden_bits,
                   DType dtype) {
  if (!is_admissible(category, dtype)) return false;
  switch (category) {
    case CorruptionCategory::Nullified:
      return golden_bits != 0;
    case CorruptionCategory::NaN:
      return special_of(golden_bits, dtype) != SpecialValue::NaN;
    case CorruptionCategory::PlusInf:
      return special_of(golden_bits, dtype) != SpecialValue::PlusInf;
    case CorruptionCategory::MinusInf:
      return special_of(golden_bits, dtype) != SpecialValue::MinusInf;
    case CorruptionCategory::NonSpecial:
      return true;
  }
  return false;
}

uint32_t make_corrupted(CorruptionCategory category, uint32_t golden_bits,
                        DType dtype, uint64_t rng_draw) {
  const FormatLayout& fmt = layout_of(dtype);
  if (!is_admissible(category, dtype)) {
    throw InadmissibleCategory(std::string(category_name(category)) + " on " +
                               std::string(dtype_name(dtype)));
  }

  switch (category) {
    case CorruptionCategory::Nullified: {
      if (golden_bits == 0) {
        throw UnobservableInjection("Nullified requested on golden == 0");
      }
      return 0;
    }
    case CorruptionCategory::NaN: {
      if (special_of(golden_bits, dtype) == SpecialValue::NaN) {
        throw UnobservableInjection("NaN requested on golden already NaN");
      }
      const uint32_t sign = golden_bits & (1u << *fmt.sign_bit);
      const uint32_t exp_ones = fmt.exponent_bits->mask();
      uint32_t mantissa;
      if (dtype == DType::FP8_E4M3) {
        mantissa = fmt.mantissa_bits->mask();  // sole NaN pattern
      } else {
        const unsigned mant_lo = fmt.mantissa_bits->lo;
        const unsigned mant_count = fmt.mantissa_bits->count();
        const uint32_t quiet_bit = 1u << (mant_lo + mant_count - 1);
        const uint32_t payload_mask =
            mant_count > 1 ? ((1u << (mant_count - 1)) - 1u) << mant_lo : 0u;
        mantissa = quiet_bit |
                   ((static_cast<uint32_t>(rng_draw) << mant_lo) & payload_mask);
      }
      return sign | exp_ones | mantissa;
    }
    case CorruptionCategory::PlusInf:
    case CorruptionCategory::MinusInf: {
      const uint32_t sign =
          category == CorruptionCategory::MinusInf ? (1u << *fmt.sign_bit) : 0u;
      const uint32_t word = sign | fmt.exponent_bits->mask();
      if (word == golden_bits) {
        throw UnobservableInjection("golden is already that infinity");
      }
      return word;
    }
    case CorruptionCategory::NonSpecial:
      throw InadmissibleCategory(
          "NonSpecial has no fixed pattern; sample a bit-flip mask instead");
  }
  throw InadmissibleCategory("unhandled category");
}

}  // namespace sdcforge
