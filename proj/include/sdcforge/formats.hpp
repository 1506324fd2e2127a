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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdcforge/errors.hpp"

namespace sdcforge {

// Supported numeric formats. Elements of a format are physically stored as
// storage_of(dtype): UINT8 and BF16 exist only on tensor paths whose
// accumulators hold UINT32/FP32, and TF32 lives inside an FP32 word.
enum class DType : uint8_t {
  UINT8,
  UINT32,
  FP8_E4M3,
  FP8_E5M2,
  FP16,
  BF16,
  FP32,
  TF32,
};

inline constexpr DType kAllDtypes[] = {
    DType::UINT8, DType::UINT32,   DType::FP8_E4M3, DType::FP8_E5M2,
    DType::FP16,  DType::BF16,     DType::FP32,     DType::TF32,
};

// Inclusive bit range [lo, hi] within a storage word; bit 0 is the LSB.
struct BitRange {
  unsigned lo = 0;
  unsigned hi = 0;

  constexpr unsigned count() const { return hi - lo + 1; }
  constexpr uint32_t mask() const {
    const uint32_t span = count() >= 32 ? 0xFFFFFFFFu : ((1u << count()) - 1u);
    return span << lo;
  }
};

// Bit-field geometry of one format. Integer formats carry no field ranges.
struct FormatLayout {
  DType dtype;
  unsigned width_bits;
  std::optional<unsigned> sign_bit;
  std::optional<BitRange> exponent_bits;
  std::optional<BitRange> mantissa_bits;
  DType storage_dtype;

  bool is_integer() const { return !exponent_bits.has_value(); }
  uint32_t word_mask() const {
    return width_bits >= 32 ? 0xFFFFFFFFu : ((1u << width_bits) - 1u);
  }
  // E4M3 has no infinity encoding; its sole NaN is exponent+mantissa all ones.
  bool has_infinity() const {
    return !is_integer() && dtype != DType::FP8_E4M3;
  }
};

enum class CorruptionCategory : uint8_t {
  Nullified,
  NaN,
  PlusInf,
  MinusInf,
  NonSpecial,
};

inline constexpr CorruptionCategory kAllCategories[] = {
    CorruptionCategory::Nullified, CorruptionCategory::NaN,
    CorruptionCategory::PlusInf,   CorruptionCategory::MinusInf,
    CorruptionCategory::NonSpecial,
};
inline constexpr std::size_t kCategoryCount = 5;

enum class SpecialValue : uint8_t { NaN, PlusInf, MinusInf };

const FormatLayout& layout_of(DType dtype);
DType storage_of(DType dtype);

unsigned width_bits_of(DType dtype);
unsigned width_bytes_of(DType dtype);

std::string_view dtype_name(DType dtype);
DType dtype_from_name(std::string_view name);  // throws UnknownDtype

std::string_view category_name(CorruptionCategory c);
CorruptionCategory category_from_name(std::string_view name);

// NaN iff exponent all ones and mantissa nonzero; +/-INF iff exponent all
// ones and mantissa zero. Integer formats and E4M3 infinity queries yield
// nullopt; the sole E4M3 NaN is exponent+mantissa all ones.
std::optional<SpecialValue> special_of(uint32_t bits, DType dtype);

/// Classification reads only the corrupted word: all-zero -> Nullified, else
// special -> NaN/PlusInf/MinusInf, else NonSpecial. The caller diffs first;
// equal words are not a corruption.
CorruptionCategory classify_value(uint32_t golden_bits, uint32_t corrupted_bits,
                                  DType dtype);

struct FlipStats {
  unsigned flip_count = 0;
  std::vector<unsigned> positions;  // ascending bit indices of golden ^ corrupted
};

FlipStats flip_stats(uint32_t golden_bits, uint32_t corrupted_bits,
                     unsigned width);

// True when injecting `category` onto this golden word can produce an
// observable diff (Nullified needs a nonzero golden, NaN a non-NaN golden,
// +/-INF a golden that is not already that infinity).
bool is_observable(CorruptionCategory category, uint32_t golden_bits,
                   DType dtype);

bool is_admissible(CorruptionCategory category, DType dtype);

// Builds the canonical corrupted word for a fixed-pattern category. NaN keeps
// the golden sign, forces the exponent to ones, and quiets the mantissa
// (MSB set, low bits from rng_draw); E4M3 uses its sole NaN pattern. The
// result always classifies back to the requested category. NonSpecial masks
// are sampled in the inject module instead.
uint32_t make_corrupted(CorruptionCategory category, uint32_t golden_bits,
                        DType dtype, uint64_t rng_draw);

}  // namespace sdcforge
