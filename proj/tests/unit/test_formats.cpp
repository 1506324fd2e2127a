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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sdcforge/errors.hpp"
#include "sdcforge/formats.hpp"

using namespace sdcforge;

namespace {

// Runs special_of and classify_value over every word of a small float format
// and compares with the arithmetic decoder from oracles.hpp.
void check_format_exhaustively(DType dtype, unsigned exp_bits,
                               unsigned mant_bits, bool has_infinity) {
  const unsigned width = 1 + exp_bits + mant_bits;
  const uint32_t mask = width >= 32 ? 0xFFFFFFFFu : (1u << width) - 1u;
  for (uint64_t w = 0; w <= mask; ++w) {
    const uint32_t bits = static_cast<uint32_t>(w);
    const double value = oracle::fp_value(bits, exp_bits, mant_bits,
                                          has_infinity);
    const auto special = special_of(bits, dtype);
    if (std::isnan(value)) {
      REQUIRE(special == SpecialValue::NaN);
    } else if (std::isinf(value)) {
      REQUIRE(special == (value > 0 ? SpecialValue::PlusInf
                                    : SpecialValue::MinusInf));
    } else {
      REQUIRE(!special.has_value());
    }

    const uint32_t golden = ~bits & mask;  // any word different from bits
    const CorruptionCategory cat = classify_value(golden, bits, dtype);
    if (bits == 0) {
      REQUIRE(cat == CorruptionCategory::Nullified);
    } else if (std::isnan(value)) {
      REQUIRE(cat == CorruptionCategory::NaN);
    } else if (std::isinf(value)) {
      REQUIRE(cat == (value > 0 ? CorruptionCategory::PlusInf
                                : CorruptionCategory::MinusInf));
    } else {
      REQUIRE(cat == CorruptionCategory::NonSpecial);
    }
  }
}

}  // namespace

TEST_CASE("oracle decoder agrees with known half-precision constants") {
  CHECK(oracle::fp_value(0x3C00, 5, 10) == 1.0);
  CHECK(oracle::fp_value(0xC000, 5, 10) == -2.0);
  CHECK(oracle::fp_value(0x7BFF, 5, 10) == 65504.0);
  CHECK(oracle::fp_value(0x0001, 5, 10) == std::ldexp(1.0, -24));
  CHECK(std::isinf(oracle::fp_value(0x7C00, 5, 10)));
  CHECK(std::isnan(oracle::fp_value(0x7C01, 5, 10)));
}

TEST_CASE("layout table matches the documented field positions") {
  const FormatLayout& fp32 = layout_of(DType::FP32);
  CHECK(fp32.width_bits == 32);
  CHECK(*fp32.sign_bit == 31);
  CHECK(fp32.exponent_bits->lo == 23);
  CHECK(fp32.exponent_bits->hi == 30);
  CHECK(fp32.mantissa_bits->lo == 0);
  CHECK(fp32.mantissa_bits->hi == 22);

  const FormatLayout& fp16 = layout_of(DType::FP16);
  CHECK(fp16.width_bits == 16);
  CHECK(*fp16.sign_bit == 15);
  CHECK(fp16.exponent_bits->lo == 10);
  CHECK(fp16.exponent_bits->hi == 14);
  CHECK(fp16.mantissa_bits->lo == 0);
  CHECK(fp16.mantissa_bits->hi == 9);

  const FormatLayout& u32 = layout_of(DType::UINT32);
  CHECK(u32.width_bits == 32);
  CHECK(!u32.sign_bit.has_value());
  CHECK(!u32.exponent_bits.has_value());
  CHECK(!u32.mantissa_bits.has_value());

  CHECK(width_bits_of(DType::BF16) == 16);
  CHECK(width_bits_of(DType::TF32) == 19);
  CHECK(width_bits_of(DType::FP8_E4M3) == 8);
  CHECK(width_bits_of(DType::FP8_E5M2) == 8);
  CHECK(width_bits_of(DType::UINT8) == 8);
}

TEST_CASE("float layouts partition the word exactly") {
  for (DType d : kAllDtypes) {
    const FormatLayout& fmt = layout_of(d);
    if (fmt.is_integer()) {
      CHECK(!fmt.sign_bit.has_value());
      CHECK(!fmt.exponent_bits.has_value());
      CHECK(!fmt.mantissa_bits.has_value());
      continue;
    }
    const uint32_t sign = 1u << *fmt.sign_bit;
    const uint32_t exp = fmt.exponent_bits->mask();
    const uint32_t mant = fmt.mantissa_bits->mask();
    CHECK((sign & exp) == 0);
    CHECK((sign & mant) == 0);
    CHECK((exp & mant) == 0);
    CHECK((sign | exp | mant) == fmt.word_mask());
  }
}

TEST_CASE("storage dtype mapping") {
  CHECK(storage_of(DType::UINT8) == DType::UINT32);
  CHECK(storage_of(DType::BF16) == DType::FP32);
  CHECK(storage_of(DType::TF32) == DType::FP32);
  CHECK(storage_of(DType::FP32) == DType::FP32);
  CHECK(storage_of(DType::FP16) == DType::FP16);
  CHECK(storage_of(DType::UINT32) == DType::UINT32);
  CHECK(storage_of(DType::FP8_E4M3) == DType::FP8_E4M3);
  CHECK(storage_of(DType::FP8_E5M2) == DType::FP8_E5M2);
}

TEST_CASE("special_of on canonical patterns") {
  CHECK(special_of(0x7F800000, DType::FP32) == SpecialValue::PlusInf);
  CHECK(special_of(0xFF800000, DType::FP32) == SpecialValue::MinusInf);
  CHECK(special_of(0xFFC00000, DType::FP32) == SpecialValue::NaN);
  CHECK(!special_of(0xFFFFFFFF, DType::UINT32).has_value());
  CHECK(!special_of(0x3F800000, DType::FP32).has_value());

  CHECK(special_of(0x7C00, DType::FP16) == SpecialValue::PlusInf);
  CHECK(special_of(0xFC00, DType::FP16) == SpecialValue::MinusInf);
  CHECK(special_of(0x7C01, DType::FP16) == SpecialValue::NaN);

  // E4M3 has no infinity; S.1111.111 is its only NaN.
  CHECK(special_of(0x7F, DType::FP8_E4M3) == SpecialValue::NaN);
  CHECK(special_of(0xFF, DType::FP8_E4M3) == SpecialValue::NaN);
  CHECK(!special_of(0x78, DType::FP8_E4M3).has_value());
  CHECK(!special_of(0x7E, DType::FP8_E4M3).has_value());

  CHECK(special_of(0x7C, DType::FP8_E5M2) == SpecialValue::PlusInf);
  CHECK(special_of(0xFC, DType::FP8_E5M2) == SpecialValue::MinusInf);
  CHECK(special_of(0x7D, DType::FP8_E5M2) == SpecialValue::NaN);
}

TEST_CASE("fp16 classification agrees with the arithmetic oracle on all 2^16 "
          "patterns") {
  check_format_exhaustively(DType::FP16, 5, 10, true);
}

TEST_CASE("remaining float formats agree with the arithmetic oracle "
          "exhaustively") {
  check_format_exhaustively(DType::FP8_E5M2, 5, 2, true);
  check_format_exhaustively(DType::FP8_E4M3, 4, 3, false);
  check_format_exhaustively(DType::BF16, 8, 7, true);
  check_format_exhaustively(DType::TF32, 8, 10, true);
}

TEST_CASE("classify_value looks only at the corrupted word") {
  CHECK(classify_value(0x3F800000, 0x00000000, DType::FP32) ==
        CorruptionCategory::Nullified);
  CHECK(classify_value(0x3F800000, 0x7F800001, DType::FP32) ==
        CorruptionCategory::NaN);
  CHECK(classify_value(0x3F800000, 0x3F800001, DType::FP32) ==
        CorruptionCategory::NonSpecial);
  CHECK(classify_value(0x3F800000, 0x7F800000, DType::FP32) ==
        CorruptionCategory::PlusInf);
  CHECK(classify_value(0x00000000, 0x00000001, DType::FP32) ==
        CorruptionCategory::NonSpecial);

  CHECK(classify_value(0xFFFFFFFF, 0x00000000, DType::UINT32) ==
        CorruptionCategory::Nullified);
  CHECK(classify_value(0x00000001, 0xFFFFFFFF, DType::UINT32) ==
        CorruptionCategory::NonSpecial);

  CHECK_THROWS_AS(classify_value(0x42, 0x42, DType::FP32), NotACorruption);
}

TEST_CASE("flip_stats") {
  FlipStats s = flip_stats(0x0, 0xF, 32);
  CHECK(s.flip_count == 4);
  CHECK(s.positions == std::vector<unsigned>{0, 1, 2, 3});

  s = flip_stats(0xAAAAAAAA, 0xAAAAAAAA, 32);
  CHECK(s.flip_count == 0);
  CHECK(s.positions.empty());

  s = flip_stats(0x8000, 0x0000, 16);
  CHECK(s.flip_count == 1);
  CHECK(s.positions == std::vector<unsigned>{15});

  // Width masks out high bits before counting.
  s = flip_stats(0xFFFF0000, 0x0000FFFF, 16);
  CHECK(s.flip_count == 16);
}

TEST_CASE("make_corrupted canonical patterns") {
  CHECK(make_corrupted(CorruptionCategory::Nullified, 0x3F800000, DType::FP32,
                       0) == 0x00000000);
  CHECK(make_corrupted(CorruptionCategory::MinusInf, 0x3F800000, DType::FP32,
                       0) == 0xFF800000);
  CHECK(make_corrupted(CorruptionCategory::PlusInf, 0x3F800000, DType::FP32,
                       0) == 0x7F800000);
  CHECK(make_corrupted(CorruptionCategory::NaN, 0x3C00, DType::FP16, 0) ==
        0x7E00);
  // Sign of the golden word is preserved in injected NaNs.
  CHECK(make_corrupted(CorruptionCategory::NaN, 0xBC00, DType::FP16, 0) ==
        0xFE00);
  // E4M3 has exactly one NaN pattern per sign.
  CHECK(make_corrupted(CorruptionCategory::NaN, 0x01, DType::FP8_E4M3, 1234) ==
        0x7F);
  CHECK(make_corrupted(CorruptionCategory::NaN, 0x81, DType::FP8_E4M3, 1234) ==
        0xFF);
}

TEST_CASE("make_corrupted round-trips through classify_value") {
  std::mt19937_64 rng(7);
  const CorruptionCategory cats[] = {
      CorruptionCategory::Nullified, CorruptionCategory::NaN,
      CorruptionCategory::PlusInf, CorruptionCategory::MinusInf};
  for (DType d : kAllDtypes) {
    const uint32_t mask = layout_of(d).word_mask();
    for (int trial = 0; trial < 200; ++trial) {
      const uint32_t golden = static_cast<uint32_t>(rng()) & mask;
      for (CorruptionCategory c : cats) {
        if (!is_admissible(c, d)) continue;
        if (!is_observable(c, golden, d)) continue;
        const uint32_t corrupted = make_corrupted(c, golden, d, rng());
        CHECK(classify_value(golden, corrupted, d) == c);
        CHECK((corrupted & ~mask) == 0);
      }
    }
  }
}

TEST_CASE("inadmissible and unobservable requests throw") {
  CHECK_THROWS_AS(make_corrupted(CorruptionCategory::NaN, 1, DType::UINT32, 0),
                  InadmissibleCategory);
  CHECK_THROWS_AS(
      make_corrupted(CorruptionCategory::PlusInf, 1, DType::FP8_E4M3, 0),
      InadmissibleCategory);
  CHECK_THROWS_AS(
      make_corrupted(CorruptionCategory::Nullified, 0, DType::FP32, 0),
      UnobservableInjection);
  CHECK_THROWS_AS(
      make_corrupted(CorruptionCategory::NaN, 0x7C01, DType::FP16, 0),
      UnobservableInjection);
  CHECK_THROWS_AS(
      make_corrupted(CorruptionCategory::PlusInf, 0x7F800000, DType::FP32, 0),
      UnobservableInjection);
  // NonSpecial has no canonical pattern; the injector samples a mask instead.
  CHECK_THROWS_AS(
      make_corrupted(CorruptionCategory::NonSpecial, 1, DType::FP32, 0),
      InadmissibleCategory);
}

TEST_CASE("integer formats admit only nullification and plain flips") {
  for (DType d : {DType::UINT8, DType::UINT32}) {
    CHECK(is_admissible(CorruptionCategory::Nullified, d));
    CHECK(is_admissible(CorruptionCategory::NonSpecial, d));
    CHECK(!is_admissible(CorruptionCategory::NaN, d));
    CHECK(!is_admissible(CorruptionCategory::PlusInf, d));
    CHECK(!is_admissible(CorruptionCategory::MinusInf, d));
  }
  CHECK(is_admissible(CorruptionCategory::NaN, DType::FP8_E4M3));
  CHECK(!is_admissible(CorruptionCategory::PlusInf, DType::FP8_E4M3));
  for (DType d : {DType::FP16, DType::BF16, DType::FP32, DType::TF32,
                  DType::FP8_E5M2}) {
    for (CorruptionCategory c : kAllCategories) CHECK(is_admissible(c, d));
  }
}

TEST_CASE("exactly one category fits any mismatching pair") {
  std::mt19937_64 rng(11);
  for (DType d : {DType::FP32, DType::FP16, DType::UINT32, DType::FP8_E5M2}) {
    const uint32_t mask = layout_of(d).word_mask();
    for (int trial = 0; trial < 2000; ++trial) {
      const uint32_t golden = static_cast<uint32_t>(rng()) & mask;
      const uint32_t corrupted = static_cast<uint32_t>(rng()) & mask;
      if (golden == corrupted) continue;
      const CorruptionCategory cat = classify_value(golden, corrupted, d);
      const bool is_null = corrupted == 0;
      const auto special = special_of(corrupted, d);
      int matches = 0;
      if (is_null) matches += cat == CorruptionCategory::Nullified;
      if (!is_null && special == SpecialValue::NaN)
        matches += cat == CorruptionCategory::NaN;
      if (!is_null && special == SpecialValue::PlusInf)
        matches += cat == CorruptionCategory::PlusInf;
      if (!is_null && special == SpecialValue::MinusInf)
        matches += cat == CorruptionCategory::MinusInf;
      if (!is_null && !special)
        matches += cat == CorruptionCategory::NonSpecial;
      CHECK(matches == 1);
    }
  }
}

TEST_CASE("dtype and category names round trip") {
  for (DType d : kAllDtypes) CHECK(dtype_from_name(dtype_name(d)) == d);
  for (CorruptionCategory c : kAllCategories) {
    CHECK(category_from_name(category_name(c)) == c);
  }
  CHECK_THROWS_AS(dtype_from_name("FP64"), UnknownDtype);
}
