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
#include <random>
#include <string>
#include <vector>

#include "sdcforge/image.hpp"
#include "sdcforge/profile.hpp"

namespace sdcforge {

struct InjectionEvent {
  uint64_t element_index = 0;
  uint32_t lane = 0;
  CorruptionCategory category = CorruptionCategory::NonSpecial;
  uint32_t xor_mask = 0;
  uint32_t retries_used = 0;

  bool operator==(const InjectionEvent&) const = default;
};

// Audit trail of one injection run; indices are unique and ascending.
struct InjectionLog {
  uint64_t seed = 0;
  ProfileContext context;
  std::string profile_hash;
  std::array<uint64_t, kCategoryCount> category_totals{};
  uint64_t skipped_unobservable = 0;
  std::vector<InjectionEvent> events;

  uint64_t category_total(CorruptionCategory c) const {
    return category_totals[static_cast<std::size_t>(c)];
  }

  bool operator==(const InjectionLog&) const = default;
};

struct ChunkRange {
  uint64_t begin = 0;
  uint64_t end = 0;

  bool operator==(const ChunkRange&) const = default;
};

// Consecutive warp-sized half-open ranges covering [0, element_count);
// the last one may be short.
std::vector<ChunkRange> plan_chunks(uint64_t element_count, unsigned warp_size);

// One Bernoulli trial for the element at `lane`: a single uniform draw
// against the cumulative per-category rates r * category_dist(c) * W *
// w_c(lane). Throws RateOverflow when those rates sum past 1 for this lane.
std::optional<CorruptionCategory> sample_event(const ErrorProfile& profile,
                                               unsigned lane,
                                               std::mt19937_64& rng);

struct MaskDraw {
  uint32_t xor_mask = 0;
  uint32_t retries_used = 0;
};

// Count-first mask sampling: k ~ q, then k distinct bit positions weighted
// by p[] without replacement. Positions are re-drawn (up to 16 times) while
// the flipped value would be all-zero or special; after that a single bit is
// forced in (or dropped) to land on a plain bit-flip value.
MaskDraw sample_nonspecial_mask(const ErrorProfile& profile, DType dtype,
                                uint32_t golden_bits, std::mt19937_64& rng);

struct InjectOptions {
  unsigned threads = 0;  // 0 = one per hardware thread
};

struct InjectResult {
  MemoryImage corrupted;
  InjectionLog log;
};

// Plays a profile back over an image. Deterministic in (image, profile,
// seed) regardless of thread count: every chunk draws from its own rng
// substream keyed by (seed, chunk_index). Categories that cannot be
// observed against the local golden value (for example nullifying an
// already-zero word) are skipped and counted, not re-rolled.
InjectResult inject(const MemoryImage& image, const ErrorProfile& profile,
                    uint64_t seed, const InjectOptions& options = {});

std::string log_to_json(const InjectionLog& log);
InjectionLog log_from_json(const std::string& text);
void save_log(const InjectionLog& log, const std::string& path);
InjectionLog load_log(const std::string& path);

}  // namespace sdcforge
