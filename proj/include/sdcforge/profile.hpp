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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdcforge/formats.hpp"
#include "sdcforge/image.hpp"

namespace sdcforge {

enum class HardwareUnit : uint8_t {
  CudaCoreControl1,
  CudaCoreControl2,
  TensorCore,
  ALU,
  L1Data,
  L1MissHandler,
  L1Tag,
  CudaCoreIO,
  Unattributed,
};

inline constexpr HardwareUnit kAllUnits[] = {
    HardwareUnit::CudaCoreControl1, HardwareUnit::CudaCoreControl2,
    HardwareUnit::TensorCore,       HardwareUnit::ALU,
    HardwareUnit::L1Data,           HardwareUnit::L1MissHandler,
    HardwareUnit::L1Tag,            HardwareUnit::CudaCoreIO,
    HardwareUnit::Unattributed,
};

std::string_view unit_name(HardwareUnit u);
HardwareUnit unit_from_name(std::string_view name);

// Profiles are keyed by hardware unit x storage dtype x (optional) kernel.
struct ProfileContext {
  HardwareUnit unit = HardwareUnit::Unattributed;
  DType dtype = DType::FP32;
  std::optional<std::string> kernel;

  bool operator==(const ProfileContext&) const = default;
};

// Bit-level model conditioned on NonSpecial corruptions: position_rate[b] is
// the probability that bit b flips in such a corruption, count_dist[k-1] the
// probability that exactly k bits flip.
struct BitModel {
  std::vector<double> position_rate;  // size width
  std::vector<double> count_dist;     // size width; index k-1 holds q[k]

  bool operator==(const BitModel&) const = default;
};

struct ErrorProfile {
  ProfileContext context;
  double corruption_rate = 0.0;
  std::array<double, kCategoryCount> category_dist{};
  std::optional<BitModel> bit_model;
  // Lane weights per category, each summing to 1; absent when unobserved.
  std::array<std::optional<std::vector<double>>, kCategoryCount> lane_weights;
  unsigned warp_size = 32;
  uint64_t sample_count = 0;

  double category_probability(CorruptionCategory c) const {
    return category_dist[static_cast<std::size_t>(c)];
  }
  const std::optional<std::vector<double>>& lanes(CorruptionCategory c) const {
    return lane_weights[static_cast<std::size_t>(c)];
  }

  // Enforces every profile invariant (sum tolerances 1e-9, ranges, integer
  // dtypes carrying no special-value mass, bit model presence matching the
  // NonSpecial mass). Throws InvariantViolation.
  void validate() const;

  // FNV-1a over the canonical serialization; stable across runs/platforms.
  std::string content_hash() const;

  bool operator==(const ErrorProfile&) const = default;
};

// Mergeable counter set; single-writer, combined across threads via merge.
class ProfileAccumulator {
 public:
  ProfileAccumulator() : ProfileAccumulator(ProfileContext{}, 32) {}
  ProfileAccumulator(ProfileContext context, unsigned warp_size);

  const ProfileContext& context() const { return context_; }
  unsigned warp_size() const { return warp_size_; }
  uint64_t element_total() const { return element_total_; }
  uint64_t corruption_total() const;
  uint64_t category_count(CorruptionCategory c) const {
    return category_counts_[static_cast<std::size_t>(c)];
  }
  const std::vector<uint64_t>& bit_position_counts() const {
    return bit_position_counts_;
  }
  const std::vector<uint64_t>& flip_count_counts() const {
    return flip_count_counts_;
  }
  const std::vector<uint64_t>& lane_counts(CorruptionCategory c) const {
    return lane_counts_[static_cast<std::size_t>(c)];
  }

  // Folds one extraction pass into the counters: every record bumps its
  // category and lane; only NonSpecial records feed the bit model.
  void observe(std::span<const DiffRecord> diffs, uint64_t element_count);
  void observe(const DiffRecord& record);
  void add_elements(uint64_t element_count) { element_total_ += element_count; }

  bool operator==(const ProfileAccumulator&) const = default;

  friend ProfileAccumulator merge(const ProfileAccumulator& a,
                                  const ProfileAccumulator& b);
  friend ErrorProfile finalize(const ProfileAccumulator& acc);
  friend void save_accumulator(const ProfileAccumulator& acc,
                               const std::string& path);
  friend ProfileAccumulator load_accumulator(const std::string& path);

 private:
  ProfileContext context_;
  unsigned warp_size_;
  unsigned width_;
  uint64_t element_total_ = 0;
  std::array<uint64_t, kCategoryCount> category_counts_{};
  std::vector<uint64_t> bit_position_counts_;  // size width
  std::vector<uint64_t> flip_count_counts_;    // size width+1, index k
  std::array<std::vector<uint64_t>, kCategoryCount> lane_counts_;
};

ProfileAccumulator merge(const ProfileAccumulator& a,
                         const ProfileAccumulator& b);

// Normalizes counters into a profile; EmptyAccumulator when no corruption
// was ever observed.
ErrorProfile finalize(const ProfileAccumulator& acc);

inline constexpr int kProfileSchemaVersion = 1;

void save_profile(const ErrorProfile& profile, const std::string& path);
ErrorProfile load_profile(const std::string& path);

std::string profile_to_json(const ErrorProfile& profile);
ErrorProfile profile_from_json(const std::string& text);

void save_accumulator(const ProfileAccumulator& acc, const std::string& path);
ProfileAccumulator load_accumulator(const std::string& path);

}  // namespace sdcforge
