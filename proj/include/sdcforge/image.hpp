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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdcforge/formats.hpp"

namespace sdcforge {

// Sidecar metadata for an image payload. Addresses are element indices at the
// declared width; payload words are little-endian.
struct ImageMeta {
  DType dtype = DType::FP32;
  uint64_t element_count = 0;
  unsigned warp_size = 32;
  std::string benchmark_id;
  std::string hardware_unit;
  std::string source;
};

// Typed contiguous output buffer. Elements are stored packed at the format's
// byte width; get/set move whole words.
class MemoryImage {
 public:
  MemoryImage() = default;
  MemoryImage(DType dtype, uint64_t element_count, ImageMeta meta = {});

  DType dtype() const { return meta_.dtype; }
  uint64_t size() const { return meta_.element_count; }
  unsigned warp_size() const { return meta_.warp_size; }
  unsigned element_bytes() const { return element_bytes_; }

  const ImageMeta& meta() const { return meta_; }
  ImageMeta& meta() { return meta_; }

  uint32_t get(uint64_t index) const;
  void set(uint64_t index, uint32_t word);

  const std::vector<std::byte>& bytes() const { return data_; }
  std::vector<std::byte>& bytes() { return data_; }

  bool operator==(const MemoryImage& other) const {
    return meta_.dtype == other.meta_.dtype &&
           meta_.element_count == other.meta_.element_count &&
           data_ == other.data_;
  }

 private:
  ImageMeta meta_;
  unsigned element_bytes_ = 4;
  std::vector<std::byte> data_;
};

// One corrupted element. lane == element_index mod W; xor_mask != 0.
struct DiffRecord {
  uint64_t element_index = 0;
  uint32_t golden_bits = 0;
  uint32_t corrupted_bits = 0;
  uint32_t xor_mask = 0;
  CorruptionCategory category = CorruptionCategory::NonSpecial;
  uint8_t flip_count = 0;
  uint8_t lane = 0;
};

struct RunMeta {
  std::chrono::duration<double> runtime{1.0};
  std::chrono::duration<double> fault_free_runtime{1.0};
  bool due_flag = false;
};

enum class Outcome : uint8_t { Hang, DUE, Benign, SDC };

std::string_view outcome_name(Outcome o);

// Payload is `<path>`; sidecar is `<path>.meta` (key value per line).
void store_image(const MemoryImage& image, const std::string& path);
MemoryImage load_image(const std::string& path);
MemoryImage load_image(const std::string& path, const ImageMeta& meta);

ImageMeta load_sidecar(const std::string& payload_path);
void store_sidecar(const ImageMeta& meta, const std::string& payload_path);

// One record per mismatching index, ascending. Categories come from
// classify_value on the corrupted word; ShapeMismatch when dtype, element
// count, or warp size disagree.
std::vector<DiffRecord> diff_images(const MemoryImage& golden,
                                    const MemoryImage& corrupted);

using DiffSink = std::function<void(const DiffRecord&)>;

/// Streaming variant for large images: reads both payloads in fixed windows
// of `window_elements`, never materializing either image. Returns the number
// of differing elements.
uint64_t diff_files(const std::string& golden_path,
                    const std::string& corrupted_path, const ImageMeta& meta,
                    const DiffSink& sink, uint64_t window_elements = 1u << 20);

// Hang if runtime > 2x fault-free, else DUE if flagged, else Benign on an
// empty diff, else SDC. Priority is exactly that order.
Outcome classify_outcome(const RunMeta& run, uint64_t diff_count);

}  // namespace sdcforge
