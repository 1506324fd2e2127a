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

#include "sdcforge/image.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sdcforge {

namespace {

uint32_t load_le(const std::byte* p, unsigned nbytes) {
  uint32_t w = 0;
  for (unsigned i = 0; i < nbytes; ++i) {
    w |= static_cast<uint32_t>(std::to_integer<uint8_t>(p[i])) << (8 * i);
  }
  return w;
}

void store_le(std::byte* p, uint32_t w, unsigned nbytes) {
  for (unsigned i = 0; i < nbytes; ++i) {
    p[i] = static_cast<std::byte>((w >> (8 * i)) & 0xFFu);
  }
}

DiffRecord make_record(uint64_t index, uint32_t golden, uint32_t corrupted,
                       DType dtype, unsigned warp_size) {
  DiffRecord rec;
  rec.element_index = index;
  rec.golden_bits = golden;
  rec.corrupted_bits = corrupted;
  rec.xor_mask = golden ^ corrupted;
  rec.category = classify_value(golden, corrupted, dtype);
  rec.flip_count = static_cast<uint8_t>(std::popcount(rec.xor_mask));
  rec.lane = static_cast<uint8_t>(index % warp_size);
  return rec;
}

}  // namespace

MemoryImage::MemoryImage(DType dtype, uint64_t element_count, ImageMeta meta)
    : meta_(std::move(meta)) {
  meta_.dtype = dtype;
  meta_.element_count = element_count;
  if (meta_.warp_size < 1) {
    throw InvariantViolation("warp size must be >= 1");
  }
  element_bytes_ = width_bytes_of(dtype);
  data_.assign(element_count * element_bytes_, std::byte{0});
}

uint32_t MemoryImage::get(uint64_t index) const {
  return load_le(data_.data() + index * element_bytes_, element_bytes_);
}

void MemoryImage::set(uint64_t index, uint32_t word) {
  store_le(data_.data() + index * element_bytes_, word, element_bytes_);
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Hang:
      return "Hang";
    case Outcome::DUE:
      return "DUE";
    case Outcome::Benign:
      return "Benign";
    case Outcome::SDC:
      return "SDC";
  }
  return "?";
}

void store_sidecar(const ImageMeta& meta, const std::string& payload_path) {
  std::ofstream out(payload_path + ".meta");
  if (!out) throw IoError("cannot write " + payload_path + ".meta");
  out << "dtype " << dtype_name(meta.dtype) << "\n";
  out << "element_count " << meta.element_count << "\n";
  out << "warp_size " << meta.warp_size << "\n";
  if (!meta.benchmark_id.empty()) out << "benchmark_id " << meta.benchmark_id << "\n";
  if (!meta.hardware_unit.empty()) out << "hardware_unit " << meta.hardware_unit << "\n";
  if (!meta.source.empty()) out << "source " << meta.source << "\n";
}

ImageMeta load_sidecar(const std::string& payload_path) {
  std::ifstream in(payload_path + ".meta");
  if (!in) throw IoError("cannot read " + payload_path + ".meta");
  ImageMeta meta;
  bool saw_dtype = false, saw_count = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::string value;
    std::getline(fields, value);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    if (key == "dtype") {
      meta.dtype = dtype_from_name(value);
      saw_dtype = true;
    } else if (key == "element_count") {
      meta.element_count = std::stoull(value);
      saw_count = true;
    } else if (key == "warp_size") {
      meta.warp_size = static_cast<unsigned>(std::stoul(value));
    } else if (key == "benchmark_id") {
      meta.benchmark_id = value;
    } else if (key == "hardware_unit") {
      meta.hardware_unit = value;
    } else if (key == "source") {
      meta.source = value;
    }
  }
  if (!saw_dtype || !saw_count) {
    throw IoError("sidecar " + payload_path + ".meta lacks dtype/element_count");
  }
  if (meta.warp_size < 1) throw InvariantViolation("warp size must be >= 1");
  return meta;
}

void store_image(const MemoryImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(image.bytes().data()),
            static_cast<std::streamsize>(image.bytes().size()));
  if (!out) throw IoError("short write to " + path);
  store_sidecar(image.meta(), path);
}

MemoryImage load_image(const std::string& path, const ImageMeta& meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  const auto file_size = std::filesystem::file_size(path);
  const uint64_t expected =
      meta.element_count * width_bytes_of(meta.dtype);
  if (file_size != expected) {
    throw SizeMismatch(path + ": file is " + std::to_string(file_size) +
                       " bytes, expected " + std::to_string(expected) + " (" +
                       std::to_string(meta.element_count) + " x " +
                       std::string(dtype_name(meta.dtype)) + ")");
  }
  MemoryImage image(meta.dtype, meta.element_count, meta);
  in.read(reinterpret_cast<char*>(image.bytes().data()),
          static_cast<std::streamsize>(expected));
  if (static_cast<uint64_t>(in.gcount()) != expected) {
    throw IoError("short read from " + path);
  }
  return image;
}

MemoryImage load_image(const std::string& path) {
  return load_image(path, load_sidecar(path));
}

std::vector<DiffRecord> diff_images(const MemoryImage& golden,
                                    const MemoryImage& corrupted) {
  if (golden.dtype() != corrupted.dtype() ||
      golden.size() != corrupted.size() ||
      golden.warp_size() != corrupted.warp_size()) {
    throw ShapeMismatch("images disagree on dtype, element count, or warp size");
  }
  std::vector<DiffRecord> records;
  const unsigned W = golden.warp_size();
  const DType dtype = golden.dtype();
  for (uint64_t i = 0; i < golden.size(); ++i) {
    const uint32_t g = golden.get(i);
    const uint32_t c = corrupted.get(i);
    if (g != c) records.push_back(make_record(i, g, c, dtype, W));
  }
  return records;
}

uint64_t diff_files(const std::string& golden_path,
                    const std::string& corrupted_path, const ImageMeta& meta,
                    const DiffSink& sink, uint64_t window_elements) {
  const unsigned nbytes = width_bytes_of(meta.dtype);
  const uint64_t expected = meta.element_count * nbytes;
  for (const std::string& path : {golden_path, corrupted_path}) {
    const auto file_size = std::filesystem::file_size(path);
    if (file_size != expected) {
      throw SizeMismatch(path + ": file is " + std::to_string(file_size) +
                         " bytes, expected " + std::to_string(expected));
    }
  }
  std::ifstream golden(golden_path, std::ios::binary);
  std::ifstream corrupted(corrupted_path, std::ios::binary);
  if (!golden || !corrupted) throw IoError("cannot open image pair");

  std::vector<std::byte> gwin(window_elements * nbytes);
  std::vector<std::byte> cwin(window_elements * nbytes);
  uint64_t diff_count = 0;
  uint64_t base = 0;
  while (base < meta.element_count) {
    const uint64_t n = std::min<uint64_t>(window_elements,
                                          meta.element_count - base);
    golden.read(reinterpret_cast<char*>(gwin.data()),
                static_cast<std::streamsize>(n * nbytes));
    corrupted.read(reinterpret_cast<char*>(cwin.data()),
                   static_cast<std::streamsize>(n * nbytes));
    if (static_cast<uint64_t>(golden.gcount()) != n * nbytes ||
        static_cast<uint64_t>(corrupted.gcount()) != n * nbytes) {
      throw IoError("short read while diffing");
    }
    // Fast reject on whole-window equality; the common case is few diffs.
    if (std::memcmp(gwin.data(), cwin.data(), n * nbytes) != 0) {
      for (uint64_t i = 0; i < n; ++i) {
        const uint32_t g = load_le(gwin.data() + i * nbytes, nbytes);
        const uint32_t c = load_le(cwin.data() + i * nbytes, nbytes);
        if (g != c) {
          ++diff_count;
          if (sink) {
            sink(make_record(base + i, g, c, meta.dtype, meta.warp_size));
          }
        }
      }
    }
    base += n;
  }
  return diff_count;
}

Outcome classify_outcome(const RunMeta& run, uint64_t diff_count) {
  if (run.runtime.count() <= 0 || run.fault_free_runtime.count() <= 0) {
    throw InvariantViolation("runtimes must be positive");
  }
  if (run.runtime > 2 * run.fault_free_runtime) return Outcome::Hang;
  if (run.due_flag) return Outcome::DUE;
  return diff_count == 0 ? Outcome::Benign : Outcome::SDC;
}

}  // namespace sdcforge
