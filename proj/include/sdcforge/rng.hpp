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
#include <random>

namespace sdcforge {

// splitmix64 finalizer; stateless, used only to key substreams.
constexpr uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr uint64_t mix64(uint64_t a, uint64_t b) {
  return mix64(mix64(a) ^ mix64(b ^ 0xD1B54A32D192ED03ull));
}

// Substream engine keyed by (seed, stream). Identical keys give identical
// sequences on every platform; injection relies on this for order-independent
// determinism across thread counts.
inline std::mt19937_64 substream(uint64_t seed, uint64_t stream) {
  return std::mt19937_64(mix64(seed, stream));
}

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) via rejection-free scaling; n must be > 0 and
// far below 2^53, which holds for every lane/bit-position use here.
inline uint64_t uniform_below(std::mt19937_64& eng, uint64_t n) {
  return static_cast<uint64_t>(uniform01(eng) * static_cast<double>(n)) % n;
}

}  // namespace sdcforge
