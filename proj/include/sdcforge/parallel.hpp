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
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace sdcforge {

// Worker count for internal parallelism. SDC_FORGE_THREADS caps it; unset,
// zero, or unparseable means one worker per hardware thread.
inline unsigned thread_budget() {
  unsigned n = 0;
  if (const char* env = std::getenv("SDC_FORGE_THREADS")) {
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0') n = static_cast<unsigned>(parsed);
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  return n == 0 ? 1u : n;
}

// Splits [0, count) into at most `threads` contiguous slices and runs
// fn(slice_index, begin, end) on each, slice 0 on the calling thread.
template <typename Fn>
void parallel_slices(uint64_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = 1;
  if (count < threads) threads = count == 0 ? 1 : static_cast<unsigned>(count);
  const uint64_t base = count / threads;
  const uint64_t extra = count % threads;
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  uint64_t begin = 0;
  std::vector<std::pair<uint64_t, uint64_t>> slices(threads);
  for (unsigned s = 0; s < threads; ++s) {
    const uint64_t len = base + (s < extra ? 1 : 0);
    slices[s] = {begin, begin + len};
    begin += len;
  }
  for (unsigned s = 1; s < threads; ++s) {
    pool.emplace_back([&fn, s, &slices] { fn(s, slices[s].first, slices[s].second); });
  }
  fn(0u, slices[0].first, slices[0].second);
  for (std::thread& t : pool) t.join();
}

}  // namespace sdcforge
