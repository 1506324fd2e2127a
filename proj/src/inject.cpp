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

#include "sdcforge/inject.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "sdcforge/parallel.hpp"
#include "sdcforge/rng.hpp"

namespace sdcforge {

namespace {

using nlohmann::json;

constexpr unsigned kMaxMaskRedraws = 16;

// rate_c(lane) for every category, in enum order.
std::array<double, kCategoryCount> lane_rates(const ErrorProfile& profile,
                                              unsigned lane) {
  std::array<double, kCategoryCount> rates{};
  const double w_scale =
      profile.corruption_rate * static_cast<double>(profile.warp_size);
  for (CorruptionCategory c : kAllCategories) {
    const auto& weights = profile.lanes(c);
    if (!weights) continue;
    rates[static_cast<std::size_t>(c)] =
        w_scale * profile.category_probability(c) * (*weights)[lane];
  }
  return rates;
}

void check_lane_budget(const std::array<double, kCategoryCount>& rates,
                       unsigned lane) {
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  if (total > 1.0) {
    throw RateOverflow("lane " + std::to_string(lane) +
                       " asks for total rate " + std::to_string(total) +
                       "; per-element sampling needs <= 1");
  }
}

std::optional<CorruptionCategory> draw_category(
    const std::array<double, kCategoryCount>& rates, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  for (CorruptionCategory c : kAllCategories) {
    cum += rates[static_cast<std::size_t>(c)];
    if (u < cum) return c;
  }
  return std::nullopt;
}

// True when golden ^ mask is a plain bit-flip value: nonzero, not special.
bool mask_is_plain(uint32_t golden_bits, uint32_t mask, DType dtype,
                   uint32_t word_mask) {
  mask &= word_mask;
  if (mask == 0) return false;
  const uint32_t corrupted = (golden_bits ^ mask) & word_mask;
  if (corrupted == 0) return false;
  return !special_of(corrupted, dtype).has_value();
}

unsigned draw_flip_count(const std::vector<double>& count_dist,
                         std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  unsigned last_positive = 1;
  for (unsigned k = 1; k <= count_dist.size(); ++k) {
    const double q = count_dist[k - 1];
    if (q > 0.0) last_positive = k;
    cum += q;
    if (u < cum) return k;
  }
  return last_positive;  // u fell into the 1e-9 rounding slack
}

uint32_t draw_positions(const std::vector<double>& position_rate,
                        unsigned width, unsigned k, std::mt19937_64& rng) {
  uint32_t mask = 0;
  std::array<unsigned, 32> avail;
  for (unsigned b = 0; b < width; ++b) avail[b] = b;
  unsigned avail_count = width;
  for (unsigned draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (unsigned i = 0; i < avail_count; ++i) total += position_rate[avail[i]];
    unsigned pick = 0;
    if (total > 0.0) {
      const double u = uniform01(rng) * total;
      double cum = 0.0;
      pick = avail_count - 1;
      for (unsigned i = 0; i < avail_count; ++i) {
        cum += position_rate[avail[i]];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<unsigned>(uniform_below(rng, avail_count));
    }
    mask |= 1u << avail[pick];
    avail[pick] = avail[--avail_count];
  }
  return mask;
}

// Bits of `candidates`, cheapest position-weight first (ties by index).
std::vector<unsigned> bits_by_weight(uint32_t candidates,
                                     const std::vector<double>& position_rate) {
  std::vector<unsigned> bits;
  while (candidates != 0) {
    bits.push_back(static_cast<unsigned>(std::countr_zero(candidates)));
    candidates &= candidates - 1;
  }
  std::stable_sort(bits.begin(), bits.end(), [&](unsigned a, unsigned b) {
    return position_rate[a] < position_rate[b];
  });
  return bits;
}

json event_to_json(const InjectionEvent& e) {
  json j;
  j["index"] = e.element_index;
  j["lane"] = e.lane;
  j["category"] = std::string(category_name(e.category));
  j["xor_mask"] = e.xor_mask;
  j["retries"] = e.retries_used;
  return j;
}

}  // namespace

std::vector<ChunkRange> plan_chunks(uint64_t element_count,
                                    unsigned warp_size) {
  if (warp_size < 1) throw InvariantViolation("warp size must be >= 1");
  std::vector<ChunkRange> chunks;
  chunks.reserve((element_count + warp_size - 1) / warp_size);
  for (uint64_t begin = 0; begin < element_count; begin += warp_size) {
    chunks.push_back({begin, std::min(element_count, begin + warp_size)});
  }
  return chunks;
}

std::optional<CorruptionCategory> sample_event(const ErrorProfile& profile,
                                               unsigned lane,
                                               std::mt19937_64& rng) {
  if (lane >= profile.warp_size) {
    throw InvariantViolation("lane outside [0, warp_size)");
  }
  const auto rates = lane_rates(profile, lane);
  check_lane_budget(rates, lane);
  return draw_category(rates, rng);
}

MaskDraw sample_nonspecial_mask(const ErrorProfile& profile, DType dtype,
                                uint32_t golden_bits, std::mt19937_64& rng) {
  if (!profile.bit_model) {
    throw InvariantViolation("profile carries no bit model");
  }
  const FormatLayout& layout = layout_of(dtype);
  const unsigned width = layout.width_bits;
  const uint32_t word_mask = layout.word_mask();
  const unsigned k = draw_flip_count(profile.bit_model->count_dist, rng);

  MaskDraw out;
  out.xor_mask =
      draw_positions(profile.bit_model->position_rate, width, k, rng);
  while (!mask_is_plain(golden_bits, out.xor_mask, dtype, word_mask)) {
    if (out.retries_used == kMaxMaskRedraws) {
      // Nudge the stuck mask by one bit instead: first try switching on the
      // cheapest admissible unused bit, then try dropping one.
      for (unsigned bit : bits_by_weight(~out.xor_mask & word_mask,
                                         profile.bit_model->position_rate)) {
        if (mask_is_plain(golden_bits, out.xor_mask | (1u << bit), dtype,
                          word_mask)) {
          out.xor_mask |= 1u << bit;
          return out;
        }
      }
      for (unsigned bit :
           bits_by_weight(out.xor_mask, profile.bit_model->position_rate)) {
        if (mask_is_plain(golden_bits, out.xor_mask & ~(1u << bit), dtype,
                          word_mask)) {
          out.xor_mask &= ~(1u << bit);
          return out;
        }
      }
      throw NoAdmissibleMask("no single-bit change of the sampled mask "
                             "yields a plain bit-flip value");
    }
    ++out.retries_used;
    out.xor_mask =
        draw_positions(profile.bit_model->position_rate, width, k, rng);
  }
  return out;
}

InjectResult inject(const MemoryImage& image, const ErrorProfile& profile,
                    uint64_t seed, const InjectOptions& options) {
  profile.validate();
  if (image.dtype() != profile.context.dtype) {
    throw ContextMismatch("image dtype " +
                          std::string(dtype_name(image.dtype())) +
                          " vs profile dtype " +
                          std::string(dtype_name(profile.context.dtype)));
  }
  if (image.warp_size() != profile.warp_size) {
    throw ContextMismatch("image warp size " +
                          std::to_string(image.warp_size()) +
                          " vs profile warp size " +
                          std::to_string(profile.warp_size));
  }

  const unsigned W = profile.warp_size;
  std::vector<std::array<double, kCategoryCount>> rates(W);
  for (unsigned lane = 0; lane < W; ++lane) {
    rates[lane] = lane_rates(profile, lane);
    check_lane_budget(rates[lane], lane);
  }

  InjectResult result{image, InjectionLog{}};
  result.log.seed = seed;
  result.log.context = profile.context;
  result.log.profile_hash = profile.content_hash();

  const uint64_t chunk_count = (image.size() + W - 1) / W;
  unsigned threads = options.threads == 0 ? thread_budget() : options.threads;

  struct Partial {
    std::vector<InjectionEvent> events;
    std::array<uint64_t, kCategoryCount> totals{};
    uint64_t skipped = 0;
  };
  std::vector<Partial> partials(std::max(1u, threads));

  parallel_slices(chunk_count, threads, [&](unsigned slice, uint64_t first,
                                            uint64_t last) {
    Partial& local = partials[slice];
    for (uint64_t ci = first; ci < last; ++ci) {
      std::mt19937_64 rng = substream(seed, ci);
      const uint64_t begin = ci * W;
      const uint64_t end = std::min<uint64_t>(image.size(), begin + W);
      for (uint64_t index = begin; index < end; ++index) {
        const unsigned lane = static_cast<unsigned>(index - begin);
        const auto category = draw_category(rates[lane], rng);
        if (!category) continue;
        const uint32_t golden = image.get(index);
        InjectionEvent event;
        event.element_index = index;
        event.lane = lane;
        event.category = *category;
        if (*category == CorruptionCategory::NonSpecial) {
          const MaskDraw draw = sample_nonspecial_mask(
              profile, image.dtype(), golden, rng);
          event.xor_mask = draw.xor_mask;
          event.retries_used = draw.retries_used;
        } else {
          if (!is_observable(*category, golden, image.dtype())) {
            ++local.skipped;
            continue;
          }
          const uint32_t corrupted =
              make_corrupted(*category, golden, image.dtype(), rng());
          event.xor_mask = golden ^ corrupted;
        }
        result.corrupted.set(index, golden ^ event.xor_mask);
        ++local.totals[static_cast<std::size_t>(*category)];
        local.events.push_back(event);
      }
    }
  });

  std::size_t total_events = 0;
  for (const Partial& p : partials) total_events += p.events.size();
  result.log.events.reserve(total_events);
  for (Partial& p : partials) {
    result.log.events.insert(result.log.events.end(), p.events.begin(),
                             p.events.end());
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      result.log.category_totals[c] += p.totals[c];
    }
    result.log.skipped_unobservable += p.skipped;
  }
  return result;
}

std::string log_to_json(const InjectionLog& log) {
  json j;
  j["schema_version"] = kProfileSchemaVersion;
  j["seed"] = log.seed;
  json prof;
  prof["unit"] = std::string(unit_name(log.context.unit));
  prof["dtype"] = std::string(dtype_name(log.context.dtype));
  prof["kernel"] = log.context.kernel ? json(*log.context.kernel) : json(nullptr);
  prof["content_hash"] = log.profile_hash;
  j["profile"] = prof;
  json totals;
  for (CorruptionCategory c : kAllCategories) {
    totals[std::string(category_name(c))] = log.category_total(c);
  }
  j["totals"] = totals;
  j["skipped_unobservable"] = log.skipped_unobservable;
  json events = json::array();
  for (const InjectionEvent& e : log.events) events.push_back(event_to_json(e));
  j["events"] = events;
  return j.dump(2) + "\n";
}

InjectionLog log_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("log parse: ") + e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kProfileSchemaVersion) {
      throw SchemaVersionMismatch("log schema_version " +
                                  std::to_string(version));
    }
    InjectionLog log;
    log.seed = j.at("seed").get<uint64_t>();
    const json& prof = j.at("profile");
    log.context.unit = unit_from_name(prof.at("unit").get<std::string>());
    log.context.dtype = dtype_from_name(prof.at("dtype").get<std::string>());
    if (!prof.at("kernel").is_null()) {
      log.context.kernel = prof.at("kernel").get<std::string>();
    }
    log.profile_hash = prof.at("content_hash").get<std::string>();
    for (CorruptionCategory c : kAllCategories) {
      log.category_totals[static_cast<std::size_t>(c)] =
          j.at("totals").at(std::string(category_name(c))).get<uint64_t>();
    }
    log.skipped_unobservable = j.at("skipped_unobservable").get<uint64_t>();
    for (const json& e : j.at("events")) {
      InjectionEvent event;
      event.element_index = e.at("index").get<uint64_t>();
      event.lane = e.at("lane").get<uint32_t>();
      event.category = category_from_name(e.at("category").get<std::string>());
      event.xor_mask = e.at("xor_mask").get<uint32_t>();
      event.retries_used = e.at("retries").get<uint32_t>();
      log.events.push_back(event);
    }
    return log;
  } catch (const json::exception& e) {
    throw IoError(std::string("log fields: ") + e.what());
  }
}

void save_log(const InjectionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << log_to_json(log);
}

InjectionLog load_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return log_from_json(text);
}

}  // namespace sdcforge
