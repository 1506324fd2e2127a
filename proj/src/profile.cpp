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

#include "sdcforge/profile.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace sdcforge {

namespace {

using nlohmann::json;

constexpr double kSumTolerance = 1e-9;

constexpr std::string_view kUnitNames[] = {
    "CudaCoreControl1", "CudaCoreControl2", "TensorCore",
    "ALU",              "L1Data",           "L1MissHandler",
    "L1Tag",            "CudaCoreIO",       "Unattributed",
};

bool sums_to_one(double total) { return std::abs(total - 1.0) <= kSumTolerance; }

void check_probability_vector(const std::vector<double>& v,
                              const std::string& what, bool must_sum_one) {
  double total = 0.0;
  for (double p : v) {
    if (!(p >= 0.0 && p <= 1.0) || std::isnan(p)) {
      throw InvariantViolation(what + " entry outside [0,1]");
    }
    total += p;
  }
  if (must_sum_one && !sums_to_one(total)) {
    throw InvariantViolation(what + " sums to " + std::to_string(total) +
                             ", expected 1");
  }
}

json context_to_json(const ProfileContext& ctx) {
  json j;
  j["unit"] = std::string(unit_name(ctx.unit));
  j["dtype"] = std::string(dtype_name(ctx.dtype));
  j["kernel"] = ctx.kernel ? json(*ctx.kernel) : json(nullptr);
  return j;
}

ProfileContext context_from_json(const json& j) {
  ProfileContext ctx;
  ctx.unit = unit_from_name(j.at("unit").get<std::string>());
  ctx.dtype = dtype_from_name(j.at("dtype").get<std::string>());
  if (j.contains("kernel") && !j.at("kernel").is_null()) {
    ctx.kernel = j.at("kernel").get<std::string>();
  }
  return ctx;
}

void check_schema(const json& j, const std::string& what) {
  const int version = j.at("schema_version").get<int>();
  if (version != kProfileSchemaVersion) {
    throw SchemaVersionMismatch(what + " schema_version " +
                                std::to_string(version) + ", this build reads " +
                                std::to_string(kProfileSchemaVersion));
  }
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return j;
}

void dump_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

uint64_t fnv1a64(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::string_view unit_name(HardwareUnit u) {
  return kUnitNames[static_cast<std::size_t>(u)];
}

HardwareUnit unit_from_name(std::string_view name) {
  for (HardwareUnit u : kAllUnits) {
    if (unit_name(u) == name) return u;
  }
  throw InvariantViolation("unknown hardware unit '" + std::string(name) + "'");
}

void ErrorProfile::validate() const {
  if (warp_size < 1) throw InvariantViolation("warp size must be >= 1");
  if (!(corruption_rate >= 0.0 && corruption_rate <= 1.0)) {
    throw InvariantViolation("corruption_rate outside [0,1]");
  }
  double cat_total = 0.0;
  for (double p : category_dist) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvariantViolation("category_dist entry outside [0,1]");
    }
    cat_total += p;
  }
  if (!sums_to_one(cat_total)) {
    throw InvariantViolation("category_dist sums to " +
                             std::to_string(cat_total) + ", expected 1");
  }
  if (layout_of(context.dtype).is_integer()) {
    if (category_probability(CorruptionCategory::NaN) != 0.0 ||
        category_probability(CorruptionCategory::PlusInf) != 0.0 ||
        category_probability(CorruptionCategory::MinusInf) != 0.0) {
      throw InvariantViolation("integer dtype with special-value mass");
    }
  }
  const unsigned width = width_bits_of(context.dtype);
  const double nonspecial = category_probability(CorruptionCategory::NonSpecial);
  if (nonspecial > 0.0 && !bit_model) {
    throw InvariantViolation("NonSpecial mass present but bit model absent");
  }
  if (bit_model) {
    if (bit_model->position_rate.size() != width ||
        bit_model->count_dist.size() != width) {
      throw InvariantViolation("bit model arrays must have one entry per bit");
    }
    check_probability_vector(bit_model->position_rate, "position_rate", false);
    check_probability_vector(bit_model->count_dist, "count_dist", true);
  }
  for (CorruptionCategory c : kAllCategories) {
    const auto& w = lanes(c);
    if (category_probability(c) > 0.0 && !w) {
      throw InvariantViolation(std::string(category_name(c)) +
                               " has mass but no lane weights");
    }
    if (w) {
      if (w->size() != warp_size) {
        throw InvariantViolation("lane weights must have warp_size entries");
      }
      check_probability_vector(*w, "lane weights", true);
    }
  }
}

std::string ErrorProfile::content_hash() const {
  const uint64_t h = fnv1a64(profile_to_json(*this));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

ProfileAccumulator::ProfileAccumulator(ProfileContext context,
                                       unsigned warp_size)
    : context_(std::move(context)),
      warp_size_(warp_size),
      width_(width_bits_of(context_.dtype)),
      bit_position_counts_(width_, 0),
      flip_count_counts_(width_ + 1, 0) {
  if (warp_size_ < 1) throw InvariantViolation("warp size must be >= 1");
  for (auto& lanes : lane_counts_) lanes.assign(warp_size_, 0);
}

uint64_t ProfileAccumulator::corruption_total() const {
  return std::accumulate(category_counts_.begin(), category_counts_.end(),
                         uint64_t{0});
}

void ProfileAccumulator::observe(const DiffRecord& record) {
  if (record.lane >= warp_size_ || record.flip_count > width_ ||
      record.flip_count == 0) {
    throw ContextMismatch("diff record does not fit this accumulator's "
                          "dtype/warp geometry");
  }
  const auto c = static_cast<std::size_t>(record.category);
  ++category_counts_[c];
  ++lane_counts_[c][record.lane];
  if (record.category == CorruptionCategory::NonSpecial) {
    ++flip_count_counts_[record.flip_count];
    uint32_t mask = record.xor_mask;
    while (mask != 0) {
      const unsigned b = static_cast<unsigned>(std::countr_zero(mask));
      ++bit_position_counts_[b];
      mask &= mask - 1;
    }
  }
}

void ProfileAccumulator::observe(std::span<const DiffRecord> diffs,
                                 uint64_t element_count) {
  element_total_ += element_count;
  for (const DiffRecord& record : diffs) observe(record);
}

ProfileAccumulator merge(const ProfileAccumulator& a,
                         const ProfileAccumulator& b) {
  if (a.context_ != b.context_ || a.warp_size_ != b.warp_size_) {
    throw ContextMismatch("accumulators have different contexts");
  }
  ProfileAccumulator out = a;
  out.element_total_ += b.element_total_;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    out.category_counts_[c] += b.category_counts_[c];
    for (unsigned lane = 0; lane < a.warp_size_; ++lane) {
      out.lane_counts_[c][lane] += b.lane_counts_[c][lane];
    }
  }
  for (unsigned bit = 0; bit < a.width_; ++bit) {
    out.bit_position_counts_[bit] += b.bit_position_counts_[bit];
  }
  for (unsigned k = 0; k <= a.width_; ++k) {
    out.flip_count_counts_[k] += b.flip_count_counts_[k];
  }
  return out;
}

ErrorProfile finalize(const ProfileAccumulator& acc) {
  const uint64_t corruptions = acc.corruption_total();
  if (corruptions == 0) {
    throw EmptyAccumulator("no corruptions observed; profile undefined");
  }
  ErrorProfile profile;
  profile.context = acc.context_;
  profile.warp_size = acc.warp_size_;
  profile.sample_count = corruptions;
  profile.corruption_rate =
      static_cast<double>(corruptions) / static_cast<double>(acc.element_total_);

  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    profile.category_dist[c] = static_cast<double>(acc.category_counts_[c]) /
                               static_cast<double>(corruptions);
    const uint64_t cat_count = acc.category_counts_[c];
    if (cat_count > 0) {
      std::vector<double> lanes(acc.warp_size_);
      for (unsigned lane = 0; lane < acc.warp_size_; ++lane) {
        lanes[lane] = static_cast<double>(acc.lane_counts_[c][lane]) /
                      static_cast<double>(cat_count);
      }
      profile.lane_weights[c] = std::move(lanes);
    }
  }

  const uint64_t nonspecial = acc.category_count(CorruptionCategory::NonSpecial);
  if (nonspecial > 0) {
    BitModel model;
    model.position_rate.resize(acc.width_);
    model.count_dist.resize(acc.width_);
    for (unsigned bit = 0; bit < acc.width_; ++bit) {
      model.position_rate[bit] =
          static_cast<double>(acc.bit_position_counts_[bit]) /
          static_cast<double>(nonspecial);
    }
    for (unsigned k = 1; k <= acc.width_; ++k) {
      model.count_dist[k - 1] =
          static_cast<double>(acc.flip_count_counts_[k]) /
          static_cast<double>(nonspecial);
    }
    profile.bit_model = std::move(model);
  }
  return profile;
}

std::string profile_to_json(const ErrorProfile& profile) {
  json j;
  j["schema_version"] = kProfileSchemaVersion;
  j["context"] = context_to_json(profile.context);
  j["corruption_rate"] = profile.corruption_rate;
  json cats;
  for (CorruptionCategory c : kAllCategories) {
    cats[std::string(category_name(c))] = profile.category_probability(c);
  }
  j["category_dist"] = cats;
  if (profile.bit_model) {
    j["bit_model"] = {{"position_rate", profile.bit_model->position_rate},
                      {"count_dist", profile.bit_model->count_dist}};
  }
  json spatial = json::object();
  for (CorruptionCategory c : kAllCategories) {
    if (profile.lanes(c)) {
      spatial[std::string(category_name(c))] = *profile.lanes(c);
    }
  }
  j["spatial_model"] = spatial;
  j["warp_size"] = profile.warp_size;
  j["sample_count"] = profile.sample_count;
  return j.dump();
}

ErrorProfile profile_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("profile parse: ") + e.what());
  }
  try {
    check_schema(j, "profile");
    ErrorProfile profile;
    profile.context = context_from_json(j.at("context"));
    profile.corruption_rate = j.at("corruption_rate").get<double>();
    for (CorruptionCategory c : kAllCategories) {
      profile.category_dist[static_cast<std::size_t>(c)] =
          j.at("category_dist").at(std::string(category_name(c))).get<double>();
    }
    if (j.contains("bit_model") && !j.at("bit_model").is_null()) {
      BitModel model;
      model.position_rate =
          j.at("bit_model").at("position_rate").get<std::vector<double>>();
      model.count_dist =
          j.at("bit_model").at("count_dist").get<std::vector<double>>();
      profile.bit_model = std::move(model);
    }
    profile.warp_size = j.at("warp_size").get<unsigned>();
    profile.sample_count = j.at("sample_count").get<uint64_t>();
    const json& spatial = j.at("spatial_model");
    for (CorruptionCategory c : kAllCategories) {
      const std::string key(category_name(c));
      if (spatial.contains(key)) {
        profile.lane_weights[static_cast<std::size_t>(c)] =
            spatial.at(key).get<std::vector<double>>();
      }
    }
    profile.validate();
    return profile;
  } catch (const json::exception& e) {
    throw IoError(std::string("profile fields: ") + e.what());
  }
}

void save_profile(const ErrorProfile& profile, const std::string& path) {
  profile.validate();
  dump_file(json::parse(profile_to_json(profile)), path);
}

ErrorProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return profile_from_json(text);
}

void save_accumulator(const ProfileAccumulator& acc, const std::string& path) {
  json j;
  j["schema_version"] = kProfileSchemaVersion;
  j["kind"] = "accumulator";
  j["context"] = context_to_json(acc.context_);
  j["warp_size"] = acc.warp_size_;
  j["element_total"] = acc.element_total_;
  json cats;
  for (CorruptionCategory c : kAllCategories) {
    cats[std::string(category_name(c))] = acc.category_count(c);
  }
  j["category_counts"] = cats;
  j["bit_position_counts"] = acc.bit_position_counts_;
  j["flip_count_counts"] = acc.flip_count_counts_;
  json lanes = json::object();
  for (CorruptionCategory c : kAllCategories) {
    lanes[std::string(category_name(c))] =
        acc.lane_counts_[static_cast<std::size_t>(c)];
  }
  j["lane_counts"] = lanes;
  dump_file(j, path);
}

ProfileAccumulator load_accumulator(const std::string& path) {
  const json j = parse_file(path);
  try {
    check_schema(j, "accumulator");
    if (j.value("kind", "") != "accumulator") {
      throw IoError(path + " is not an accumulator file");
    }
    ProfileAccumulator acc(context_from_json(j.at("context")),
                           j.at("warp_size").get<unsigned>());
    acc.element_total_ = j.at("element_total").get<uint64_t>();
    for (CorruptionCategory c : kAllCategories) {
      acc.category_counts_[static_cast<std::size_t>(c)] =
          j.at("category_counts").at(std::string(category_name(c)))
              .get<uint64_t>();
      acc.lane_counts_[static_cast<std::size_t>(c)] =
          j.at("lane_counts").at(std::string(category_name(c)))
              .get<std::vector<uint64_t>>();
      if (acc.lane_counts_[static_cast<std::size_t>(c)].size() !=
          acc.warp_size_) {
        throw InvariantViolation("lane count arrays must have warp_size entries");
      }
    }
    acc.bit_position_counts_ =
        j.at("bit_position_counts").get<std::vector<uint64_t>>();
    acc.flip_count_counts_ =
        j.at("flip_count_counts").get<std::vector<uint64_t>>();
    if (acc.bit_position_counts_.size() != acc.width_ ||
        acc.flip_count_counts_.size() != acc.width_ + 1) {
      throw InvariantViolation("bit counter arrays do not match dtype width");
    }
    return acc;
  } catch (const json::exception& e) {
    throw IoError(std::string("accumulator fields: ") + e.what());
  }
}

}  // namespace sdcforge
