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

#include "sdcforge/synth.hpp"

#include <bit>
#include <cmath>

#include "sdcforge/fpmath.hpp"

namespace sdcforge {

namespace {

constexpr uint32_t kStreamSalt = 0x9E3779B9u;
constexpr unsigned kElementRedraws = 64;
constexpr unsigned kNudgeCap = 1u << 16;

constexpr std::string_view kUnitKindNames[] = {"alu", "tensor", "mem"};
constexpr std::string_view kGeneratorNames[] = {"mt", "lfsr", "utp"};
constexpr std::string_view kOperationNames[] = {"add",  "mult",   "fma",
                                                "gemm", "gemm_a", "gemm_m"};

bool is_kernel_dtype(DType dtype) {
  switch (dtype) {
    case DType::FP32:
    case DType::FP16:
    case DType::BF16:
    case DType::TF32:
    case DType::UINT8:
    case DType::UINT32:
      return true;
    default:
      return false;
  }
}

// Storage word usable as a golden element: nonzero and not special.
bool observable_word(uint32_t word, DType storage) {
  if (word == 0) return false;
  return !special_of(word, storage).has_value();
}

double round_to(double value, DType dtype) {
  return decode_bits(encode_bits(value, dtype), dtype);
}

uint32_t int_scalar(double value, DType dtype) {
  const auto v = static_cast<uint64_t>(std::llround(value));
  return dtype == DType::UINT8 ? static_cast<uint32_t>(v & 0xFFu)
                               : static_cast<uint32_t>(v);
}

std::vector<double> uniform_lanes(unsigned warp_size) {
  return std::vector<double>(warp_size, 1.0 / warp_size);
}

std::vector<double> support_lanes(unsigned warp_size,
                                  std::initializer_list<unsigned> support) {
  std::vector<double> lanes(warp_size, 0.0);
  for (unsigned lane : support) lanes[lane] = 1.0 / support.size();
  return lanes;
}

// q concentrated at k=1, p falling linearly from the LSB; sum(p) matches
// the mean flip count of 1 so the marginals are mutually consistent.
BitModel single_bit_model(unsigned width) {
  BitModel model;
  model.count_dist.assign(width, 0.0);
  model.count_dist[0] = 1.0;
  model.position_rate.resize(width);
  const double total = width * (width + 1) / 2.0;
  for (unsigned b = 0; b < width; ++b) {
    model.position_rate[b] = (width - b) / total;
  }
  return model;
}

// Single-bit mass 0.38; the multi-bit remainder decays geometrically over
// k=2..8. p falls linearly from the LSB, scaled so sum(p) equals E[k].
BitModel aggregate_bit_model(unsigned width) {
  BitModel model;
  model.count_dist.assign(width, 0.0);
  model.count_dist[0] = 0.38;
  double shape_total = 0.0;
  for (unsigned k = 2; k <= 8; ++k) shape_total += std::ldexp(1.0, 2 - k);
  for (unsigned k = 2; k <= 8; ++k) {
    model.count_dist[k - 1] = 0.62 * std::ldexp(1.0, 2 - k) / shape_total;
  }
  double mean_flips = 0.0;
  for (unsigned k = 1; k <= width; ++k) {
    mean_flips += k * model.count_dist[k - 1];
  }
  model.position_rate.resize(width);
  const double total = width * (width + 1) / 2.0;
  for (unsigned b = 0; b < width; ++b) {
    model.position_rate[b] = (width - b) * mean_flips / total;
  }
  return model;
}

void set_category(ErrorProfile& profile, CorruptionCategory c, double mass,
                  std::vector<double> lanes) {
  profile.category_dist[static_cast<std::size_t>(c)] = mass;
  if (mass > 0.0) {
    profile.lane_weights[static_cast<std::size_t>(c)] = std::move(lanes);
  }
}

ErrorProfile aggregate_fixture(DType dtype) {
  ErrorProfile profile;
  profile.context = {HardwareUnit::Unattributed, dtype, std::nullopt};
  profile.warp_size = 32;
  profile.corruption_rate = 0.1;
  profile.sample_count = 600000000;
  set_category(profile, CorruptionCategory::Nullified, 0.5068,
               uniform_lanes(32));
  set_category(profile, CorruptionCategory::NaN, 0.0039, uniform_lanes(32));
  set_category(profile, CorruptionCategory::PlusInf, 0.0049,
               uniform_lanes(32));
  set_category(profile, CorruptionCategory::MinusInf, 0.0013,
               uniform_lanes(32));
  set_category(profile, CorruptionCategory::NonSpecial, 0.4831,
               uniform_lanes(32));
  profile.bit_model = aggregate_bit_model(width_bits_of(dtype));
  return profile;
}

ErrorProfile monotone_fixture() {
  ErrorProfile profile;
  profile.context = {HardwareUnit::Unattributed, DType::FP32, std::nullopt};
  profile.warp_size = 32;
  profile.corruption_rate = 0.1;
  profile.sample_count = 1000000;
  set_category(profile, CorruptionCategory::NonSpecial, 1.0,
               uniform_lanes(32));
  profile.bit_model = single_bit_model(32);
  return profile;
}

ErrorProfile l1miss_fixture() {
  ErrorProfile profile;
  profile.context = {HardwareUnit::L1MissHandler, DType::FP32, std::nullopt};
  profile.warp_size = 32;
  profile.corruption_rate = 0.08;
  profile.sample_count = 1000000;
  set_category(profile, CorruptionCategory::Nullified, 0.3,
               support_lanes(32, {0, 16}));
  set_category(profile, CorruptionCategory::NonSpecial, 0.7,
               support_lanes(32, {0, 8, 16, 24}));
  profile.bit_model = single_bit_model(32);
  return profile;
}

}  // namespace

std::string_view functional_unit_name(FunctionalUnit u) {
  return kUnitKindNames[static_cast<std::size_t>(u)];
}

FunctionalUnit functional_unit_from_name(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kUnitKindNames); ++i) {
    if (kUnitKindNames[i] == name) return static_cast<FunctionalUnit>(i);
  }
  throw InvalidBenchmark("unknown functional unit '" + std::string(name) +
                         "'");
}

std::string_view generator_name(Generator g) {
  return kGeneratorNames[static_cast<std::size_t>(g)];
}

Generator generator_from_name(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kGeneratorNames); ++i) {
    if (kGeneratorNames[i] == name) return static_cast<Generator>(i);
  }
  throw InvalidBenchmark("unknown generator '" + std::string(name) + "'");
}

std::string_view operation_name(Operation op) {
  return kOperationNames[static_cast<std::size_t>(op)];
}

Operation operation_from_name(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kOperationNames); ++i) {
    if (kOperationNames[i] == name) return static_cast<Operation>(i);
  }
  throw InvalidBenchmark("unknown operation '" + std::string(name) + "'");
}

Lfsr::Lfsr(unsigned width, uint32_t state) : width_(width), state_(state) {
  switch (width) {
    case 32:
      taps_ = 0x80200003u;  // taps 32, 22, 2, 1
      break;
    case 16:
      taps_ = 0xD008u;  // taps 16, 15, 13, 4
      break;
    default:
      throw InvariantViolation("unsupported lfsr width " +
                               std::to_string(width));
  }
  mask_ = width == 32 ? 0xFFFFFFFFu : (1u << width) - 1u;
  if ((state_ & mask_) == 0) throw ZeroLfsrSeed("lfsr state must be nonzero");
  state_ &= mask_;
}

uint32_t Lfsr::step() {
  const uint32_t fb = std::popcount(state_ & taps_) & 1u;
  state_ = ((state_ << 1) | fb) & mask_;
  return state_;
}

uint32_t utp_pattern(unsigned width, uint64_t index) {
  const uint32_t mask =
      width >= 32 ? 0xFFFFFFFFu : (1u << width) - 1u;
  const uint64_t cycle = 2 + 2 * static_cast<uint64_t>(width);
  index %= cycle;
  if (index == 0) return 0;
  if (index == 1) return mask;
  if (index < 2 + width) return 1u << (index - 2);
  return ~(1u << (index - 2 - width)) & mask;
}

StimulusStream::StimulusStream(Generator kind, unsigned stream_id,
                               uint64_t seed, DType dtype)
    : kind_(kind), dtype_(dtype), width_(width_bits_of(dtype)) {
  mask_ = width_ >= 32 ? 0xFFFFFFFFu : (1u << width_) - 1u;
  switch (kind) {
    case Generator::MT:
      mt_.seed(static_cast<uint32_t>(seed + uint64_t{kStreamSalt} * stream_id));
      break;
    case Generator::LFSR: {
      if (seed == 0) throw ZeroLfsrSeed("lfsr stimulus needs a nonzero seed");
      uint32_t state = static_cast<uint32_t>(seed) ^ (kStreamSalt * stream_id);
      if (state == 0) state = kStreamSalt;
      lfsr_ = Lfsr(32, state);
      break;
    }
    case Generator::UTP:
      utp_index_ = (seed + stream_id) % (2 + 2 * uint64_t{width_});
      break;
  }
}

uint32_t StimulusStream::next() {
  uint32_t word = 0;
  switch (kind_) {
    case Generator::MT:
      word = mt_() & mask_;
      break;
    case Generator::LFSR:
      word = lfsr_.step() & mask_;
      break;
    case Generator::UTP:
      word = utp_pattern(width_, utp_index_);
      utp_index_ = (utp_index_ + 1) % (2 + 2 * uint64_t{width_});
      break;
  }
  const FormatLayout& layout = layout_of(dtype_);
  if (!layout.is_integer() && special_of(word, dtype_).has_value()) {
    word &= ~(1u << layout.exponent_bits->hi);
  }
  return word;
}

std::vector<uint32_t> gen_stimulus(Generator kind, unsigned stream_id,
                                   uint64_t seed, uint64_t count,
                                   DType dtype) {
  StimulusStream stream(kind, stream_id, seed, dtype);
  std::vector<uint32_t> values;
  values.reserve(count);
  for (uint64_t i = 0; i < count; ++i) values.push_back(stream.next());
  return values;
}

uint32_t compute_elementwise(Operation op, DType dtype, uint32_t a_bits,
                             uint32_t b_bits, uint32_t c_bits) {
  if (op != Operation::ADD && op != Operation::MULT && op != Operation::FMA) {
    throw InvalidBenchmark("not an elementwise operation");
  }
  const FormatLayout& layout = layout_of(dtype);
  if (layout.is_integer()) {
    const uint32_t mask = layout.word_mask();
    const uint32_t a = a_bits & mask, b = b_bits & mask, c = c_bits & mask;
    uint32_t r = 0;
    switch (op) {
      case Operation::ADD:
        r = a + b;
        break;
      case Operation::MULT:
        r = a * b;
        break;
      default:
        r = a * b + c;
        break;
    }
    return r & mask;
  }
  if (dtype == DType::FP32) {
    const float a = std::bit_cast<float>(a_bits);
    const float b = std::bit_cast<float>(b_bits);
    const float c = std::bit_cast<float>(c_bits);
    float r = 0.0f;
    switch (op) {
      case Operation::ADD:
        r = a + b;
        break;
      case Operation::MULT:
        r = a * b;
        break;
      default:
        r = std::fmaf(a, b, c);
        break;
    }
    return std::bit_cast<uint32_t>(r);
  }
  const double a = decode_bits(a_bits, dtype);
  const double b = decode_bits(b_bits, dtype);
  const double c = decode_bits(c_bits, dtype);
  double r = 0.0;
  switch (op) {
    case Operation::ADD:
      r = a + b;
      break;
    case Operation::MULT:
      r = a * b;
      break;
    default:
      r = std::fma(a, b, c);
      break;
  }
  return encode_bits(r, dtype);
}

std::vector<uint32_t> compute_gemm(Operation op, FunctionalUnit unit,
                                   DType dtype, uint64_t m, uint64_t n,
                                   uint64_t k, double alpha, double beta,
                                   std::span<const uint32_t> a,
                                   std::span<const uint32_t> b,
                                   std::span<const uint32_t> c) {
  if (op != Operation::GEMM && op != Operation::GEMM_A &&
      op != Operation::GEMM_M) {
    throw InvalidBenchmark("not a gemm operation");
  }
  if (unit == FunctionalUnit::MEM) {
    throw InvalidBenchmark("mem benchmarks are not modeled");
  }
  if (m < 1 || n < 1 || k < 1) {
    throw DimensionMismatch("gemm needs m, n, k >= 1");
  }
  if (op == Operation::GEMM_A && k != n) {
    throw DimensionMismatch("addition form sets B=I, which needs k == n");
  }
  if (a.size() != m * k) throw DimensionMismatch("A must hold m*k elements");
  const bool use_b = op != Operation::GEMM_A;
  const bool use_c = op != Operation::GEMM_M;
  if (use_b && b.size() != k * n) {
    throw DimensionMismatch("B must hold k*n elements");
  }
  if (use_c && c.size() != m * n) {
    throw DimensionMismatch("C must hold m*n elements");
  }
  const double beta_eff = use_c ? beta : 0.0;
  const FormatLayout& layout = layout_of(dtype);
  std::vector<uint32_t> out(m * n);

  if (layout.is_integer()) {
    const uint32_t mask = layout.word_mask();
    const bool stepwise8 =
        dtype == DType::UINT8 && unit == FunctionalUnit::ALU;
    const uint32_t step_mask = stepwise8 ? mask : 0xFFFFFFFFu;
    const uint32_t alpha_u = int_scalar(alpha, dtype);
    const uint32_t beta_u = int_scalar(beta_eff, dtype);
    for (uint64_t i = 0; i < m; ++i) {
      for (uint64_t j = 0; j < n; ++j) {
        uint32_t acc = 0;
        for (uint64_t l = 0; l < k; ++l) {
          const uint32_t av = a[i * k + l] & mask;
          const uint32_t bv =
              use_b ? (b[l * n + j] & mask) : (l == j ? 1u : 0u);
          acc = (acc + ((av * bv) & step_mask)) & step_mask;
        }
        const uint32_t cv = use_c ? (c[i * n + j] & mask) : 0u;
        const uint32_t res =
            (((alpha_u * acc) & step_mask) + ((beta_u * cv) & step_mask)) &
            step_mask;
        out[i * n + j] = res;
      }
    }
    return out;
  }

  if (unit == FunctionalUnit::Tensor) {
    // products land exactly in the FP32 accumulator for the 16/19-bit
    // formats; FP32 itself rounds per step like an ordinary sgemm
    const auto alpha_f = static_cast<float>(round_to(alpha, dtype));
    const auto beta_f = static_cast<float>(round_to(beta_eff, dtype));
    for (uint64_t i = 0; i < m; ++i) {
      for (uint64_t j = 0; j < n; ++j) {
        float acc = 0.0f;
        for (uint64_t l = 0; l < k; ++l) {
          const auto av = static_cast<float>(decode_bits(a[i * k + l], dtype));
          const float bv =
              use_b ? static_cast<float>(decode_bits(b[l * n + j], dtype))
                    : (l == j ? 1.0f : 0.0f);
          acc += av * bv;
        }
        const float cv =
            use_c ? static_cast<float>(decode_bits(c[i * n + j], dtype))
                  : 0.0f;
        const float t = alpha_f * acc + beta_f * cv;
        if (dtype == DType::FP16) {
          out[i * n + j] = encode_bits(t, DType::FP16);
        } else {
          out[i * n + j] = std::bit_cast<uint32_t>(t);
        }
      }
    }
    return out;
  }

  // ALU path: every intermediate is re-rounded into the compute dtype
  const double alpha_r = round_to(alpha, dtype);
  const double beta_r = round_to(beta_eff, dtype);
  for (uint64_t i = 0; i < m; ++i) {
    for (uint64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (uint64_t l = 0; l < k; ++l) {
        const double av = decode_bits(a[i * k + l], dtype);
        const double bv =
            use_b ? decode_bits(b[l * n + j], dtype) : (l == j ? 1.0 : 0.0);
        acc = round_to(acc + round_to(av * bv, dtype), dtype);
      }
      const double cv = use_c ? decode_bits(c[i * n + j], dtype) : 0.0;
      const double t = round_to(round_to(alpha_r * acc, dtype) +
                                    round_to(beta_r * cv, dtype),
                                dtype);
      out[i * n + j] = widen_to_storage(encode_bits(t, dtype), dtype);
    }
  }
  return out;
}

MemoryImage run_kernel(const BenchmarkSpec& spec) {
  if (spec.unit == FunctionalUnit::MEM) {
    throw InvalidBenchmark("mem benchmarks are not modeled");
  }
  if (!is_kernel_dtype(spec.dtype)) {
    throw InvalidBenchmark("no kernel arithmetic for " +
                           std::string(dtype_name(spec.dtype)));
  }
  const DType storage = storage_of(spec.dtype);
  const bool gemm = spec.op == Operation::GEMM ||
                    spec.op == Operation::GEMM_A ||
                    spec.op == Operation::GEMM_M;

  std::string dims;
  if (gemm) {
    dims = "m" + std::to_string(spec.m) + "n" + std::to_string(spec.n) + "k" +
           std::to_string(spec.k);
  } else {
    dims = "n" + std::to_string(spec.n);
  }
  ImageMeta meta;
  meta.dtype = storage;
  meta.element_count = gemm ? spec.m * spec.n : spec.n;
  meta.benchmark_id = std::string(functional_unit_name(spec.unit)) + "-" +
                      std::string(generator_name(spec.generator)) + "-" +
                      std::string(operation_name(spec.op)) + "-" +
                      std::string(dtype_name(spec.dtype)) + "-" + dims +
                      "-s" + std::to_string(spec.seed);
  meta.source = "synth";

  StimulusStream nudge(spec.generator, 3, spec.seed, spec.dtype);
  auto nudged = [&](uint32_t word) {
    for (unsigned i = 0; i < kNudgeCap; ++i) {
      if (observable_word(word, storage)) return word;
      word = widen_to_storage(nudge.next(), spec.dtype);
    }
    throw InvariantViolation("could not derive an observable golden word");
  };

  if (!gemm) {
    if (spec.n < 1) throw DimensionMismatch("elementwise ops need n >= 1");
    MemoryImage image(storage, spec.n, meta);
    StimulusStream s0(spec.generator, 0, spec.seed, spec.dtype);
    StimulusStream s1(spec.generator, 1, spec.seed, spec.dtype);
    StimulusStream s2(spec.generator, 2, spec.seed, spec.dtype);
    const bool fused = spec.op == Operation::FMA;
    for (uint64_t i = 0; i < spec.n; ++i) {
      uint32_t word = 0;
      for (unsigned attempt = 0; attempt < kElementRedraws; ++attempt) {
        const uint32_t a = s0.next();
        const uint32_t b = s1.next();
        const uint32_t c = fused ? s2.next() : 0;
        word = widen_to_storage(
            compute_elementwise(spec.op, spec.dtype, a, b, c), spec.dtype);
        if (observable_word(word, storage)) break;
      }
      image.set(i, nudged(word));
    }
    return image;
  }

  const std::vector<uint32_t> a =
      gen_stimulus(spec.generator, 0, spec.seed, spec.m * spec.k, spec.dtype);
  std::vector<uint32_t> b;
  if (spec.op != Operation::GEMM_A) {
    b = gen_stimulus(spec.generator, 1, spec.seed, spec.k * spec.n,
                     spec.dtype);
  }
  std::vector<uint32_t> c;
  if (spec.op != Operation::GEMM_M) {
    c = gen_stimulus(spec.generator, 2, spec.seed, spec.m * spec.n,
                     spec.dtype);
  }
  std::vector<uint32_t> out =
      compute_gemm(spec.op, spec.unit, spec.dtype, spec.m, spec.n, spec.k,
                   spec.alpha, spec.beta, a, b, c);
  MemoryImage image(storage, out.size(), meta);
  for (uint64_t i = 0; i < out.size(); ++i) image.set(i, nudged(out[i]));
  return image;
}

ErrorProfile fixture_profile(const std::string& name) {
  ErrorProfile profile;
  if (name == "paper-aggregate-fp32") {
    profile = aggregate_fixture(DType::FP32);
  } else if (name == "paper-aggregate-fp16") {
    profile = aggregate_fixture(DType::FP16);
  } else if (name == "fp32-lsb-monotone") {
    profile = monotone_fixture();
  } else if (name == "l1miss-period8-nonspecial") {
    profile = l1miss_fixture();
  } else {
    throw UnknownFixture("no fixture named '" + name + "'");
  }
  profile.validate();
  return profile;
}

std::vector<std::string> fixture_names() {
  return {"paper-aggregate-fp32", "paper-aggregate-fp16", "fp32-lsb-monotone",
          "l1miss-period8-nonspecial"};
}

}  // namespace sdcforge
