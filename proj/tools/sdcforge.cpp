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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdcforge/errors.hpp"
#include "sdcforge/formats.hpp"
#include "sdcforge/image.hpp"
#include "sdcforge/inject.hpp"
#include "sdcforge/profile.hpp"
#include "sdcforge/synth.hpp"

namespace fs = std::filesystem;
using namespace sdcforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct ExtractArgs {
  std::string golden, corrupted, dtype;
  std::string unit = "Unattributed";
  std::string kernel;
  std::string out_diff, out_accumulator;
  unsigned warp_size = 32;
  double runtime = 0.0, fault_free = 0.0;
  bool due = false;
  bool has_runtime = false, has_fault_free = false;
};

struct InjectArgs {
  std::string image, profile, out, log;
  uint64_t seed = 1;
};

struct SynthGoldenArgs {
  std::string op, dtype, gen, dims, out;
  std::string functional_unit = "alu";
  double alpha = 1.0, beta = 1.0;
  uint64_t seed = 1;
  unsigned warp_size = 32;
};

struct ValidateArgs {
  std::string profile;
  uint64_t elements = 1000000;
  uint64_t seed = 1;
  double tolerance = 0.01;
};

uint64_t payload_elements(const std::string& path, DType dtype) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path + ": " + ec.message());
  const unsigned bytes = width_bytes_of(dtype);
  if (size % bytes != 0) {
    throw SizeMismatch(path + " holds " + std::to_string(size) +
                       " bytes, not a multiple of " + std::to_string(bytes));
  }
  return size / bytes;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

int run_extract(const ExtractArgs& args) {
  const DType dtype = dtype_from_name(args.dtype);
  ImageMeta meta;
  meta.dtype = dtype;
  meta.warp_size = args.warp_size;
  meta.element_count = payload_elements(args.golden, dtype);
  const uint64_t corrupted_elements = payload_elements(args.corrupted, dtype);
  if (corrupted_elements != meta.element_count) {
    throw SizeMismatch("golden holds " + std::to_string(meta.element_count) +
                       " elements, corrupted holds " +
                       std::to_string(corrupted_elements));
  }

  ProfileContext ctx;
  ctx.unit = unit_from_name(args.unit);
  ctx.dtype = dtype;
  if (!args.kernel.empty()) ctx.kernel = args.kernel;
  ProfileAccumulator acc(ctx, args.warp_size);

  std::ofstream diff_out;
  if (!args.out_diff.empty()) {
    diff_out.open(args.out_diff);
    if (!diff_out) throw IoError("cannot write " + args.out_diff);
    diff_out << "index,lane,category,golden,corrupted,xor,flips\n";
  }

  const uint64_t diff_count =
      diff_files(args.golden, args.corrupted, meta, [&](const DiffRecord& r) {
        acc.observe(r);
        if (diff_out.is_open()) {
          char row[128];
          std::snprintf(row, sizeof row,
                        "%llu,%u,%s,%08x,%08x,%08x,%u\n",
                        static_cast<unsigned long long>(r.element_index),
                        r.lane, std::string(category_name(r.category)).c_str(),
                        r.golden_bits, r.corrupted_bits, r.xor_mask,
                        r.flip_count);
          diff_out << row;
        }
      });
  acc.add_elements(meta.element_count);

  if (!args.out_accumulator.empty()) save_accumulator(acc, args.out_accumulator);

  RunMeta run;
  run.runtime = std::chrono::duration<double>(
      args.has_runtime ? args.runtime : 1.0);
  run.fault_free_runtime = std::chrono::duration<double>(
      args.has_fault_free ? args.fault_free : 1.0);
  run.due_flag = args.due;
  const Outcome outcome = classify_outcome(run, diff_count);

  std::cout << "elements: " << meta.element_count << "\n"
            << "diffs: " << diff_count << "\n";
  for (CorruptionCategory c : kAllCategories) {
    std::cout << category_name(c) << ": " << acc.category_count(c) << "\n";
  }
  std::cout << "outcome: " << outcome_name(outcome) << "\n";
  return kExitOk;
}

int run_profile_build(const std::string& acc_path, const std::string& out) {
  const ProfileAccumulator acc = load_accumulator(acc_path);
  const ErrorProfile profile = finalize(acc);
  save_profile(profile, out);
  std::cout << "profile written: " << out << " (samples "
            << profile.sample_count << ", rate "
            << fmt(profile.corruption_rate) << ")\n";
  return kExitOk;
}

int run_profile_merge(const std::vector<std::string>& inputs,
                      const std::string& out) {
  ProfileAccumulator merged = load_accumulator(inputs.front());
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    merged = merge(merged, load_accumulator(inputs[i]));
  }
  save_accumulator(merged, out);
  std::cout << "accumulator written: " << out << " (elements "
            << merged.element_total() << ", corruptions "
            << merged.corruption_total() << ")\n";
  return kExitOk;
}

int run_profile_show(const std::string& path, const std::string& format) {
  const ErrorProfile p = load_profile(path);
  const unsigned width = width_bits_of(p.context.dtype);
  if (format == "csv") {
    std::cout << "category,share\n";
    for (CorruptionCategory c : kAllCategories) {
      std::cout << category_name(c) << "," << fmt(p.category_probability(c))
                << "\n";
    }
    if (p.bit_model) {
      std::cout << "\nposition,rate\n";
      for (unsigned b = 0; b < width; ++b) {
        std::cout << b << "," << fmt(p.bit_model->position_rate[b]) << "\n";
      }
      std::cout << "\nflips,probability\n";
      for (unsigned k = 1; k <= width; ++k) {
        std::cout << k << "," << fmt(p.bit_model->count_dist[k - 1]) << "\n";
      }
    }
    std::cout << "\ncategory,lane,weight\n";
    for (CorruptionCategory c : kAllCategories) {
      if (!p.lanes(c)) continue;
      for (unsigned lane = 0; lane < p.warp_size; ++lane) {
        std::cout << category_name(c) << "," << lane << ","
                  << fmt((*p.lanes(c))[lane]) << "\n";
      }
    }
    return kExitOk;
  }
  std::cout << "unit: " << unit_name(p.context.unit) << "\n"
            << "dtype: " << dtype_name(p.context.dtype) << "\n"
            << "kernel: " << (p.context.kernel ? *p.context.kernel : "-")
            << "\n"
            << "warp_size: " << p.warp_size << "\n"
            << "sample_count: " << p.sample_count << "\n"
            << "corruption_rate: " << fmt(p.corruption_rate) << "\n"
            << "category shares:\n";
  for (CorruptionCategory c : kAllCategories) {
    std::cout << "  " << category_name(c) << " "
              << fmt(p.category_probability(c)) << "\n";
  }
  if (p.bit_model) {
    std::cout << "bit position rates:\n";
    for (unsigned b = 0; b < width; ++b) {
      std::cout << "  bit" << b << " " << fmt(p.bit_model->position_rate[b])
                << "\n";
    }
    std::cout << "flip count pmf:\n";
    for (unsigned k = 1; k <= width; ++k) {
      if (p.bit_model->count_dist[k - 1] > 0.0) {
        std::cout << "  k" << k << " " << fmt(p.bit_model->count_dist[k - 1])
                  << "\n";
      }
    }
  }
  for (CorruptionCategory c : kAllCategories) {
    if (!p.lanes(c)) continue;
    std::cout << "lane weights, " << category_name(c) << ":\n";
    for (unsigned lane = 0; lane < p.warp_size; ++lane) {
      const double w = (*p.lanes(c))[lane];
      if (w > 0.0) std::cout << "  lane" << lane << " " << fmt(w) << "\n";
    }
  }
  return kExitOk;
}

int run_inject(const InjectArgs& args) {
  const MemoryImage image = load_image(args.image);
  const ErrorProfile profile = load_profile(args.profile);
  const InjectResult result = inject(image, profile, args.seed);
  store_image(result.corrupted, args.out);
  if (!args.log.empty()) save_log(result.log, args.log);
  uint64_t total = 0;
  std::cout << "events:";
  for (CorruptionCategory c : kAllCategories) {
    std::cout << " " << category_name(c) << "="
              << result.log.category_total(c);
    total += result.log.category_total(c);
  }
  std::cout << " total=" << total << "\n"
            << "skipped_unobservable: " << result.log.skipped_unobservable
            << "\n";
  return kExitOk;
}

BenchmarkSpec parse_golden_spec(const SynthGoldenArgs& args) {
  BenchmarkSpec spec;
  spec.unit = functional_unit_from_name(args.functional_unit);
  spec.generator = generator_from_name(args.gen);
  spec.op = operation_from_name(args.op);
  spec.dtype = dtype_from_name(args.dtype);
  spec.alpha = args.alpha;
  spec.beta = args.beta;
  spec.seed = args.seed;
  std::vector<uint64_t> dims;
  std::size_t pos = 0;
  const std::string& text = args.dims;
  while (pos < text.size()) {
    std::size_t next = text.find('x', pos);
    if (next == std::string::npos) next = text.size();
    try {
      dims.push_back(std::stoull(text.substr(pos, next - pos)));
    } catch (const std::exception&) {
      throw DimensionMismatch("cannot parse --dims '" + text + "'");
    }
    pos = next + 1;
  }
  const bool gemm = spec.op == Operation::GEMM ||
                    spec.op == Operation::GEMM_A ||
                    spec.op == Operation::GEMM_M;
  if (gemm) {
    if (dims.size() != 3) {
      throw DimensionMismatch("gemm dims must be MxNxK");
    }
    spec.m = dims[0];
    spec.n = dims[1];
    spec.k = dims[2];
  } else {
    if (dims.size() != 1) {
      throw DimensionMismatch("elementwise dims must be a single length");
    }
    spec.n = dims[0];
  }
  return spec;
}

int run_synth_golden(const SynthGoldenArgs& args) {
  const BenchmarkSpec spec = parse_golden_spec(args);
  MemoryImage image = run_kernel(spec);
  image.meta().warp_size = args.warp_size;
  store_image(image, args.out);
  std::cout << "golden written: " << args.out << " ("
            << image.meta().benchmark_id << ", " << image.size()
            << " elements)\n";
  return kExitOk;
}

int run_synth_profile(const std::string& fixture, const std::string& out) {
  const ErrorProfile profile = fixture_profile(fixture);
  save_profile(profile, out);
  std::cout << "fixture written: " << out << " (" << fixture << ")\n";
  return kExitOk;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::fabs(a[i] - b[i]);
  return 0.5 * d;
}

int run_validate(const ValidateArgs& args) {
  const ErrorProfile source = load_profile(args.profile);
  const DType dtype = source.context.dtype;

  ImageMeta meta;
  meta.dtype = dtype;
  meta.element_count = args.elements;
  meta.warp_size = source.warp_size;
  meta.source = "synth";
  meta.benchmark_id = "roundtrip";
  MemoryImage golden(dtype, args.elements, meta);
  StimulusStream stream(Generator::MT, 0, args.seed, dtype);
  for (uint64_t i = 0; i < args.elements; ++i) {
    uint32_t word = stream.next();
    while (word == 0) word = stream.next();
    golden.set(i, word);
  }

  const InjectResult injected = inject(golden, source, args.seed);
  ProfileAccumulator acc(source.context, source.warp_size);
  const std::vector<DiffRecord> diffs =
      diff_images(golden, injected.corrupted);
  acc.observe(diffs, args.elements);

  ErrorProfile recovered;
  try {
    recovered = finalize(acc);
  } catch (const EmptyAccumulator&) {
    std::cout << "no corruptions to compare\n";
    return kExitValidation;
  }

  bool all_pass = true;
  auto report = [&](const std::string& name, double tv) {
    const bool pass = tv <= args.tolerance;
    all_pass = all_pass && pass;
    std::cout << name << " tv=" << fmt(tv) << " tolerance="
              << fmt(args.tolerance) << (pass ? " pass" : " FAIL") << "\n";
  };

  report("category_dist",
         tv_distance({source.category_dist.begin(), source.category_dist.end()},
                     {recovered.category_dist.begin(),
                      recovered.category_dist.end()}));
  if (source.bit_model) {
    report("count_dist",
           recovered.bit_model
               ? tv_distance(source.bit_model->count_dist,
                             recovered.bit_model->count_dist)
               : 1.0);
  }
  for (CorruptionCategory c : kAllCategories) {
    if (!source.lanes(c)) continue;
    report("lanes_" + std::string(category_name(c)),
           recovered.lanes(c) ? tv_distance(*source.lanes(c),
                                            *recovered.lanes(c))
                              : 1.0);
  }
  std::cout << "corruption_rate source=" << fmt(source.corruption_rate)
            << " recovered=" << fmt(recovered.corruption_rate) << "\n";
  if (source.bit_model && recovered.bit_model) {
    double max_delta = 0.0;
    for (std::size_t b = 0; b < source.bit_model->position_rate.size(); ++b) {
      max_delta = std::max(max_delta,
                           std::fabs(source.bit_model->position_rate[b] -
                                     recovered.bit_model->position_rate[b]));
    }
    std::cout << "position_rate max_delta=" << fmt(max_delta) << "\n";
  }
  return all_pass ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistical SDC profile extraction and fault injection"};
  app.require_subcommand(1);

  ExtractArgs extract_args;
  CLI::App* extract = app.add_subcommand(
      "extract", "diff a golden/corrupted image pair into an accumulator");
  extract->add_option("--golden", extract_args.golden)->required();
  extract->add_option("--corrupted", extract_args.corrupted)->required();
  extract->add_option("--dtype", extract_args.dtype)->required();
  extract->add_option("--unit", extract_args.unit);
  extract->add_option("--kernel", extract_args.kernel);
  extract->add_option("--warp-size", extract_args.warp_size);
  extract->add_option("--out-diff", extract_args.out_diff);
  extract->add_option("--out-accumulator", extract_args.out_accumulator);
  CLI::Option* rt = extract->add_option("--runtime", extract_args.runtime);
  CLI::Option* ff =
      extract->add_option("--fault-free-runtime", extract_args.fault_free);
  extract->add_flag("--due", extract_args.due);

  CLI::App* profile = app.add_subcommand("profile", "build, merge, or render");
  profile->require_subcommand(1);
  std::string build_acc, build_out = "profile.json";
  CLI::App* build = profile->add_subcommand(
      "build", "finalize an accumulator into a profile");
  build->add_option("--accumulator", build_acc)->required();
  build->add_option("--out", build_out);
  std::vector<std::string> merge_in;
  std::string merge_out = "merged.json";
  CLI::App* merge_cmd =
      profile->add_subcommand("merge", "combine accumulators");
  merge_cmd->add_option("--accumulator", merge_in)
      ->required()
      ->expected(1, -1);
  merge_cmd->add_option("--out", merge_out);
  std::string show_path, show_format = "text";
  CLI::App* show = profile->add_subcommand("show", "render distributions");
  show->add_option("--profile", show_path)->required();
  show->add_option("--format", show_format)
      ->check(CLI::IsMember({"text", "csv"}));

  InjectArgs inject_args;
  CLI::App* inject_cmd =
      app.add_subcommand("inject", "replay a profile over an image");
  inject_cmd->add_option("--image", inject_args.image)->required();
  inject_cmd->add_option("--profile", inject_args.profile)->required();
  inject_cmd->add_option("--seed", inject_args.seed);
  inject_cmd->add_option("--out", inject_args.out)->required();
  inject_cmd->add_option("--log", inject_args.log);

  CLI::App* synth = app.add_subcommand("synth", "golden images and fixtures");
  synth->require_subcommand(1);
  SynthGoldenArgs golden_args;
  CLI::App* golden = synth->add_subcommand("golden", "run a benchmark kernel");
  golden->add_option("--op", golden_args.op)->required();
  golden->add_option("--dtype", golden_args.dtype)->required();
  golden->add_option("--gen", golden_args.gen)->required();
  golden->add_option("--dims", golden_args.dims)->required();
  golden->add_option("--seed", golden_args.seed);
  golden->add_option("--functional-unit", golden_args.functional_unit);
  golden->add_option("--alpha", golden_args.alpha);
  golden->add_option("--beta", golden_args.beta);
  golden->add_option("--warp-size", golden_args.warp_size);
  golden->add_option("--out", golden_args.out)->required();
  std::string fixture_name, fixture_out = "fixture.json";
  CLI::App* fixture =
      synth->add_subcommand("profile", "write a built-in fixture profile");
  fixture->add_option("--fixture", fixture_name)->required();
  fixture->add_option("--out", fixture_out);

  ValidateArgs validate_args;
  CLI::App* validate = app.add_subcommand(
      "validate", "round-trip a profile through inject and extract");
  validate->require_subcommand(1);
  CLI::App* roundtrip = validate->add_subcommand(
      "roundtrip", "synthesize, inject, extract, compare");
  roundtrip->add_option("--profile", validate_args.profile)->required();
  roundtrip->add_option("--elements", validate_args.elements);
  roundtrip->add_option("--seed", validate_args.seed);
  roundtrip->add_option("--tolerance", validate_args.tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  extract_args.has_runtime = rt->count() > 0;
  extract_args.has_fault_free = ff->count() > 0;

  try {
    if (extract->parsed()) return run_extract(extract_args);
    if (build->parsed()) return run_profile_build(build_acc, build_out);
    if (merge_cmd->parsed()) return run_profile_merge(merge_in, merge_out);
    if (show->parsed()) return run_profile_show(show_path, show_format);
    if (inject_cmd->parsed()) return run_inject(inject_args);
    if (golden->parsed()) return run_synth_golden(golden_args);
    if (fixture->parsed()) return run_synth_profile(fixture_name, fixture_out);
    if (roundtrip->parsed()) return run_validate(validate_args);
  } catch (const RateOverflow& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const EmptyAccumulator& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
