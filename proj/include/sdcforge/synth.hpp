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
#include <span>
#include <string>
#include <vector>

#include "sdcforge/image.hpp"
#include "sdcforge/profile.hpp"

namespace sdcforge {

enum class FunctionalUnit : uint8_t { ALU, Tensor, MEM };
enum class Generator : uint8_t { MT, LFSR, UTP };
enum class Operation : uint8_t { ADD, MULT, FMA, GEMM, GEMM_A, GEMM_M };

std::string_view functional_unit_name(FunctionalUnit u);
FunctionalUnit functional_unit_from_name(std::string_view name);
std::string_view generator_name(Generator g);
Generator generator_from_name(std::string_view name);
std::string_view operation_name(Operation op);
Operation operation_from_name(std::string_view name);

// One reference micro-benchmark: a kernel, its stimulus method, and dims.
// Elementwise ops use n; the GEMM family uses m x k times k x n plus an
// m x n addend. Operand streams are fixed: A=0, B=1, C=2, nudge=3.
struct BenchmarkSpec {
  FunctionalUnit unit = FunctionalUnit::ALU;
  Generator generator = Generator::MT;
  Operation op = Operation::ADD;
  DType dtype = DType::FP32;
  uint64_t n = 0;
  uint64_t m = 0;
  uint64_t k = 0;
  double alpha = 1.0;
  double beta = 1.0;
  uint64_t seed = 1;
};

// Fibonacci LFSR shifting one feedback bit in per step. Width 32 uses taps
// {32,22,2,1} (maximal length); width 16 uses taps {16,15,13,4}, the small
// variant whose full 65535-step period is brute-forceable in tests.
class Lfsr {
 public:
  Lfsr(unsigned width, uint32_t state);

  uint32_t step();
  uint32_t state() const { return state_; }

 private:
  unsigned width_;
  uint32_t mask_;
  uint32_t taps_;
  uint32_t state_;
};

// Pattern `index` of the structured test cycle: all-zeros, all-ones, then a
// walking one LSB to MSB, then a walking zero. Cycle length 2 + 2*width.
uint32_t utp_pattern(unsigned width, uint64_t index);

// One operand's deterministic value stream: width-masked words with NaN/INF
// bit patterns made finite by clearing the exponent MSB. (kind, stream_id,
// seed) fully determine the sequence.
class StimulusStream {
 public:
  StimulusStream(Generator kind, unsigned stream_id, uint64_t seed,
                 DType dtype);

  uint32_t next();

 private:
  Generator kind_;
  DType dtype_;
  unsigned width_;
  uint32_t mask_;
  std::mt19937 mt_;
  Lfsr lfsr_{32, 1};
  uint64_t utp_index_ = 0;
};

std::vector<uint32_t> gen_stimulus(Generator kind, unsigned stream_id,
                                   uint64_t seed, uint64_t count, DType dtype);

// Per-element op in the compute dtype, one rounding to nearest-even.
// ADD/MULT ignore c_bits. Integer formats wrap modulo 2^width.
uint32_t compute_elementwise(Operation op, DType dtype, uint32_t a_bits,
                             uint32_t b_bits, uint32_t c_bits);

// alpha*A*B + beta*C over row-major value words, k-ascending accumulation.
// GEMM_A substitutes B=I (needs k == n); GEMM_M forces beta=0. Tensor
// accumulates in the storage dtype (FP32/UINT32); ALU re-rounds into the
// compute dtype after every step. Returns storage-dtype words.
std::vector<uint32_t> compute_gemm(Operation op, FunctionalUnit unit,
                                   DType dtype, uint64_t m, uint64_t n,
                                   uint64_t k, double alpha, double beta,
                                   std::span<const uint32_t> a,
                                   std::span<const uint32_t> b,
                                   std::span<const uint32_t> c);

// Runs the benchmark and returns its golden output image in the storage
// dtype. Elements that land on zero or a special value are re-derived from
// fresh stimulus so every golden word stays injection-observable.
MemoryImage run_kernel(const BenchmarkSpec& spec);

// Built-in profiles: published aggregate statistics with synthetic but
// shape-constrained internals. Throws UnknownFixture.
ErrorProfile fixture_profile(const std::string& name);
std::vector<std::string> fixture_names();

}  // namespace sdcforge
