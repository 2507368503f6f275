// Copyright 2026 The Upcycle Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "arch.hpp"
#include "mapping.hpp"

namespace upcycle::emu {

// Round-to-nearest-even conversions, bit-level (no hardware half support
// assumed). Subnormals and infinities follow IEEE 754 binary16.
std::uint16_t f32_to_f16(float x);
float f16_to_f32(std::uint16_t h);

// Rounding right-shift requantization with saturation to int8.
std::int8_t requantize_shift(std::int32_t acc, int shift);

// One SIMD register, wide enough for any supported vector width.
struct VReg {
  std::array<std::uint8_t, 64> b{};
};

// Register-level model of the per-tile SIMD datapath. Every method is one
// instruction; the census tracks issue slots on the two pipes.
class TileMachine {
 public:
  TileMachine(const MachineConfig& cfg, DataType dtype);

  // Fills up to `count` consecutive registers starting at `dst` with packed
  // A-operand slices: register q, lane i holds A[m0 + q*V + i, k0 .. k0+r-1].
  // Costs one memory slot per accumulator-ratio group of registers.
  void vload_strided(int dst, int count, const std::int8_t* a, std::int64_t lda,
                     std::int64_t m0, std::int64_t k0, std::int64_t m_limit,
                     std::int64_t k_limit);
  void vload_strided_f16(int dst, int count, const std::uint16_t* a, std::int64_t lda,
                         std::int64_t m0, std::int64_t k0, std::int64_t m_limit,
                         std::int64_t k_limit);

  // Fills `count` registers from one cache line: register j broadcasts
  // B[k0 .. k0+r-1, n0 + j] across every lane.
  void vload_multibroadcast(int dst, int count, const std::int8_t* bmat, std::int64_t ldb,
                            std::int64_t k0, std::int64_t n0, std::int64_t k_limit,
                            std::int64_t n_limit);
  void vload_multibroadcast_f16(int dst, int count, const std::uint16_t* bmat,
                                std::int64_t ldb, std::int64_t k0, std::int64_t n0,
                                std::int64_t k_limit, std::int64_t n_limit);

  // acc[i] += sum over the packed slice products; 32-bit accumulation.
  void vfma_i8_i32(int acc, int a, int b);
  void vfma_f16_f32(int acc, int a, int b);

  void vzero(int reg);
  void vstore_i32(int reg, std::int32_t* dst, std::int64_t count);
  void vstore_f32(int reg, float* dst, std::int64_t count);

  // Horizontal sum of the 32-bit lanes, for reduction-vectorized kernels.
  std::int32_t vreduce_add_i32(int reg);
  float vreduce_add_f32(int reg);

  std::int64_t alu_slots() const { return alu_slots_; }
  std::int64_t mem_slots() const { return mem_slots_; }
  // Pseudo-dual-issue: one vector op and one memory op per cycle.
  std::int64_t cycles() const { return std::max(alu_slots_, mem_slots_); }
  void reset_census();

  int vec_elems() const { return velems_; }

 private:
  std::vector<VReg> regs_;
  int velems_;
  int ratio_;
  std::int64_t input_bytes_ = 1;
  std::int64_t line_bytes_;
  std::int64_t alu_slots_ = 0;
  std::int64_t mem_slots_ = 0;
};

struct KernelRun {
  std::vector<std::int32_t> c_i32;  // row-major M x N (int8 path, pre-requantize)
  std::vector<float> c_f32;         // row-major M x N (fp16 path)
  std::int64_t alu_slots = 0;
  std::int64_t mem_slots = 0;
  std::int64_t cycles = 0;
};

// Full register-tiled GEMM through the emulated datapath. Edge tiles are
// handled by clamped loads (zero fill), so any shape is accepted.
KernelRun run_matmul_int8(const std::vector<std::int8_t>& a,
                          const std::vector<std::int8_t>& b, std::int64_t m,
                          std::int64_t n, std::int64_t k, const Microkernel& mk,
                          const MachineConfig& cfg);
KernelRun run_matmul_fp16(const std::vector<std::uint16_t>& a,
                          const std::vector<std::uint16_t>& b, std::int64_t m,
                          std::int64_t n, std::int64_t k, const Microkernel& mk,
                          const MachineConfig& cfg);

// Scalar references with the same accumulation semantics (int32 exact;
// fp32 with per-step rounding in ascending-k pair order).
std::vector<std::int32_t> ref_matmul_int8(const std::vector<std::int8_t>& a,
                                          const std::vector<std::int8_t>& b,
                                          std::int64_t m, std::int64_t n, std::int64_t k);
std::vector<float> ref_matmul_fp16(const std::vector<std::uint16_t>& a,
                                   const std::vector<std::uint16_t>& b, std::int64_t m,
                                   std::int64_t n, std::int64_t k);

}  // namespace upcycle::emu
