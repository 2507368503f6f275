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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "emu.hpp"

using namespace upcycle;
using namespace upcycle::emu;

TEST_CASE("fp16 conversion round-trips representable values") {
  for (float v : {0.0f, 1.0f, -1.0f, 0.5f, 2048.0f, 65504.0f, -65504.0f,
                  0.0009765625f /* 2^-10 */}) {
    CHECK(f16_to_f32(f32_to_f16(v)) == v);
  }
}

TEST_CASE("fp16 conversion rounds to nearest even and saturates to infinity") {
  // 2049 is exactly between 2048 and 2050; ties go to the even mantissa.
  CHECK(f16_to_f32(f32_to_f16(2049.0f)) == 2048.0f);
  CHECK(f16_to_f32(f32_to_f16(2051.0f)) == 2052.0f);
  // Above the binary16 range: +/- infinity.
  CHECK(f32_to_f16(70000.0f) == 0x7c00);
  CHECK(f32_to_f16(-70000.0f) == 0xfc00);
  // Smallest subnormal survives.
  float tiny = std::ldexp(1.0f, -24);
  CHECK(f16_to_f32(f32_to_f16(tiny)) == tiny);
}

TEST_CASE("requantize shift rounds half upward and saturates") {
  CHECK(requantize_shift(1000, 0) == 127);
  CHECK(requantize_shift(-1000, 0) == -128);
  CHECK(requantize_shift(100, 0) == 100);
  CHECK(requantize_shift(3, 1) == 2);   // 1.5 rounds up
  CHECK(requantize_shift(5, 2) == 1);   // 1.25 rounds down
  CHECK(requantize_shift(6, 2) == 2);   // 1.5 rounds up
  CHECK(requantize_shift(1 << 20, 4) == 127);
}

TEST_CASE("int8 kernel matches the scalar reference on the anchor tile") {
  MachineConfig cfg = preset("base");
  DataType i8 = parse_dtype("int8");
  const std::int64_t m = 64, n = 80, k = 64;
  Microkernel mk = select_matmul_tiling(m, n, k, cfg, i8);
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(-128, 127);
  std::vector<std::int8_t> a(m * k), b(k * n);
  for (auto& v : a) v = static_cast<std::int8_t>(d(rng));
  for (auto& v : b) v = static_cast<std::int8_t>(d(rng));
  KernelRun run = run_matmul_int8(a, b, m, n, k, mk, cfg);
  std::vector<std::int32_t> ref = ref_matmul_int8(a, b, m, n, k);
  REQUIRE(run.c_i32.size() == ref.size());
  CHECK(run.c_i32 == ref);
  // Pseudo-dual-issue census: cycles is the slower of the two pipes.
  CHECK(run.cycles == std::max(run.alu_slots, run.mem_slots));
  CHECK(run.alu_slots > 0);
  CHECK(run.mem_slots > 0);
}

TEST_CASE("randomized int8 kernels are bit-exact against brute force") {
  MachineConfig cfg = preset("base");
  DataType i8 = parse_dtype("int8");
  std::mt19937 rng(23);
  std::uniform_int_distribution<std::int64_t> shape(1, 64);
  std::uniform_int_distribution<int> val(-128, 127);
  for (int trial = 0; trial < 200; ++trial) {
    std::int64_t m = shape(rng), n = shape(rng), k = shape(rng);
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(k);
    Microkernel mk = select_matmul_tiling(m, n, k, cfg, i8);
    std::vector<std::int8_t> a(m * k), b(k * n);
    for (auto& v : a) v = static_cast<std::int8_t>(val(rng));
    for (auto& v : b) v = static_cast<std::int8_t>(val(rng));
    KernelRun run = run_matmul_int8(a, b, m, n, k, mk, cfg);
    REQUIRE(run.c_i32 == ref_matmul_int8(a, b, m, n, k));
  }
}

TEST_CASE("randomized fp16 kernels match the reference within 1e-3") {
  MachineConfig cfg = preset("base");
  DataType f16 = parse_dtype("fp16");
  std::mt19937 rng(31);
  std::uniform_int_distribution<std::int64_t> shape(1, 48);
  std::uniform_real_distribution<float> val(-2.0f, 2.0f);
  for (int trial = 0; trial < 50; ++trial) {
    std::int64_t m = shape(rng), n = shape(rng), k = shape(rng);
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(k);
    Microkernel mk = select_matmul_tiling(m, n, k, cfg, f16);
    std::vector<std::uint16_t> a(m * k), b(k * n);
    for (auto& v : a) v = f32_to_f16(val(rng));
    for (auto& v : b) v = f32_to_f16(val(rng));
    KernelRun run = run_matmul_fp16(a, b, m, n, k, mk, cfg);
    std::vector<float> ref = ref_matmul_fp16(a, b, m, n, k);
    REQUIRE(run.c_f32.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      double scale = std::max(1.0, std::abs(static_cast<double>(ref[i])));
      REQUIRE(std::abs(run.c_f32[i] - ref[i]) / scale <= 1e-3);
    }
  }
}

TEST_CASE("tile machine issue census is deterministic") {
  MachineConfig cfg = preset("base");
  DataType i8 = parse_dtype("int8");
  Microkernel mk = select_matmul_tiling(32, 32, 32, cfg, i8);
  std::vector<std::int8_t> a(32 * 32, 1), b(32 * 32, 2);
  KernelRun r1 = run_matmul_int8(a, b, 32, 32, 32, mk, cfg);
  KernelRun r2 = run_matmul_int8(a, b, 32, 32, 32, mk, cfg);
  CHECK(r1.cycles == r2.cycles);
  CHECK(r1.alu_slots == r2.alu_slots);
  CHECK(r1.mem_slots == r2.mem_slots);
  CHECK(r1.c_i32 == r2.c_i32);
}
