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

#include <cstdio>
#include <fstream>
#include <random>

#include "arch.hpp"
#include "doctest.h"

using namespace upcycle;

TEST_CASE("base preset peak rates are exact") {
  MachineConfig cfg = preset("base");
  CHECK(cfg.tiles == 2048);
  CHECK(cfg.simd_bits == 512);
  CHECK(cfg.freq_hz == 2.0e9);
  CHECK(cfg.l1_bytes == 16 * 1024);
  CHECK(cfg.llc_bytes == 32ll * 1024 * 1024);
  CHECK(cfg.hbm_stacks == 4);
  // Zero-tolerance peak checks.
  CHECK(peak_ops(cfg, parse_dtype("int8")) == 524.288e12);
  CHECK(peak_ops(cfg, parse_dtype("fp16")) == 262.144e12);
  CHECK(peak_ops(cfg, parse_dtype("fp32")) == 131.072e12);
  PeakRates r = peak_rates(cfg);
  CHECK(r.int8_ops_per_s == 524.288e12);
  CHECK(r.fp16_ops_per_s == 262.144e12);
  CHECK(r.lanes_per_tile == 32);
}

TEST_CASE("riss preset matches the single-tile reference machine") {
  MachineConfig cfg = preset("riss");
  CHECK(cfg.tiles == 1);
  CHECK(cfg.simd_bits == 512);
  CHECK(cfg.freq_hz == 1.2e9);
  CHECK(cfg.llc_bytes == 192 * 1024);
  CHECK(cfg.hbm_stacks == 0);
  CHECK(cfg.mem_bw_bytes_per_s == 25.0e9);
}

TEST_CASE("preset names are case-insensitive and unknown names throw") {
  CHECK(preset("Base").tiles == 2048);
  CHECK(preset("RISS").tiles == 1);
  CHECK_THROWS_AS(preset("a100"), ConfigError);
}

TEST_CASE("datatype accumulator ratios") {
  CHECK(parse_dtype("int8").acc_ratio() == 4);
  CHECK(parse_dtype("fp16").acc_ratio() == 2);
  CHECK(parse_dtype("fp32").acc_ratio() == 1);
  CHECK_THROWS_AS(parse_dtype("bf16"), ConfigError);
  MachineConfig cfg = preset("base");
  CHECK(cfg.vec_elems() == 16);   // 32-bit accumulator elements per register
  CHECK(cfg.vector_bytes() == 64);
}

TEST_CASE("peak_ops is linear in tiles, simd width, and frequency") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> tile_d(1, 4096);
  std::uniform_real_distribution<double> freq_d(0.5e9, 4.0e9);
  const int widths[] = {128, 256, 512};
  DataType i8 = parse_dtype("int8");
  for (int i = 0; i < 50; ++i) {
    MachineConfig cfg = preset("base");
    cfg.tiles = tile_d(rng);
    cfg.simd_bits = widths[i % 3];
    cfg.l1_fill_bytes_per_cycle_per_tile = cfg.simd_bits / 8;
    cfg.freq_hz = freq_d(rng);
    double p = peak_ops(cfg, i8);
    MachineConfig doubled = cfg;
    doubled.tiles *= 2;
    CHECK(peak_ops(doubled, i8) == doctest::Approx(2 * p).epsilon(1e-12));
    doubled = cfg;
    doubled.freq_hz *= 2;
    CHECK(peak_ops(doubled, i8) == doctest::Approx(2 * p).epsilon(1e-12));
  }
}

TEST_CASE("set_field overrides and rejects unknown keys") {
  MachineConfig cfg = preset("base");
  set_field(cfg, "mem_bw_bytes_per_s", 450e9);
  CHECK(cfg.mem_bw_bytes_per_s == 450e9);
  cfg.validate();  // still a valid derived config
  set_field(cfg, "issue_eff", 0.5);
  CHECK(cfg.issue_eff == 0.5);
  CHECK_THROWS_AS(set_field(cfg, "voltage", 1.0), ConfigError);
}

TEST_CASE("validate rejects structurally broken configs") {
  MachineConfig cfg = preset("base");
  cfg.simd_bits = 384;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = preset("base");
  cfg.tiles = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = preset("base");
  cfg.issue_eff = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = preset("base");
  cfg.issue_eff = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = preset("base");
  cfg.l1_fill_bytes_per_cycle_per_tile = 16;  // cannot feed one vector per cycle
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = preset("base");
  cfg.core_mult = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("load_config applies preset seed and field overrides") {
  const char* path = "/tmp/upcycle_test_config.json";
  {
    std::ofstream out(path);
    out << "{\"preset\": \"base\", \"mem_bw_bytes_per_s\": 450e9, \"tiles\": 1024}";
  }
  MachineConfig cfg = load_config(path);
  CHECK(cfg.tiles == 1024);
  CHECK(cfg.mem_bw_bytes_per_s == 450e9);
  CHECK(cfg.simd_bits == 512);  // untouched fields keep preset values
  CHECK_THROWS_AS(load_config("/tmp/upcycle_no_such_config.json"), IoError);
  std::remove(path);
}
