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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace upcycle {

enum class DataKind { Int8, FP16, FP32 };

struct DataType {
  DataKind kind = DataKind::Int8;

  int input_bits() const {
    switch (kind) {
      case DataKind::Int8: return 8;
      case DataKind::FP16: return 16;
      case DataKind::FP32: return 32;
    }
    return 8;
  }
  int accumulator_bits() const { return 32; }
  // Accumulator-to-input width ratio: 4 for Int8, 2 for FP16, 1 for FP32.
  int acc_ratio() const { return accumulator_bits() / input_bits(); }
  int input_bytes() const { return input_bits() / 8; }
  std::string name() const {
    switch (kind) {
      case DataKind::Int8: return "int8";
      case DataKind::FP16: return "fp16";
      case DataKind::FP32: return "fp32";
    }
    return "?";
  }
};

DataType parse_dtype(const std::string& name);

// One instantiation of the machine: tile count, SIMD width, cache sizes,
// and the memory bandwidth hierarchy, plus derived structural constants.
struct MachineConfig {
  int tiles = 2048;
  int simd_bits = 512;
  int vrf_regs = 32;
  double freq_hz = 2.0e9;
  std::int64_t l1_bytes = 16 * 1024;
  std::int64_t llc_bytes = 32ll * 1024 * 1024;
  double mem_bw_bytes_per_s = 900.0e9;
  double mem_bw_efficiency = 0.60;
  int line_bytes = 64;
  double l1_fill_bytes_per_cycle_per_tile = 64.0;   // L1 -> VRF, one full vector
  double llc_fill_bytes_per_cycle_per_tile = 32.0;  // LLC -> L1
  int hbm_stacks = 4;
  double barrier_cycles = 300.0;
  // Sustained vector-ALU issue rate of the in-order pipeline relative to one
  // op per cycle; covers load-use and accumulator dependency stalls.
  double issue_eff = 0.74;
  // Abstract core-speed multiplier for headroom studies. Scales per-tile
  // compute rate and the LLC->L1->VRF fill rates, not DRAM bandwidth.
  double core_mult = 1.0;

  int lanes_per_tile() const { return simd_bits / 16; }
  // Accumulator elements per vector register (32-bit accumulation).
  int vec_elems() const { return simd_bits / 32; }
  int vector_bytes() const { return simd_bits / 8; }

  void validate() const;
};

struct PeakRates {
  double int8_ops_per_s = 0;
  double fp16_ops_per_s = 0;
  int lanes_per_tile = 0;
};

// Peak multiply-add throughput (a MAC counts as 2 ops).
double peak_ops(const MachineConfig& cfg, DataType dtype);
PeakRates peak_rates(const MachineConfig& cfg);

// Named configurations. "base" is the 2048-tile, 512-bit, 2 GHz machine;
// "riss" is the single-tile 1.2 GHz machine with a 192 KB last-level cache.
MachineConfig preset(const std::string& name);

// Config file mirroring the MachineConfig fields; missing fields keep their
// defaults. An optional "preset" key seeds the starting point.
MachineConfig load_config(const std::string& path);

// Numeric field override by name; throws ConfigError on unknown fields.
void set_field(MachineConfig& cfg, const std::string& key, double value);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File-system level failures, distinct from validation or config errors.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace upcycle
