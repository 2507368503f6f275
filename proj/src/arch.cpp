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

#include "arch.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace upcycle {

DataType parse_dtype(const std::string& name) {
  if (name == "int8") return {DataKind::Int8};
  if (name == "fp16") return {DataKind::FP16};
  if (name == "fp32") return {DataKind::FP32};
  throw ConfigError("unknown dtype: " + name);
}

void MachineConfig::validate() const {
  if (simd_bits != 128 && simd_bits != 256 && simd_bits != 512)
    throw ConfigError("simd_bits must be one of 128/256/512");
  if (tiles < 1) throw ConfigError("tiles must be >= 1");
  if (vrf_regs < 8) throw ConfigError("vrf_regs must be >= 8");
  if (freq_hz <= 0) throw ConfigError("freq_hz must be positive");
  if (mem_bw_efficiency <= 0 || mem_bw_efficiency > 1.0)
    throw ConfigError("mem_bw_efficiency must be in (0, 1]");
  if (l1_bytes <= 0 || llc_bytes <= 0) throw ConfigError("cache sizes must be positive");
  // The L1 fill rate has to keep one full vector per cycle flowing.
  if (l1_fill_bytes_per_cycle_per_tile < vector_bytes())
    throw ConfigError("l1 fill rate must match the SIMD width");
  if (core_mult < 1.0) throw ConfigError("core_mult must be >= 1");
  if (issue_eff <= 0 || issue_eff > 1.0)
    throw ConfigError("issue_eff must be in (0, 1]");
}

double peak_ops(const MachineConfig& cfg, DataType dtype) {
  double macs_per_lane;
  switch (dtype.kind) {
    case DataKind::Int8: macs_per_lane = 2.0; break;
    case DataKind::FP16: macs_per_lane = 1.0; break;
    case DataKind::FP32: macs_per_lane = 0.5; break;  // one FP32 MAC per two lanes
    default: macs_per_lane = 1.0; break;
  }
  return static_cast<double>(cfg.tiles) * cfg.lanes_per_tile() * macs_per_lane * 2.0 *
         cfg.freq_hz * cfg.core_mult;
}

PeakRates peak_rates(const MachineConfig& cfg) {
  PeakRates r;
  r.int8_ops_per_s = peak_ops(cfg, {DataKind::Int8});
  r.fp16_ops_per_s = peak_ops(cfg, {DataKind::FP16});
  r.lanes_per_tile = cfg.lanes_per_tile();
  return r;
}

MachineConfig preset(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "base") {
    MachineConfig cfg;  // defaults are the base machine
    cfg.validate();
    return cfg;
  }
  if (n == "riss") {
    MachineConfig cfg;
    cfg.tiles = 1;
    cfg.simd_bits = 512;
    cfg.freq_hz = 1.2e9;
    cfg.llc_bytes = 192 * 1024;
    cfg.mem_bw_bytes_per_s = 25.0e9;  // LPDDR-class, no HBM stacks
    cfg.hbm_stacks = 0;
    cfg.validate();
    return cfg;
  }
  throw ConfigError("unknown preset: " + name);
}

void set_field(MachineConfig& cfg, const std::string& key, double value) {
  if (key == "tiles") cfg.tiles = static_cast<int>(value);
  else if (key == "simd_bits") cfg.simd_bits = static_cast<int>(value);
  else if (key == "vrf_regs") cfg.vrf_regs = static_cast<int>(value);
  else if (key == "freq_hz") cfg.freq_hz = value;
  else if (key == "l1_bytes") cfg.l1_bytes = static_cast<std::int64_t>(value);
  else if (key == "llc_bytes") cfg.llc_bytes = static_cast<std::int64_t>(value);
  else if (key == "mem_bw_bytes_per_s") cfg.mem_bw_bytes_per_s = value;
  else if (key == "mem_bw_efficiency") cfg.mem_bw_efficiency = value;
  else if (key == "line_bytes") cfg.line_bytes = static_cast<int>(value);
  else if (key == "l1_fill_bytes_per_cycle_per_tile") cfg.l1_fill_bytes_per_cycle_per_tile = value;
  else if (key == "llc_fill_bytes_per_cycle_per_tile") cfg.llc_fill_bytes_per_cycle_per_tile = value;
  else if (key == "hbm_stacks") cfg.hbm_stacks = static_cast<int>(value);
  else if (key == "barrier_cycles") cfg.barrier_cycles = value;
  else if (key == "issue_eff") cfg.issue_eff = value;
  else if (key == "core_mult") cfg.core_mult = value;
  else throw ConfigError("unknown config field: " + key);
}

MachineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config file parse error: " + std::string(e.what()));
  }
  MachineConfig cfg;
  if (j.contains("preset")) cfg = preset(j.at("preset").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "preset" || key == "version") continue;
    if (!value.is_number()) throw ConfigError("config field must be numeric: " + key);
    set_field(cfg, key, value.get<double>());
  }
  cfg.validate();
  return cfg;
}

}  // namespace upcycle
