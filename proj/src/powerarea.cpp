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

#include "powerarea.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "json.hpp"

namespace upcycle {

double EnergyCoefficients::pj_mac(DataType dtype) const {
  switch (dtype.kind) {
    case DataKind::Int8: return pj_mac_int8;
    case DataKind::FP16: return pj_mac_fp16;
    case DataKind::FP32: return pj_mac_fp32;
  }
  return pj_mac_int8;
}

EnergyCoefficients default_coeffs() { return {}; }

EnergyCoefficients load_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coefficient file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("coefficient file parse error: " + std::string(e.what()));
  }
  EnergyCoefficients c;
  auto get = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j.at(key).get<double>();
  };
  if (j.contains("tech_node")) c.tech_node = j.at("tech_node").get<std::string>();
  get("ref_volts", c.ref_volts);
  get("pj_mac_int8", c.pj_mac_int8);
  get("pj_mac_fp16", c.pj_mac_fp16);
  get("pj_mac_fp32", c.pj_mac_fp32);
  get("pj_byte_vrf", c.pj_byte_vrf);
  get("pj_byte_l1", c.pj_byte_l1);
  get("pj_byte_llc", c.pj_byte_llc);
  get("pj_byte_dram", c.pj_byte_dram);
  get("noc_pj_per_byte_hop", c.noc_pj_per_byte_hop);
  get("core_dynamic_pj_per_cycle", c.core_dynamic_pj_per_cycle);
  get("lane_dynamic_pj_per_cycle", c.lane_dynamic_pj_per_cycle);
  get("core_leakage_w", c.core_leakage_w);
  get("lane_leakage_w", c.lane_leakage_w);
  get("llc_leakage_w_per_mib", c.llc_leakage_w_per_mib);
  get("hbm_static_w_per_stack", c.hbm_static_w_per_stack);
  get("tile_base_mm2", c.tile_base_mm2);
  get("lane_mm2", c.lane_mm2);
  get("l1_mm2_per_kib", c.l1_mm2_per_kib);
  get("llc_mm2_per_mib", c.llc_mm2_per_mib);
  get("noc_mm2_per_tile", c.noc_mm2_per_tile);
  get("phy_mm2_per_stack", c.phy_mm2_per_stack);
  if (j.contains("vf_curve")) {
    c.vf_curve.clear();
    for (const auto& pt : j.at("vf_curve"))
      c.vf_curve.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
  }
  if (j.contains("tech_table")) {
    c.tech_table.clear();
    for (const auto& [node, entry] : j.at("tech_table").items())
      c.tech_table[node] = {entry.at("area").get<double>(),
                            entry.at("energy").get<double>()};
  }
  return c;
}

EnergyCoefficients coeffs_from_env() {
  const char* path = std::getenv("UPCYCLE_COEFFS");
  if (path && *path) return load_coeffs(path);
  return default_coeffs();
}

double voltage_at(const EnergyCoefficients& coeffs, double freq_hz) {
  const auto& c = coeffs.vf_curve;
  if (c.empty()) throw ConfigError("empty voltage-frequency curve");
  if (freq_hz < c.front().first || freq_hz > c.back().first)
    throw ConfigError("frequency outside the voltage curve domain");
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (freq_hz <= c[i].first) {
      double t = (freq_hz - c[i - 1].first) / (c[i].first - c[i - 1].first);
      return c[i - 1].second + t * (c[i].second - c[i - 1].second);
    }
  }
  return c.back().second;
}

double scale_technology(double value, const std::string& from_node,
                        const std::string& to_node, ScaleKind kind,
                        const EnergyCoefficients& coeffs) {
  auto from = coeffs.tech_table.find(from_node);
  auto to = coeffs.tech_table.find(to_node);
  if (from == coeffs.tech_table.end() || to == coeffs.tech_table.end())
    throw ConfigError("unknown technology node in scaling request");
  double f = kind == ScaleKind::Area ? from->second.area : from->second.energy;
  double t = kind == ScaleKind::Area ? to->second.area : to->second.energy;
  return value * (t / f);
}

AreaBreakdown estimate_area(const MachineConfig& cfg, const EnergyCoefficients& coeffs) {
  AreaBreakdown a;
  double tile = coeffs.tile_base_mm2 + coeffs.lane_mm2 * cfg.lanes_per_tile() +
                coeffs.l1_mm2_per_kib * (cfg.l1_bytes / 1024.0);
  a.tiles_mm2 = tile * cfg.tiles;
  a.llc_mm2 = coeffs.llc_mm2_per_mib * (cfg.llc_bytes / (1024.0 * 1024.0));
  a.noc_mm2 = coeffs.noc_mm2_per_tile * cfg.tiles;
  a.phy_mm2 = coeffs.phy_mm2_per_stack * cfg.hbm_stacks;
  a.total_mm2 = a.tiles_mm2 + a.llc_mm2 + a.noc_mm2 + a.phy_mm2;
  return a;
}

namespace {

double static_watts(const MachineConfig& cfg, const EnergyCoefficients& coeffs,
                    double vscale) {
  double tile_leak =
      coeffs.core_leakage_w + coeffs.lane_leakage_w * cfg.lanes_per_tile();
  double leak = cfg.tiles * tile_leak +
                coeffs.llc_leakage_w_per_mib * (cfg.llc_bytes / (1024.0 * 1024.0));
  return leak * vscale + coeffs.hbm_static_w_per_stack * cfg.hbm_stacks;
}

double tile_dynamic_pj_per_cycle(const MachineConfig& cfg,
                                 const EnergyCoefficients& coeffs) {
  return coeffs.core_dynamic_pj_per_cycle +
         coeffs.lane_dynamic_pj_per_cycle * cfg.lanes_per_tile();
}

}  // namespace

double estimate_tdp(const MachineConfig& cfg, const EnergyCoefficients& coeffs) {
  double v = voltage_at(coeffs, cfg.freq_hz) / coeffs.ref_volts;
  double vs2 = v * v;
  double macs_per_s = peak_ops(cfg, {DataKind::Int8}) / 2.0;
  double l1_bytes_per_s =
      cfg.l1_fill_bytes_per_cycle_per_tile * cfg.tiles * cfg.freq_hz;
  double llc_bytes_per_s =
      0.5 * cfg.llc_fill_bytes_per_cycle_per_tile * cfg.tiles * cfg.freq_hz;
  double dram_bytes_per_s = cfg.mem_bw_bytes_per_s * cfg.mem_bw_efficiency;
  double mean_hops = std::sqrt(static_cast<double>(cfg.tiles)) / 2.0;

  double dyn = macs_per_s * coeffs.pj_mac_int8 +
               l1_bytes_per_s * (coeffs.pj_byte_l1 + coeffs.pj_byte_vrf) +
               llc_bytes_per_s * (coeffs.pj_byte_llc +
                                  coeffs.noc_pj_per_byte_hop * mean_hops) +
               cfg.tiles * cfg.freq_hz * tile_dynamic_pj_per_cycle(cfg, coeffs);
  dyn *= vs2 * 1e-12;
  dyn += dram_bytes_per_s * coeffs.pj_byte_dram * 1e-12;
  return dyn + static_watts(cfg, coeffs, v);
}

PowerAreaReport estimate_power(const MachineConfig& cfg, const SimResult& run,
                               const EnergyCoefficients& coeffs) {
  double v = voltage_at(coeffs, cfg.freq_hz) / coeffs.ref_volts;
  double vs2 = v * v;
  double mean_hops = std::sqrt(static_cast<double>(cfg.tiles)) / 2.0;

  PowerAreaReport r;
  r.area_mm2 = estimate_area(cfg, coeffs).total_mm2;
  r.tdp_w = estimate_tdp(cfg, coeffs);
  r.static_w = static_watts(cfg, coeffs, v);

  for (const auto& op : run.operators) {
    double macs = static_cast<double>(op.ops) / 2.0;
    r.e_mac_j += macs * coeffs.pj_mac(parse_dtype(op.dtype)) * vs2 * 1e-12;
    r.e_sram_j += (static_cast<double>(op.l1_bytes) *
                       (coeffs.pj_byte_l1 + coeffs.pj_byte_vrf) +
                   static_cast<double>(op.llc_bytes) * coeffs.pj_byte_llc) *
                  vs2 * 1e-12;
    r.e_noc_j += static_cast<double>(op.llc_bytes) * coeffs.noc_pj_per_byte_hop *
                 mean_hops * vs2 * 1e-12;
  }
  r.e_dram_j = static_cast<double>(run.dram_read_bytes + run.dram_write_bytes) *
               coeffs.pj_byte_dram * 1e-12;
  // Cores clock for the whole run; idle slack is not gated.
  r.e_core_j = cfg.tiles * cfg.freq_hz * tile_dynamic_pj_per_cycle(cfg, coeffs) *
               vs2 * 1e-12 * run.total_s;
  r.e_static_j = r.static_w * run.total_s;

  r.energy_j = r.e_mac_j + r.e_sram_j + r.e_noc_j + r.e_dram_j + r.e_core_j + r.e_static_j;
  r.avg_power_w = run.total_s > 0 ? r.energy_j / run.total_s : r.static_w;
  r.pj_per_op = run.total_ops > 0 ? r.energy_j / run.total_ops * 1e12 : 0;
  r.tops_per_mm2 =
      r.area_mm2 > 0 ? run.achieved_ops_per_s / 1e12 / r.area_mm2 : 0;
  return r;
}

}  // namespace upcycle
