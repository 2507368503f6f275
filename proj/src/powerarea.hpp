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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "arch.hpp"
#include "perf.hpp"

namespace upcycle {

struct TechScale {
  double area = 1.0;
  double energy = 1.0;
};

// Component-level energy and area coefficients. Defaults are calibrated to
// the published die figures; a coefficient file can substitute any of them.
struct EnergyCoefficients {
  std::string tech_node = "7nm";
  double ref_volts = 0.80;  // voltage at which the pJ values are quoted

  double pj_mac_int8 = 0.10;
  double pj_mac_fp16 = 0.32;
  double pj_mac_fp32 = 1.40;
  double pj_byte_vrf = 0.02;
  double pj_byte_l1 = 0.08;
  double pj_byte_llc = 0.12;
  double pj_byte_dram = 15.0;
  double noc_pj_per_byte_hop = 0.010;

  // Tile dynamic energy splits into a fixed control/scalar part and a
  // per-16-bit-lane datapath part; leakage splits the same way.
  double core_dynamic_pj_per_cycle = 0.34;  // scalar core + control, per tile
  double lane_dynamic_pj_per_cycle = 0.13;  // vector datapath, per lane
  double core_leakage_w = 0.00064;          // per tile
  double lane_leakage_w = 0.00023;          // per lane
  double llc_leakage_w_per_mib = 0.10;
  double hbm_static_w_per_stack = 5.0;

  double tile_base_mm2 = 0.010;  // scalar core + control
  double lane_mm2 = 0.001;       // per 16-bit SIMD lane, VRF included
  double l1_mm2_per_kib = 0.0005;
  double llc_mm2_per_mib = 0.80;
  double noc_mm2_per_tile = 0.0022;
  double phy_mm2_per_stack = 2.0;

  // Piecewise-linear voltage-frequency operating curve, sorted by frequency.
  std::vector<std::pair<double, double>> vf_curve = {
      {0.5e9, 0.55}, {1.2e9, 0.65}, {2.0e9, 0.80}, {3.0e9, 1.00}, {4.0e9, 1.15}};

  // Area/energy multipliers relative to 7nm, transcribed scaling-table data.
  std::map<std::string, TechScale> tech_table = {
      {"7nm", {1.0, 1.0}},   {"10nm", {1.6, 1.3}},  {"14nm", {2.4, 1.7}},
      {"16nm", {2.8, 1.9}},  {"22nm", {4.6, 2.6}},  {"28nm", {6.6, 3.3}},
      {"32nm", {8.4, 3.9}},  {"45nm", {14.0, 5.6}}, {"65nm", {28.0, 8.8}}};

  double pj_mac(DataType dtype) const;
};

EnergyCoefficients default_coeffs();
EnergyCoefficients load_coeffs(const std::string& path);
// Honors UPCYCLE_COEFFS when set, otherwise returns the defaults.
EnergyCoefficients coeffs_from_env();

// Operating voltage at a frequency; throws outside the curve domain.
double voltage_at(const EnergyCoefficients& coeffs, double freq_hz);

enum class ScaleKind { Area, Energy };
double scale_technology(double value, const std::string& from_node,
                        const std::string& to_node, ScaleKind kind,
                        const EnergyCoefficients& coeffs);

struct AreaBreakdown {
  double tiles_mm2 = 0;
  double llc_mm2 = 0;
  double noc_mm2 = 0;
  double phy_mm2 = 0;
  double total_mm2 = 0;
};

AreaBreakdown estimate_area(const MachineConfig& cfg, const EnergyCoefficients& coeffs);

// Worst-case sustained power: Int8 peak compute with the memory system at
// its service rates (L1 fill saturated, LLC at half duty, DRAM at the
// effective bandwidth), plus all static components.
double estimate_tdp(const MachineConfig& cfg, const EnergyCoefficients& coeffs);

struct PowerAreaReport {
  double area_mm2 = 0;
  double tdp_w = 0;
  double avg_power_w = 0;
  double energy_j = 0;
  double pj_per_op = 0;
  double tops_per_mm2 = 0;  // achieved throughput density
  double static_w = 0;
  // Component energies; avg_power * time == their sum plus static * time.
  double e_mac_j = 0;
  double e_sram_j = 0;
  double e_noc_j = 0;
  double e_dram_j = 0;
  double e_core_j = 0;
  double e_static_j = 0;
};

PowerAreaReport estimate_power(const MachineConfig& cfg, const SimResult& run,
                               const EnergyCoefficients& coeffs);

}  // namespace upcycle
