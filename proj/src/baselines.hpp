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

#include <optional>
#include <string>
#include <vector>

#include "arch.hpp"
#include "perf.hpp"
#include "powerarea.hpp"

namespace upcycle {

// Published A100 chip utilization for one application and mode, at small
// (batch 1) and large (best of 64-128) batch.
struct A100Utilization {
  std::string app;
  std::string mode;  // inference | training
  double small = 0;
  double large = 0;
};

// Published A100 efficiency point: (TOP/s per mm2, pJ/op).
struct A100Efficiency {
  std::string app;
  std::string mode;
  double tops_per_mm2 = 0;
  double pj_per_op = 0;
};

// Externally published comparison values, embedded verbatim.
struct BaselineTable {
  double a100_area_mm2 = 840.0;
  double a100_tdp_w = 300.0;
  double a100_freq_hz = 1.4e9;
  double a100_peak_int8_ops = 624.0e12;
  double a100_peak_fp16_ops = 312.0e12;
  std::vector<A100Utilization> a100_utilization;
  std::vector<A100Efficiency> a100_efficiency;
  double eyeriss_alexnet_pj_per_op = 3.95;
  double eyeriss_mobilenet_pj_per_op = 5.16;
};

const BaselineTable& baselines();

const A100Utilization* find_a100_utilization(const std::string& app,
                                             const std::string& mode);
const A100Efficiency* find_a100_efficiency(const std::string& app,
                                           const std::string& mode);

// Reconstructed A100 throughput from published utilization and peak:
// samples/s = utilization * peak(dtype) / ops_per_sample.
double a100_samples_per_s(double utilization, DataType dtype, double ops_per_sample);

struct ComparisonRow {
  std::string app;
  std::string mode;
  std::string regime;  // small | large
  double upcycle_samples_per_s = 0;
  double a100_samples_per_s = 0;
  double speedup = 0;
  double upcycle_pj_per_op = 0;
  double a100_pj_per_op = 0;       // 0 when unpublished
  double relative_efficiency = 0;  // a100 pJ/op divided by ours; 0 when unknown
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> skipped;  // apps without baseline coverage
  double geomean_speedup_small_inference = 0;
  double geomean_speedup_small_training = 0;
  double geomean_speedup_large_inference = 0;
  double geomean_speedup_large_training = 0;
};

// One simulated (app, mode, regime) sample to fold into a comparison.
struct ComparisonInput {
  std::string app;
  std::string mode;
  std::string regime;
  DataType dtype;
  double ops_per_sample = 0;
  double samples_per_s = 0;
  double pj_per_op = 0;
};

ComparisonReport compare_to_a100(const std::vector<ComparisonInput>& inputs);

}  // namespace upcycle
