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
#include "mapping.hpp"
#include "workload.hpp"

namespace upcycle {

struct SimOptions {
  // 0 means use the batch declared in the trace header.
  std::int64_t batch = 0;
  std::optional<double> bw_override_bytes_per_s;  // raw, before efficiency derate
  // Infinite on-chip reuse: activations only miss on first touch, weights
  // pay their compulsory traffic once.
  bool perfect_cache = false;
  // Steady-state serving: weights stay resident when the full set fits on chip.
  bool weight_pinning = true;
  bool occupancy_aware = true;
  // Let the inference planner split the batch to keep intermediates on chip.
  // Splits below min_sub_batch samples are not considered; very fine segments
  // lose too much weight-reload amortization to be scheduled in practice.
  bool sub_batching = true;
  std::int64_t min_sub_batch = 16;
};

struct OperatorTiming {
  std::string node_id;
  std::string kind;
  std::string shape;
  std::int64_t ops = 0;
  double compute_s = 0;
  double dram_s = 0;
  double llc_s = 0;
  double l1_s = 0;
  double barrier_s = 0;
  double total_s = 0;
  double utilization = 0;
  double simd_efficiency = 1.0;
  std::int64_t chunk_count = 0;
  std::int64_t dram_read_bytes = 0;
  std::int64_t dram_write_bytes = 0;
  std::int64_t llc_bytes = 0;
  std::int64_t l1_bytes = 0;
  std::string dtype;
  std::string bound;  // compute | dram | llc | l1
};

struct SimResult {
  std::string trace_name;
  std::string mode;
  std::int64_t batch = 1;
  double total_s = 0;
  double total_ops = 0;
  double utilization = 0;        // against the dominant-dtype peak
  double achieved_ops_per_s = 0;
  double peak_ops_per_s = 0;
  std::string dominant_dtype;
  double samples_per_s = 0;
  std::int64_t dram_read_bytes = 0;
  std::int64_t dram_write_bytes = 0;
  bool weights_pinned = false;
  std::int64_t weight_bytes_total = 0;
  double compute_bound_fraction = 0;  // time share of compute-bound operators
  std::vector<OperatorTiming> operators;
};

SimResult simulate(const Trace& trace, const MachineConfig& cfg,
                   const SimOptions& opts = {});

struct BwMode {
  double bw_bytes_per_s = 0;  // non-finite or <= 0 means unlimited
  bool perfect_cache = false;
};

// Throughput at each bandwidth mode relative to the config's own bandwidth.
std::vector<double> sensitivity_membw(const Trace& trace, const MachineConfig& cfg,
                                      const std::vector<BwMode>& modes,
                                      const SimOptions& base = {});

}  // namespace upcycle
