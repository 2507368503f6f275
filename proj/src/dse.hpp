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

#include <cstddef>
#include <string>
#include <vector>

#include "arch.hpp"
#include "perf.hpp"
#include "powerarea.hpp"
#include "workload.hpp"

namespace upcycle {

struct SweepTraceSpec {
  std::string path;
  std::string dtype;  // empty = trace dtypes as shipped
  std::int64_t batch = 0;
  bool train = false;  // expand the forward trace before simulating
};

struct SweepSpec {
  std::vector<int> tiles_axis{1024, 2048, 4096};
  std::vector<int> simd_axis{256, 512};
  std::vector<double> freq_axis{1.0e9, 1.5e9, 2.0e9, 2.5e9};
  std::vector<SweepTraceSpec> traces;
};

SweepSpec load_sweep_spec(const std::string& path);

struct TraceMetrics {
  std::string trace_name;
  double pj_per_op = 0;
  double tops_per_mm2 = 0;
  double samples_per_s = 0;
  double utilization = 0;
  double total_s = 0;
};

struct DesignPoint {
  MachineConfig cfg;
  bool feasible = true;
  std::string error;
  std::vector<TraceMetrics> per_trace;
  double geomean_pj_per_op = 0;
  double geomean_tops_per_mm2 = 0;
  bool pareto = false;
};

struct LoadedTrace {
  Trace trace;
  std::int64_t batch = 0;  // 0 = trace default
};

// Evaluates the full axis grid over the given traces. Infeasible configs are
// returned flagged, never dropped. Deterministic point order (tiles-major).
std::vector<DesignPoint> sweep(const SweepSpec& spec,
                               const std::vector<LoadedTrace>& traces,
                               const EnergyCoefficients& coeffs);

// Indices of the non-dominated subset under (max tops/mm2, min pJ/op),
// in input order. Infeasible points never make the frontier.
std::vector<std::size_t> pareto_front(const std::vector<DesignPoint>& points);

// Speedup from scaling per-tile compute and fill rates, DRAM bandwidth fixed.
struct CoreScalingPoint {
  double multiplier = 1.0;
  double speedup = 1.0;
};
std::vector<CoreScalingPoint> sensitivity_core(const Trace& trace,
                                               const MachineConfig& cfg,
                                               const std::vector<double>& multipliers,
                                               const SimOptions& base = {});

// Applies a datatype to every node and tensor of a trace.
Trace with_dtype(const Trace& trace, DataType dtype);

double geomean(const std::vector<double>& values);

}  // namespace upcycle
