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
#include <string>
#include <utility>
#include <vector>

#include "arch.hpp"
#include "workload.hpp"

namespace upcycle {

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

enum class VecDim { M, K, ChannelBlock };

// Register-resident inner loop: a TMxTN accumulator tile reduced over K,
// with TK reduction elements consumed per FMA (the wide-accumulate ratio).
struct Microkernel {
  VecDim vectorized_dim = VecDim::M;
  int tm = 1;
  int tn = 1;
  int tk = 1;  // reduction elements per FMA step
  int loads_per_kstep = 2;
  int fmas_per_kstep = 1;
  bool needs_reduction = false;

  int acc_regs() const { return tm * tn; }
  int operand_regs() const { return tm + tn; }
  bool fits(int vrf_regs) const { return acc_regs() + operand_regs() + 2 <= vrf_regs; }
};

struct WorkDecomposition {
  std::int64_t chunk_count = 1;   // independent chunks (per chain step, if chained)
  std::int64_t chain_length = 1;  // >1: sequential chain of identical steps
  Microkernel mk;
  double simd_efficiency = 1.0;
  double cycles_per_chunk = 0;  // dual-issue cycles, epilogue included
  std::int64_t ideal_ops = 0;   // batch- and chain-inclusive
  double padded_ops = 0;

  // Raw traffic footprints; the timeline model applies cache residency.
  std::int64_t l1_bytes = 0;
  std::int64_t weight_bytes = 0;
  std::vector<std::pair<std::string, std::int64_t>> input_reads;   // activation id -> bytes
  std::vector<std::pair<std::string, std::int64_t>> output_writes;  // id -> bytes
  bool min_tiling_padded = false;

  double chunk_work_ops() const {
    return static_cast<double>(ideal_ops) / (static_cast<double>(chunk_count) * chain_length);
  }
};

// Fixed per-chunk dispatch/epilogue overhead, in cycles.
inline constexpr double kChunkOverheadCycles = 16.0;

// Default register tiling for a (possibly conv-shaped) GEMM: maximize tm*tn
// under the budget tm*tn + tm + tn + 2 <= vrf_regs; ties prefer tm a multiple
// of the accumulator ratio, then larger tm.
Microkernel select_matmul_tiling(std::int64_t m, std::int64_t n, std::int64_t k,
                                 const MachineConfig& cfg, DataType dtype);

struct MapOptions {
  std::int64_t batch = 1;
  // When set, the tile search also weighs machine occupancy: an operator that
  // cannot fill the tiles with full-size register tiles is split finer.
  bool occupancy_aware = true;
};

WorkDecomposition map_matmul(const OperatorNode& node, const MachineConfig& cfg,
                             const Trace& trace, const MapOptions& opts = {});
WorkDecomposition map_conv2d(const OperatorNode& node, const MachineConfig& cfg,
                             const Trace& trace, const MapOptions& opts = {});
std::pair<WorkDecomposition, WorkDecomposition> map_conv2d_backward(
    const OperatorNode& node, const MachineConfig& cfg, const Trace& trace,
    const MapOptions& opts = {});
WorkDecomposition map_elementwise(const OperatorNode& node, const MachineConfig& cfg,
                                  const Trace& trace, const MapOptions& opts = {});

// An LSTM sequence maps to two phases: the batched input-weight GEMM
// (embarrassingly parallel) and the sequential hidden chain.
struct LstmDecomposition {
  WorkDecomposition input_phase;
  WorkDecomposition hidden_chain;  // chain_length = sequence length
};
LstmDecomposition map_lstm_sequence(const std::vector<const OperatorNode*>& chain,
                                    const MachineConfig& cfg, const Trace& trace,
                                    const MapOptions& opts = {});

// Dispatch for any non-LSTM node (LSTM chains need the grouped entry point).
// Conv2D backward nodes yield the dI or dW half matching the node kind.
WorkDecomposition map_operator(const OperatorNode& node, const MachineConfig& cfg,
                               const Trace& trace, const MapOptions& opts = {});

}  // namespace upcycle
