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

#include "mapping.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace upcycle {

namespace {

int loads_per_kstep_for(int tm, int tn, DataType dtype, const MachineConfig& cfg) {
  int r = dtype.acc_ratio();
  // tm strided line fetches from A amortized by the wide-accumulate ratio;
  // one multi-broadcast fills tn operand registers per cache line.
  std::int64_t a_loads = ceil_div(tm, r);
  std::int64_t b_loads = ceil_div(static_cast<std::int64_t>(tn) * dtype.input_bytes(),
                                  cfg.line_bytes);
  return static_cast<int>(a_loads + std::max<std::int64_t>(b_loads, 1));
}

Microkernel make_kernel(int tm, int tn, DataType dtype, const MachineConfig& cfg,
                        VecDim vdim) {
  Microkernel mk;
  mk.vectorized_dim = vdim;
  mk.tm = tm;
  mk.tn = tn;
  mk.tk = dtype.acc_ratio();
  mk.fmas_per_kstep = tm * tn;
  mk.loads_per_kstep = loads_per_kstep_for(tm, tn, dtype, cfg);
  mk.needs_reduction = (vdim == VecDim::K);
  return mk;
}

double chunk_cycles(const Microkernel& mk, std::int64_t k_red, double issue_eff) {
  std::int64_t ksteps = ceil_div(k_red, mk.tk);
  double alu = static_cast<double>(ksteps) * mk.fmas_per_kstep / issue_eff;
  double mem = static_cast<double>(ksteps) * mk.loads_per_kstep + mk.acc_regs();
  return std::max(alu, mem) + kChunkOverheadCycles;
}

// Better-than comparison for the tie-break chain: larger tm*tn, then tm a
// multiple of the accumulator ratio, then larger tm.
bool tile_pref(int tm_a, int tn_a, int tm_b, int tn_b, int r) {
  if (tm_a * tn_a != tm_b * tn_b) return tm_a * tn_a > tm_b * tn_b;
  bool am = tm_a % r == 0, bm = tm_b % r == 0;
  if (am != bm) return am;
  return tm_a > tm_b;
}

struct GemmInputs {
  std::int64_t m_like = 1;      // vectorized output dimension
  std::int64_t n_like = 1;      // broadcast output dimension
  std::int64_t k_red = 1;       // reduction length
  std::int64_t chunk_mult = 1;  // independent outer instances (batch, conv N, ...)
};

// Shared lowering for everything that bottoms out in the GEMM microkernel.
WorkDecomposition map_gemm_like(const GemmInputs& g, const MachineConfig& cfg,
                                DataType dtype, bool occupancy_aware) {
  const int V = cfg.vec_elems();
  const int r = dtype.acc_ratio();
  WorkDecomposition d;
  d.ideal_ops = 2 * g.m_like * g.n_like * g.k_red * g.chunk_mult;

  if (g.m_like == 1) {
    // Vectorize the reduction and pay an add-reduction per output.
    int tn_max = static_cast<int>(std::min<std::int64_t>((cfg.vrf_regs - 3) / 2, g.n_like));
    tn_max = std::max(tn_max, 1);
    Microkernel mk = make_kernel(1, tn_max, dtype, cfg, VecDim::K);
    d.mk = mk;
    d.chunk_count = ceil_div(g.n_like, mk.tn) * g.chunk_mult;
    std::int64_t ksteps = ceil_div(g.k_red, static_cast<std::int64_t>(V) * r);
    double alu = (static_cast<double>(ksteps) * mk.tn + 2.0 * mk.tn) / cfg.issue_eff;
    double mem = static_cast<double>(ksteps) * (mk.tn + 1) + mk.tn;
    d.cycles_per_chunk = std::max(alu, mem) + kChunkOverheadCycles;
    d.padded_ops = 2.0 * g.n_like * g.k_red * g.chunk_mult;
    d.simd_efficiency = 1.0;  // no output-vector padding on the K-vectorized path
    return d;
  }

  std::int64_t mv = ceil_div(g.m_like, V);  // vector granules along m
  auto eval = [&](int tm, int tn, std::int64_t* chunks, double* cycles, double* total) {
    *chunks = ceil_div(mv, tm) * ceil_div(g.n_like, tn) * g.chunk_mult;
    Microkernel mk = make_kernel(tm, tn, dtype, cfg, VecDim::M);
    *cycles = chunk_cycles(mk, g.k_red, cfg.issue_eff);
    std::int64_t waves = ceil_div(*chunks, cfg.tiles);
    *total = static_cast<double>(waves) * (*cycles);
  };

  int best_tm = 1, best_tn = 1;
  bool have = false;
  double best_total = 0;
  int tm_cap = static_cast<int>(std::min<std::int64_t>(mv, cfg.vrf_regs));
  int tn_cap = static_cast<int>(std::min<std::int64_t>(g.n_like, cfg.vrf_regs));
  for (int tm = 1; tm <= tm_cap; ++tm) {
    for (int tn = 1; tn <= tn_cap; ++tn) {
      if (tm * tn + tm + tn + 2 > cfg.vrf_regs) break;
      std::int64_t chunks;
      double cycles, total;
      eval(tm, tn, &chunks, &cycles, &total);
      bool better;
      if (!have) {
        better = true;
      } else if (occupancy_aware) {
        // Occupancy-driven splits may trade load hiding for parallelism;
        // the timeline charges their memory-pipe cycles either way.
        better = total < best_total ||
                 (total == best_total && tile_pref(tm, tn, best_tm, best_tn, r));
      } else {
        better = tile_pref(tm, tn, best_tm, best_tn, r);
      }
      if (better) {
        best_tm = tm;
        best_tn = tn;
        best_total = total;
        have = true;
      }
    }
  }
  assert(have);

  Microkernel mk = make_kernel(best_tm, best_tn, dtype, cfg, VecDim::M);
  d.mk = mk;
  std::int64_t chunks;
  double cycles, total;
  eval(best_tm, best_tn, &chunks, &cycles, &total);
  d.chunk_count = chunks;
  d.cycles_per_chunk = cycles;
  std::int64_t m_pad = ceil_div(mv, best_tm) * best_tm * V;
  std::int64_t n_pad = ceil_div(g.n_like, best_tn) * best_tn;
  d.padded_ops = 2.0 * static_cast<double>(m_pad) * n_pad * g.k_red * g.chunk_mult;
  d.simd_efficiency = static_cast<double>(d.ideal_ops) / d.padded_ops;
  return d;
}

void attach_io(WorkDecomposition& d, const OperatorNode& node, const Trace& trace,
               std::int64_t batch) {
  for (const auto& in : node.inputs) {
    auto it = trace.tensors.find(in);
    if (it == trace.tensors.end()) continue;
    const TensorSpec& t = it->second;
    if (t.role == TensorRole::Weight) {
      d.weight_bytes += t.bytes();
    } else {
      d.input_reads.emplace_back(in, t.bytes() * batch);
    }
  }
  for (const auto& out : node.outputs) {
    auto it = trace.tensors.find(out);
    if (it == trace.tensors.end()) continue;
    d.output_writes.emplace_back(out, it->second.bytes() * batch);
  }
}

}  // namespace

Microkernel select_matmul_tiling(std::int64_t m, std::int64_t n, std::int64_t k,
                                 const MachineConfig& cfg, DataType dtype) {
  (void)k;
  const int V = cfg.vec_elems();
  const int r = dtype.acc_ratio();
  if (m == 1) {
    int tn = static_cast<int>(std::min<std::int64_t>((cfg.vrf_regs - 3) / 2, n));
    return make_kernel(1, std::max(tn, 1), dtype, cfg, VecDim::K);
  }
  std::int64_t mv = ceil_div(m, V);
  int best_tm = 1, best_tn = 1;
  for (int tm = 1; tm <= cfg.vrf_regs; ++tm) {
    if (tm > mv) break;
    for (int tn = 1; tn <= cfg.vrf_regs; ++tn) {
      if (tn > n) break;
      if (tm * tn + tm + tn + 2 > cfg.vrf_regs) break;
      if (tile_pref(tm, tn, best_tm, best_tn, r)) {
        best_tm = tm;
        best_tn = tn;
      }
    }
  }
  return make_kernel(best_tm, best_tn, dtype, cfg, VecDim::M);
}

WorkDecomposition map_matmul(const OperatorNode& node, const MachineConfig& cfg,
                             const Trace& trace, const MapOptions& opts) {
  const auto& p = node.matmul();
  GemmInputs g{p.m, p.n, p.k, opts.batch};
  WorkDecomposition d = map_gemm_like(g, cfg, node.dtype, opts.occupancy_aware);

  // An MKKN-style layout with N below the vector width forces padded loads.
  if (node.inputs.size() > 1) {
    auto it = trace.tensors.find(node.inputs[1]);
    if (it != trace.tensors.end() && it->second.layout == "KN" && p.n < cfg.vec_elems())
      d.min_tiling_padded = true;
  }

  std::int64_t b = node.dtype.input_bytes();
  std::int64_t a_tile = static_cast<std::int64_t>(d.mk.tm) * cfg.vec_elems() * p.k * b;
  std::int64_t b_tile = static_cast<std::int64_t>(d.mk.tn) * p.k * b;
  double infl = d.min_tiling_padded ? static_cast<double>(cfg.vec_elems()) / p.n : 1.0;
  d.l1_bytes = static_cast<std::int64_t>(d.chunk_count * (a_tile + b_tile * infl));
  attach_io(d, node, trace, opts.batch);
  return d;
}

WorkDecomposition map_conv2d(const OperatorNode& node, const MachineConfig& cfg,
                             const Trace& trace, const MapOptions& opts) {
  const auto& p = node.conv();
  const int cb = cfg.vec_elems();  // channel block = vector element count
  std::int64_t pq = p.out_h() * p.out_w();

  GemmInputs g;
  g.m_like = p.k;  // output channels, vectorized via channel blocking
  g.n_like = pq;
  g.chunk_mult = p.n * opts.batch;
  double eff_scale = 1.0;
  if (p.c < cb && p.r * p.s > 1) {
    // Low-channel first layers: repack to a filter-major GEMM so the
    // reduction is dense instead of padded to a full channel block.
    g.k_red = p.c * p.r * p.s;
  } else {
    std::int64_t c_pad = ceil_div(p.c, static_cast<std::int64_t>(cb)) * cb;
    g.k_red = c_pad * p.r * p.s;
    eff_scale = static_cast<double>(p.c) / c_pad;
  }
  WorkDecomposition d = map_gemm_like(g, cfg, node.dtype, opts.occupancy_aware);
  d.mk.vectorized_dim = VecDim::ChannelBlock;
  d.ideal_ops = op_count(node) * opts.batch;
  d.simd_efficiency *= eff_scale;
  d.padded_ops = static_cast<double>(d.ideal_ops) / d.simd_efficiency;

  std::int64_t b = node.dtype.input_bytes();
  // Halo overlap in the input tile is counted fully.
  std::int64_t in_tile = static_cast<std::int64_t>(d.mk.tn) * g.k_red * b;
  std::int64_t w_tile = static_cast<std::int64_t>(d.mk.tm) * cb * g.k_red * b;
  d.l1_bytes = d.chunk_count * (in_tile + w_tile);
  attach_io(d, node, trace, opts.batch);
  if (d.weight_bytes == 0) d.weight_bytes = p.k * p.c * p.r * p.s * b;
  return d;
}

std::pair<WorkDecomposition, WorkDecomposition> map_conv2d_backward(
    const OperatorNode& node, const MachineConfig& cfg, const Trace& trace,
    const MapOptions& opts) {
  const auto& p = node.conv();
  const int cb = cfg.vec_elems();
  std::int64_t b = node.dtype.input_bytes();
  std::int64_t total_macs = op_count(node) / 2 * opts.batch;

  // dI: chunks of stride x stride x C_b over the input feature map.
  WorkDecomposition di;
  {
    std::int64_t c_blocks = ceil_div(p.c, static_cast<std::int64_t>(cb));
    std::int64_t spatial = ceil_div(p.h, p.stride) * ceil_div(p.w, p.stride);
    di.chunk_count = p.n * opts.batch * spatial * c_blocks;
    int tn = static_cast<int>(std::min<std::int64_t>(p.stride * p.stride,
                                                     (cfg.vrf_regs - 3) / 2));
    di.mk = make_kernel(1, std::max(tn, 1), node.dtype, cfg, VecDim::ChannelBlock);
    di.ideal_ops = 2 * total_macs;
    double padded_macs =
        static_cast<double>(di.chunk_count) * p.stride * p.stride * cb *
        (static_cast<double>(p.k) * p.r * p.s / (p.stride * p.stride));
    di.padded_ops = 2.0 * padded_macs;
    di.simd_efficiency = std::min(1.0, di.ideal_ops / di.padded_ops);
    double macs_per_chunk = padded_macs / di.chunk_count;
    std::int64_t k_red = static_cast<std::int64_t>(
        std::ceil(macs_per_chunk / (p.stride * p.stride * cb)));
    std::int64_t ksteps = ceil_div(k_red, static_cast<std::int64_t>(di.mk.tk));
    double alu = static_cast<double>(ksteps) * di.mk.fmas_per_kstep / cfg.issue_eff;
    double mem = static_cast<double>(ksteps) * di.mk.loads_per_kstep + di.mk.acc_regs();
    di.cycles_per_chunk = std::max(alu, mem) + kChunkOverheadCycles;
    di.l1_bytes = di.chunk_count *
                  (di.mk.tn * k_red * b + static_cast<std::int64_t>(cb) * k_red * b);
    attach_io(di, node, trace, opts.batch);
    if (di.weight_bytes == 0) di.weight_bytes = p.k * p.c * p.r * p.s * b;
  }

  // dW: one chunk per filter pixel and channel-block pair; the batch and the
  // spatial extent only deepen the reduction, so parallelism stays flat.
  WorkDecomposition dw;
  {
    std::int64_t c_blocks = ceil_div(p.c, static_cast<std::int64_t>(cb));
    std::int64_t k_blocks = ceil_div(p.k, static_cast<std::int64_t>(cb));
    dw.chunk_count = p.r * p.s * c_blocks * k_blocks;
    std::int64_t red = p.n * opts.batch * p.out_h() * p.out_w();
    int tn = static_cast<int>(std::min<std::int64_t>(cb, (cfg.vrf_regs - 3) / 2));
    dw.mk = make_kernel(1, std::max(tn, 1), node.dtype, cfg, VecDim::ChannelBlock);
    dw.ideal_ops = 2 * total_macs;
    dw.padded_ops = 2.0 * static_cast<double>(dw.chunk_count) * cb * cb * red;
    dw.simd_efficiency = std::min(1.0, dw.ideal_ops / dw.padded_ops);
    std::int64_t vec_outputs = ceil_div(static_cast<std::int64_t>(cb) * cb,
                                        static_cast<std::int64_t>(cfg.vec_elems()));
    std::int64_t ksteps = ceil_div(red, static_cast<std::int64_t>(dw.mk.tk));
    double per_tile = ceil_div(vec_outputs, static_cast<std::int64_t>(dw.mk.tn));
    double alu =
        per_tile * static_cast<double>(ksteps) * dw.mk.fmas_per_kstep / cfg.issue_eff;
    double mem = per_tile * (static_cast<double>(ksteps) * dw.mk.loads_per_kstep +
                             dw.mk.acc_regs());
    dw.cycles_per_chunk = std::max(alu, mem) + kChunkOverheadCycles;
    dw.l1_bytes = dw.chunk_count * 2 * red * b;
    attach_io(dw, node, trace, opts.batch);
  }
  return {di, dw};
}

WorkDecomposition map_elementwise(const OperatorNode& node, const MachineConfig& cfg,
                                  const Trace& trace, const MapOptions& opts) {
  std::int64_t count, arity;
  if (node.kind == OpKind::Requantize) {
    count = std::get<RequantizeParams>(node.params).count;
    arity = 1;
  } else {
    const auto& p = node.elemwise();
    count = p.count;
    arity = p.arity;
  }
  std::int64_t total = count * opts.batch;
  std::int64_t b = node.dtype.input_bytes();
  std::int64_t velems = cfg.simd_bits / (8 * b);  // full-width lanes, no accumulate

  WorkDecomposition d;
  d.chunk_count = std::min<std::int64_t>(cfg.tiles, ceil_div(total, velems));
  d.mk = Microkernel{VecDim::M, 1, 1, 1, static_cast<int>(arity) + 1, 1, false};
  std::int64_t per_chunk = ceil_div(total, d.chunk_count);
  std::int64_t vecs = ceil_div(per_chunk, velems);
  double alu = static_cast<double>(vecs) * arity / cfg.issue_eff;
  double mem = static_cast<double>(ceil_div(per_chunk * (arity + 1) * b,
                                            static_cast<std::int64_t>(cfg.line_bytes)));
  d.cycles_per_chunk = std::max(alu, mem) + kChunkOverheadCycles;
  d.ideal_ops = arity * total;
  d.padded_ops = static_cast<double>(arity) * d.chunk_count * vecs * velems;
  d.simd_efficiency = std::min(1.0, d.ideal_ops / d.padded_ops);
  d.l1_bytes = total * (arity + 1) * b;
  attach_io(d, node, trace, opts.batch);
  return d;
}

LstmDecomposition map_lstm_sequence(const std::vector<const OperatorNode*>& chain,
                                    const MachineConfig& cfg, const Trace& trace,
                                    const MapOptions& opts) {
  if (chain.empty()) throw TraceError("empty LSTM chain");
  const auto& p = chain.front()->lstm();
  DataType dtype = chain.front()->dtype;
  std::int64_t seq = static_cast<std::int64_t>(chain.size());
  std::int64_t h4 = 4 * p.hidden_dim;

  LstmDecomposition out;
  // Phase 1: all input-weight products across the sequence at once.
  {
    GemmInputs g{seq * opts.batch, h4, p.input_dim, 1};
    out.input_phase = map_gemm_like(g, cfg, dtype, opts.occupancy_aware);
    out.input_phase.weight_bytes = h4 * p.input_dim * dtype.input_bytes();
    std::int64_t b = dtype.input_bytes();
    std::int64_t a_tile =
        static_cast<std::int64_t>(out.input_phase.mk.tm) * cfg.vec_elems() * p.input_dim * b;
    std::int64_t b_tile = static_cast<std::int64_t>(out.input_phase.mk.tn) * p.input_dim * b;
    out.input_phase.l1_bytes = out.input_phase.chunk_count * (a_tile + b_tile);
  }
  // Phase 2: the sequential hidden chain.
  {
    GemmInputs g{opts.batch, h4, p.hidden_dim, 1};
    WorkDecomposition step = map_gemm_like(g, cfg, dtype, opts.occupancy_aware);
    // Pointwise gate math rides along inside each step.
    std::int64_t gate_elems = ceil_div(h4 * opts.batch, static_cast<std::int64_t>(
                                                            cfg.simd_bits / 16));
    step.cycles_per_chunk += 5.0 * gate_elems / step.chunk_count;
    step.chain_length = seq;
    step.ideal_ops = (2 * h4 * p.hidden_dim + 10 * p.hidden_dim) * opts.batch * seq;
    step.padded_ops = step.padded_ops * seq;
    step.weight_bytes = h4 * p.hidden_dim * dtype.input_bytes();
    std::int64_t b = dtype.input_bytes();
    step.l1_bytes =
        seq * step.chunk_count *
        ((static_cast<std::int64_t>(step.mk.tm) * cfg.vec_elems() + step.mk.tn) *
         p.hidden_dim * b);
    out.hidden_chain = step;
  }
  // Activation reads/writes attach once per step; the shared layer weights
  // are already fully covered by the two phases' weight_bytes fields.
  for (const auto* n : chain) {
    for (const auto& in : n->inputs) {
      auto it = trace.tensors.find(in);
      if (it == trace.tensors.end() || it->second.role == TensorRole::Weight) continue;
      out.hidden_chain.input_reads.emplace_back(in, it->second.bytes() * opts.batch);
    }
    for (const auto& o : n->outputs) {
      auto it = trace.tensors.find(o);
      if (it == trace.tensors.end()) continue;
      out.hidden_chain.output_writes.emplace_back(o, it->second.bytes() * opts.batch);
    }
  }
  return out;
}

WorkDecomposition map_operator(const OperatorNode& node, const MachineConfig& cfg,
                               const Trace& trace, const MapOptions& opts) {
  switch (node.kind) {
    case OpKind::MatMul:
      return map_matmul(node, cfg, trace, opts);
    case OpKind::Conv2D: {
      const auto& p = node.conv();
      if (p.r == 1 && p.s == 1 && p.stride == 1) {
        // A 1x1 convolution is exactly the equivalent GEMM.
        GemmInputs g{p.k, p.out_h() * p.out_w(), p.c, p.n * opts.batch};
        WorkDecomposition d = map_gemm_like(g, cfg, node.dtype, opts.occupancy_aware);
        d.mk.vectorized_dim = VecDim::ChannelBlock;
        std::int64_t b = node.dtype.input_bytes();
        std::int64_t in_tile = static_cast<std::int64_t>(d.mk.tn) * p.c * b;
        std::int64_t w_tile = static_cast<std::int64_t>(d.mk.tm) * cfg.vec_elems() * p.c * b;
        d.l1_bytes = d.chunk_count * (in_tile + w_tile);
        attach_io(d, node, trace, opts.batch);
        if (d.weight_bytes == 0) d.weight_bytes = p.k * p.c * b;
        return d;
      }
      return map_conv2d(node, cfg, trace, opts);
    }
    case OpKind::Conv2DdI:
      return map_conv2d_backward(node, cfg, trace, opts).first;
    case OpKind::Conv2DdW:
      return map_conv2d_backward(node, cfg, trace, opts).second;
    case OpKind::Elementwise:
    case OpKind::Requantize:
      return map_elementwise(node, cfg, trace, opts);
    case OpKind::LstmCell: {
      std::vector<const OperatorNode*> chain{&node};
      auto d = map_lstm_sequence(chain, cfg, trace, opts);
      // A lone cell degenerates to its two phases folded together.
      WorkDecomposition merged = d.hidden_chain;
      merged.ideal_ops += d.input_phase.ideal_ops;
      merged.padded_ops += d.input_phase.padded_ops;
      merged.cycles_per_chunk +=
          d.input_phase.cycles_per_chunk * d.input_phase.chunk_count / merged.chunk_count;
      merged.weight_bytes += d.input_phase.weight_bytes;
      merged.l1_bytes += d.input_phase.l1_bytes;
      merged.simd_efficiency =
          std::min(1.0, static_cast<double>(merged.ideal_ops) / merged.padded_ops);
      return merged;
    }
  }
  throw TraceError("unmappable operator kind");
}

}  // namespace upcycle
