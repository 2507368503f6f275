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

#include "perf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace upcycle {

namespace {

// Whole-tensor granularity LLC with partial residency and LRU eviction.
// Dirty bytes are produced-on-chip data not yet backed by DRAM.
class LlcModel {
 public:
  LlcModel(std::int64_t capacity, bool perfect) : cap_(capacity), perfect_(perfect) {}

  // Returns DRAM read bytes charged for this access.
  std::int64_t read(const std::string& id, std::int64_t bytes, bool adjacent) {
    if (perfect_) {
      if (seen_.count(id)) return 0;
      seen_.insert(id);
      return bytes;  // compulsory first touch
    }
    auto it = entries_.find(id);
    std::int64_t resident = it == entries_.end() ? 0 : it->second.resident;
    std::int64_t miss = adjacent ? 0 : std::max<std::int64_t>(0, bytes - resident);
    install(id, bytes, /*dirty=*/0);
    return miss;
  }

  // Returns DRAM write bytes spilled at production time.
  std::int64_t produce(const std::string& id, std::int64_t bytes, bool streamed_to_next) {
    if (perfect_) {
      seen_.insert(id);
      return 0;
    }
    std::int64_t resident = install(id, bytes, bytes);
    std::int64_t excess = bytes - resident;
    if (excess <= 0) return 0;
    // The part that never fit is written out now unless the very next
    // operator consumes it chunk by chunk as it is produced.
    return streamed_to_next ? 0 : excess;
  }

  void drop(const std::string& id) { entries_.erase(id); }

  std::int64_t flush() {
    std::int64_t dirty = 0;
    for (auto& [id, e] : entries_) dirty += e.dirty;
    entries_.clear();
    return dirty;
  }

  std::int64_t spilled_on_evict() const { return evict_writes_; }

 private:
  struct Entry {
    std::int64_t resident = 0;
    std::int64_t dirty = 0;
    std::int64_t stamp = 0;
  };

  std::int64_t used() const {
    std::int64_t total = 0;
    for (const auto& [id, e] : entries_) total += e.resident;
    return total;
  }

  // Brings `id` in at min(bytes, cap), evicting least-recently-used tensors.
  std::int64_t install(const std::string& id, std::int64_t bytes, std::int64_t dirty) {
    std::int64_t want = std::min(bytes, cap_);
    auto& e = entries_[id];
    e.stamp = ++clock_;
    while (used() - e.resident + want > cap_) {
      auto victim = entries_.end();
      for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->first == id) continue;
        if (victim == entries_.end() || it->second.stamp < victim->second.stamp)
          victim = it;
      }
      if (victim == entries_.end()) break;
      evict_writes_ += victim->second.dirty;
      entries_.erase(victim);
    }
    e.resident = std::max<std::int64_t>(
        0, std::min(want, cap_ - (used() - e.resident)));
    e.dirty = std::min(dirty, e.resident);
    return e.resident;
  }

  std::int64_t cap_;
  bool perfect_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> seen_;
  std::int64_t clock_ = 0;
  std::int64_t evict_writes_ = 0;
};

struct Unit {
  std::vector<const OperatorNode*> nodes;
  bool is_lstm_chain = false;
};

const std::string* weight_input(const OperatorNode& node, const Trace& trace) {
  for (const auto& in : node.inputs) {
    auto it = trace.tensors.find(in);
    if (it != trace.tensors.end() && it->second.role == TensorRole::Weight)
      return &it->first;
  }
  return nullptr;
}

std::vector<Unit> build_units(const Trace& trace) {
  std::vector<Unit> units;
  std::size_t i = 0;
  while (i < trace.nodes.size()) {
    const OperatorNode& n = trace.nodes[i];
    if (n.kind != OpKind::LstmCell) {
      units.push_back({{&n}, false});
      ++i;
      continue;
    }
    // Group consecutive cells with matching dims and shared weights.
    Unit u;
    u.is_lstm_chain = true;
    const auto& p = n.lstm();
    const std::string* w = weight_input(n, trace);
    u.nodes.push_back(&n);
    std::size_t j = i + 1;
    while (j < trace.nodes.size() && trace.nodes[j].kind == OpKind::LstmCell) {
      const auto& q = trace.nodes[j].lstm();
      if (q.input_dim != p.input_dim || q.hidden_dim != p.hidden_dim) break;
      const std::string* wq = weight_input(trace.nodes[j], trace);
      if ((w == nullptr) != (wq == nullptr)) break;
      if (w && wq && *w != *wq) break;
      u.nodes.push_back(&trace.nodes[j]);
      ++j;
    }
    units.push_back(std::move(u));
    i = j;
  }
  return units;
}

struct UnitWork {
  WorkDecomposition main;                     // single node, or LSTM hidden chain
  std::optional<WorkDecomposition> prologue;  // LSTM input phase
};

const char* bound_name(double compute, double dram, double llc, double l1) {
  double m = std::max({compute, dram, llc, l1});
  if (m == compute) return "compute";
  if (m == dram) return "dram";
  if (m == llc) return "llc";
  return "l1";
}

}  // namespace

static SimResult simulate_one(const Trace& trace, const MachineConfig& cfg,
                              const SimOptions& opts, bool pinned) {
  cfg.validate();
  std::int64_t batch = opts.batch > 0 ? opts.batch : std::max<std::int64_t>(1, trace.batch);
  MapOptions mopts;
  mopts.batch = batch;
  mopts.occupancy_aware = opts.occupancy_aware;

  std::int64_t weight_total = 0;
  for (const auto& [id, t] : trace.tensors)
    if (t.role == TensorRole::Weight) weight_total += t.bytes();
  std::int64_t act_cap = cfg.llc_bytes - (pinned ? weight_total : 0);

  std::vector<Unit> units = build_units(trace);

  std::map<std::string, int> producer_unit;
  std::map<std::string, int> last_use;
  for (int ui = 0; ui < static_cast<int>(units.size()); ++ui) {
    for (const auto* n : units[ui].nodes) {
      for (const auto& out : n->outputs) producer_unit[out] = ui;
      for (const auto& in : n->inputs) last_use[in] = ui;
    }
  }

  double raw_bw = opts.bw_override_bytes_per_s.value_or(cfg.mem_bw_bytes_per_s);
  double eff_bw = raw_bw * cfg.mem_bw_efficiency;
  double freq = cfg.freq_hz;
  double core = cfg.core_mult;
  double llc_fill_rate =
      cfg.llc_fill_bytes_per_cycle_per_tile * cfg.tiles * freq * core;
  double l1_fill_rate = cfg.l1_fill_bytes_per_cycle_per_tile * cfg.tiles * freq * core;

  LlcModel llc(act_cap, opts.perfect_cache);

  SimResult res;
  res.trace_name = trace.name;
  res.mode = trace.mode;
  res.batch = batch;
  res.weights_pinned = pinned;
  res.weight_bytes_total = weight_total;

  std::map<std::string, double> ops_by_dtype;
  double compute_bound_time = 0;

  for (int ui = 0; ui < static_cast<int>(units.size()); ++ui) {
    const Unit& u = units[ui];
    const OperatorNode& head = *u.nodes.front();

    UnitWork work;
    if (u.is_lstm_chain) {
      auto d = map_lstm_sequence(u.nodes, cfg, trace, mopts);
      work.main = std::move(d.hidden_chain);
      work.prologue = std::move(d.input_phase);
    } else {
      work.main = map_operator(head, cfg, trace, mopts);
    }

    std::int64_t weight_bytes =
        work.main.weight_bytes + (work.prologue ? work.prologue->weight_bytes : 0);
    std::int64_t evict_before = llc.spilled_on_evict();
    std::int64_t dram_read = 0, dram_write = 0, llc_bytes = 0;

    if (pinned && !opts.perfect_cache) {
      llc_bytes += weight_bytes;  // served from the pinned region
    } else {
      dram_read += weight_bytes;
      llc_bytes += weight_bytes;
    }

    for (const auto& [id, bytes] : work.main.input_reads) {
      auto pit = producer_unit.find(id);
      bool adjacent = pit != producer_unit.end() && (pit->second == ui - 1 || pit->second == ui);
      dram_read += llc.read(id, bytes, adjacent);
      llc_bytes += bytes;
    }
    for (const auto& [id, bytes] : work.main.output_writes) {
      auto lit = last_use.find(id);
      bool streamed = lit != last_use.end() && lit->second == ui + 1;
      dram_write += llc.produce(id, bytes, streamed);
      llc_bytes += bytes;
    }
    for (const auto& [id, bytes] : work.main.input_reads) {
      auto lit = last_use.find(id);
      if (lit != last_use.end() && lit->second == ui) llc.drop(id);
    }
    dram_write += llc.spilled_on_evict() - evict_before;

    std::int64_t l1_bytes = work.main.l1_bytes + (work.prologue ? work.prologue->l1_bytes : 0);

    auto unit_compute_s = [&](const WorkDecomposition& d) {
      std::int64_t waves = ceil_div(d.chunk_count, cfg.tiles);
      return static_cast<double>(d.chain_length) * waves * d.cycles_per_chunk /
             (freq * core);
    };
    double compute_s = unit_compute_s(work.main);
    if (work.prologue) compute_s += unit_compute_s(*work.prologue);

    // Sequential chains synchronize between steps at a fraction of the full
    // barrier cost (neighbor sync, not all-tile).
    double sync_s = 0;
    if (work.main.chain_length > 1)
      sync_s = (work.main.chain_length - 1) * (cfg.barrier_cycles / 4.0) / freq;

    double dram_s = eff_bw > 0 && std::isfinite(eff_bw)
                        ? static_cast<double>(dram_read + dram_write) / eff_bw
                        : 0.0;
    double llc_s = static_cast<double>(llc_bytes) / llc_fill_rate;
    double l1_s = static_cast<double>(l1_bytes) / l1_fill_rate;
    double barrier_s = cfg.barrier_cycles / freq + sync_s;
    double total_s = std::max({compute_s, dram_s, llc_s, l1_s}) + barrier_s;

    std::int64_t ops =
        work.main.ideal_ops + (work.prologue ? work.prologue->ideal_ops : 0);
    double node_peak = peak_ops(cfg, head.dtype);

    OperatorTiming t;
    t.node_id = head.id;
    t.kind = op_kind_name(head.kind);
    if (u.is_lstm_chain && u.nodes.size() > 1)
      t.kind += "Chain[" + std::to_string(u.nodes.size()) + "]";
    t.shape = shape_key(head);
    t.ops = ops;
    t.compute_s = compute_s;
    t.dram_s = dram_s;
    t.llc_s = llc_s;
    t.l1_s = l1_s;
    t.barrier_s = barrier_s;
    t.total_s = total_s;
    t.utilization = node_peak > 0 ? ops / (total_s * node_peak) : 0;
    t.simd_efficiency = work.main.simd_efficiency;
    t.chunk_count = work.main.chunk_count;
    t.dram_read_bytes = dram_read;
    t.dram_write_bytes = dram_write;
    t.llc_bytes = llc_bytes;
    t.l1_bytes = l1_bytes;
    t.dtype = head.dtype.name();
    t.bound = bound_name(compute_s, dram_s, llc_s, l1_s);
    if (t.bound == std::string("compute")) compute_bound_time += total_s;

    res.total_s += total_s;
    res.total_ops += static_cast<double>(ops);
    res.dram_read_bytes += dram_read;
    res.dram_write_bytes += dram_write;
    ops_by_dtype[head.dtype.name()] += static_cast<double>(ops);
    res.operators.push_back(std::move(t));
  }

  res.dram_write_bytes += llc.flush();

  std::string dominant = "int8";
  double best = -1;
  for (const auto& [name, ops] : ops_by_dtype)
    if (ops > best) {
      best = ops;
      dominant = name;
    }
  res.dominant_dtype = dominant;
  res.peak_ops_per_s = peak_ops(cfg, parse_dtype(dominant));
  res.achieved_ops_per_s = res.total_s > 0 ? res.total_ops / res.total_s : 0;
  res.utilization =
      res.peak_ops_per_s > 0 ? res.achieved_ops_per_s / res.peak_ops_per_s : 0;
  res.samples_per_s = res.total_s > 0 ? static_cast<double>(batch) / res.total_s : 0;
  res.compute_bound_fraction = res.total_s > 0 ? compute_bound_time / res.total_s : 0;
  return res;
}

SimResult simulate(const Trace& trace, const MachineConfig& cfg, const SimOptions& opts) {
  std::int64_t batch = opts.batch > 0 ? opts.batch : std::max<std::int64_t>(1, trace.batch);
  std::int64_t weight_total = 0;
  for (const auto& [id, t] : trace.tensors)
    if (t.role == TensorRole::Weight) weight_total += t.bytes();
  bool can_pin =
      opts.weight_pinning && weight_total > 0 && weight_total <= cfg.llc_bytes;

  // The cache is software managed, so the planner searches the static
  // placement policies: weights resident or streamed, and for inference a
  // sub-batch split that keeps intermediates on chip. Training keeps the
  // whole batch live for the backward pass and is never split.
  std::vector<std::int64_t> sub_batches{batch};
  if (trace.mode == "inference" && opts.sub_batching)
    for (std::int64_t b = batch / 2; b >= std::max<std::int64_t>(1, opts.min_sub_batch);
         b /= 2)
      if (batch % b == 0) sub_batches.push_back(b);

  SimResult best;
  std::int64_t best_sub = batch;
  double best_t = -1;
  for (int pin = can_pin ? 1 : 0; pin >= 0; --pin) {
    for (std::int64_t b : sub_batches) {
      SimOptions o = opts;
      o.batch = b;
      SimResult r = simulate_one(trace, cfg, o, pin != 0);
      double t = r.total_s * static_cast<double>(batch / b);
      if (best_t < 0 || t < best_t) {
        best_t = t;
        best = std::move(r);
        best_sub = b;
      }
    }
  }

  double repeats = static_cast<double>(batch / best_sub);
  best.batch = batch;
  best.total_s *= repeats;
  best.total_ops *= repeats;
  best.dram_read_bytes *= repeats;
  best.dram_write_bytes *= repeats;
  for (auto& op : best.operators) {
    op.total_s *= repeats;
    op.dram_read_bytes = static_cast<std::int64_t>(op.dram_read_bytes * repeats);
    op.dram_write_bytes = static_cast<std::int64_t>(op.dram_write_bytes * repeats);
  }
  best.achieved_ops_per_s = best.total_s > 0 ? best.total_ops / best.total_s : 0;
  best.utilization =
      best.peak_ops_per_s > 0 ? best.achieved_ops_per_s / best.peak_ops_per_s : 0;
  best.samples_per_s = best.total_s > 0 ? static_cast<double>(batch) / best.total_s : 0;
  return best;
}

std::vector<double> sensitivity_membw(const Trace& trace, const MachineConfig& cfg,
                                      const std::vector<BwMode>& modes,
                                      const SimOptions& base) {
  SimResult ref = simulate(trace, cfg, base);
  std::vector<double> out;
  for (const auto& mode : modes) {
    SimOptions o = base;
    if (mode.bw_bytes_per_s > 0 && std::isfinite(mode.bw_bytes_per_s))
      o.bw_override_bytes_per_s = mode.bw_bytes_per_s;
    else
      o.bw_override_bytes_per_s = std::numeric_limits<double>::infinity();
    o.perfect_cache = mode.perfect_cache;
    SimResult r = simulate(trace, cfg, o);
    out.push_back(r.total_s > 0 ? ref.total_s / r.total_s : 1.0);
  }
  return out;
}

}  // namespace upcycle
