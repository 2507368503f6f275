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

// Release gate: one line per criterion, exit 0 only when all pass.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "arch.hpp"
#include "dse.hpp"
#include "emu.hpp"
#include "mapping.hpp"
#include "perf.hpp"
#include "powerarea.hpp"
#include "workload.hpp"

using namespace upcycle;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  criterion %2d  %-28s %s\n", ok ? "PASS" : "FAIL", criterion,
              name, detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

struct Run {
  const Trace* trace;
  std::int64_t batch;
};

double ratio_geomean(const std::vector<double>& ratios) {
  double lg = 0;
  for (double r : ratios) lg += std::log(r);
  return std::exp(lg / ratios.size());
}

}  // namespace

int main() {
  MachineConfig base = preset("base");
  EnergyCoefficients coeffs = default_coeffs();

  // Shared trace pool. Training variants run the backward pass in FP16;
  // the RNN-T training trace ships as-is.
  Trace rn = load_trace("data/traces/resnet50_inf.json");
  Trace ssd = load_trace("data/traces/ssd_resnet34_inf.json");
  Trace bb128 = load_trace("data/traces/bert_base_128_inf.json");
  Trace bb384 = load_trace("data/traces/bert_base_384_inf.json");
  Trace bl128 = load_trace("data/traces/bert_large_128_inf.json");
  Trace bl384 = load_trace("data/traces/bert_large_384_inf.json");
  Trace rnnt = load_trace("data/traces/rnnt_inf.json");
  Trace alex = load_trace("data/traces/alexnet_inf.json");
  auto train = [](const Trace& t) {
    return with_dtype(expand_backward(t), parse_dtype("fp16"));
  };
  Trace rn_t = train(rn), ssd_t = train(ssd), bb128_t = train(bb128),
        bb384_t = train(bb384), bl128_t = train(bl128), bl384_t = train(bl384);
  Trace rnnt_t = load_trace("data/traces/rnnt_train.json");

  std::vector<Run> inf_suite = {{&rn, 64},    {&ssd, 64},   {&bb128, 64},
                                {&bb384, 64}, {&bl128, 64}, {&bl384, 64},
                                {&rnnt, 64}};
  std::vector<Run> train_suite = {{&rn_t, 64},   {&ssd_t, 64},  {&bb128_t, 32},
                                  {&bb384_t, 32}, {&bl128_t, 32}, {&bl384_t, 16},
                                  {&rnnt_t, 8}};

  // 1. Peak-rate exactness (zero tolerance).
  {
    double i8 = peak_ops(base, parse_dtype("int8"));
    double f16 = peak_ops(base, parse_dtype("fp16"));
    report(1, "peak rate exactness", i8 == 524.288e12 && f16 == 262.144e12,
           fmt("int8=%.3f fp16=%.3f TOPs", i8 / 1e12, f16 / 1e12));
  }

  // 2. Workload census.
  {
    CharacterizationSummary r = characterize(rn);
    CharacterizationSummary b = characterize(bb128);
    bool ok = within(r.gops_per_sample, 7.8 * 0.9, 7.8 * 1.1) &&
              r.distinct_shape_count >= 27 && r.distinct_shape_count <= 33 &&
              within(b.gops_per_sample, 23.0 * 0.9, 23.0 * 1.1) &&
              b.distinct_shape_count == 8;
    report(2, "workload census", ok,
           fmt("resnet %.3f GOPs/%lld shapes, bert-base-128 %.3f GOPs/%lld shapes",
               r.gops_per_sample, (long long)r.distinct_shape_count,
               b.gops_per_sample, (long long)b.distinct_shape_count));
  }

  // 3. Oracle equivalence of the microkernel emulator.
  {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(20260824);
    std::uniform_int_distribution<int> dim(1, 64);
    std::uniform_int_distribution<int> val(-128, 127);
    int int8_runs = 0, int8_exact = 0;
    for (; int8_runs < 1000; ++int8_runs) {
      std::int64_t m = dim(rng), n = dim(rng), k = dim(rng);
      std::vector<std::int8_t> a(m * k), b(k * n);
      for (auto& x : a) x = static_cast<std::int8_t>(val(rng));
      for (auto& x : b) x = static_cast<std::int8_t>(val(rng));
      Microkernel mk = select_matmul_tiling(m, n, k, base, parse_dtype("int8"));
      if (emu::run_matmul_int8(a, b, m, n, k, mk, base).c_i32 ==
          emu::ref_matmul_int8(a, b, m, n, k))
        ++int8_exact;
    }
    std::uniform_real_distribution<float> fv(-2.0f, 2.0f);
    int fp16_runs = 0, fp16_close = 0;
    for (; fp16_runs < 100; ++fp16_runs) {
      std::int64_t m = dim(rng), n = dim(rng), k = dim(rng);
      std::vector<std::uint16_t> a(m * k), b(k * n);
      for (auto& x : a) x = emu::f32_to_f16(fv(rng));
      for (auto& x : b) x = emu::f32_to_f16(fv(rng));
      Microkernel mk = select_matmul_tiling(m, n, k, base, parse_dtype("fp16"));
      auto run = emu::run_matmul_fp16(a, b, m, n, k, mk, base);
      auto ref = emu::ref_matmul_fp16(a, b, m, n, k);
      bool close = true;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        double denom = std::max(1e-6, std::abs((double)ref[i]));
        if (std::abs((double)run.c_f32[i] - ref[i]) / denom > 1e-3) close = false;
      }
      if (close) ++fp16_close;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    bool ok = int8_exact == int8_runs && fp16_close == fp16_runs && secs < 60.0;
    report(3, "emulator oracle equivalence", ok,
           fmt("int8 %d/%d bit-exact, fp16 %d/%d within 1e-3, %.1f s",
               int8_exact, int8_runs, fp16_close, fp16_runs, secs));
  }

  // 4. Register budget and load hiding on the shape-level tiling.
  {
    bool ok = true;
    long long shapes = 0;
    MapOptions shape_level;
    shape_level.occupancy_aware = false;
    for (const char* path :
         {"data/traces/resnet50_inf.json", "data/traces/ssd_resnet34_inf.json",
          "data/traces/bert_base_128_inf.json", "data/traces/bert_base_384_inf.json",
          "data/traces/bert_large_128_inf.json", "data/traces/bert_large_384_inf.json",
          "data/traces/rnnt_inf.json", "data/traces/rnnt_train.json",
          "data/traces/alexnet_inf.json"}) {
      Trace t = load_trace(path);
      for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const OperatorNode& n = t.nodes[i];
        if (n.kind == OpKind::LstmCell) {
          // Grouped entry point: a contiguous run of cells forms one chain.
          std::vector<const OperatorNode*> chain;
          while (i < t.nodes.size() && t.nodes[i].kind == OpKind::LstmCell)
            chain.push_back(&t.nodes[i++]);
          --i;
          LstmDecomposition d = map_lstm_sequence(chain, base, t, shape_level);
          for (const WorkDecomposition* w : {&d.input_phase, &d.hidden_chain}) {
            ++shapes;
            if (!w->mk.fits(base.vrf_regs)) ok = false;
            if (!w->min_tiling_padded &&
                w->mk.loads_per_kstep > w->mk.fmas_per_kstep)
              ok = false;
          }
          continue;
        }
        WorkDecomposition d = map_operator(n, base, t, shape_level);
        ++shapes;
        if (!d.mk.fits(base.vrf_regs)) ok = false;
        bool gemm_like = n.kind == OpKind::MatMul || n.kind == OpKind::Conv2D ||
                         n.kind == OpKind::Conv2DdI || n.kind == OpKind::Conv2DdW;
        if (gemm_like && !d.min_tiling_padded &&
            d.mk.loads_per_kstep > d.mk.fmas_per_kstep)
          ok = false;
      }
    }
    report(4, "register budget and hiding", ok,
           fmt("%lld mapped shapes across 9 traces", shapes));
  }

  // 5. Utilization anchor: batch-1 and large-batch (best of 64/128) Resnet50.
  {
    SimOptions o1;
    o1.batch = 1;
    double u1 = simulate(rn, base, o1).utilization;
    SimOptions o64, o128;
    o64.batch = 64;
    o128.batch = 128;
    double ub = std::max(simulate(rn, base, o64).utilization,
                         simulate(rn, base, o128).utilization);
    bool ok = within(u1, 0.359 - 0.10, 0.359 + 0.10) && ub > u1 &&
              within(ub, 0.58 - 0.12, 0.58 + 0.12);
    report(5, "resnet utilization anchor", ok,
           fmt("batch1=%.3f (0.259..0.459), large=%.3f (0.46..0.70)", u1, ub));
  }

  // 6. Memory-bandwidth sensitivity.
  {
    auto inf_ratio = [&](double bw, bool pc) {
      std::vector<double> r;
      for (const Run& run : inf_suite) {
        SimOptions o;
        o.batch = run.batch;
        SimOptions o2 = o;
        o2.bw_override_bytes_per_s = bw;
        o2.perfect_cache = pc;
        r.push_back(simulate(*run.trace, base, o).total_s /
                    simulate(*run.trace, base, o2).total_s);
      }
      return ratio_geomean(r);
    };
    double g450 = inf_ratio(450e9, false);
    double g18 = inf_ratio(1800e9, false);
    double ginf = inf_ratio(1e18, false);
    std::vector<double> tr;
    for (const Run& run : train_suite) {
      SimOptions o;
      o.batch = run.batch;
      SimOptions o2 = o;
      o2.bw_override_bytes_per_s = 1e18;
      o2.perfect_cache = true;
      tr.push_back(simulate(*run.trace, base, o).total_s /
                   simulate(*run.trace, base, o2).total_s);
    }
    double gtr = ratio_geomean(tr);
    bool ok = within(g450, 0.83, 0.95) && within(g18, 0.99, 1.07) &&
              within(ginf, 0.99, 1.09) && within(gtr, 1.44, 1.94);
    report(6, "bandwidth sensitivity", ok,
           fmt("450G=%.4f 1.8T=%.4f inf=%.4f train=%.3f", g450, g18, ginf, gtr));
  }

  // 7. Core-scaling headroom over the full suite.
  {
    std::vector<Run> all = inf_suite;
    all.insert(all.end(), train_suite.begin(), train_suite.end());
    auto headroom = [&](double mult) {
      std::vector<double> sp;
      MachineConfig scaled = base;
      scaled.core_mult = mult;
      for (const Run& run : all) {
        SimOptions o;
        o.batch = run.batch;
        sp.push_back(simulate(*run.trace, base, o).total_s /
                     simulate(*run.trace, scaled, o).total_s);
      }
      return ratio_geomean(sp);
    };
    double h2 = headroom(2.0);
    double h100 = headroom(100.0);
    bool ok = within(h2, 1.3, 2.0) && within(h100, 2.5, 5.0);
    report(7, "core scaling headroom", ok, fmt("2x=%.3f 100x=%.3f", h2, h100));
  }

  // 8. Design-sweep properties on the shipped manifest grid.
  {
    SweepSpec spec = load_sweep_spec("data/sweep_default.json");
    std::vector<LoadedTrace> traces;
    for (const auto& ts : spec.traces) {
      LoadedTrace lt;
      lt.trace = load_trace(ts.path);
      if (!ts.dtype.empty()) lt.trace = with_dtype(lt.trace, parse_dtype(ts.dtype));
      if (ts.train) lt.trace = expand_backward(lt.trace);
      lt.batch = ts.batch;
      traces.push_back(std::move(lt));
    }
    std::vector<DesignPoint> pts = sweep(spec, traces, coeffs);
    const DesignPoint *bp = nullptr, *weak = nullptr, *big = nullptr;
    for (const auto& p : pts) {
      if (!p.feasible) continue;
      if (p.cfg.tiles == 2048 && p.cfg.simd_bits == 512 && p.cfg.freq_hz == 2.0e9)
        bp = &p;
      if (p.cfg.tiles == 1024 && p.cfg.simd_bits == 256 && p.cfg.freq_hz == 1.0e9)
        weak = &p;
      if (p.cfg.tiles == 4096 && p.cfg.simd_bits == 256 && p.cfg.freq_hz == 2.0e9)
        big = &p;
    }
    bool ok = bp && weak && big;
    double weak_ratio = 0, opt_ratio = 0;
    double rnnt_base = 0, rnnt_big = 0, bert_base_pj = 0, bert_big_pj = 0;
    if (ok) {
      weak_ratio = weak->geomean_pj_per_op / bp->geomean_pj_per_op;
      std::vector<double> per_app;
      for (std::size_t i = 0; i < traces.size(); ++i) {
        double best = 1e300;
        for (const auto& p : pts)
          if (p.feasible) best = std::min(best, p.per_trace[i].pj_per_op);
        per_app.push_back(bp->per_trace[i].pj_per_op / best);
      }
      opt_ratio = ratio_geomean(per_app);
      // Manifest order: index 5 = Bert training, index 6 = RNN-T training.
      bert_base_pj = bp->per_trace[5].pj_per_op;
      bert_big_pj = big->per_trace[5].pj_per_op;
      rnnt_base = bp->per_trace[6].pj_per_op;
      rnnt_big = big->per_trace[6].pj_per_op;
      ok = weak_ratio >= 2.0 && opt_ratio <= 1.25 && rnnt_big < rnnt_base &&
           bert_big_pj > bert_base_pj;
    }
    report(8, "design sweep properties", ok,
           fmt("weak/base=%.2f, base/opt=%.3f, rnnt-t pJ %0.4f vs %.4f, "
               "bert-t pJ %.4f vs %.4f",
               weak_ratio, opt_ratio, rnnt_big, rnnt_base, bert_big_pj,
               bert_base_pj));
  }

  // 9. Power/area calibration against the published implementation.
  {
    double area = estimate_area(base, coeffs).total_mm2;
    double tdp = estimate_tdp(base, coeffs);
    double floor_pj = tdp / peak_ops(base, parse_dtype("int8")) * 1e12;
    bool ok = within(area, 141.0 * 0.85, 141.0 * 1.15) &&
              within(tdp, 130.0 * 0.85, 130.0 * 1.15) &&
              within(floor_pj, 0.25 * 0.8, 0.25 * 1.2);
    report(9, "power/area calibration", ok,
           fmt("area=%.1f mm2, tdp=%.1f W, floor=%.4f pJ/op", area, tdp,
               floor_pj));
  }

  // 10. Model-independent properties.
  {
    bool ok = true;
    std::string why = "monotone, bounded, closed, deterministic, pareto-exact";
    SimOptions o16;
    o16.batch = 16;

    // Monotonicity: more bandwidth, tiles, frequency, or LLC never slows.
    auto time_with = [&](auto mutate) {
      MachineConfig c = base;
      mutate(c);
      return simulate(alex, c, o16).total_s;
    };
    for (auto axis : {0, 1, 2, 3}) {
      double prev = 1e300;
      for (int step = 0; step < 3; ++step) {
        double t = time_with([&](MachineConfig& c) {
          if (axis == 0) c.mem_bw_bytes_per_s = 450e9 * (1 << step);
          if (axis == 1) c.tiles = 1024 << step;
          if (axis == 2) c.freq_hz = 1.0e9 * (1 + step);
          if (axis == 3) c.llc_bytes = (16ll << step) * 1024 * 1024;
        });
        if (t > prev * (1 + 1e-12)) { ok = false; why = "monotonicity violated"; }
        prev = t;
      }
    }

    // Utilization bounds and energy closure across the full suite.
    std::vector<Run> all = inf_suite;
    all.insert(all.end(), train_suite.begin(), train_suite.end());
    for (const Run& run : all) {
      SimOptions o;
      o.batch = run.batch;
      SimResult r = simulate(*run.trace, base, o);
      if (!(r.utilization > 0.0 && r.utilization <= 1.0)) {
        ok = false;
        why = "utilization out of (0,1]";
      }
      PowerAreaReport p = estimate_power(base, r, coeffs);
      double parts = p.e_mac_j + p.e_sram_j + p.e_noc_j + p.e_dram_j +
                     p.e_core_j + p.e_static_j;
      if (std::abs(parts - p.energy_j) > 1e-9 * p.energy_j ||
          std::abs(p.avg_power_w * r.total_s - p.energy_j) > 1e-9 * p.energy_j) {
        ok = false;
        why = "energy accounting not closed";
      }
    }

    // Determinism: repeat runs are bit-identical.
    {
      SimResult a = simulate(rn, base, o16);
      SimResult b = simulate(rn, base, o16);
      bool same = a.total_s == b.total_s && a.total_ops == b.total_ops &&
                  a.operators.size() == b.operators.size();
      for (std::size_t i = 0; same && i < a.operators.size(); ++i)
        same = a.operators[i].total_s == b.operators[i].total_s;
      if (!same) { ok = false; why = "nondeterministic repeat run"; }
    }

    // Pareto frontier equals brute-force dominance on random point sets.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(0.1, 10.0);
    for (int trial = 0; trial < 10 && ok; ++trial) {
      std::vector<DesignPoint> pts(24);
      for (auto& p : pts) {
        p.feasible = true;
        p.geomean_tops_per_mm2 = d(rng);
        p.geomean_pj_per_op = d(rng);
      }
      std::vector<bool> on(pts.size(), false);
      for (std::size_t i : pareto_front(pts)) on[i] = true;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size(); ++j)
          if (j != i &&
              pts[j].geomean_tops_per_mm2 >= pts[i].geomean_tops_per_mm2 &&
              pts[j].geomean_pj_per_op <= pts[i].geomean_pj_per_op &&
              (pts[j].geomean_tops_per_mm2 > pts[i].geomean_tops_per_mm2 ||
               pts[j].geomean_pj_per_op < pts[i].geomean_pj_per_op))
            dominated = true;
        if (on[i] == dominated) { ok = false; why = "pareto mismatch"; }
      }
    }
    report(10, "property suite", ok, why);
  }

  if (g_failures == 0) {
    std::printf("ALL CRITERIA PASS\n");
    return 0;
  }
  std::printf("%d CRITERIA FAILED\n", g_failures);
  return 1;
}
