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

#include "upcycle/upcycle.h"

#include <cstring>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"

#include "arch.hpp"
#include "baselines.hpp"
#include "dse.hpp"
#include "emu.hpp"
#include "mapping.hpp"
#include "perf.hpp"
#include "powerarea.hpp"
#include "workload.hpp"

using nlohmann::json;

struct upc_trace {
  upcycle::Trace trace;
};
struct upc_config {
  upcycle::MachineConfig cfg;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs `fn`, translating exceptions to status codes.
template <typename Fn>
upc_status guarded(Fn&& fn) {
  try {
    fn();
    return UPC_OK;
  } catch (const upcycle::IoError& e) {
    g_last_error = e.what();
    return UPC_ERR_IO;
  } catch (const upcycle::TraceError& e) {
    g_last_error = e.what();
    return UPC_ERR_VALIDATION;
  } catch (const upcycle::ConfigError& e) {
    g_last_error = e.what();
    return UPC_ERR_INFEASIBLE;
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return UPC_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UPC_ERR_INTERNAL;
  }
}

json operator_json(const upcycle::OperatorTiming& t) {
  return json{{"node_id", t.node_id},
              {"kind", t.kind},
              {"shape", t.shape},
              {"dtype", t.dtype},
              {"ops", t.ops},
              {"chunks", t.chunk_count},
              {"simd_efficiency", t.simd_efficiency},
              {"compute_s", t.compute_s},
              {"dram_s", t.dram_s},
              {"llc_s", t.llc_s},
              {"l1_s", t.l1_s},
              {"barrier_s", t.barrier_s},
              {"total_s", t.total_s},
              {"utilization", t.utilization},
              {"dram_read_bytes", t.dram_read_bytes},
              {"dram_write_bytes", t.dram_write_bytes},
              {"llc_bytes", t.llc_bytes},
              {"l1_bytes", t.l1_bytes},
              {"bound", t.bound}};
}

json run_json(const upcycle::SimResult& r) {
  json ops = json::array();
  for (const auto& op : r.operators) ops.push_back(operator_json(op));
  return json{{"trace", r.trace_name},
              {"mode", r.mode},
              {"batch", r.batch},
              {"total_s", r.total_s},
              {"total_ops", r.total_ops},
              {"utilization", r.utilization},
              {"achieved_ops_per_s", r.achieved_ops_per_s},
              {"peak_ops_per_s", r.peak_ops_per_s},
              {"dominant_dtype", r.dominant_dtype},
              {"samples_per_s", r.samples_per_s},
              {"dram_read_bytes", r.dram_read_bytes},
              {"dram_write_bytes", r.dram_write_bytes},
              {"weights_pinned", r.weights_pinned},
              {"weight_bytes_total", r.weight_bytes_total},
              {"compute_bound_fraction", r.compute_bound_fraction},
              {"operators", std::move(ops)}};
}

json power_json(const upcycle::PowerAreaReport& p) {
  return json{{"area_mm2", p.area_mm2},
              {"tdp_w", p.tdp_w},
              {"avg_power_w", p.avg_power_w},
              {"energy_j", p.energy_j},
              {"pj_per_op", p.pj_per_op},
              {"tops_per_mm2", p.tops_per_mm2},
              {"static_w", p.static_w},
              {"energy_breakdown_j",
               {{"mac", p.e_mac_j},
                {"sram", p.e_sram_j},
                {"noc", p.e_noc_j},
                {"dram", p.e_dram_j},
                {"core", p.e_core_j},
                {"static", p.e_static_j}}}};
}

json characterize_json(const upcycle::Trace& t) {
  upcycle::CharacterizationSummary s = upcycle::characterize(t);
  return json{{"name", t.name},
              {"mode", t.mode},
              {"batch", t.batch},
              {"gops_per_sample", s.gops_per_sample},
              {"distinct_shapes", s.distinct_shape_count},
              {"primary_op_fraction", s.primary_op_fraction},
              {"total_ops", s.total_ops},
              {"nodes", s.node_count}};
}

}  // namespace

extern "C" {

const char* upc_last_error(void) { return g_last_error.c_str(); }

void upc_string_free(char* s) { std::free(s); }

const char* upc_version(void) { return "1.0.0"; }

upc_status upc_trace_load(const char* path, upc_trace** out) {
  return guarded([&] {
    auto* t = new upc_trace{upcycle::load_trace(path)};
    *out = t;
  });
}

upc_status upc_trace_parse(const char* json_text, upc_trace** out) {
  return guarded([&] {
    auto* t = new upc_trace{upcycle::parse_trace(json_text)};
    *out = t;
  });
}

void upc_trace_free(upc_trace* t) { delete t; }

upc_status upc_trace_expand_backward(const upc_trace* t, upc_trace** out) {
  return guarded([&] { *out = new upc_trace{upcycle::expand_backward(t->trace)}; });
}

upc_status upc_trace_retarget(const upc_trace* t, const char* dtype, upc_trace** out) {
  return guarded([&] {
    *out = new upc_trace{upcycle::with_dtype(t->trace, upcycle::parse_dtype(dtype))};
  });
}

upc_status upc_trace_characterize(const upc_trace* t, char** json_out) {
  return guarded([&] { *json_out = dup_string(characterize_json(t->trace).dump(2)); });
}

upc_status upc_config_preset(const char* name, upc_config** out) {
  return guarded([&] { *out = new upc_config{upcycle::preset(name)}; });
}

upc_status upc_config_load(const char* path, upc_config** out) {
  return guarded([&] { *out = new upc_config{upcycle::load_config(path)}; });
}

upc_status upc_config_set(upc_config* cfg, const char* field, double value) {
  return guarded([&] { upcycle::set_field(cfg->cfg, field, value); });
}

upc_status upc_config_validate(const upc_config* cfg) {
  return guarded([&] { cfg->cfg.validate(); });
}

upc_status upc_config_describe(const upc_config* cfg, char** json_out) {
  return guarded([&] {
    const upcycle::MachineConfig& c = cfg->cfg;
    json j{{"tiles", c.tiles},
           {"simd_bits", c.simd_bits},
           {"vrf_regs", c.vrf_regs},
           {"freq_hz", c.freq_hz},
           {"l1_bytes", c.l1_bytes},
           {"llc_bytes", c.llc_bytes},
           {"mem_bw_bytes_per_s", c.mem_bw_bytes_per_s},
           {"mem_bw_efficiency", c.mem_bw_efficiency},
           {"line_bytes", c.line_bytes},
           {"hbm_stacks", c.hbm_stacks},
           {"barrier_cycles", c.barrier_cycles},
           {"core_mult", c.core_mult},
           {"peak_int8_ops_per_s", upcycle::peak_ops(c, {upcycle::DataKind::Int8})},
           {"peak_fp16_ops_per_s", upcycle::peak_ops(c, {upcycle::DataKind::FP16})}};
    *json_out = dup_string(j.dump(2));
  });
}

void upc_config_free(upc_config* cfg) { delete cfg; }

upc_status upc_simulate(const upc_trace* t, const upc_config* cfg,
                        const char* options_json, char** json_out) {
  return guarded([&] {
    upcycle::SimOptions opts;
    std::string coeffs_path;
    if (options_json && *options_json) {
      json o = json::parse(options_json);
      if (o.contains("batch")) opts.batch = o.at("batch").get<std::int64_t>();
      if (o.contains("bw_override_bytes_per_s")) {
        double bw = o.at("bw_override_bytes_per_s").get<double>();
        if (bw > 0) opts.bw_override_bytes_per_s = bw;
      }
      if (o.contains("perfect_cache")) opts.perfect_cache = o.at("perfect_cache").get<bool>();
      if (o.contains("weight_pinning")) opts.weight_pinning = o.at("weight_pinning").get<bool>();
      if (o.contains("coeffs_path")) coeffs_path = o.at("coeffs_path").get<std::string>();
    }
    upcycle::EnergyCoefficients coeffs = coeffs_path.empty()
                                            ? upcycle::coeffs_from_env()
                                            : upcycle::load_coeffs(coeffs_path);
    upcycle::SimResult run = upcycle::simulate(t->trace, cfg->cfg, opts);
    upcycle::PowerAreaReport power = upcycle::estimate_power(cfg->cfg, run, coeffs);
    json j = run_json(run);
    j["power"] = power_json(power);
    j["characterization"] = characterize_json(t->trace);
    *json_out = dup_string(j.dump(2));
  });
}

upc_status upc_sweep(const char* manifest_path, const char* coeffs_path,
                     char** json_out, char** csv_out) {
  return guarded([&] {
    upcycle::SweepSpec spec = upcycle::load_sweep_spec(manifest_path);
    upcycle::EnergyCoefficients coeffs =
        (coeffs_path && *coeffs_path) ? upcycle::load_coeffs(coeffs_path)
                                      : upcycle::coeffs_from_env();
    std::vector<upcycle::LoadedTrace> traces;
    for (const auto& ts : spec.traces) {
      upcycle::LoadedTrace lt;
      lt.trace = upcycle::load_trace(ts.path);
      if (!ts.dtype.empty())
        lt.trace = upcycle::with_dtype(lt.trace, upcycle::parse_dtype(ts.dtype));
      if (ts.train) lt.trace = upcycle::expand_backward(lt.trace);
      lt.batch = ts.batch;
      traces.push_back(std::move(lt));
    }
    std::vector<upcycle::DesignPoint> points = upcycle::sweep(spec, traces, coeffs);

    if (json_out) {
      json pts = json::array();
      for (const auto& p : points) {
        json per = json::array();
        for (const auto& m : p.per_trace)
          per.push_back(json{{"trace", m.trace_name},
                             {"pj_per_op", m.pj_per_op},
                             {"tops_per_mm2", m.tops_per_mm2},
                             {"samples_per_s", m.samples_per_s},
                             {"utilization", m.utilization},
                             {"total_s", m.total_s}});
        pts.push_back(json{{"tiles", p.cfg.tiles},
                           {"simd_bits", p.cfg.simd_bits},
                           {"freq_hz", p.cfg.freq_hz},
                           {"feasible", p.feasible},
                           {"error", p.error},
                           {"geomean_pj_per_op", p.geomean_pj_per_op},
                           {"geomean_tops_per_mm2", p.geomean_tops_per_mm2},
                           {"pareto", p.pareto},
                           {"per_trace", std::move(per)}});
      }
      *json_out = dup_string(json{{"points", std::move(pts)}}.dump(2));
    }
    if (csv_out) {
      std::ostringstream csv;
      csv << "tiles,simd_bits,freq_hz,feasible,pareto,trace,pj_per_op,"
             "tops_per_mm2,samples_per_s,utilization,total_s,"
             "geomean_pj_per_op,geomean_tops_per_mm2\n";
      for (const auto& p : points) {
        if (p.per_trace.empty()) {
          csv << p.cfg.tiles << ',' << p.cfg.simd_bits << ',' << p.cfg.freq_hz << ','
              << (p.feasible ? 1 : 0) << ',' << (p.pareto ? 1 : 0)
              << ",,,,,,," << p.geomean_pj_per_op << ',' << p.geomean_tops_per_mm2
              << '\n';
          continue;
        }
        for (const auto& m : p.per_trace) {
          csv << p.cfg.tiles << ',' << p.cfg.simd_bits << ',' << p.cfg.freq_hz << ','
              << (p.feasible ? 1 : 0) << ',' << (p.pareto ? 1 : 0) << ','
              << m.trace_name << ',' << m.pj_per_op << ',' << m.tops_per_mm2 << ','
              << m.samples_per_s << ',' << m.utilization << ',' << m.total_s << ','
              << p.geomean_pj_per_op << ',' << p.geomean_tops_per_mm2 << '\n';
        }
      }
      *csv_out = dup_string(csv.str());
    }
  });
}

upc_status upc_compare_a100(const char* inputs_json, char** json_out) {
  return guarded([&] {
    json in = json::parse(inputs_json);
    std::vector<upcycle::ComparisonInput> inputs;
    for (const auto& row : in) {
      upcycle::ComparisonInput ci;
      ci.app = row.at("app").get<std::string>();
      ci.mode = row.at("mode").get<std::string>();
      ci.regime = row.at("regime").get<std::string>();
      ci.dtype = upcycle::parse_dtype(row.at("dtype").get<std::string>());
      ci.ops_per_sample = row.at("ops_per_sample").get<double>();
      ci.samples_per_s = row.at("samples_per_s").get<double>();
      if (row.contains("pj_per_op")) ci.pj_per_op = row.at("pj_per_op").get<double>();
      inputs.push_back(std::move(ci));
    }
    upcycle::ComparisonReport rep = upcycle::compare_to_a100(inputs);
    json rows = json::array();
    for (const auto& r : rep.rows)
      rows.push_back(json{{"app", r.app},
                          {"mode", r.mode},
                          {"regime", r.regime},
                          {"samples_per_s", r.upcycle_samples_per_s},
                          {"a100_samples_per_s", r.a100_samples_per_s},
                          {"speedup", r.speedup},
                          {"pj_per_op", r.upcycle_pj_per_op},
                          {"a100_pj_per_op", r.a100_pj_per_op},
                          {"relative_efficiency", r.relative_efficiency}});
    json j{{"rows", std::move(rows)},
           {"skipped", rep.skipped},
           {"geomean_speedup",
            {{"small_inference", rep.geomean_speedup_small_inference},
             {"small_training", rep.geomean_speedup_small_training},
             {"large_inference", rep.geomean_speedup_large_inference},
             {"large_training", rep.geomean_speedup_large_training}}},
           {"note",
            "a100 samples/s reconstructed as published utilization x published "
            "peak / ops per sample"}};
    *json_out = dup_string(j.dump(2));
  });
}

upc_status upc_baseline_table(char** json_out) {
  return guarded([&] {
    const upcycle::BaselineTable& t = upcycle::baselines();
    json util = json::array();
    for (const auto& u : t.a100_utilization)
      util.push_back(json{{"app", u.app}, {"mode", u.mode}, {"small", u.small},
                          {"large", u.large}});
    json eff = json::array();
    for (const auto& e : t.a100_efficiency)
      eff.push_back(json{{"app", e.app},
                         {"mode", e.mode},
                         {"tops_per_mm2", e.tops_per_mm2},
                         {"pj_per_op", e.pj_per_op}});
    json j{{"a100",
            {{"area_mm2", t.a100_area_mm2},
             {"tdp_w", t.a100_tdp_w},
             {"freq_hz", t.a100_freq_hz},
             {"peak_int8_ops_per_s", t.a100_peak_int8_ops},
             {"peak_fp16_ops_per_s", t.a100_peak_fp16_ops},
             {"utilization", std::move(util)},
             {"efficiency", std::move(eff)}}},
           {"eyeriss_v2",
            {{"alexnet_pj_per_op", t.eyeriss_alexnet_pj_per_op},
             {"mobilenet_pj_per_op", t.eyeriss_mobilenet_pj_per_op}}}};
    *json_out = dup_string(j.dump(2));
  });
}

upc_status upc_microbench(const upc_config* cfg, const char* dtype, int64_t m,
                          int64_t n, int64_t k, char** json_out) {
  return guarded([&] {
    if (m < 1 || n < 1 || k < 1)
      throw upcycle::TraceError("microbench dims must be positive");
    upcycle::DataType dt = upcycle::parse_dtype(dtype);
    const upcycle::MachineConfig& c = cfg->cfg;
    upcycle::Microkernel mk = upcycle::select_matmul_tiling(m, n, k, c, dt);
    json j{{"m", m},
           {"n", n},
           {"k", k},
           {"dtype", dt.name()},
           {"tm", mk.tm},
           {"tn", mk.tn},
           {"tk", mk.tk},
           {"fmas_per_kstep", mk.fmas_per_kstep},
           {"loads_per_kstep", mk.loads_per_kstep},
           {"needs_reduction", mk.needs_reduction}};
    // Emulate when the footprint stays desk sized.
    bool emulate = m * k <= (1 << 22) && k * n <= (1 << 22) && m * n <= (1 << 22) &&
                   !mk.needs_reduction;
    j["emulated"] = emulate;
    if (emulate) {
      std::mt19937 rng(12345);
      if (dt.kind == upcycle::DataKind::Int8) {
        std::uniform_int_distribution<int> dist(-128, 127);
        std::vector<std::int8_t> a(m * k), b(k * n);
        for (auto& x : a) x = static_cast<std::int8_t>(dist(rng));
        for (auto& x : b) x = static_cast<std::int8_t>(dist(rng));
        auto run = upcycle::emu::run_matmul_int8(a, b, m, n, k, mk, c);
        auto ref = upcycle::emu::ref_matmul_int8(a, b, m, n, k);
        j["alu_slots"] = run.alu_slots;
        j["mem_slots"] = run.mem_slots;
        j["cycles"] = run.cycles;
        j["matches_reference"] = run.c_i32 == ref;
      } else {
        std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
        std::vector<std::uint16_t> a(m * k), b(k * n);
        for (auto& x : a) x = upcycle::emu::f32_to_f16(dist(rng));
        for (auto& x : b) x = upcycle::emu::f32_to_f16(dist(rng));
        auto run = upcycle::emu::run_matmul_fp16(a, b, m, n, k, mk, c);
        auto ref = upcycle::emu::ref_matmul_fp16(a, b, m, n, k);
        j["alu_slots"] = run.alu_slots;
        j["mem_slots"] = run.mem_slots;
        j["cycles"] = run.cycles;
        j["matches_reference"] = run.c_f32 == ref;
      }
    }
    *json_out = dup_string(j.dump(2));
  });
}

}  // extern "C"
