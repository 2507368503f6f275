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

// Command-line front end. Talks to the simulator exclusively through the
// C API; all structured data crosses that boundary as JSON.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "upcycle/upcycle.h"

using nlohmann::json;

namespace {

// Owning wrappers over the C handles.
struct TraceDeleter {
  void operator()(upc_trace* t) const { upc_trace_free(t); }
};
struct ConfigDeleter {
  void operator()(upc_config* c) const { upc_config_free(c); }
};
using TracePtr = std::unique_ptr<upc_trace, TraceDeleter>;
using ConfigPtr = std::unique_ptr<upc_config, ConfigDeleter>;

[[noreturn]] void die(upc_status st) {
  std::cerr << "error: " << upc_last_error() << "\n";
  std::exit(static_cast<int>(st));
}

void check(upc_status st) {
  if (st != UPC_OK) die(st);
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  upc_string_free(s);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(static_cast<int>(UPC_ERR_IO));
  }
  out << content;
}

struct CommonOpts {
  std::string preset = "base";
  std::string config_path;
  std::vector<std::string> overrides;  // field=value
};

ConfigPtr make_config(const CommonOpts& c) {
  upc_config* cfg = nullptr;
  if (!c.config_path.empty())
    check(upc_config_load(c.config_path.c_str(), &cfg));
  else
    check(upc_config_preset(c.preset.c_str(), &cfg));
  ConfigPtr ptr(cfg);
  for (const auto& kv : c.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: override must be field=value: " << kv << "\n";
      std::exit(static_cast<int>(UPC_ERR_VALIDATION));
    }
    check(upc_config_set(ptr.get(), kv.substr(0, eq).c_str(),
                         std::stod(kv.substr(eq + 1))));
  }
  check(upc_config_validate(ptr.get()));
  return ptr;
}

TracePtr load_trace_file(const std::string& path, const std::string& dtype,
                         bool train) {
  upc_trace* t = nullptr;
  check(upc_trace_load(path.c_str(), &t));
  TracePtr ptr(t);
  if (!dtype.empty()) {
    upc_trace* rt = nullptr;
    check(upc_trace_retarget(ptr.get(), dtype.c_str(), &rt));
    ptr.reset(rt);
  }
  if (train) {
    upc_trace* bt = nullptr;
    check(upc_trace_expand_backward(ptr.get(), &bt));
    ptr.reset(bt);
  }
  return ptr;
}

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--preset", c.preset, "machine preset (base, riss)");
  cmd->add_option("--config", c.config_path, "machine config file (json)");
  cmd->add_option("--set", c.overrides, "config override field=value")
      ->take_all();
}

int cmd_characterize(const std::string& path, const std::string& csv_path,
                     const std::string& json_path) {
  TracePtr trace = load_trace_file(path, "", false);
  char* out = nullptr;
  check(upc_trace_characterize(trace.get(), &out));
  json j = json::parse(take_string(out));
  std::printf("%-24s %10s %8s %10s %10s\n", "trace", "GOPs/smp", "shapes",
              "%primary", "nodes");
  std::printf("%-24s %10.2f %8lld %9.2f%% %10lld\n",
              j.at("name").get<std::string>().c_str(),
              j.at("gops_per_sample").get<double>(),
              j.at("distinct_shapes").get<long long>(),
              100.0 * j.at("primary_op_fraction").get<double>(),
              j.at("nodes").get<long long>());
  if (!json_path.empty()) write_file(json_path, j.dump(2) + "\n");
  if (!csv_path.empty()) {
    std::string csv = "trace,gops_per_sample,distinct_shapes,primary_op_fraction,nodes\n";
    csv += j.at("name").get<std::string>() + "," +
           std::to_string(j.at("gops_per_sample").get<double>()) + "," +
           std::to_string(j.at("distinct_shapes").get<long long>()) + "," +
           std::to_string(j.at("primary_op_fraction").get<double>()) + "," +
           std::to_string(j.at("nodes").get<long long>()) + "\n";
    write_file(csv_path, csv);
  }
  return 0;
}

json run_simulation(const TracePtr& trace, const ConfigPtr& cfg, long long batch,
                    double mem_bw, bool perfect_cache, bool no_pinning,
                    const std::string& coeffs_path) {
  json opts;
  if (batch > 0) opts["batch"] = batch;
  if (mem_bw > 0) opts["bw_override_bytes_per_s"] = mem_bw;
  if (perfect_cache) opts["perfect_cache"] = true;
  if (no_pinning) opts["weight_pinning"] = false;
  if (!coeffs_path.empty()) opts["coeffs_path"] = coeffs_path;
  char* out = nullptr;
  check(upc_simulate(trace.get(), cfg.get(), opts.dump().c_str(), &out));
  return json::parse(take_string(out));
}

void print_simulation(const json& j, bool verbose) {
  const json& p = j.at("power");
  std::printf("trace          : %s (%s, batch %lld, %s)\n",
              j.at("trace").get<std::string>().c_str(),
              j.at("mode").get<std::string>().c_str(),
              j.at("batch").get<long long>(),
              j.at("dominant_dtype").get<std::string>().c_str());
  std::printf("time           : %.6f ms   samples/s: %.1f\n",
              1e3 * j.at("total_s").get<double>(),
              j.at("samples_per_s").get<double>());
  std::printf("utilization    : %.1f%%   achieved: %.2f TOP/s (peak %.2f)\n",
              100.0 * j.at("utilization").get<double>(),
              j.at("achieved_ops_per_s").get<double>() / 1e12,
              j.at("peak_ops_per_s").get<double>() / 1e12);
  std::printf("dram traffic   : %.2f MB read, %.2f MB written%s\n",
              j.at("dram_read_bytes").get<double>() / 1e6,
              j.at("dram_write_bytes").get<double>() / 1e6,
              j.at("weights_pinned").get<bool>() ? " (weights pinned)" : "");
  std::printf("power          : %.1f W avg (TDP %.1f W), %.3f pJ/op\n",
              p.at("avg_power_w").get<double>(), p.at("tdp_w").get<double>(),
              p.at("pj_per_op").get<double>());
  std::printf("area           : %.1f mm2, %.3f TOP/s/mm2\n",
              p.at("area_mm2").get<double>(), p.at("tops_per_mm2").get<double>());
  if (verbose) {
    std::printf("%-14s %-34s %7s %9s %9s %6s %9s\n", "node", "shape", "util",
                "time_us", "chunks", "bound", "simd_eff");
    for (const auto& op : j.at("operators")) {
      std::printf("%-14s %-34s %6.1f%% %9.3f %9lld %6s %9.3f\n",
                  op.at("node_id").get<std::string>().c_str(),
                  op.at("shape").get<std::string>().c_str(),
                  100.0 * op.at("utilization").get<double>(),
                  1e6 * op.at("total_s").get<double>(),
                  op.at("chunks").get<long long>(),
                  op.at("bound").get<std::string>().c_str(),
                  op.at("simd_efficiency").get<double>());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven performance, power, and area simulator for a "
               "SIMD-multicore deep learning accelerator"};
  app.require_subcommand(1);

  // characterize
  std::string ch_trace, ch_csv, ch_json;
  auto* ch = app.add_subcommand("characterize", "summarize a trace's op census");
  ch->add_option("trace", ch_trace, "trace file")->required();
  ch->add_option("--csv", ch_csv, "write CSV to path");
  ch->add_option("--json", ch_json, "write JSON to path");

  // simulate
  std::string sim_trace, sim_dtype, sim_csv, sim_json, sim_coeffs;
  CommonOpts sim_common;
  long long sim_batch = 0;
  double sim_membw = 0;
  bool sim_train = false, sim_perfect = false, sim_nopin = false, sim_verbose = false;
  auto* sim = app.add_subcommand("simulate", "run the timeline model on a trace");
  sim->add_option("trace", sim_trace, "trace file")->required();
  add_common(sim, sim_common);
  sim->add_option("--dtype", sim_dtype, "retarget datatype (int8, fp16, fp32)");
  sim->add_option("--batch", sim_batch, "batch size (default: trace header)");
  sim->add_option("--mem-bw", sim_membw, "override raw memory bandwidth, bytes/s");
  sim->add_flag("--train", sim_train, "expand backward operators first");
  sim->add_flag("--perfect-cache", sim_perfect, "infinite on-chip reuse");
  sim->add_flag("--no-weight-pinning", sim_nopin, "stream weights from DRAM");
  sim->add_flag("-v,--verbose", sim_verbose, "per-operator table");
  sim->add_option("--coeffs", sim_coeffs, "energy coefficient file");
  sim->add_option("--json", sim_json, "write full report JSON to path");
  sim->add_option("--csv", sim_csv, "write per-operator CSV to path");

  // sweep
  std::string sw_manifest, sw_csv, sw_json, sw_coeffs;
  auto* sw = app.add_subcommand("sweep", "evaluate a design-space grid");
  sw->add_option("manifest", sw_manifest, "sweep manifest file")->required();
  sw->add_option("--coeffs", sw_coeffs, "energy coefficient file");
  sw->add_option("--csv", sw_csv, "write per-point CSV to path");
  sw->add_option("--json", sw_json, "write point list JSON to path");

  // compare
  std::vector<std::string> cp_traces;
  std::string cp_dtype, cp_json;
  CommonOpts cp_common;
  long long cp_large_batch = 64;
  bool cp_train = false;
  auto* cp = app.add_subcommand(
      "compare", "compare simulated throughput against published A100 results");
  cp->add_option("traces", cp_traces, "trace files")->required();
  add_common(cp, cp_common);
  cp->add_option("--dtype", cp_dtype, "retarget datatype");
  cp->add_flag("--train", cp_train, "compare the training expansion");
  cp->add_option("--large-batch", cp_large_batch, "large-batch regime size");
  cp->add_option("--json", cp_json, "write comparison JSON to path");

  // microbench
  std::string mb_dtype = "int8";
  CommonOpts mb_common;
  long long mb_m = 64, mb_n = 64, mb_k = 64;
  auto* mb = app.add_subcommand("microbench",
                                "emulate one register-tiled GEMM microkernel");
  mb->add_option("m", mb_m, "rows");
  mb->add_option("n", mb_n, "columns");
  mb->add_option("k", mb_k, "reduction");
  mb->add_option("--dtype", mb_dtype, "datatype");
  add_common(mb, mb_common);

  CLI11_PARSE(app, argc, argv);

  if (ch->parsed()) return cmd_characterize(ch_trace, ch_csv, ch_json);

  if (sim->parsed()) {
    ConfigPtr cfg = make_config(sim_common);
    TracePtr trace = load_trace_file(sim_trace, sim_dtype, sim_train);
    json j = run_simulation(trace, cfg, sim_batch, sim_membw, sim_perfect,
                            sim_nopin, sim_coeffs);
    print_simulation(j, sim_verbose);
    if (!sim_json.empty()) write_file(sim_json, j.dump(2) + "\n");
    if (!sim_csv.empty()) {
      std::string csv =
          "node_id,kind,shape,dtype,ops,chunks,simd_efficiency,total_s,"
          "utilization,bound,dram_read_bytes,dram_write_bytes\n";
      for (const auto& op : j.at("operators")) {
        csv += op.at("node_id").get<std::string>() + "," +
               op.at("kind").get<std::string>() + ",\"" +
               op.at("shape").get<std::string>() + "\"," +
               op.at("dtype").get<std::string>() + "," +
               std::to_string(op.at("ops").get<long long>()) + "," +
               std::to_string(op.at("chunks").get<long long>()) + "," +
               std::to_string(op.at("simd_efficiency").get<double>()) + "," +
               std::to_string(op.at("total_s").get<double>()) + "," +
               std::to_string(op.at("utilization").get<double>()) + "," +
               op.at("bound").get<std::string>() + "," +
               std::to_string(op.at("dram_read_bytes").get<long long>()) + "," +
               std::to_string(op.at("dram_write_bytes").get<long long>()) + "\n";
      }
      write_file(sim_csv, csv);
    }
    return 0;
  }

  if (sw->parsed()) {
    char* jout = nullptr;
    char* cout_ = nullptr;
    check(upc_sweep(sw_manifest.c_str(), sw_coeffs.c_str(), &jout, &cout_));
    std::string jtext = take_string(jout);
    std::string ctext = take_string(cout_);
    json j = json::parse(jtext);
    std::printf("%6s %5s %8s %9s %12s %7s\n", "tiles", "simd", "freq_GHz",
                "pJ/op", "TOP/s/mm2", "pareto");
    for (const auto& p : j.at("points")) {
      if (!p.at("feasible").get<bool>()) {
        std::printf("%6lld %5lld %8.2f %9s %12s %7s\n",
                    p.at("tiles").get<long long>(),
                    p.at("simd_bits").get<long long>(),
                    p.at("freq_hz").get<double>() / 1e9, "-", "-", "infeas");
        continue;
      }
      std::printf("%6lld %5lld %8.2f %9.3f %12.4f %7s\n",
                  p.at("tiles").get<long long>(),
                  p.at("simd_bits").get<long long>(),
                  p.at("freq_hz").get<double>() / 1e9,
                  p.at("geomean_pj_per_op").get<double>(),
                  p.at("geomean_tops_per_mm2").get<double>(),
                  p.at("pareto").get<bool>() ? "*" : "");
    }
    if (!sw_json.empty()) write_file(sw_json, jtext + "\n");
    if (!sw_csv.empty()) write_file(sw_csv, ctext);
    return 0;
  }

  if (cp->parsed()) {
    ConfigPtr cfg = make_config(cp_common);
    json inputs = json::array();
    for (const auto& path : cp_traces) {
      TracePtr trace = load_trace_file(path, cp_dtype, cp_train);
      char* ch_out = nullptr;
      check(upc_trace_characterize(trace.get(), &ch_out));
      json summary = json::parse(take_string(ch_out));
      double ops_per_sample = 1e9 * summary.at("gops_per_sample").get<double>();
      std::string mode = cp_train ? "training" : "inference";
      for (const char* regime : {"small", "large"}) {
        long long batch = std::string(regime) == "small" ? 1 : cp_large_batch;
        json j = run_simulation(trace, cfg, batch, 0, false, false, "");
        inputs.push_back(json{
            {"app", summary.at("name").get<std::string>()},
            {"mode", mode},
            {"regime", regime},
            {"dtype", j.at("dominant_dtype").get<std::string>()},
            {"ops_per_sample", ops_per_sample},
            {"samples_per_s", j.at("samples_per_s").get<double>()},
            {"pj_per_op", j.at("power").at("pj_per_op").get<double>()}});
      }
    }
    char* out = nullptr;
    check(upc_compare_a100(inputs.dump().c_str(), &out));
    json rep = json::parse(take_string(out));
    std::printf("%-20s %-10s %-6s %12s %12s %8s %8s\n", "app", "mode", "batch",
                "samples/s", "a100 smp/s", "speedup", "rel_eff");
    for (const auto& r : rep.at("rows")) {
      std::printf("%-20s %-10s %-6s %12.1f %12.1f %7.2fx %7.2fx\n",
                  r.at("app").get<std::string>().c_str(),
                  r.at("mode").get<std::string>().c_str(),
                  r.at("regime").get<std::string>().c_str(),
                  r.at("samples_per_s").get<double>(),
                  r.at("a100_samples_per_s").get<double>(),
                  r.at("speedup").get<double>(),
                  r.at("relative_efficiency").get<double>());
    }
    const json& g = rep.at("geomean_speedup");
    std::printf("geomean speedup: small inf %.2fx, small train %.2fx, "
                "large inf %.2fx, large train %.2fx\n",
                g.at("small_inference").get<double>(),
                g.at("small_training").get<double>(),
                g.at("large_inference").get<double>(),
                g.at("large_training").get<double>());
    for (const auto& s : rep.at("skipped"))
      std::printf("skipped (no baseline data): %s\n", s.get<std::string>().c_str());
    std::printf("note: %s\n", rep.at("note").get<std::string>().c_str());
    if (!cp_json.empty()) write_file(cp_json, rep.dump(2) + "\n");
    return 0;
  }

  if (mb->parsed()) {
    ConfigPtr cfg = make_config(mb_common);
    char* out = nullptr;
    check(upc_microbench(cfg.get(), mb_dtype.c_str(), mb_m, mb_n, mb_k, &out));
    json j = json::parse(take_string(out));
    std::printf("shape          : %lldx%lldx%lld %s\n", mb_m, mb_n, mb_k,
                j.at("dtype").get<std::string>().c_str());
    std::printf("tiling         : tm=%d tn=%d tk=%d%s\n", j.at("tm").get<int>(),
                j.at("tn").get<int>(), j.at("tk").get<int>(),
                j.at("needs_reduction").get<bool>() ? " (K-vectorized)" : "");
    std::printf("per k-step     : %d fma slots, %d load slots\n",
                j.at("fmas_per_kstep").get<int>(),
                j.at("loads_per_kstep").get<int>());
    if (j.at("emulated").get<bool>()) {
      std::printf("emulation      : %lld cycles (alu %lld, mem %lld), reference %s\n",
                  j.at("cycles").get<long long>(),
                  j.at("alu_slots").get<long long>(),
                  j.at("mem_slots").get<long long>(),
                  j.at("matches_reference").get<bool>() ? "match" : "MISMATCH");
    }
    return 0;
  }

  return 0;
}
