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

#include "dse.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace upcycle {

double geomean(const std::vector<double>& values) {
  if (values.empty()) return 0;
  double log_sum = 0;
  for (double v : values) {
    if (v <= 0) return 0;
    log_sum += std::log(v);
  }
  return std::exp(log_sum / values.size());
}

Trace with_dtype(const Trace& trace, DataType dtype) {
  Trace out = trace;
  for (auto& n : out.nodes) n.dtype = dtype;
  for (auto& [id, t] : out.tensors) t.dtype = dtype;
  return out;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("sweep manifest parse error: " + std::string(e.what()));
  }
  SweepSpec spec;
  if (j.contains("axes")) {
    const auto& axes = j.at("axes");
    if (axes.contains("tiles")) spec.tiles_axis = axes.at("tiles").get<std::vector<int>>();
    if (axes.contains("simd_bits"))
      spec.simd_axis = axes.at("simd_bits").get<std::vector<int>>();
    if (axes.contains("freq_ghz")) {
      spec.freq_axis.clear();
      for (double g : axes.at("freq_ghz").get<std::vector<double>>())
        spec.freq_axis.push_back(g * 1e9);
    }
  }
  if (spec.tiles_axis.empty() || spec.simd_axis.empty() || spec.freq_axis.empty())
    throw ConfigError("sweep manifest has an empty axis");
  if (j.contains("traces")) {
    for (const auto& t : j.at("traces")) {
      SweepTraceSpec s;
      s.path = t.at("path").get<std::string>();
      if (t.contains("dtype")) s.dtype = t.at("dtype").get<std::string>();
      if (t.contains("batch")) s.batch = t.at("batch").get<std::int64_t>();
      if (t.contains("train")) s.train = t.at("train").get<bool>();
      spec.traces.push_back(std::move(s));
    }
  }
  return spec;
}

std::vector<DesignPoint> sweep(const SweepSpec& spec,
                               const std::vector<LoadedTrace>& traces,
                               const EnergyCoefficients& coeffs) {
  std::vector<DesignPoint> points;
  for (int tiles : spec.tiles_axis) {
    for (int simd : spec.simd_axis) {
      for (double freq : spec.freq_axis) {
        DesignPoint p;
        p.cfg = preset("base");
        p.cfg.tiles = tiles;
        p.cfg.simd_bits = simd;
        p.cfg.freq_hz = freq;
        try {
          p.cfg.validate();
          voltage_at(coeffs, freq);
        } catch (const ConfigError& e) {
          p.feasible = false;
          p.error = e.what();
          points.push_back(std::move(p));
          continue;
        }
        std::vector<double> pjs, densities;
        for (const auto& lt : traces) {
          SimOptions sopts;
          sopts.batch = lt.batch;
          SimResult run = simulate(lt.trace, p.cfg, sopts);
          PowerAreaReport pr = estimate_power(p.cfg, run, coeffs);
          TraceMetrics m;
          m.trace_name = run.trace_name;
          m.pj_per_op = pr.pj_per_op;
          m.tops_per_mm2 = pr.tops_per_mm2;
          m.samples_per_s = run.samples_per_s;
          m.utilization = run.utilization;
          m.total_s = run.total_s;
          pjs.push_back(m.pj_per_op);
          densities.push_back(m.tops_per_mm2);
          p.per_trace.push_back(std::move(m));
        }
        p.geomean_pj_per_op = geomean(pjs);
        p.geomean_tops_per_mm2 = geomean(densities);
        points.push_back(std::move(p));
      }
    }
  }
  auto front = pareto_front(points);
  for (std::size_t i : front) points[i].pareto = true;
  return points;
}

std::vector<std::size_t> pareto_front(const std::vector<DesignPoint>& points) {
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].feasible) continue;
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (i == j || !points[j].feasible) continue;
      bool ge = points[j].geomean_tops_per_mm2 >= points[i].geomean_tops_per_mm2;
      bool le = points[j].geomean_pj_per_op <= points[i].geomean_pj_per_op;
      bool strict = points[j].geomean_tops_per_mm2 > points[i].geomean_tops_per_mm2 ||
                    points[j].geomean_pj_per_op < points[i].geomean_pj_per_op;
      dominated = ge && le && strict;
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

std::vector<CoreScalingPoint> sensitivity_core(const Trace& trace,
                                               const MachineConfig& cfg,
                                               const std::vector<double>& multipliers,
                                               const SimOptions& base) {
  SimResult ref = simulate(trace, cfg, base);
  std::vector<CoreScalingPoint> out;
  for (double mult : multipliers) {
    MachineConfig scaled = cfg;
    scaled.core_mult = mult;
    SimResult r = simulate(trace, scaled, base);
    CoreScalingPoint p;
    p.multiplier = mult;
    p.speedup = r.total_s > 0 ? ref.total_s / r.total_s : 1.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace upcycle
