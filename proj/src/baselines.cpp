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

#include "baselines.hpp"

#include <cmath>
#include <map>

namespace upcycle {

const BaselineTable& baselines() {
  static const BaselineTable table = [] {
    BaselineTable t;
    // Published chip utilization, small and large batch.
    t.a100_utilization = {
        {"resnet50", "inference", 0.050, 0.502},
        {"ssd_resnet34", "inference", 0.039, 0.045},
        {"maskrcnn", "inference", 0.150, 0.200},
        {"bert_large_128", "inference", 0.138, 0.595},
        {"rnnt", "inference", 0.015, 0.547},
        {"resnet50", "training", 0.015, 0.212},
        {"ssd_resnet34", "training", 0.010, 0.154},
        {"maskrcnn", "training", 0.217, 0.217},
        {"bert_large_128", "training", 0.063, 0.272},
        {"rnnt", "training", 0.008, 0.088},
    };
    // Published (TOP/s / mm2, pJ/op) efficiency points.
    t.a100_efficiency = {
        {"resnet50", "inference", 0.42, 0.87}, {"resnet50", "training", 0.08, 4.29},
        {"ssd_resnet34", "inference", 0.03, 10.54},
        {"ssd_resnet34", "training", 0.06, 6.25},
        {"maskrcnn", "inference", 0.08, 4.56}, {"maskrcnn", "training", 0.10, 3.48},
        {"rnnt", "inference", 0.45, 0.81},     {"rnnt", "training", 0.10, 3.50},
    };
    return t;
  }();
  return table;
}

const A100Utilization* find_a100_utilization(const std::string& app,
                                             const std::string& mode) {
  for (const auto& u : baselines().a100_utilization)
    if (u.app == app && u.mode == mode) return &u;
  return nullptr;
}

const A100Efficiency* find_a100_efficiency(const std::string& app,
                                           const std::string& mode) {
  for (const auto& e : baselines().a100_efficiency)
    if (e.app == app && e.mode == mode) return &e;
  return nullptr;
}

double a100_samples_per_s(double utilization, DataType dtype, double ops_per_sample) {
  const BaselineTable& t = baselines();
  double peak = dtype.kind == DataKind::Int8 ? t.a100_peak_int8_ops
                                             : t.a100_peak_fp16_ops;
  if (ops_per_sample <= 0) return 0;
  return utilization * peak / ops_per_sample;
}

ComparisonReport compare_to_a100(const std::vector<ComparisonInput>& inputs) {
  ComparisonReport report;
  std::map<std::pair<std::string, std::string>, std::vector<double>> speedups;
  for (const auto& in : inputs) {
    std::string mode = in.mode == "inference" ? "inference" : "training";
    const A100Utilization* util = find_a100_utilization(in.app, mode);
    if (!util) {
      report.skipped.push_back(in.app + " (" + mode + ")");
      continue;
    }
    double a100_util = in.regime == "large" ? util->large : util->small;
    ComparisonRow row;
    row.app = in.app;
    row.mode = mode;
    row.regime = in.regime;
    row.upcycle_samples_per_s = in.samples_per_s;
    row.a100_samples_per_s = a100_samples_per_s(a100_util, in.dtype, in.ops_per_sample);
    row.speedup = row.a100_samples_per_s > 0
                      ? row.upcycle_samples_per_s / row.a100_samples_per_s
                      : 0;
    row.upcycle_pj_per_op = in.pj_per_op;
    if (const A100Efficiency* eff = find_a100_efficiency(in.app, mode)) {
      row.a100_pj_per_op = eff->pj_per_op;
      if (in.pj_per_op > 0) row.relative_efficiency = eff->pj_per_op / in.pj_per_op;
    }
    if (row.speedup > 0) speedups[{mode, row.regime}].push_back(row.speedup);
    report.rows.push_back(std::move(row));
  }
  auto geo = [&](const std::string& mode, const std::string& regime) {
    const auto& v = speedups[{mode, regime}];
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += std::log(x);
    return std::exp(s / v.size());
  };
  report.geomean_speedup_small_inference = geo("inference", "small");
  report.geomean_speedup_small_training = geo("training", "small");
  report.geomean_speedup_large_inference = geo("inference", "large");
  report.geomean_speedup_large_training = geo("training", "large");
  return report;
}

}  // namespace upcycle
