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

// Exercises the shared-library C surface only; no internal headers.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "upcycle/upcycle.h"

using nlohmann::json;

namespace {

// Takes ownership of the library string and frees it.
json parse_owned(char* s) {
  REQUIRE(s != nullptr);
  json j = json::parse(s);
  upc_string_free(s);
  return j;
}

}  // namespace

TEST_CASE("version string is present") {
  const char* v = upc_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);
}

TEST_CASE("error codes are distinct and reported") {
  upc_trace* t = nullptr;
  CHECK(upc_trace_load("data/traces/no_such_trace.json", &t) == UPC_ERR_IO);
  CHECK(std::strlen(upc_last_error()) > 0);

  CHECK(upc_trace_parse("{not json", &t) == UPC_ERR_VALIDATION);
  CHECK(upc_trace_parse("{\"version\": 1}", &t) == UPC_ERR_VALIDATION);

  upc_config* cfg = nullptr;
  CHECK(upc_config_preset("no_such_preset", &cfg) == UPC_ERR_INFEASIBLE);
  REQUIRE(upc_config_preset("base", &cfg) == UPC_OK);
  CHECK(upc_config_set(cfg, "no_such_field", 1.0) == UPC_ERR_INFEASIBLE);
  CHECK(upc_config_set(cfg, "simd_bits", 384) == UPC_OK);  // applied, then...
  CHECK(upc_config_validate(cfg) == UPC_ERR_INFEASIBLE);   // ...caught here
  CHECK(upc_config_set(cfg, "simd_bits", 512) == UPC_OK);
  CHECK(upc_config_validate(cfg) == UPC_OK);
  upc_config_free(cfg);
}

TEST_CASE("preset describe reports the published peaks") {
  upc_config* cfg = nullptr;
  REQUIRE(upc_config_preset("base", &cfg) == UPC_OK);
  char* s = nullptr;
  REQUIRE(upc_config_describe(cfg, &s) == UPC_OK);
  json j = parse_owned(s);
  CHECK(j.at("tiles").get<int>() == 2048);
  CHECK(j.at("simd_bits").get<int>() == 512);
  CHECK(j.at("freq_hz").get<double>() == 2.0e9);
  CHECK(j.at("peak_int8_ops_per_s").get<double>() == 524288.0e9);
  CHECK(j.at("peak_fp16_ops_per_s").get<double>() == 262144.0e9);
  upc_config_free(cfg);
}

TEST_CASE("load, retarget, characterize, expand, simulate round trip") {
  upc_trace* t = nullptr;
  REQUIRE(upc_trace_load("data/traces/resnet50_inf.json", &t) == UPC_OK);

  char* s = nullptr;
  REQUIRE(upc_trace_characterize(t, &s) == UPC_OK);
  json c = parse_owned(s);
  CHECK(c.at("gops_per_sample").get<double>() == doctest::Approx(7.738).epsilon(1e-3));
  CHECK(c.at("distinct_shapes").get<int>() == 33);
  CHECK(c.at("primary_op_fraction").get<double>() > 0.99);

  upc_trace* f16 = nullptr;
  REQUIRE(upc_trace_retarget(t, "fp16", &f16) == UPC_OK);
  upc_trace* train = nullptr;
  REQUIRE(upc_trace_expand_backward(f16, &train) == UPC_OK);
  s = nullptr;
  REQUIRE(upc_trace_characterize(train, &s) == UPC_OK);
  json ct = parse_owned(s);
  CHECK(ct.at("nodes").get<int>() == 296);
  CHECK(ct.at("total_ops").get<double>() > 2 * c.at("total_ops").get<double>());

  upc_config* cfg = nullptr;
  REQUIRE(upc_config_preset("base", &cfg) == UPC_OK);
  s = nullptr;
  REQUIRE(upc_simulate(t, cfg, "{\"batch\": 64}", &s) == UPC_OK);
  json r = parse_owned(s);
  CHECK(r.at("batch").get<int>() == 64);
  double util = r.at("utilization").get<double>();
  CHECK(util > 0.0);
  CHECK(util <= 1.0);
  CHECK(r.at("total_s").get<double>() > 0.0);
  CHECK(r.at("operators").size() > 100);
  CHECK(r.at("power").at("pj_per_op").get<double>() > 0.1);  // above raw MAC cost
  CHECK(r.at("power").at("area_mm2").get<double>() ==
        doctest::Approx(140.5).epsilon(0.01));

  // Perfect cache never runs slower and reads no more DRAM bytes.
  s = nullptr;
  REQUIRE(upc_simulate(t, cfg, "{\"batch\": 64, \"perfect_cache\": true}", &s) ==
          UPC_OK);
  json pc = parse_owned(s);
  CHECK(pc.at("total_s").get<double>() <= r.at("total_s").get<double>());
  CHECK(pc.at("dram_read_bytes").get<double>() <=
        r.at("dram_read_bytes").get<double>());

  // Invalid options JSON surfaces as a validation error.
  s = nullptr;
  CHECK(upc_simulate(t, cfg, "{oops", &s) == UPC_ERR_VALIDATION);

  upc_config_free(cfg);
  upc_trace_free(train);
  upc_trace_free(f16);
  upc_trace_free(t);
}

TEST_CASE("microbench emulates small kernels bit-exactly") {
  upc_config* cfg = nullptr;
  REQUIRE(upc_config_preset("base", &cfg) == UPC_OK);
  char* s = nullptr;
  REQUIRE(upc_microbench(cfg, "int8", 64, 80, 64, &s) == UPC_OK);
  json j = parse_owned(s);
  CHECK(j.at("tm").get<int>() == 4);
  CHECK(j.at("tn").get<int>() == 5);
  CHECK(j.at("emulated").get<bool>());
  CHECK(j.at("matches_reference").get<bool>());
  CHECK(j.at("cycles").get<double>() > 0);

  s = nullptr;
  CHECK(upc_microbench(cfg, "int8", 0, 8, 8, &s) == UPC_ERR_VALIDATION);
  s = nullptr;
  CHECK(upc_microbench(cfg, "int7", 8, 8, 8, &s) == UPC_ERR_INFEASIBLE);
  upc_config_free(cfg);
}

TEST_CASE("baseline table and identity comparison") {
  char* s = nullptr;
  REQUIRE(upc_baseline_table(&s) == UPC_OK);
  json b = parse_owned(s);
  CHECK(b.at("a100").at("area_mm2").get<double>() == 840.0);
  CHECK(b.at("a100").at("peak_int8_ops_per_s").get<double>() == 624.0e12);
  REQUIRE(b.at("a100").at("utilization").size() > 0);

  // Feed back the published numbers themselves: speedup must be exactly 1.
  const auto& util = b.at("a100").at("utilization");
  json inputs = json::array();
  for (const auto& row : util) {
    double peak = row.at("mode") == "inference" ? 624.0e12 : 312.0e12;
    const char* dtype = row.at("mode") == "inference" ? "int8" : "fp16";
    double ops_per_sample = 1.0e9;
    inputs.push_back(json{{"app", row.at("app")},
                          {"mode", row.at("mode")},
                          {"regime", "small"},
                          {"dtype", dtype},
                          {"ops_per_sample", ops_per_sample},
                          {"samples_per_s",
                           row.at("small").get<double>() * peak / ops_per_sample}});
  }
  s = nullptr;
  REQUIRE(upc_compare_a100(inputs.dump().c_str(), &s) == UPC_OK);
  json cmp = parse_owned(s);
  REQUIRE(cmp.at("rows").size() == inputs.size());
  for (const auto& row : cmp.at("rows"))
    CHECK(row.at("speedup").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cmp.at("geomean_speedup").at("small_inference").get<double>() ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sweep returns json and csv for the shipped manifest") {
  char* js = nullptr;
  char* csv = nullptr;
  REQUIRE(upc_sweep("data/sweep_default.json", nullptr, &js, &csv) == UPC_OK);
  json j = parse_owned(js);
  REQUIRE(j.at("points").size() == 24);
  int pareto = 0;
  for (const auto& p : j.at("points")) {
    CHECK(p.at("feasible").get<bool>());
    CHECK(p.at("per_trace").size() == 7);
    if (p.at("pareto").get<bool>()) ++pareto;
  }
  CHECK(pareto >= 1);
  REQUIRE(csv != nullptr);
  std::string text(csv);
  upc_string_free(csv);
  CHECK(text.rfind("tiles,simd_bits,freq_hz", 0) == 0);
  // Header plus one row per config x trace.
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 24 * 7);

  CHECK(upc_sweep("data/no_such_manifest.json", nullptr, &js, nullptr) ==
        UPC_ERR_IO);
}
