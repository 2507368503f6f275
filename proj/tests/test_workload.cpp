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

#include <string>

#include "doctest.h"
#include "workload.hpp"

using namespace upcycle;

namespace {

// Minimal two-layer matmul trace used by the structural tests.
const char* kTinyTrace = R"({
  "version": 1, "name": "tiny", "mode": "inference", "batch": 1,
  "tensors": [
    {"id": "x", "dims": [4, 8], "layout": "rm", "dtype": "int8", "role": "input"},
    {"id": "w0", "dims": [8, 16], "layout": "rm", "dtype": "int8", "role": "weight"},
    {"id": "h", "dims": [4, 16], "layout": "rm", "dtype": "int8", "role": "activation"},
    {"id": "y", "dims": [4, 16], "layout": "rm", "dtype": "int8", "role": "activation"}
  ],
  "nodes": [
    {"id": "mm0", "kind": "MatMul", "params": {"m": 4, "n": 16, "k": 8},
     "inputs": ["x", "w0"], "outputs": ["h"], "dtype": "int8"},
    {"id": "act0", "kind": "Elementwise", "params": {"op": "Relu", "count": 64, "arity": 1},
     "inputs": ["h"], "outputs": ["y"], "dtype": "int8"}
  ]
})";

}  // namespace

TEST_CASE("operator op counts") {
  OperatorNode mm;
  mm.kind = OpKind::MatMul;
  mm.params = MatMulParams{128, 768, 768};
  CHECK(op_count(mm) == 150994944);  // 2 * 128 * 768 * 768

  OperatorNode cv;
  cv.kind = OpKind::Conv2D;
  cv.params = ConvParams{1, 224, 224, 3, 64, 7, 7, 2, 3};
  CHECK(op_count(cv) == 236027904);  // 2 * 112^2 * 64 * 3 * 49

  OperatorNode lstm;
  lstm.kind = OpKind::LstmCell;
  lstm.params = LstmParams{240, 1024};
  // 8*h*(i+h) MACs-as-ops for the gate GEMMs plus 10*h pointwise ops.
  CHECK(op_count(lstm) == 8 * 1024 * (240 + 1024) + 10 * 1024);

  OperatorNode ew;
  ew.kind = OpKind::Elementwise;
  ew.params = ElemwiseParams{"Relu", 1000, 1};
  CHECK(op_count(ew) == 1000);
}

TEST_CASE("conv output geometry") {
  ConvParams p{1, 224, 224, 3, 64, 7, 7, 2, 3};
  CHECK(p.out_h() == 112);
  CHECK(p.out_w() == 112);
}

TEST_CASE("trace parsing and characterization") {
  Trace t = parse_trace(kTinyTrace);
  CHECK(t.name == "tiny");
  CHECK(t.nodes.size() == 2);
  CHECK(t.tensor("w0").role == TensorRole::Weight);
  CHECK(t.tensor("w0").bytes() == 128);
  CharacterizationSummary s = characterize(t);
  CHECK(s.node_count == 2);
  CHECK(s.distinct_shape_count == 2);
  CHECK(s.total_ops == op_count(t.nodes[0]) + op_count(t.nodes[1]));
}

TEST_CASE("parse rejects malformed traces") {
  CHECK_THROWS_AS(parse_trace("{not json"), TraceError);
  CHECK_THROWS_AS(parse_trace("{\"version\": 1}"), TraceError);
  // Unknown node kind.
  std::string bad = kTinyTrace;
  bad.replace(bad.find("MatMul"), 6, "Gather");
  CHECK_THROWS_AS(parse_trace(bad), TraceError);
  // Activation consumed before it is produced.
  std::string cyc = R"({
    "version": 1, "name": "cyc", "mode": "inference", "batch": 1,
    "tensors": [
      {"id": "a", "dims": [4], "layout": "rm", "dtype": "int8", "role": "activation"},
      {"id": "b", "dims": [4], "layout": "rm", "dtype": "int8", "role": "activation"}
    ],
    "nodes": [
      {"id": "n0", "kind": "Elementwise", "params": {"op": "Relu", "count": 4, "arity": 1},
       "inputs": ["b"], "outputs": ["a"], "dtype": "int8"},
      {"id": "n1", "kind": "Elementwise", "params": {"op": "Relu", "count": 4, "arity": 1},
       "inputs": ["a"], "outputs": ["b"], "dtype": "int8"}
    ]
  })";
  CHECK_THROWS_AS(parse_trace(cyc), TraceError);
}

TEST_CASE("load_trace distinguishes io failures") {
  CHECK_THROWS_AS(load_trace("data/traces/no_such_trace.json"), IoError);
}

TEST_CASE("shipped trace census matches published per-sample op counts") {
  struct Row {
    const char* path;
    double gops;
    std::int64_t shapes;
  };
  // Frozen expectations; tolerance covers only floating-point noise, the
  // published-window checks live in the acceptance suite.
  const Row rows[] = {
      {"data/traces/resnet50_inf.json", 7.738, 33},
      {"data/traces/ssd_resnet34_inf.json", 38.133, 43},
      {"data/traces/bert_base_128_inf.json", 22.385, 8},
      {"data/traces/bert_base_384_inf.json", 70.850, 8},
      {"data/traces/bert_large_128_inf.json", 79.021, 8},
      {"data/traces/bert_large_384_inf.json", 246.914, 8},
      {"data/traces/rnnt_inf.json", 12.716, 8},
      {"data/traces/rnnt_train.json", 37.565, 16},
      {"data/traces/alexnet_inf.json", 1.430, 16},
  };
  for (const Row& r : rows) {
    CAPTURE(r.path);
    Trace t = load_trace(r.path);
    CharacterizationSummary s = characterize(t);
    CHECK(s.gops_per_sample == doctest::Approx(r.gops).epsilon(1e-3));
    CHECK(s.distinct_shape_count == r.shapes);
    CHECK(s.primary_op_fraction > 0.99);
  }
}

TEST_CASE("expand_backward emits transposed gradient GEMMs") {
  Trace fwd = parse_trace(kTinyTrace);
  Trace bwd = expand_backward(fwd);
  CHECK(bwd.mode == "training");
  // Forward nodes retained, then dY elementwise grad, then dA and dB GEMMs.
  REQUIRE(bwd.nodes.size() == 5);
  const OperatorNode* da = nullptr;
  const OperatorNode* db = nullptr;
  for (const auto& n : bwd.nodes) {
    if (n.kind != OpKind::MatMul || n.id == "mm0") continue;
    const MatMulParams& p = n.matmul();
    if (p.m == 4 && p.n == 8 && p.k == 16) da = &n;
    if (p.m == 8 && p.n == 16 && p.k == 4) db = &n;
  }
  CHECK(da != nullptr);
  CHECK(db != nullptr);
  for (const auto& n : bwd.nodes) {
    if (n.kind == OpKind::Elementwise && n.id != "act0") {
      CHECK(n.elemwise().op == "ReluGrad");
      CHECK(n.elemwise().arity == 2);
    }
  }
}

TEST_CASE("resnet backward expansion covers every forward node") {
  Trace fwd = load_trace("data/traces/resnet50_inf.json");
  Trace bwd = expand_backward(fwd);
  // Gradient convolutions themselves have no defined derivative.
  CHECK_THROWS_AS(expand_backward(bwd), TraceError);
  CHECK(fwd.nodes.size() == 121);
  CHECK(bwd.nodes.size() == 296);
  std::int64_t fwd_ops = characterize(fwd).total_ops;
  std::int64_t bwd_ops = characterize(bwd).total_ops;
  // Backward roughly triples conv work (forward + dI + dW).
  CHECK(bwd_ops > 2 * fwd_ops);
  CHECK(bwd_ops < 4 * fwd_ops);
}
