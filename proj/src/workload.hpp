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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "arch.hpp"

namespace upcycle {

enum class TensorRole { Activation, Weight, Input };

struct TensorSpec {
  std::string id;
  std::vector<std::int64_t> dims;
  std::string layout;
  DataType dtype;
  TensorRole role = TensorRole::Activation;

  std::int64_t elem_count() const {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
  std::int64_t bytes() const { return elem_count() * dtype.input_bytes(); }
};

struct MatMulParams {
  std::int64_t m = 1, n = 1, k = 1;
};

struct ConvParams {
  std::int64_t n = 1, h = 1, w = 1, c = 1, k = 1, r = 1, s = 1;
  std::int64_t stride = 1, pad = 0;

  std::int64_t out_h() const { return (h + 2 * pad - r) / stride + 1; }
  std::int64_t out_w() const { return (w + 2 * pad - s) / stride + 1; }
};

struct ElemwiseParams {
  std::string op;
  std::int64_t count = 0;
  int arity = 1;
};

struct LstmParams {
  std::int64_t input_dim = 1, hidden_dim = 1;
};

struct RequantizeParams {
  std::int64_t count = 0;
};

enum class OpKind { MatMul, Conv2D, Conv2DdI, Conv2DdW, Elementwise, LstmCell, Requantize };

std::string op_kind_name(OpKind k);

using OpParams =
    std::variant<MatMulParams, ConvParams, ElemwiseParams, LstmParams, RequantizeParams>;

struct OperatorNode {
  std::string id;
  OpKind kind = OpKind::Elementwise;
  OpParams params;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  DataType dtype;

  const MatMulParams& matmul() const { return std::get<MatMulParams>(params); }
  const ConvParams& conv() const { return std::get<ConvParams>(params); }
  const ElemwiseParams& elemwise() const { return std::get<ElemwiseParams>(params); }
  const LstmParams& lstm() const { return std::get<LstmParams>(params); }
};

struct Trace {
  std::string name;
  std::string mode = "inference";  // inference | training | pretrain | finetune
  std::int64_t batch = 1;
  std::optional<std::int64_t> seq_len;
  std::vector<OperatorNode> nodes;
  std::map<std::string, TensorSpec> tensors;

  const TensorSpec& tensor(const std::string& id) const;
};

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Multiply and add counted separately: one MAC = 2 ops.
std::int64_t op_count(const OperatorNode& node);

// Stable identity of an operator shape: (kind, parameter tuple).
std::string shape_key(const OperatorNode& node);

bool is_primary(const OperatorNode& node);

struct CharacterizationSummary {
  double gops_per_sample = 0;
  std::int64_t distinct_shape_count = 0;
  double primary_op_fraction = 0;
  std::int64_t total_ops = 0;
  std::int64_t node_count = 0;
};

CharacterizationSummary characterize(const Trace& trace);

Trace load_trace(const std::string& path);
Trace parse_trace(const std::string& json_text, const std::string& origin = "<string>");

// Appends backward counterparts of every node in reverse topological order.
Trace expand_backward(const Trace& forward);

}  // namespace upcycle
