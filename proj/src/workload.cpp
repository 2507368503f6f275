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

#include "workload.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace upcycle {

using json = nlohmann::json;

std::string op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::MatMul: return "MatMul";
    case OpKind::Conv2D: return "Conv2D";
    case OpKind::Conv2DdI: return "Conv2DdI";
    case OpKind::Conv2DdW: return "Conv2DdW";
    case OpKind::Elementwise: return "Elementwise";
    case OpKind::LstmCell: return "LstmCell";
    case OpKind::Requantize: return "Requantize";
  }
  return "?";
}

static OpKind parse_kind(const std::string& s) {
  if (s == "MatMul") return OpKind::MatMul;
  if (s == "Conv2D") return OpKind::Conv2D;
  if (s == "Conv2DdI") return OpKind::Conv2DdI;
  if (s == "Conv2DdW") return OpKind::Conv2DdW;
  if (s == "Elementwise") return OpKind::Elementwise;
  if (s == "LstmCell") return OpKind::LstmCell;
  if (s == "Requantize") return OpKind::Requantize;
  throw TraceError("unknown operator kind: " + s);
}

const TensorSpec& Trace::tensor(const std::string& id) const {
  auto it = tensors.find(id);
  if (it == tensors.end()) throw TraceError("dangling tensor reference: " + id);
  return it->second;
}

std::int64_t op_count(const OperatorNode& node) {
  switch (node.kind) {
    case OpKind::MatMul: {
      const auto& p = node.matmul();
      return 2 * p.m * p.n * p.k;
    }
    case OpKind::Conv2D:
    case OpKind::Conv2DdI:
    case OpKind::Conv2DdW: {
      const auto& p = node.conv();
      return 2 * p.n * p.k * p.out_h() * p.out_w() * p.c * p.r * p.s;
    }
    case OpKind::Elementwise: {
      const auto& p = node.elemwise();
      return static_cast<std::int64_t>(p.arity) * p.count;
    }
    case OpKind::LstmCell: {
      const auto& p = node.lstm();
      // Four gate GEMVs plus the pointwise gate math.
      return 8 * p.hidden_dim * (p.input_dim + p.hidden_dim) + 10 * p.hidden_dim;
    }
    case OpKind::Requantize: {
      return std::get<RequantizeParams>(node.params).count;
    }
  }
  return 0;
}

std::string shape_key(const OperatorNode& node) {
  std::ostringstream os;
  os << op_kind_name(node.kind) << '/';
  switch (node.kind) {
    case OpKind::MatMul: {
      const auto& p = node.matmul();
      os << p.m << 'x' << p.n << 'x' << p.k;
      break;
    }
    case OpKind::Conv2D:
    case OpKind::Conv2DdI:
    case OpKind::Conv2DdW: {
      const auto& p = node.conv();
      os << p.n << ',' << p.h << ',' << p.w << ',' << p.c << ',' << p.k << ','
         << p.r << ',' << p.s << ",s" << p.stride << ",p" << p.pad;
      break;
    }
    case OpKind::Elementwise: {
      const auto& p = node.elemwise();
      os << p.op << ',' << p.count << ',' << p.arity;
      break;
    }
    case OpKind::LstmCell: {
      const auto& p = node.lstm();
      os << p.input_dim << ',' << p.hidden_dim;
      break;
    }
    case OpKind::Requantize: {
      os << std::get<RequantizeParams>(node.params).count;
      break;
    }
  }
  return os.str();
}

static const std::set<std::string> kPrimaryElemwise = {
    "Relu",  "Tanh",  "Sigmoid",  "Gelu",
    "ReluGrad", "TanhGrad", "SigmoidGrad", "GeluGrad"};

bool is_primary(const OperatorNode& node) {
  switch (node.kind) {
    case OpKind::MatMul:
    case OpKind::Conv2D:
    case OpKind::Conv2DdI:
    case OpKind::Conv2DdW:
    case OpKind::LstmCell:
      return true;
    case OpKind::Elementwise:
      return kPrimaryElemwise.count(node.elemwise().op) > 0;
    case OpKind::Requantize:
      return false;
  }
  return false;
}

CharacterizationSummary characterize(const Trace& trace) {
  CharacterizationSummary s;
  std::set<std::string> shapes;
  std::int64_t primary_ops = 0;
  for (const auto& node : trace.nodes) {
    std::int64_t ops = op_count(node);
    s.total_ops += ops;
    if (is_primary(node)) primary_ops += ops;
    shapes.insert(shape_key(node));
  }
  s.node_count = static_cast<std::int64_t>(trace.nodes.size());
  s.distinct_shape_count = static_cast<std::int64_t>(shapes.size());
  s.gops_per_sample = static_cast<double>(s.total_ops) / trace.batch / 1e9;
  s.primary_op_fraction = s.total_ops > 0 ? static_cast<double>(primary_ops) / s.total_ops : 0.0;
  return s;
}

static std::int64_t geti(const json& j, const char* key) {
  if (!j.contains(key)) throw TraceError(std::string("missing param: ") + key);
  return j.at(key).get<std::int64_t>();
}

static OpParams parse_params(OpKind kind, const json& p) {
  switch (kind) {
    case OpKind::MatMul:
      return MatMulParams{geti(p, "m"), geti(p, "n"), geti(p, "k")};
    case OpKind::Conv2D:
    case OpKind::Conv2DdI:
    case OpKind::Conv2DdW: {
      ConvParams c{geti(p, "n"), geti(p, "h"), geti(p, "w"), geti(p, "c"),
                   geti(p, "k"), geti(p, "r"), geti(p, "s"),
                   geti(p, "stride"), geti(p, "pad")};
      if (c.out_h() < 1 || c.out_w() < 1)
        throw TraceError("conv output extent underflows");
      return c;
    }
    case OpKind::Elementwise:
      return ElemwiseParams{p.at("op").get<std::string>(), geti(p, "count"),
                            static_cast<int>(geti(p, "arity"))};
    case OpKind::LstmCell:
      return LstmParams{geti(p, "i"), geti(p, "h")};
    case OpKind::Requantize:
      return RequantizeParams{geti(p, "count")};
  }
  throw TraceError("unreachable");
}

Trace parse_trace(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw TraceError(origin + ": malformed trace: " + e.what());
  }
  try {
    if (!j.contains("version")) throw TraceError("missing version field");
    Trace t;
    t.name = j.at("name").get<std::string>();
    t.mode = j.at("mode").get<std::string>();
    t.batch = j.at("batch").get<std::int64_t>();
    if (j.contains("seq_len") && !j.at("seq_len").is_null())
      t.seq_len = j.at("seq_len").get<std::int64_t>();
    for (const auto& tj : j.at("tensors")) {
      TensorSpec ts;
      ts.id = tj.at("id").get<std::string>();
      ts.dims = tj.at("dims").get<std::vector<std::int64_t>>();
      ts.layout = tj.value("layout", "flat");
      ts.dtype = parse_dtype(tj.value("dtype", "int8"));
      std::string role = tj.value("role", "activation");
      ts.role = role == "weight" ? TensorRole::Weight
              : role == "input"  ? TensorRole::Input
                                 : TensorRole::Activation;
      for (auto d : ts.dims)
        if (d < 1) throw TraceError("tensor " + ts.id + " has non-positive extent");
      t.tensors[ts.id] = ts;
    }
    // Topological check: an activation may only be consumed after its producer.
    std::set<std::string> produced;
    for (const auto& nj : j.at("nodes")) {
      OperatorNode n;
      n.id = nj.at("id").get<std::string>();
      n.kind = parse_kind(nj.at("kind").get<std::string>());
      n.params = parse_params(n.kind, nj.at("params"));
      n.inputs = nj.value("inputs", std::vector<std::string>{});
      n.outputs = nj.value("outputs", std::vector<std::string>{});
      n.dtype = parse_dtype(nj.value("dtype", "int8"));
      for (const auto& in : n.inputs) {
        auto it = t.tensors.find(in);
        if (it == t.tensors.end())
          throw TraceError("node " + n.id + " consumes undeclared tensor " + in);
        if (it->second.role == TensorRole::Activation && !produced.count(in))
          throw TraceError("node " + n.id + " consumes tensor " + in +
                           " before it is produced (non-topological order)");
      }
      for (const auto& out : n.outputs) {
        if (!t.tensors.count(out))
          throw TraceError("node " + n.id + " produces undeclared tensor " + out);
        produced.insert(out);
      }
      if (op_count(n) <= 0) throw TraceError("node " + n.id + " has zero op count");
      t.nodes.push_back(std::move(n));
    }
    return t;
  } catch (const json::exception& e) {
    throw TraceError(origin + ": malformed trace: " + e.what());
  }
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str(), path);
}

static TensorSpec grad_of(const TensorSpec& t) {
  TensorSpec g = t;
  g.id = "g_" + t.id;
  g.role = TensorRole::Activation;
  return g;
}

static void ensure_grad(Trace& t, const std::string& id) {
  std::string gid = "g_" + id;
  if (!t.tensors.count(gid)) t.tensors[gid] = grad_of(t.tensor(id));
}

Trace expand_backward(const Trace& forward) {
  Trace t = forward;
  t.mode = "training";
  int idx = 0;
  for (auto it = forward.nodes.rbegin(); it != forward.nodes.rend(); ++it, ++idx) {
    const OperatorNode& f = *it;
    std::string suffix = "_bwd" + std::to_string(idx);
    auto out_grad = [&](int i) {
      ensure_grad(t, f.outputs.at(i));
      return "g_" + f.outputs.at(i);
    };
    auto in_grad = [&](int i) {
      ensure_grad(t, f.inputs.at(i));
      return "g_" + f.inputs.at(i);
    };
    switch (f.kind) {
      case OpKind::Conv2D: {
        OperatorNode di = f;
        di.id = f.id + "_dI" + suffix;
        di.kind = OpKind::Conv2DdI;
        di.inputs = {out_grad(0), f.inputs.size() > 1 ? f.inputs[1] : f.inputs[0]};
        di.outputs = {in_grad(0)};
        OperatorNode dw = f;
        dw.id = f.id + "_dW" + suffix;
        dw.kind = OpKind::Conv2DdW;
        dw.inputs = {out_grad(0), f.inputs[0]};
        ensure_grad(t, f.inputs.size() > 1 ? f.inputs[1] : f.inputs[0]);
        dw.outputs = {"g_" + (f.inputs.size() > 1 ? f.inputs[1] : f.inputs[0])};
        t.nodes.push_back(di);
        t.nodes.push_back(dw);
        break;
      }
      case OpKind::MatMul: {
        const auto& p = f.matmul();
        // dA = dY * B^T, dB = A^T * dY
        OperatorNode da = f;
        da.id = f.id + "_dA" + suffix;
        da.params = MatMulParams{p.m, p.k, p.n};
        da.inputs = {out_grad(0), f.inputs.size() > 1 ? f.inputs[1] : f.inputs[0]};
        da.outputs = {in_grad(0)};
        OperatorNode db = f;
        db.id = f.id + "_dB" + suffix;
        db.params = MatMulParams{p.k, p.n, p.m};
        db.inputs = {f.inputs[0], out_grad(0)};
        ensure_grad(t, f.inputs.size() > 1 ? f.inputs[1] : f.inputs[0]);
        db.outputs = {"g_" + (f.inputs.size() > 1 ? f.inputs[1] : f.inputs[0])};
        t.nodes.push_back(da);
        t.nodes.push_back(db);
        break;
      }
      case OpKind::Elementwise: {
        const auto& p = f.elemwise();
        OperatorNode g = f;
        g.id = f.id + "_grad" + suffix;
        // Gradient needs the original computed output plus the output gradient.
        g.params = ElemwiseParams{p.op + "Grad", p.count, 2};
        g.inputs = {f.outputs.at(0), out_grad(0)};
        g.outputs = {in_grad(0)};
        t.nodes.push_back(g);
        break;
      }
      case OpKind::LstmCell: {
        // Backward chain step (dgates) plus the input/weight gradient GEMMs.
        OperatorNode chain = f;
        chain.id = f.id + "_dH" + suffix;
        chain.inputs = {out_grad(0)};
        chain.outputs = {in_grad(0)};
        OperatorNode dwx = f;
        dwx.id = f.id + "_dWx" + suffix;
        dwx.inputs = {out_grad(0), f.inputs[0]};
        dwx.outputs = {in_grad(0)};
        t.nodes.push_back(chain);
        t.nodes.push_back(dwx);
        break;
      }
      case OpKind::Conv2DdI:
      case OpKind::Conv2DdW:
      case OpKind::Requantize:
        throw TraceError("unsupported kind for differentiation: " + op_kind_name(f.kind));
    }
  }
  return t;
}

}  // namespace upcycle
