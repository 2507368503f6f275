#!/usr/bin/env python3
# Copyright 2026 The Upcycle Simulator Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Generates the shipped operator traces under data/traces/.

Each trace is a plain JSON graph: declared tensors (with roles) plus an
ordered node list in topological order. Run from the repository root:

    python3 scripts/make_traces.py
"""

import json
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "traces")


class TraceBuilder:
    def __init__(self, name, mode="inference", batch=1, dtype="int8", seq_len=None):
        self.name = name
        self.mode = mode
        self.batch = batch
        self.dtype = dtype
        self.seq_len = seq_len
        self.tensors = {}
        self.nodes = []
        self._uid = 0

    def uid(self, prefix):
        self._uid += 1
        return f"{prefix}{self._uid}"

    def tensor(self, tid, dims, role="activation", dtype=None, layout="flat"):
        if tid not in self.tensors:
            self.tensors[tid] = {
                "id": tid,
                "dims": list(dims),
                "layout": layout,
                "dtype": dtype or self.dtype,
                "role": role,
            }
        return tid

    def node(self, kind, params, inputs, outputs, nid=None, dtype=None):
        self.nodes.append({
            "id": nid or self.uid(kind.lower()),
            "kind": kind,
            "params": params,
            "inputs": inputs,
            "outputs": outputs,
            "dtype": dtype or self.dtype,
        })
        return outputs[0] if outputs else None

    def conv(self, x, c, k, h, w, r, s, stride=1, pad=0, nid=None):
        oh = (h + 2 * pad - r) // stride + 1
        ow = (w + 2 * pad - s) // stride + 1
        wt = self.tensor(self.uid("w_conv"), [k, c, r, s], role="weight")
        y = self.tensor(self.uid("act"), [1, k, oh, ow], layout="nchw")
        self.node("Conv2D", {"n": 1, "h": h, "w": w, "c": c, "k": k,
                             "r": r, "s": s, "stride": stride, "pad": pad},
                  [x, wt], [y], nid=nid)
        return y, oh, ow

    def matmul(self, x, m, n, k, nid=None, weight=True, weight_id=None):
        if weight:
            wt = self.tensor(weight_id or self.uid("w_mm"), [k, n], role="weight")
        else:
            wt = None
        y = self.tensor(self.uid("act"), [m, n])
        ins = [x] + ([wt] if wt else [])
        self.node("MatMul", {"m": m, "n": n, "k": k}, ins, [y], nid=nid)
        return y

    def elemwise(self, op, x_list, count, arity=1, nid=None):
        y = self.tensor(self.uid("act"), [count])
        self.node("Elementwise", {"op": op, "count": count, "arity": arity},
                  x_list, [y], nid=nid)
        return y

    def emit(self, path):
        doc = {
            "version": 1,
            "name": self.name,
            "mode": self.mode,
            "batch": self.batch,
            "tensors": list(self.tensors.values()),
            "nodes": self.nodes,
        }
        if self.seq_len is not None:
            doc["seq_len"] = self.seq_len
        with open(path, "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")
        print(f"wrote {path}: {census(doc)}")


def census(doc):
    total = 0
    shapes = set()
    for n in doc["nodes"]:
        p = n["params"]
        k = n["kind"]
        if k == "MatMul":
            ops = 2 * p["m"] * p["n"] * p["k"]
            shapes.add(("MatMul", p["m"], p["n"], p["k"]))
        elif k in ("Conv2D", "Conv2DdI", "Conv2DdW"):
            oh = (p["h"] + 2 * p["pad"] - p["r"]) // p["stride"] + 1
            ow = (p["w"] + 2 * p["pad"] - p["s"]) // p["stride"] + 1
            ops = 2 * p["n"] * p["k"] * oh * ow * p["c"] * p["r"] * p["s"]
            shapes.add((k,) + tuple(sorted(p.items())))
        elif k == "Elementwise":
            ops = p["arity"] * p["count"]
            shapes.add(("E", p["op"], p["count"], p["arity"]))
        elif k == "LstmCell":
            ops = 8 * p["h"] * (p["i"] + p["h"]) + 10 * p["h"]
            shapes.add(("L", p["i"], p["h"]))
        else:
            ops = p["count"]
            shapes.add(("R", p["count"]))
        total += ops
    return (f"{total / doc['batch'] / 1e9:.2f} GOPs/sample, "
            f"{len(shapes)} shapes, {len(doc['nodes'])} nodes")


# ---------------------------------------------------------------- resnet50

def bottleneck(tb, x, h, w, cin, cmid, cout, stride, relu_counts, add_counts):
    """Standard bottleneck; stride applied on the first 1x1 convolution."""
    y, h2, w2 = tb.conv(x, cin, cmid, h, w, 1, 1, stride=stride)
    y = tb.elemwise("Relu", [y], cmid * h2 * w2)
    relu_counts.add(cmid * h2 * w2)
    y, _, _ = tb.conv(y, cmid, cmid, h2, w2, 3, 3, pad=1)
    y = tb.elemwise("Relu", [y], cmid * h2 * w2)
    y, _, _ = tb.conv(y, cmid, cout, h2, w2, 1, 1)
    if cin != cout or stride != 1:
        sc, _, _ = tb.conv(x, cin, cout, h, w, 1, 1, stride=stride)
    else:
        sc = x
    y = tb.elemwise("Add", [y, sc], cout * h2 * w2, arity=2)
    add_counts.add(cout * h2 * w2)
    y = tb.elemwise("Relu", [y], cout * h2 * w2)
    relu_counts.add(cout * h2 * w2)
    return y, h2, w2


def make_resnet50():
    tb = TraceBuilder("resnet50", dtype="int8")
    img = tb.tensor("image", [1, 3, 224, 224], role="input", layout="nchw")
    relu_counts, add_counts = set(), set()
    y, h, w = tb.conv(img, 3, 64, 224, 224, 7, 7, stride=2, pad=3, nid="conv1")
    y = tb.elemwise("Relu", [y], 64 * h * w)
    relu_counts.add(64 * h * w)
    h, w = h // 2, w // 2
    y = tb.elemwise("MaxPool", [y], 64 * h * w, arity=9)
    stages = [(64, 256, 3, 1), (128, 512, 4, 2), (256, 1024, 6, 2), (512, 2048, 3, 2)]
    cin = 64
    for cmid, cout, blocks, first_stride in stages:
        for b in range(blocks):
            stride = first_stride if b == 0 else 1
            y, h, w = bottleneck(tb, y, h, w, cin, cmid, cout, stride,
                                 relu_counts, add_counts)
            cin = cout
    y = tb.elemwise("AvgPool", [y], 2048, arity=49)
    tb.matmul(y, 1, 1000, 2048, nid="fc")
    return tb


# ---------------------------------------------------------------- bert

def make_bert(name, layers, hidden, heads, seq):
    tb = TraceBuilder(name, dtype="int8", seq_len=seq)
    ffn = 4 * hidden
    head_dim = hidden // heads
    x = tb.tensor("embeddings", [seq, hidden], role="input")
    for _ in range(layers):
        q = tb.matmul(x, seq, hidden, hidden)
        k = tb.matmul(x, seq, hidden, hidden)
        v = tb.matmul(x, seq, hidden, hidden)
        # Per-head attention GEMMs batched over heads into the m dimension.
        s = tb.matmul(q, heads * seq, seq, head_dim, weight=False)
        tb.nodes[-1]["inputs"].append(k)
        p = tb.elemwise("Softmax", [s], heads * seq * seq, arity=5)
        ctx = tb.matmul(p, heads * seq, head_dim, seq, weight=False)
        tb.nodes[-1]["inputs"].append(v)
        o = tb.matmul(ctx, seq, hidden, hidden)
        # Residual add folded into the normalization arity.
        x = tb.elemwise("LayerNorm", [o, x], seq * hidden, arity=9)
        f = tb.matmul(x, seq, ffn, hidden)
        f = tb.elemwise("Gelu", [f], seq * ffn)
        f = tb.matmul(f, seq, hidden, ffn)
        x = tb.elemwise("LayerNorm", [f, x], seq * hidden, arity=9)
    return tb


# ---------------------------------------------------------------- ssd

def basic_block(tb, x, h, w, cin, cout, stride, relu_counts, add_counts):
    y, h2, w2 = tb.conv(x, cin, cout, h, w, 3, 3, stride=stride, pad=1)
    y = tb.elemwise("Relu", [y], cout * h2 * w2)
    relu_counts.add(cout * h2 * w2)
    y, _, _ = tb.conv(y, cout, cout, h2, w2, 3, 3, pad=1)
    if cin != cout or stride != 1:
        sc, _, _ = tb.conv(x, cin, cout, h, w, 1, 1, stride=stride)
    else:
        sc = x
    y = tb.elemwise("Add", [y, sc], cout * h2 * w2, arity=2)
    add_counts.add(cout * h2 * w2)
    y = tb.elemwise("Relu", [y], cout * h2 * w2)
    return y, h2, w2


def make_ssd(size=480, classes=81):
    tb = TraceBuilder("ssd_resnet34", dtype="int8")
    img = tb.tensor("image", [1, 3, size, size], role="input", layout="nchw")
    relu_counts, add_counts = set(), set()
    y, h, w = tb.conv(img, 3, 64, size, size, 7, 7, stride=2, pad=3, nid="conv1")
    y = tb.elemwise("Relu", [y], 64 * h * w)
    relu_counts.add(64 * h * w)
    h, w = h // 2, w // 2
    y = tb.elemwise("MaxPool", [y], 64 * h * w, arity=9)
    features = []
    cin = 64
    for cout, blocks, first_stride in [(64, 3, 1), (128, 4, 2), (256, 6, 2), (512, 3, 2)]:
        for b in range(blocks):
            stride = first_stride if b == 0 else 1
            y, h, w = basic_block(tb, y, h, w, cin, cout, stride,
                                  relu_counts, add_counts)
            cin = cout
        if cout in (128, 512):
            features.append((y, cout, h, w))
    # Auxiliary feature pyramid.
    for cmid, cout in [(256, 512), (128, 256), (128, 256)]:
        y, _, _ = tb.conv(y, cin, cmid, h, w, 1, 1)
        y = tb.elemwise("Relu", [y], cmid * h * w)
        relu_counts.add(cmid * h * w)
        y, h, w = tb.conv(y, cmid, cout, h, w, 3, 3, stride=2, pad=1)
        y = tb.elemwise("Relu", [y], cout * h * w)
        relu_counts.add(cout * h * w)
        cin = cout
        features.append((y, cout, h, w))
    # Detection heads: per feature map one confidence and one box regressor.
    anchors = [4, 6, 6, 6, 4]
    for (f, c, fh, fw), a in zip(features, anchors):
        tb.conv(f, c, a * classes, fh, fw, 3, 3, pad=1)
        tb.conv(f, c, a * 4, fh, fw, 3, 3, pad=1)
    return tb


# ---------------------------------------------------------------- rnnt

def lstm_layer(tb, xs, input_dim, hidden, layer_name, step_stride=1):
    """One LSTM layer over a sequence; all steps share the layer weights."""
    wt = tb.tensor(f"w_{layer_name}", [4 * hidden, input_dim + hidden], role="weight")
    hs = []
    for t in range(0, len(xs), step_stride):
        ht = tb.tensor(f"{layer_name}_h{t}", [hidden])
        tb.node("LstmCell", {"i": input_dim, "h": hidden}, [xs[t], wt], [ht],
                nid=f"{layer_name}_t{t}")
        hs.append(ht)
    return hs


def make_rnnt(seq=214, tokens=100):
    tb = TraceBuilder("rnnt", dtype="int8", seq_len=seq)
    xs = [tb.tensor(f"mel{t}", [240], role="input") for t in range(seq)]
    h1 = lstm_layer(tb, xs, 240, 1024, "enc1")
    h2 = lstm_layer(tb, h1, 1024, 1024, "enc2")
    # Time reduction stacks frame pairs; post layers run at half rate.
    h3 = lstm_layer(tb, h2, 2048, 1024, "enc3", step_stride=2)
    h4 = lstm_layer(tb, h3, 1024, 1024, "enc4")
    h5 = lstm_layer(tb, h4, 1024, 1024, "enc5")
    ys = [tb.tensor(f"tok{u}", [320], role="input") for u in range(tokens)]
    p1 = lstm_layer(tb, ys, 320, 320, "pred1")
    p2 = lstm_layer(tb, p1, 320, 320, "pred2")
    # Joint network evaluated along the merged alignment path.
    for i in range(len(h5) + len(p2)):
        src = h5[i] if i < len(h5) else p2[i - len(h5)]
        j = tb.matmul(src, 1, 512, 1024 + 320, nid=f"joint_fc1_{i}",
                      weight_id="w_joint_fc1")
        j = tb.elemwise("Relu", [j], 512, nid=f"joint_relu_{i}")
        j = tb.matmul(j, 1, 29, 512, nid=f"joint_fc2_{i}",
                      weight_id="w_joint_fc2")
        tb.elemwise("Softmax", [j], 29, arity=5, nid=f"joint_sm_{i}")
    return tb


def make_rnnt_train(seq=214, tokens=100):
    """Forward pass plus explicit backward chains and weight-gradient GEMMs."""
    fwd = make_rnnt(seq, tokens)
    tb = fwd
    tb.name = "rnnt_train"
    tb.mode = "training"
    tb.dtype = "fp16"
    for t in tb.tensors.values():
        t["dtype"] = "fp16"
    for n in tb.nodes:
        n["dtype"] = "fp16"
    seed = tb.tensor("g_seed", [1024], role="input", dtype="fp16")
    # Backward hidden chains run in reverse layer order; each consumes the
    # incoming gradient sequence and emits the one for the layer below.
    layer_specs = [("enc5", 1024, 1024, (seq + 1) // 2),
                   ("enc4", 1024, 1024, (seq + 1) // 2),
                   ("enc3", 2048, 1024, (seq + 1) // 2),
                   ("enc2", 1024, 1024, seq),
                   ("enc1", 240, 1024, seq),
                   ("pred2", 320, 320, tokens),
                   ("pred1", 320, 320, tokens)]
    prev = seed
    for name, idim, hdim, steps in layer_specs:
        wt = tb.tensor(f"w_{name}_bwd", [4 * hdim, idim + hdim], role="weight")
        for t in range(steps):
            g = tb.tensor(f"g_{name}_h{t}", [hdim], dtype="fp16")
            tb.node("LstmCell", {"i": idim, "h": hdim}, [prev, wt], [g],
                    nid=f"{name}_bwd_t{t}")
            prev = g
        # Weight gradient: accumulated outer products over the sequence.
        gw = tb.tensor(f"gw_{name}", [4 * hdim, idim + hdim], dtype="fp16")
        tb.node("MatMul", {"m": 4 * hdim, "n": idim + hdim, "k": steps},
                [prev], [gw], nid=f"{name}_dW")
        # Gate nonlinearity gradients.
        tb.elemwise("SigmoidGrad", [prev, g], 4 * hdim * steps, arity=2,
                    nid=f"{name}_dgates")
    return tb


# ---------------------------------------------------------------- alexnet

def make_alexnet():
    tb = TraceBuilder("alexnet", dtype="int8")
    img = tb.tensor("image", [1, 3, 227, 227], role="input", layout="nchw")
    y, h, w = tb.conv(img, 3, 64, 227, 227, 11, 11, stride=4, nid="conv1")
    y = tb.elemwise("Relu", [y], 64 * h * w)
    y = tb.elemwise("MaxPool", [y], 64 * 27 * 27, arity=9)
    y, h, w = tb.conv(y, 64, 192, 27, 27, 5, 5, pad=2, nid="conv2")
    y = tb.elemwise("Relu", [y], 192 * h * w)
    y = tb.elemwise("MaxPool", [y], 192 * 13 * 13, arity=9)
    y, h, w = tb.conv(y, 192, 384, 13, 13, 3, 3, pad=1, nid="conv3")
    y = tb.elemwise("Relu", [y], 384 * h * w)
    y, h, w = tb.conv(y, 384, 256, 13, 13, 3, 3, pad=1, nid="conv4")
    y = tb.elemwise("Relu", [y], 256 * h * w)
    y, h, w = tb.conv(y, 256, 256, 13, 13, 3, 3, pad=1, nid="conv5")
    y = tb.elemwise("Relu", [y], 256 * h * w)
    y = tb.elemwise("MaxPool", [y], 256 * 6 * 6, arity=9)
    y = tb.matmul(y, 1, 4096, 9216, nid="fc6")
    y = tb.elemwise("Relu", [y], 4096)
    y = tb.matmul(y, 1, 4096, 4096, nid="fc7")
    y = tb.elemwise("Relu", [y], 4096)
    tb.matmul(y, 1, 1000, 4096, nid="fc8")
    return tb


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    builders = {
        "resnet50_inf.json": make_resnet50(),
        "ssd_resnet34_inf.json": make_ssd(),
        "bert_base_128_inf.json": make_bert("bert_base_128", 12, 768, 12, 128),
        "bert_base_384_inf.json": make_bert("bert_base_384", 12, 768, 12, 384),
        "bert_large_128_inf.json": make_bert("bert_large_128", 24, 1024, 16, 128),
        "bert_large_384_inf.json": make_bert("bert_large_384", 24, 1024, 16, 384),
        "rnnt_inf.json": make_rnnt(),
        "rnnt_train.json": make_rnnt_train(),
        "alexnet_inf.json": make_alexnet(),
    }
    for fname, tb in builders.items():
        tb.emit(os.path.join(OUT_DIR, fname))


if __name__ == "__main__":
    main()
