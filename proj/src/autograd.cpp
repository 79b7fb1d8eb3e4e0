// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "sglab/kernels.hpp"

namespace sglab {

Tape::NodeId Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::accum(NodeId id, const Tensor& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.needs_grad) return;
  if (n.grad.data.empty()) {
    n.grad = g;
    return;
  }
  for (std::int64_t i = 0; i < g.numel(); ++i) {
    n.grad.data[static_cast<std::size_t>(i)] += g.data[static_cast<std::size_t>(i)];
  }
}

void Tape::accum_flat(NodeId id, const std::vector<double>& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.needs_grad) return;
  if (n.grad.data.empty()) {
    n.grad = Tensor(n.value.shape, g);
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad.data[i] += g[i];
}

Tensor Tape::grad(NodeId id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.data.empty()) return Tensor::zeros(n.value.shape);
  return n.grad;
}

Tape::NodeId Tape::constant(Tensor v) { return push(std::move(v), false); }

Tape::NodeId Tape::input(Tensor v) { return push(std::move(v), true); }

Tape::NodeId Tape::param(Param& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return it->second;
  NodeId id = push(p.value, true);
  nodes_[static_cast<std::size_t>(id)].bound = &p;
  param_nodes_.emplace(&p, id);
  return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  Tensor y = ew_add(value(a), value(b));
  bool ng = needs(a) || needs(b);
  std::vector<int> bshape = value(b).shape;
  NodeId id = push(std::move(y), ng);
  nodes_[static_cast<std::size_t>(id)].back = [id, a, b, bshape](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    t.accum(a, g);
    if (t.needs(b)) t.accum(b, reduce_to_shape(g, bshape));
  };
  return id;
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  Tensor y = ew_sub(value(a), value(b));
  bool ng = needs(a) || needs(b);
  std::vector<int> bshape = value(b).shape;
  NodeId id = push(std::move(y), ng);
  nodes_[static_cast<std::size_t>(id)].back = [id, a, b, bshape](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    t.accum(a, g);
    if (t.needs(b)) {
      Tensor gb = reduce_to_shape(g, bshape);
      for (double& v : gb.data) v = -v;
      t.accum(b, gb);
    }
  };
  return id;
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  Tensor y = ew_mul(value(a), value(b));
  bool ng = needs(a) || needs(b);
  std::vector<int> bshape = value(b).shape;
  NodeId id = push(std::move(y), ng);
  nodes_[static_cast<std::size_t>(id)].back = [id, a, b, bshape](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    if (t.needs(a)) t.accum(a, ew_mul(g, t.value(b)));
    if (t.needs(b)) t.accum(b, reduce_to_shape(ew_mul(g, t.value(a)), bshape));
  };
  return id;
}

Tape::NodeId Tape::scale(NodeId x, double s) {
  Tensor y = value(x);
  for (double& v : y.data) v *= s;
  NodeId id = push(std::move(y), needs(x));
  nodes_[static_cast<std::size_t>(id)].back = [id, x, s](Tape& t) {
    Tensor g = t.grad_ref(id);
    for (double& v : g.data) v *= s;
    t.accum(x, g);
  };
  return id;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  Tensor y = sglab::matmul(value(a), value(b));
  NodeId id = push(std::move(y), needs(a) || needs(b));
  nodes_[static_cast<std::size_t>(id)].back = [id, a, b](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    if (t.needs(a)) {
      Tensor da = Tensor::zeros(av.shape);  // dA = dY · Bᵀ
      kernels::matmul_nt(g.data.data(), bv.data.data(), da.data.data(), m, n, k);
      t.accum(a, da);
    }
    if (t.needs(b)) {
      Tensor db = Tensor::zeros(bv.shape);  // dB = Aᵀ · dY
      kernels::matmul_tn(av.data.data(), g.data.data(), db.data.data(), k, m, n);
      t.accum(b, db);
    }
  };
  return id;
}

Tape::NodeId Tape::linear(NodeId x, NodeId w, NodeId bias) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  if (wv.rank() != 2) throw TensorError("linear: weight must be [out,in]");
  bool vec = xv.rank() == 1;
  int n = vec ? 1 : xv.dim(0);
  int in = vec ? xv.dim(0) : xv.dim(1);
  int out = wv.dim(0);
  if (wv.dim(1) != in) {
    throw TensorError("linear: input width " + std::to_string(in) + " vs weight " +
                      shape_str(wv.shape));
  }
  Tensor y = vec ? Tensor::zeros({out}) : Tensor::zeros({n, out});
  kernels::matmul_nt(xv.data.data(), wv.data.data(), y.data.data(), n, in, out);
  if (bias != kNone) {
    const Tensor& bv = value(bias);
    if (bv.numel() != out) throw TensorError("linear: bias size mismatch");
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < out; ++c) {
        y.data[static_cast<std::size_t>(r) * out + c] += bv.data[static_cast<std::size_t>(c)];
      }
    }
  }
  bool ng = needs(x) || needs(w) || (bias != kNone && needs(bias));
  NodeId id = push(std::move(y), ng);
  nodes_[static_cast<std::size_t>(id)].back = [id, x, w, bias, n, in, out](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    if (t.needs(x)) {
      Tensor dx = Tensor::zeros(t.value(x).shape);  // dX = dY · W
      kernels::matmul(g.data.data(), t.value(w).data.data(), dx.data.data(), n, out, in);
      t.accum(x, dx);
    }
    if (t.needs(w)) {
      Tensor dw = Tensor::zeros(t.value(w).shape);  // dW = dYᵀ · X
      kernels::matmul_tn(g.data.data(), t.value(x).data.data(), dw.data.data(), out, n, in);
      t.accum(w, dw);
    }
    if (bias != Tape::kNone && t.needs(bias)) {
      std::vector<double> db(static_cast<std::size_t>(out), 0.0);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < out; ++c) {
          db[static_cast<std::size_t>(c)] += g.data[static_cast<std::size_t>(r) * out + c];
        }
      }
      t.accum_flat(bias, db);
    }
  };
  return id;
}

Tape::NodeId Tape::relu(NodeId x) {
  Tensor y = sglab::relu(value(x));
  NodeId id = push(std::move(y), needs(x));
  nodes_[static_cast<std::size_t>(id)].back = [id, x](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    const Tensor& xv = t.value(x);
    Tensor dx = Tensor::zeros(xv.shape);
    for (std::int64_t i = 0; i < xv.numel(); ++i) {
      dx.data[static_cast<std::size_t>(i)] =
          xv.data[static_cast<std::size_t>(i)] > 0.0 ? g.data[static_cast<std::size_t>(i)] : 0.0;
    }
    t.accum(x, dx);
  };
  return id;
}

Tape::NodeId Tape::sigmoid(NodeId x) {
  Tensor y = sglab::sigmoid(value(x));
  NodeId id = push(std::move(y), needs(x));
  nodes_[static_cast<std::size_t>(id)].back = [id, x](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    const Tensor& yv = t.value(id);
    Tensor dx = Tensor::zeros(yv.shape);
    for (std::int64_t i = 0; i < yv.numel(); ++i) {
      double s = yv.data[static_cast<std::size_t>(i)];
      dx.data[static_cast<std::size_t>(i)] = g.data[static_cast<std::size_t>(i)] * s * (1.0 - s);
    }
    t.accum(x, dx);
  };
  return id;
}

Tape::NodeId Tape::softmax_lastdim(NodeId x) {
  Tensor y = sglab::softmax_lastdim(value(x));
  NodeId id = push(std::move(y), needs(x));
  nodes_[static_cast<std::size_t>(id)].back = [id, x](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    const Tensor& yv = t.value(id);
    int cols = yv.dim(yv.rank() - 1);
    std::int64_t rows = yv.numel() / cols;
    Tensor dx = Tensor::zeros(yv.shape);
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* yr = yv.data.data() + r * cols;
      const double* gr = g.data.data() + r * cols;
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += yr[c] * gr[c];
      double* dr = dx.data.data() + r * cols;
      for (int c = 0; c < cols; ++c) dr[c] = yr[c] * (gr[c] - dot);
    }
    t.accum(x, dx);
  };
  return id;
}

Tape::NodeId Tape::cross_entropy(NodeId logits, std::vector<int> labels) {
  const Tensor& lv = value(logits);
  double loss = sglab::cross_entropy(lv, labels);
  Tensor probs = sglab::softmax_lastdim(lv);
  NodeId id = push(Tensor::scalar(loss), needs(logits));
  nodes_[static_cast<std::size_t>(id)].back = [id, logits, labels = std::move(labels),
                                               probs = std::move(probs)](Tape& t) {
    double g = t.grad_ref(id).data[0];
    int n = probs.dim(0), k = probs.dim(1);
    Tensor dl = probs;
    for (int r = 0; r < n; ++r) {
      dl.data[static_cast<std::size_t>(r) * k + labels[static_cast<std::size_t>(r)]] -= 1.0;
    }
    double s = g / n;
    for (double& v : dl.data) v *= s;
    t.accum(logits, dl);
  };
  return id;
}

Tape::NodeId Tape::conv2d(NodeId x, NodeId w, NodeId bias, int stride, int pad) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  if (xv.rank() != 3 || wv.rank() != 4) {
    throw TensorError("conv2d: expected x [cin,h,w] and w [cout,cin,k,k]");
  }
  int cin = xv.dim(0), h = xv.dim(1), wd = xv.dim(2);
  int cout = wv.dim(0), ksz = wv.dim(2);
  if (wv.dim(1) != cin || wv.dim(3) != ksz) {
    throw TensorError("conv2d: weight shape " + shape_str(wv.shape) +
                      " incompatible with input " + shape_str(xv.shape));
  }
  int hout = conv_out_dim(h, ksz, stride, pad);
  int wout = conv_out_dim(wd, ksz, stride, pad);
  if (hout <= 0 || wout <= 0) throw TensorError("conv2d: empty output");
  Tensor y = Tensor::zeros({cout, hout, wout});
  const double* bptr = bias != kNone ? value(bias).data.data() : nullptr;
  kernels::conv2d_forward(xv.data.data(), wv.data.data(), bptr, y.data.data(), cin, h, wd, cout,
                          ksz, stride, pad);
  bool ng = needs(x) || needs(w) || (bias != kNone && needs(bias));
  NodeId id = push(std::move(y), ng);
  nodes_[static_cast<std::size_t>(id)].back = [id, x, w, bias, cin, h, wd, cout, ksz, stride,
                                               pad](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    if (t.needs(x)) {
      Tensor dx = Tensor::zeros(t.value(x).shape);
      kernels::conv2d_backward_input(g.data.data(), t.value(w).data.data(), dx.data.data(), cin,
                                     h, wd, cout, ksz, stride, pad);
      t.accum(x, dx);
    }
    bool need_w = t.needs(w);
    bool need_b = bias != Tape::kNone && t.needs(bias);
    if (need_w || need_b) {
      Tensor dw = Tensor::zeros(t.value(w).shape);
      Tensor db = Tensor::zeros({cout});
      kernels::conv2d_backward_params(g.data.data(), t.value(x).data.data(), dw.data.data(),
                                      db.data.data(), cin, h, wd, cout, ksz, stride, pad);
      if (need_w) t.accum(w, dw);
      if (need_b) t.accum(bias, db);
    }
  };
  return id;
}

Tape::NodeId Tape::instance_norm(NodeId x, double eps) {
  const Tensor& xv = value(x);
  if (xv.rank() != 3) throw TensorError("instance_norm: expected [c,h,w]");
  int c = xv.dim(0);
  int hw = xv.dim(1) * xv.dim(2);
  Tensor y = Tensor::zeros(xv.shape);
  std::vector<double> mean(static_cast<std::size_t>(c)), inv_std(static_cast<std::size_t>(c));
  kernels::instance_norm_forward(xv.data.data(), y.data.data(), mean.data(), inv_std.data(), c,
                                 hw, eps);
  NodeId id = push(std::move(y), needs(x));
  nodes_[static_cast<std::size_t>(id)].back = [id, x, c, hw,
                                               inv_std = std::move(inv_std)](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    const Tensor& yv = t.value(id);
    Tensor dx = Tensor::zeros(yv.shape);
    kernels::instance_norm_backward(g.data.data(), yv.data.data(), inv_std.data(),
                                    dx.data.data(), c, hw);
    t.accum(x, dx);
  };
  return id;
}

Tape::NodeId Tape::roi_rows(NodeId fmap, const std::vector<BoxN>& boxes) {
  const Tensor& fv = value(fmap);
  if (fv.rank() != 3) throw TensorError("roi_rows: expected [c,h,w]");
  int c = fv.dim(0), h = fv.dim(1), w = fv.dim(2);
  int hw = h * w;
  int n = static_cast<int>(boxes.size());
  std::vector<std::vector<int>> cells(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) cells[i] = roi_cells(boxes[i], h, w);
  Tensor y = Tensor::zeros({n, c});
  for (int r = 0; r < n; ++r) {
    const auto& cs = cells[static_cast<std::size_t>(r)];
    double inv = 1.0 / static_cast<double>(cs.size());
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int cell : cs) acc += fv.data[static_cast<std::size_t>(ch) * hw + cell];
      y.at(r, ch) = acc * inv;
    }
  }
  NodeId id = push(std::move(y), needs(fmap));
  nodes_[static_cast<std::size_t>(id)].back = [id, fmap, c, hw, n,
                                               cells = std::move(cells)](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    Tensor df = Tensor::zeros(t.value(fmap).shape);
    for (int r = 0; r < n; ++r) {
      const auto& cs = cells[static_cast<std::size_t>(r)];
      double inv = 1.0 / static_cast<double>(cs.size());
      for (int ch = 0; ch < c; ++ch) {
        double gv = g.at(r, ch) * inv;
        for (int cell : cs) df.data[static_cast<std::size_t>(ch) * hw + cell] += gv;
      }
    }
    t.accum(fmap, df);
  };
  return id;
}

Tape::NodeId Tape::embed_rows(NodeId table, std::vector<int> ids) {
  const Tensor& tv = value(table);
  if (tv.rank() != 2) throw TensorError("embed_rows: table must be [rows,e]");
  int e = tv.dim(1);
  int n = static_cast<int>(ids.size());
  for (int idx : ids) {
    if (idx < 0 || idx >= tv.dim(0)) {
      throw TensorError("embed_rows: id " + std::to_string(idx) + " out of range [0," +
                        std::to_string(tv.dim(0)) + ")");
    }
  }
  Tensor y = Tensor::zeros({n, e});
  for (int r = 0; r < n; ++r) {
    const double* src = tv.data.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(r)]) * e;
    std::copy(src, src + e, y.data.data() + static_cast<std::size_t>(r) * e);
  }
  NodeId id = push(std::move(y), needs(table));
  nodes_[static_cast<std::size_t>(id)].back = [id, table, e, n, ids = std::move(ids)](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    Tensor dt = Tensor::zeros(t.value(table).shape);
    for (int r = 0; r < n; ++r) {
      double* dst = dt.data.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(r)]) * e;
      const double* src = g.data.data() + static_cast<std::size_t>(r) * e;
      for (int c = 0; c < e; ++c) dst[c] += src[c];
    }
    t.accum(table, dt);
  };
  return id;
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw TensorError("concat_cols: no parts");
  int rows = value(parts[0]).dim(0);
  int total = 0;
  bool ng = false;
  std::vector<int> widths;
  for (NodeId p : parts) {
    const Tensor& pv = value(p);
    if (pv.rank() != 2 || pv.dim(0) != rows) {
      throw TensorError("concat_cols: parts must be rank-2 with equal rows");
    }
    widths.push_back(pv.dim(1));
    total += pv.dim(1);
    ng = ng || needs(p);
  }
  Tensor y = Tensor::zeros({rows, total});
  int off = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& pv = value(parts[i]);
    int w = widths[i];
    for (int r = 0; r < rows; ++r) {
      std::copy(pv.data.data() + static_cast<std::size_t>(r) * w,
                pv.data.data() + static_cast<std::size_t>(r) * w + w,
                y.data.data() + static_cast<std::size_t>(r) * total + off);
    }
    off += w;
  }
  NodeId id = push(std::move(y), ng);
  nodes_[static_cast<std::size_t>(id)].back = [id, parts, widths, rows, total](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    int off2 = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      int w = widths[i];
      if (t.needs(parts[i])) {
        Tensor dp = Tensor::zeros({rows, w});
        for (int r = 0; r < rows; ++r) {
          std::copy(g.data.data() + static_cast<std::size_t>(r) * total + off2,
                    g.data.data() + static_cast<std::size_t>(r) * total + off2 + w,
                    dp.data.data() + static_cast<std::size_t>(r) * w);
        }
        t.accum(parts[i], dp);
      }
      off2 += w;
    }
  };
  return id;
}

Tape::NodeId Tape::pair_concat(NodeId obj_rows, NodeId union_rows,
                               const std::vector<std::pair<int, int>>& pairs) {
  const Tensor& ov = value(obj_rows);
  const Tensor& uv = value(union_rows);
  if (ov.rank() != 2 || uv.rank() != 2) throw TensorError("pair_concat: rank-2 inputs required");
  int m = static_cast<int>(pairs.size());
  if (uv.dim(0) != m) throw TensorError("pair_concat: union row count != pair count");
  int d = ov.dim(1), c = uv.dim(1);
  int total = 2 * d + c;
  Tensor y = Tensor::zeros({m, total});
  for (int r = 0; r < m; ++r) {
    auto [i, j] = pairs[static_cast<std::size_t>(r)];
    double* dst = y.data.data() + static_cast<std::size_t>(r) * total;
    std::copy(ov.data.data() + static_cast<std::size_t>(i) * d,
              ov.data.data() + static_cast<std::size_t>(i) * d + d, dst);
    std::copy(uv.data.data() + static_cast<std::size_t>(r) * c,
              uv.data.data() + static_cast<std::size_t>(r) * c + c, dst + d);
    std::copy(ov.data.data() + static_cast<std::size_t>(j) * d,
              ov.data.data() + static_cast<std::size_t>(j) * d + d, dst + d + c);
  }
  NodeId id = push(std::move(y), needs(obj_rows) || needs(union_rows));
  nodes_[static_cast<std::size_t>(id)].back = [id, obj_rows, union_rows, pairs, m, d, c,
                                               total](Tape& t) {
    const Tensor& g = t.grad_ref(id);
    if (t.needs(obj_rows)) {
      Tensor dob = Tensor::zeros(t.value(obj_rows).shape);
      for (int r = 0; r < m; ++r) {
        auto [i, j] = pairs[static_cast<std::size_t>(r)];
        const double* src = g.data.data() + static_cast<std::size_t>(r) * total;
        for (int k = 0; k < d; ++k) {
          dob.data[static_cast<std::size_t>(i) * d + k] += src[k];
          dob.data[static_cast<std::size_t>(j) * d + k] += src[d + c + k];
        }
      }
      t.accum(obj_rows, dob);
    }
    if (t.needs(union_rows)) {
      Tensor dun = Tensor::zeros(t.value(union_rows).shape);
      for (int r = 0; r < m; ++r) {
        const double* src = g.data.data() + static_cast<std::size_t>(r) * total + d;
        for (int k = 0; k < c; ++k) dun.data[static_cast<std::size_t>(r) * c + k] += src[k];
      }
      t.accum(union_rows, dun);
    }
  };
  return id;
}

Tape::NodeId Tape::reshape(NodeId x, std::vector<int> shape) {
  const Tensor& xv = value(x);
  if (shape_numel(shape) != xv.numel()) {
    throw TensorError("reshape: element count mismatch " + shape_str(xv.shape) + " -> " +
                      shape_str(shape));
  }
  Tensor y(shape, xv.data);
  NodeId id = push(std::move(y), needs(x));
  nodes_[static_cast<std::size_t>(id)].back = [id, x](Tape& t) {
    Tensor g = t.grad_ref(id);
    g.shape = t.value(x).shape;
    t.accum(x, g);
  };
  return id;
}

void Tape::backward(NodeId seed) {
  if (value(seed).numel() != 1) throw TensorError("backward: seed must be scalar");
  for (Node& n : nodes_) n.grad = Tensor();
  nodes_[static_cast<std::size_t>(seed)].grad = Tensor::scalar(1.0);
  for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.data.empty() || !n.back) continue;
    n.back(*this);
  }
  for (auto& [p, id] : param_nodes_) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.data.empty()) continue;
    Param* param = n.bound;
    for (std::int64_t i = 0; i < n.grad.numel(); ++i) {
      param->grad.data[static_cast<std::size_t>(i)] += n.grad.data[static_cast<std::size_t>(i)];
    }
  }
}

void sgd_step(std::vector<Param*>& params, double lr) {
  for (Param* p : params) p->grad.ensure_finite("gradient of " + p->name);
  for (Param* p : params) {
    for (std::int64_t i = 0; i < p->value.numel(); ++i) {
      p->value.data[static_cast<std::size_t>(i)] -=
          lr * p->grad.data[static_cast<std::size_t>(i)];
    }
    p->zero_grad();
  }
}

double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& x,
                         const Tensor& analytic_grad, double step,
                         const std::vector<std::int64_t>& coords) {
  if (!x.same_shape(analytic_grad)) {
    throw TensorError("finite_diff_check: gradient shape mismatch");
  }
  std::vector<std::int64_t> all;
  const std::vector<std::int64_t>* use = &coords;
  if (coords.empty()) {
    all.resize(static_cast<std::size_t>(x.numel()));
    for (std::int64_t i = 0; i < x.numel(); ++i) all[static_cast<std::size_t>(i)] = i;
    use = &all;
  }
  Tensor probe = x;
  double worst = 0.0;
  for (std::int64_t i : *use) {
    double orig = probe.data[static_cast<std::size_t>(i)];
    probe.data[static_cast<std::size_t>(i)] = orig + step;
    double fp = f(probe);
    probe.data[static_cast<std::size_t>(i)] = orig - step;
    double fm = f(probe);
    probe.data[static_cast<std::size_t>(i)] = orig;
    double fd = (fp - fm) / (2.0 * step);
    double ga = analytic_grad.data[static_cast<std::size_t>(i)];
    double rel = std::fabs(ga - fd) / std::max(1.0, std::fabs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace sglab
