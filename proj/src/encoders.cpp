// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/encoders.hpp"

#include <cmath>

namespace sglab {

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::Gate: return "gate";
    case FusionMode::ConcatProj: return "concat";
    case FusionMode::Add: return "add";
  }
  return "gate";
}

FusionMode fusion_from_string(const std::string& s) {
  if (s == "gate") return FusionMode::Gate;
  if (s == "concat") return FusionMode::ConcatProj;
  if (s == "add") return FusionMode::Add;
  throw UsageError("unknown fusion mode '" + s + "'");
}

namespace {

Tensor linear_vec(const Tensor& x, const Tensor& w, const Tensor* b) {
  // x [in]; w [out,in]
  int out = w.dim(0), in = w.dim(1);
  if (x.numel() != in) {
    throw TensorError("linear: input length " + std::to_string(x.numel()) + " vs weight " +
                      shape_str(w.shape));
  }
  Tensor y = Tensor::zeros({out});
  for (int r = 0; r < out; ++r) {
    double acc = b ? b->data[static_cast<std::size_t>(r)] : 0.0;
    const double* wr = w.data.data() + static_cast<std::size_t>(r) * in;
    for (int c = 0; c < in; ++c) acc += wr[c] * x.data[static_cast<std::size_t>(c)];
    y.data[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

}  // namespace

Tensor mlp2_forward(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                    const Tensor& b2) {
  Tensor h = relu(linear_vec(x, w1, &b1));
  return linear_vec(h, w2, &b2);
}

Tensor embed_object_bbox(const BoxN& b, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                         const Tensor& b2) {
  Tensor x({4}, {b.x1, b.y1, b.x2, b.y2});
  return mlp2_forward(x, w1, b1, w2, b2);
}

std::array<double, 11> pair_geometry_features(const BoxN& bi, const BoxN& bj) {
  double d0 = bi.x1 - bj.x1, d1 = bi.y1 - bj.y1, d2 = bi.x2 - bj.x2, d3 = bi.y2 - bj.y2;
  double norm = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3);
  return {bi.x1,           bi.y1, bi.x2, bi.y2, bj.x1, bj.y1, bj.x2, bj.y2,
          bi.cx() - bj.cx(), bi.cy() - bj.cy(), norm};
}

Tensor embed_pair_bbox(const BoxN& bi, const BoxN& bj, const Tensor& w1, const Tensor& b1,
                       const Tensor& w2, const Tensor& b2) {
  auto g = pair_geometry_features(bi, bj);
  Tensor x({11}, std::vector<double>(g.begin(), g.end()));
  return mlp2_forward(x, w1, b1, w2, b2);
}

Tensor gate_fuse(const Tensor& f, const Tensor& f_c, const Tensor& w, FusionMode mode,
                 const Tensor* proj, Tensor* z_out) {
  if (!f.same_shape(f_c)) throw TensorError("gate_fuse: f and f_c shapes differ");
  int d = static_cast<int>(f.numel());
  switch (mode) {
    case FusionMode::Add:
      return ew_add(f, f_c);
    case FusionMode::ConcatProj: {
      if (!proj) throw TensorError("gate_fuse: concat mode needs a projection");
      if (proj->dim(1) != 2 * d) throw TensorError("gate_fuse: projection must be [d,2d]");
      Tensor cat = Tensor::zeros({2 * d});
      std::copy(f.data.begin(), f.data.end(), cat.data.begin());
      std::copy(f_c.data.begin(), f_c.data.end(), cat.data.begin() + d);
      return linear_vec(cat, *proj, nullptr);
    }
    case FusionMode::Gate: {
      if (w.dim(0) != d || w.dim(1) != d) throw TensorError("gate_fuse: W must be [d,d]");
      Tensor z = sigmoid(linear_vec(f, w, nullptr));
      Tensor out = Tensor::zeros(f.shape);
      for (int i = 0; i < d; ++i) {
        double zi = z.data[static_cast<std::size_t>(i)];
        out.data[static_cast<std::size_t>(i)] =
            (1.0 - zi) * f_c.data[static_cast<std::size_t>(i)] +
            zi * f.data[static_cast<std::size_t>(i)];
      }
      if (z_out) *z_out = std::move(z);
      return out;
    }
  }
  throw TensorError("gate_fuse: unknown mode");
}

int argmax_lowest(const double* row, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

Decoded decode(const Tensor& f, const Tensor& w, const Tensor& b) {
  Tensor logits = linear_vec(f, w, &b);
  Decoded d;
  d.probs = softmax_lastdim(logits);
  d.label = argmax_lowest(d.probs.data.data(), static_cast<int>(d.probs.numel()));
  return d;
}

Tape::NodeId mlp2_rows(Tape& tape, Tape::NodeId x, Param& w1, Param& b1, Param& w2, Param& b2) {
  Tape::NodeId h = tape.relu(tape.linear(x, tape.param(w1), tape.param(b1)));
  return tape.linear(h, tape.param(w2), tape.param(b2));
}

FusedRows gate_fuse_rows(Tape& tape, Tape::NodeId f, Tape::NodeId f_c, Param& gate_w,
                         Param& proj_w, FusionMode mode) {
  FusedRows out;
  switch (mode) {
    case FusionMode::Add:
      out.out = tape.add(f, f_c);
      return out;
    case FusionMode::ConcatProj:
      out.out = tape.linear(tape.concat_cols({f, f_c}), tape.param(proj_w));
      return out;
    case FusionMode::Gate: {
      Tape::NodeId z = tape.sigmoid(tape.linear(f, tape.param(gate_w)));
      Tape::NodeId ones = tape.constant(Tensor::full(tape.value(z).shape, 1.0));
      Tape::NodeId kept = tape.mul(f, z);
      Tape::NodeId coord = tape.mul(f_c, tape.sub(ones, z));
      out.out = tape.add(coord, kept);
      out.z = z;
      return out;
    }
  }
  throw TensorError("gate_fuse_rows: unknown mode");
}

}  // namespace sglab
