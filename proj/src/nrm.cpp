// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/nrm.hpp"

#include <cmath>

#include "sglab/kernels.hpp"

namespace sglab {

std::string to_string(AttentionMode m) {
  return m == AttentionMode::Centroid ? "centroid" : "bbox";
}

AttentionMode attention_from_string(const std::string& s) {
  if (s == "centroid") return AttentionMode::Centroid;
  if (s == "bbox") return AttentionMode::Bbox;
  throw UsageError("unknown attention mode '" + s + "'");
}

std::vector<int> roi_cells(const BoxN& box, int h, int w) {
  std::vector<int> cells;
  for (int y = 0; y < h; ++y) {
    double cy = (y + 0.5) / h;
    if (cy < box.y1 || cy > box.y2) continue;
    for (int x = 0; x < w; ++x) {
      double cx = (x + 0.5) / w;
      if (cx < box.x1 || cx > box.x2) continue;
      cells.push_back(y * w + x);
    }
  }
  if (!cells.empty()) return cells;
  // nearest cell center to the box center; first in scan order on ties
  double bx = box.cx(), by = box.cy();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = (x + 0.5) / w - bx;
      double dy = (y + 0.5) / h - by;
      double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = y * w + x;
      }
    }
  }
  return {best};
}

Layout Layout::from_boxes(std::vector<BoxN> boxes) {
  Layout l;
  l.centroids.reserve(boxes.size());
  for (const BoxN& b : boxes) l.centroids.push_back({b.cx(), b.cy()});
  l.boxes = std::move(boxes);
  return l;
}

InstanceNormResult instance_normalize(const Tensor& f, double eps) {
  if (f.rank() != 3) throw TensorError("instance_normalize: expected [c,h,w]");
  int c = f.dim(0);
  int hw = f.dim(1) * f.dim(2);
  InstanceNormResult r;
  r.normalized = Tensor::zeros(f.shape);
  std::vector<double> mean(static_cast<std::size_t>(c)), inv_std(static_cast<std::size_t>(c));
  kernels::instance_norm_forward(f.data.data(), r.normalized.data.data(), mean.data(),
                                 inv_std.data(), c, hw, eps);
  r.residual = ew_sub(f, r.normalized);
  return r;
}

AttentionMap layout_attention(const Layout& layout, int h, int w, AttentionMode mode) {
  int n = layout.size();
  if (n < 1) throw TensorError("layout_attention: layout has no objects");
  int hw = h * w;
  Tensor neg_d2 = Tensor::zeros({hw, n});
#pragma omp parallel for schedule(static)
  for (int p = 0; p < hw; ++p) {
    double cx = (p % w + 0.5) / w;
    double cy = (p / w + 0.5) / h;
    double* row = neg_d2.data.data() + static_cast<std::size_t>(p) * n;
    for (int j = 0; j < n; ++j) {
      double d2;
      if (mode == AttentionMode::Centroid) {
        double dx = cx - layout.centroids[static_cast<std::size_t>(j)][0];
        double dy = cy - layout.centroids[static_cast<std::size_t>(j)][1];
        d2 = dx * dx + dy * dy;
      } else {
        d2 = dist2_point_box(cx, cy, layout.boxes[static_cast<std::size_t>(j)]);
      }
      row[j] = -d2;
    }
  }
  AttentionMap out;
  out.weights = Tensor::zeros({hw, n});
  kernels::softmax_rows(neg_d2.data.data(), out.weights.data.data(), hw, n);
  out.mask = Tensor::zeros({h, w});
  for (int p = 0; p < hw; ++p) {
    const double* row = out.weights.data.data() + static_cast<std::size_t>(p) * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    out.mask.data[static_cast<std::size_t>(p)] = mx;
  }
  return out;
}

Tensor restitute(const Tensor& normalized, const Tensor& residual, const Tensor& mask) {
  if (!normalized.same_shape(residual)) throw TensorError("restitute: shape mismatch");
  if (mask.rank() != 2 || mask.dim(0) != normalized.dim(1) || mask.dim(1) != normalized.dim(2)) {
    throw TensorError("restitute: mask must be [h,w] matching the feature map");
  }
  int c = normalized.dim(0);
  int hw = mask.numel() > 0 ? mask.dim(0) * mask.dim(1) : 0;
  Tensor out = Tensor::zeros(normalized.shape);
  for (int ch = 0; ch < c; ++ch) {
    const double* nrm = normalized.data.data() + static_cast<std::size_t>(ch) * hw;
    const double* res = residual.data.data() + static_cast<std::size_t>(ch) * hw;
    double* o = out.data.data() + static_cast<std::size_t>(ch) * hw;
    for (int p = 0; p < hw; ++p) {
      o[p] = nrm[p] + res[p] * mask.data[static_cast<std::size_t>(p)];
    }
  }
  return out;
}

Tensor nrm_forward(const Tensor& f, const Layout& layout, double eps, AttentionMode mode) {
  InstanceNormResult in = instance_normalize(f, eps);
  AttentionMap att = layout_attention(layout, f.dim(1), f.dim(2), mode);
  int c = f.dim(0);
  int hw = f.dim(1) * f.dim(2);
  Tensor out = Tensor::zeros(f.shape);
  for (int ch = 0; ch < c; ++ch) {
    const double* fv = f.data.data() + static_cast<std::size_t>(ch) * hw;
    const double* nv = in.normalized.data.data() + static_cast<std::size_t>(ch) * hw;
    double* o = out.data.data() + static_cast<std::size_t>(ch) * hw;
    for (int p = 0; p < hw; ++p) {
      double m = att.mask.data[static_cast<std::size_t>(p)];
      o[p] = fv[p] * m + nv[p] * (1.0 - m);
    }
  }
  return out;
}

Tape::NodeId nrm_forward_node(Tape& tape, Tape::NodeId fmap, const Layout& layout, double eps,
                              AttentionMode mode) {
  const Tensor& fv = tape.value(fmap);
  int h = fv.dim(1), w = fv.dim(2);
  AttentionMap att = layout_attention(layout, h, w, mode);
  Tensor mask({1, h, w}, att.mask.data);
  Tensor inv_mask = mask;
  for (double& v : inv_mask.data) v = 1.0 - v;
  Tape::NodeId normalized = tape.instance_norm(fmap, eps);
  Tape::NodeId kept = tape.mul(fmap, tape.constant(std::move(mask)));
  Tape::NodeId suppressed = tape.mul(normalized, tape.constant(std::move(inv_mask)));
  return tape.add(kept, suppressed);
}

}  // namespace sglab
