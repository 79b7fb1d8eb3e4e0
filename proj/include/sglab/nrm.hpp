// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "sglab/autograd.hpp"
#include "sglab/geometry.hpp"
#include "sglab/tensor.hpp"

namespace sglab {

inline constexpr double kNrmEps = 1e-5;

enum class AttentionMode { Centroid, Bbox };

std::string to_string(AttentionMode m);
AttentionMode attention_from_string(const std::string& s);

// Object bounding boxes and centroids of one image, normalized to [0,1].
struct Layout {
  std::vector<BoxN> boxes;
  std::vector<std::array<double, 2>> centroids;

  static Layout from_boxes(std::vector<BoxN> boxes);
  int size() const { return static_cast<int>(boxes.size()); }
};

// weights row (m*W + l) holds the per-object attention of grid cell (m,l);
// mask is the row-wise maximum reshaped to [h,w].
struct AttentionMap {
  Tensor weights;  // [h*w, n]
  Tensor mask;     // [h,w]
};

struct InstanceNormResult {
  Tensor normalized;
  Tensor residual;  // f - normalized
};

// Removes per-channel spatial mean/variance: b = (a - mu) / sqrt(var + eps).
InstanceNormResult instance_normalize(const Tensor& f, double eps);

// Attention of each grid-cell center toward each object:
// softmax_j(-dist^2), with dist to the centroid (Centroid mode) or to the
// nearest point of the box, zero inside (Bbox mode). Cell centers are
// ((l+0.5)/w, (m+0.5)/h).
AttentionMap layout_attention(const Layout& layout, int h, int w, AttentionMode mode);

// normalized + residual * mask, mask broadcast across channels.
Tensor restitute(const Tensor& normalized, const Tensor& residual, const Tensor& mask);

// Full composition. Combines as f*mask + normalized*(1-mask), which equals
// normalized + residual*mask term for term and makes the single-object case
// (mask identically 1) reproduce f without rounding.
Tensor nrm_forward(const Tensor& f, const Layout& layout, double eps, AttentionMode mode);

// Tape version used by the pipeline; the layout enters as a constant.
Tape::NodeId nrm_forward_node(Tape& tape, Tape::NodeId fmap, const Layout& layout, double eps,
                              AttentionMode mode);

}  // namespace sglab
