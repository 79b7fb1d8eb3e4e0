// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <utility>

#include "sglab/autograd.hpp"
#include "sglab/geometry.hpp"
#include "sglab/tensor.hpp"

namespace sglab {

enum class FusionMode { Gate, ConcatProj, Add };

std::string to_string(FusionMode m);
FusionMode fusion_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Pure single-vector forms. These are the contract surface for the coordinate
// embeddings, gate fusion and decoding; the pipeline runs the same math in
// row-matrix form through the tape builders below.
// ---------------------------------------------------------------------------

// Two-layer MLP, nonlinearity after the first layer only.
Tensor mlp2_forward(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                    const Tensor& b2);

Tensor embed_object_bbox(const BoxN& b, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                         const Tensor& b2);

// [b_i(4), b_j(4), e_i - e_j(2), ||b_i - b_j||_2(1)]; the norm is over the
// 4-dim box vectors.
std::array<double, 11> pair_geometry_features(const BoxN& bi, const BoxN& bj);

Tensor embed_pair_bbox(const BoxN& bi, const BoxN& bj, const Tensor& w1, const Tensor& b1,
                       const Tensor& w2, const Tensor& b2);

// Gate:       z = sigmoid(W f), out = (1-z) * f_c + z * f
// Add:        out = f + f_c
// ConcatProj: out = proj * [f; f_c], proj is [d, 2d]
// z_out receives the gate vector in Gate mode when non-null.
Tensor gate_fuse(const Tensor& f, const Tensor& f_c, const Tensor& w, FusionMode mode,
                 const Tensor* proj = nullptr, Tensor* z_out = nullptr);

// argmax over softmaxed logits, ties broken toward the lowest index.
struct Decoded {
  int label = 0;
  Tensor probs;
};
Decoded decode(const Tensor& f, const Tensor& w, const Tensor& b);

int argmax_lowest(const double* row, int n);

// ---------------------------------------------------------------------------
// Tape builders (row-matrix forms used by the pipeline).
// ---------------------------------------------------------------------------

Tape::NodeId mlp2_rows(Tape& tape, Tape::NodeId x, Param& w1, Param& b1, Param& w2, Param& b2);

struct FusedRows {
  Tape::NodeId out = Tape::kNone;
  Tape::NodeId z = Tape::kNone;  // Gate mode only
};

FusedRows gate_fuse_rows(Tape& tape, Tape::NodeId f, Tape::NodeId f_c, Param& gate_w,
                         Param& proj_w, FusionMode mode);

}  // namespace sglab
