// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sglab/geometry.hpp"
#include "sglab/tensor.hpp"

namespace sglab {

// A trainable array plus its gradient buffer.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param(std::string name_, Tensor value_)
      : name(std::move(name_)), value(std::move(value_)) {
    grad = Tensor::zeros(value.shape);
  }

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// Linear tape of recorded operations. The model graph is small and fixed, so
// each op pushes its own backward step; backward() replays them in reverse
// and adds the accumulated leaf gradients into the bound Params. Not a
// general autograd engine by intent.
class Tape {
 public:
  using NodeId = int;
  static constexpr NodeId kNone = -1;

  NodeId constant(Tensor v);  // never differentiated
  NodeId input(Tensor v);     // differentiated leaf (gradient checks)
  NodeId param(Param& p);     // one node per Param per tape

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId x, double s);
  NodeId matmul(NodeId a, NodeId b);
  // x [n,in] (or [in]); w [out,in]; bias [out] or kNone; y [n,out] (or [out])
  NodeId linear(NodeId x, NodeId w, NodeId bias = kNone);
  NodeId relu(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId softmax_lastdim(NodeId x);
  NodeId cross_entropy(NodeId logits, std::vector<int> labels);  // scalar
  // x [cin,h,w]; w [cout,cin,k,k]; bias [cout] or kNone
  NodeId conv2d(NodeId x, NodeId w, NodeId bias, int stride, int pad);
  // returns the normalized map; per-channel spatial statistics over h*w
  NodeId instance_norm(NodeId x, double eps);
  // fmap [c,h,w]; one mean-pooled row per box -> [boxes,c]
  NodeId roi_rows(NodeId fmap, const std::vector<BoxN>& boxes);
  // table [rows,e]; gathered -> [ids,e]
  NodeId embed_rows(NodeId table, std::vector<int> ids);
  // rank-2 parts with equal row counts, concatenated along columns
  NodeId concat_cols(const std::vector<NodeId>& parts);
  // row m = [obj[i], uni[m], obj[j]] for pairs[m] = (i,j)
  NodeId pair_concat(NodeId obj_rows, NodeId union_rows,
                     const std::vector<std::pair<int, int>>& pairs);
  NodeId reshape(NodeId x, std::vector<int> shape);

  const Tensor& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  // Valid after backward(); zero tensor if the node never received gradient.
  Tensor grad(NodeId id) const;

  // Seeds d(seed)/d(seed) = 1 and replays the tape in reverse. Accumulates
  // into Param::grad for every bound param (+=, callers zero beforehand).
  void backward(NodeId seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // lazily allocated on first accumulation
    bool needs_grad = false;
    std::function<void(Tape&)> back;
    Param* bound = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Param*, NodeId> param_nodes_;

  NodeId push(Tensor value, bool needs_grad, std::function<void(Tape&)> back = nullptr);
  bool needs(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  bool has_grad(NodeId id) const {
    return !nodes_[static_cast<std::size_t>(id)].grad.data.empty();
  }
  const Tensor& grad_ref(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  void accum(NodeId id, const Tensor& g);
  void accum_flat(NodeId id, const std::vector<double>& g);
};

// [MODULE tensor-autograd] sgd_step: value <- value - lr * grad, grads zeroed.
// Throws on non-finite gradients.
void sgd_step(std::vector<Param*>& params, double lr);

// Max over entries of |g_analytic - g_fd| / max(1, |g_fd|), with g_fd from
// central differences of f at x +- step. Restrict to `coords` when non-empty.
double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& x,
                         const Tensor& analytic_grad, double step,
                         const std::vector<std::int64_t>& coords = {});

}  // namespace sglab
