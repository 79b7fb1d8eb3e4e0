// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sglab/errors.hpp"
#include "sglab/rng.hpp"

namespace sglab {

std::int64_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// Dense row-major f64 tensor. Plain value type: copy freely, mutate via data.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> shape_, std::vector<double> data_);

  static Tensor zeros(const std::vector<int>& shape);
  static Tensor full(const std::vector<int>& shape, double v);
  static Tensor scalar(double v);  // shape {1}
  static Tensor uniform(const std::vector<int>& shape, Rng& rng, double lo, double hi);

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * dim(1) + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * dim(1) + c]; }
  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * dim(1) + y) * dim(2) + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * dim(1) + y) * dim(2) + x];
  }

  double item() const;  // requires numel() == 1

  // NaN/Inf is a contract violation; `what` names the offending tensor.
  void ensure_finite(const std::string& what) const;
};

// Entrywise ops. `b` must either match `a`'s shape, have size-1 axes at the
// mismatching positions (same rank), or be a scalar. No rank promotion.
Tensor ew_add(const Tensor& a, const Tensor& b);
Tensor ew_sub(const Tensor& a, const Tensor& b);
Tensor ew_mul(const Tensor& a, const Tensor& b);

bool broadcast_compatible(const std::vector<int>& a, const std::vector<int>& b);

// Sums g over the axes that were broadcast to reach `target`.
Tensor reduce_to_shape(const Tensor& g, const std::vector<int>& target);

Tensor matmul(const Tensor& a, const Tensor& b);          // [m,k]·[k,n]
Tensor softmax_lastdim(const Tensor& x);                  // max-subtracted
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

// Mean over rows of -log softmax(logits)[label]. logits is [n,K].
double cross_entropy(const Tensor& logits, const std::vector<int>& labels);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace sglab
