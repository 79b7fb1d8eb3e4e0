// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sglab/kernels.hpp"

namespace sglab {

std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  for (int d : shape) {
    if (d <= 0) throw TensorError("non-positive dimension in shape " + shape_str(shape));
  }
  if (shape_numel(shape) != numel()) {
    throw TensorError("shape " + shape_str(shape) + " does not match data length " +
                      std::to_string(data.size()));
  }
}

Tensor Tensor::zeros(const std::vector<int>& shape) { return full(shape, 0.0); }

Tensor Tensor::full(const std::vector<int>& shape, double v) {
  Tensor t;
  t.shape = shape;
  for (int d : shape) {
    if (d <= 0) throw TensorError("non-positive dimension in shape " + shape_str(shape));
  }
  t.data.assign(static_cast<std::size_t>(shape_numel(shape)), v);
  return t;
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::uniform(const std::vector<int>& shape, Rng& rng, double lo, double hi) {
  Tensor t = zeros(shape);
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

double Tensor::item() const {
  if (numel() != 1) throw TensorError("item() on tensor of shape " + shape_str(shape));
  return data[0];
}

void Tensor::ensure_finite(const std::string& what) const {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw TensorError("non-finite value in " + what + " (shape " + shape_str(shape) + ")");
    }
  }
}

bool broadcast_compatible(const std::vector<int>& a, const std::vector<int>& b) {
  if (shape_numel(b) == 1) return true;
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] != a[i] && b[i] != 1) return false;
  }
  return true;
}

namespace {

// Maps a flat row-major index of `a` to the flat index of broadcast `b`.
struct BroadcastIndexer {
  std::vector<int> a_shape;
  std::vector<std::int64_t> b_strides;  // 0 on broadcast axes
  bool b_is_scalar;

  BroadcastIndexer(const std::vector<int>& a, const std::vector<int>& b) {
    a_shape = a;
    b_is_scalar = shape_numel(b) == 1;
    if (b_is_scalar) return;
    b_strides.assign(b.size(), 0);
    std::int64_t s = 1;
    for (int i = static_cast<int>(b.size()) - 1; i >= 0; --i) {
      b_strides[static_cast<std::size_t>(i)] = (b[static_cast<std::size_t>(i)] == 1) ? 0 : s;
      s *= b[static_cast<std::size_t>(i)];
    }
  }

  std::int64_t map(std::int64_t flat) const {
    if (b_is_scalar) return 0;
    std::int64_t out = 0;
    for (int i = static_cast<int>(a_shape.size()) - 1; i >= 0; --i) {
      std::int64_t dim = a_shape[static_cast<std::size_t>(i)];
      std::int64_t coord = flat % dim;
      flat /= dim;
      out += coord * b_strides[static_cast<std::size_t>(i)];
    }
    return out;
  }
};

template <typename F>
Tensor ew_binary(const Tensor& a, const Tensor& b, F op, const char* name) {
  if (!broadcast_compatible(a.shape, b.shape)) {
    throw TensorError(std::string(name) + ": shape " + shape_str(b.shape) +
                      " not broadcastable to " + shape_str(a.shape));
  }
  Tensor y = Tensor::zeros(a.shape);
  if (a.same_shape(b)) {
    for (std::int64_t i = 0; i < a.numel(); ++i) {
      y.data[static_cast<std::size_t>(i)] =
          op(a.data[static_cast<std::size_t>(i)], b.data[static_cast<std::size_t>(i)]);
    }
    return y;
  }
  BroadcastIndexer idx(a.shape, b.shape);
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    y.data[static_cast<std::size_t>(i)] = op(a.data[static_cast<std::size_t>(i)],
                                             b.data[static_cast<std::size_t>(idx.map(i))]);
  }
  return y;
}

}  // namespace

Tensor ew_add(const Tensor& a, const Tensor& b) {
  return ew_binary(a, b, [](double x, double y) { return x + y; }, "add");
}
Tensor ew_sub(const Tensor& a, const Tensor& b) {
  return ew_binary(a, b, [](double x, double y) { return x - y; }, "sub");
}
Tensor ew_mul(const Tensor& a, const Tensor& b) {
  return ew_binary(a, b, [](double x, double y) { return x * y; }, "mul");
}

Tensor reduce_to_shape(const Tensor& g, const std::vector<int>& target) {
  if (g.shape == target) return g;
  Tensor out = Tensor::zeros(target);
  BroadcastIndexer idx(g.shape, target);
  for (std::int64_t i = 0; i < g.numel(); ++i) {
    out.data[static_cast<std::size_t>(idx.map(i))] += g.data[static_cast<std::size_t>(i)];
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw TensorError("matmul: expected rank-2 operands, got " + shape_str(a.shape) + " and " +
                      shape_str(b.shape));
  }
  if (a.dim(1) != b.dim(0)) {
    throw TensorError("matmul: inner dimensions disagree, " + shape_str(a.shape) + " vs " +
                      shape_str(b.shape));
  }
  Tensor y = Tensor::zeros({a.dim(0), b.dim(1)});
  kernels::matmul(a.data.data(), b.data.data(), y.data.data(), a.dim(0), a.dim(1), b.dim(1));
  return y;
}

Tensor softmax_lastdim(const Tensor& x) {
  if (x.rank() < 1) throw TensorError("softmax_lastdim: rank-0 input");
  int cols = x.dim(x.rank() - 1);
  int rows = static_cast<int>(x.numel() / cols);
  Tensor y = Tensor::zeros(x.shape);
  kernels::softmax_rows(x.data.data(), y.data.data(), rows, cols);
  return y;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape);
  kernels::sigmoid(x.data.data(), y.data.data(), x.numel());
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape);
  kernels::relu(x.data.data(), y.data.data(), x.numel());
  return y;
}

double cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2) throw TensorError("cross_entropy: logits must be [n,K]");
  int n = logits.dim(0);
  int k = logits.dim(1);
  if (static_cast<int>(labels.size()) != n) {
    throw TensorError("cross_entropy: label count does not match row count");
  }
  double total = 0.0;
  for (int r = 0; r < n; ++r) {
    int label = labels[static_cast<std::size_t>(r)];
    if (label < 0 || label >= k) {
      throw TensorError("cross_entropy: label " + std::to_string(label) + " out of range [0," +
                        std::to_string(k) + ")");
    }
    const double* row = logits.data.data() + static_cast<std::size_t>(r) * k;
    double mx = row[0];
    for (int c = 1; c < k; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int c = 0; c < k; ++c) sum += std::exp(row[c] - mx);
    total += std::log(sum) - (row[label] - mx);
  }
  return total / n;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw TensorError("max_abs_diff: shapes differ, " + shape_str(a.shape) + " vs " +
                      shape_str(b.shape));
  }
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    m = std::max(m, std::fabs(a.data[static_cast<std::size_t>(i)] -
                              b.data[static_cast<std::size_t>(i)]));
  }
  return m;
}

}  // namespace sglab
