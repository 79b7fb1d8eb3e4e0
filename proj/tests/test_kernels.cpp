// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include <vector>

#include "doctest.h"
#include "sglab/kernels.hpp"
#include "sglab/rng.hpp"

using namespace sglab;

// The OpenMP kernels must reproduce the serial reference bit-for-bit: every
// parallel iteration owns its outputs and accumulates in the same order.

namespace {

std::vector<double> rand_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("matmul family: omp == ref bitwise") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    int m = rng.uniform_int(1, 33), k = rng.uniform_int(1, 33), n = rng.uniform_int(1, 33);
    auto a = rand_vec(rng, m * k);
    auto b = rand_vec(rng, k * n);
    std::vector<double> y1(static_cast<std::size_t>(m) * n), y2(y1);
    kernels::matmul(a.data(), b.data(), y1.data(), m, k, n);
    ref::matmul(a.data(), b.data(), y2.data(), m, k, n);
    CHECK(bit_equal(y1, y2));

    auto bt = rand_vec(rng, n * k);
    kernels::matmul_nt(a.data(), bt.data(), y1.data(), m, k, n);
    ref::matmul_nt(a.data(), bt.data(), y2.data(), m, k, n);
    CHECK(bit_equal(y1, y2));

    auto at = rand_vec(rng, k * m);
    auto bn = rand_vec(rng, k * n);
    kernels::matmul_tn(at.data(), bn.data(), y1.data(), m, k, n);
    ref::matmul_tn(at.data(), bn.data(), y2.data(), m, k, n);
    CHECK(bit_equal(y1, y2));
  }
}

TEST_CASE("conv2d forward/backward: omp == ref bitwise") {
  Rng rng(202);
  for (int trial = 0; trial < 4; ++trial) {
    int cin = rng.uniform_int(1, 4), cout = rng.uniform_int(1, 5);
    int h = 2 * rng.uniform_int(3, 8), w = 2 * rng.uniform_int(3, 8);
    int ksz = 3, stride = 2, pad = 1;
    int hout = conv_out_dim(h, ksz, stride, pad), wout = conv_out_dim(w, ksz, stride, pad);
    auto x = rand_vec(rng, cin * h * w);
    auto wt = rand_vec(rng, cout * cin * ksz * ksz);
    auto bias = rand_vec(rng, cout);
    std::vector<double> y1(static_cast<std::size_t>(cout) * hout * wout), y2(y1);
    kernels::conv2d_forward(x.data(), wt.data(), bias.data(), y1.data(), cin, h, w, cout, ksz,
                            stride, pad);
    ref::conv2d_forward(x.data(), wt.data(), bias.data(), y2.data(), cin, h, w, cout, ksz,
                        stride, pad);
    CHECK(bit_equal(y1, y2));

    auto dy = rand_vec(rng, cout * hout * wout);
    std::vector<double> dx1(x.size()), dx2(x.size());
    kernels::conv2d_backward_input(dy.data(), wt.data(), dx1.data(), cin, h, w, cout, ksz,
                                   stride, pad);
    ref::conv2d_backward_input(dy.data(), wt.data(), dx2.data(), cin, h, w, cout, ksz, stride,
                               pad);
    CHECK(bit_equal(dx1, dx2));

    std::vector<double> dw1(wt.size()), dw2(wt.size()), db1(bias.size()), db2(bias.size());
    kernels::conv2d_backward_params(dy.data(), x.data(), dw1.data(), db1.data(), cin, h, w, cout,
                                    ksz, stride, pad);
    ref::conv2d_backward_params(dy.data(), x.data(), dw2.data(), db2.data(), cin, h, w, cout,
                                ksz, stride, pad);
    CHECK(bit_equal(dw1, dw2));
    CHECK(bit_equal(db1, db2));
  }
}

TEST_CASE("instance_norm and softmax_rows: omp == ref bitwise") {
  Rng rng(303);
  int c = 7, hw = 64;
  auto x = rand_vec(rng, c * hw);
  std::vector<double> y1(x.size()), y2(x.size()), m1(7), m2(7), s1(7), s2(7);
  kernels::instance_norm_forward(x.data(), y1.data(), m1.data(), s1.data(), c, hw, 1e-5);
  ref::instance_norm_forward(x.data(), y2.data(), m2.data(), s2.data(), c, hw, 1e-5);
  CHECK(bit_equal(y1, y2));
  CHECK(bit_equal(m1, m2));
  CHECK(bit_equal(s1, s2));

  auto dy = rand_vec(rng, c * hw);
  std::vector<double> dx1(x.size()), dx2(x.size());
  kernels::instance_norm_backward(dy.data(), y1.data(), s1.data(), dx1.data(), c, hw);
  ref::instance_norm_backward(dy.data(), y2.data(), s2.data(), dx2.data(), c, hw);
  CHECK(bit_equal(dx1, dx2));

  int rows = 65, cols = 6;
  auto sm = rand_vec(rng, rows * cols, -4, 4);
  std::vector<double> o1(sm.size()), o2(sm.size());
  kernels::softmax_rows(sm.data(), o1.data(), rows, cols);
  ref::softmax_rows(sm.data(), o2.data(), rows, cols);
  CHECK(bit_equal(o1, o2));
}

TEST_CASE("relu/sigmoid: omp == ref bitwise") {
  Rng rng(404);
  auto x = rand_vec(rng, 20000, -5, 5);  // above the parallel threshold
  std::vector<double> y1(x.size()), y2(x.size());
  kernels::relu(x.data(), y1.data(), static_cast<std::int64_t>(x.size()));
  ref::relu(x.data(), y2.data(), static_cast<std::int64_t>(x.size()));
  CHECK(bit_equal(y1, y2));
  kernels::sigmoid(x.data(), y1.data(), static_cast<std::int64_t>(x.size()));
  ref::sigmoid(x.data(), y2.data(), static_cast<std::int64_t>(x.size()));
  CHECK(bit_equal(y1, y2));
}
