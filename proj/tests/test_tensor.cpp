// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "doctest.h"
#include "sglab/autograd.hpp"
#include "sglab/tensor.hpp"

using namespace sglab;

namespace {

// test-side oracle, independent of the kernels
Tensor matmul_triple_loop(const Tensor& a, const Tensor& b) {
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor y = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < k; ++l) y.at(i, j) += a.at(i, l) * b.at(l, j);
    }
  }
  return y;
}

}  // namespace

TEST_CASE("elementwise add/sub/mul basics") {
  Tensor a({2}, {2, 3});
  Tensor b({2}, {4, 5});
  CHECK(ew_add(a, b).data == std::vector<double>{6, 8});

  Rng rng(7);
  Tensor x = Tensor::uniform({3, 4}, rng, -2, 2);
  CHECK(max_abs_diff(ew_mul(x, Tensor::full({3, 4}, 1.0)), x) == 0.0);
  CHECK(max_abs_diff(ew_sub(x, x), Tensor::zeros({3, 4})) == 0.0);
}

TEST_CASE("elementwise shape errors are loud") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK_THROWS_AS((void)ew_add(a, Tensor::zeros({3, 2})), TensorError);
  // no implicit rank promotion
  CHECK_THROWS_AS((void)ew_add(a, Tensor::zeros({3})), TensorError);
  CHECK_THROWS_AS((void)Tensor({2, 2}, {1.0, 2.0, 3.0}), TensorError);
}

TEST_CASE("broadcasting agrees with explicit tiling") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    int d0 = rng.uniform_int(1, 4), d1 = rng.uniform_int(1, 4), d2 = rng.uniform_int(1, 4);
    Tensor a = Tensor::uniform({d0, d1, d2}, rng, -3, 3);
    // b gets size-1 on a random subset of axes
    std::vector<int> bshape = {rng.uniform() < 0.5 ? 1 : d0, rng.uniform() < 0.5 ? 1 : d1,
                               rng.uniform() < 0.5 ? 1 : d2};
    Tensor b = Tensor::uniform(bshape, rng, -3, 3);
    Tensor tiled = Tensor::zeros(a.shape);
    for (int i = 0; i < d0; ++i) {
      for (int j = 0; j < d1; ++j) {
        for (int k = 0; k < d2; ++k) {
          tiled.data[static_cast<std::size_t>((i * d1 + j) * d2 + k)] =
              b.data[static_cast<std::size_t>(((bshape[0] == 1 ? 0 : i) * bshape[1] +
                                               (bshape[1] == 1 ? 0 : j)) *
                                                  bshape[2] +
                                              (bshape[2] == 1 ? 0 : k))];
        }
      }
    }
    CHECK(max_abs_diff(ew_mul(a, b), ew_mul(a, tiled)) == 0.0);
    CHECK(max_abs_diff(ew_add(a, b), ew_add(a, tiled)) == 0.0);
  }
}

TEST_CASE("matmul identity and scalar") {
  Tensor eye = Tensor::zeros({3, 3});
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  Rng rng(3);
  Tensor a = Tensor::uniform({3, 5}, rng, -1, 1);
  CHECK(max_abs_diff(matmul(eye, a), a) == 0.0);
  CHECK(matmul(Tensor({1, 1}, {2.0}), Tensor({1, 1}, {3.0})).item() == doctest::Approx(6.0));
  CHECK_THROWS_AS((void)matmul(a, a), TensorError);
}

TEST_CASE("matmul agrees with the triple-loop oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    int m = rng.uniform_int(1, 16), k = rng.uniform_int(1, 16), n = rng.uniform_int(1, 16);
    Tensor a = Tensor::uniform({m, k}, rng, -2, 2);
    Tensor b = Tensor::uniform({k, n}, rng, -2, 2);
    CHECK(max_abs_diff(matmul(a, b), matmul_triple_loop(a, b)) < 1e-12);
  }
}

TEST_CASE("softmax examples and simplex property") {
  Tensor u = softmax_lastdim(Tensor({3}, {0, 0, 0}));
  for (double v : u.data) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

  Tensor s = softmax_lastdim(Tensor({2}, {0.0, -0.5}));
  CHECK(s.data[0] == doctest::Approx(0.6225).epsilon(1e-3));
  CHECK(s.data[1] == doctest::Approx(0.3775).epsilon(1e-3));

  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor x = Tensor::uniform({4, 7}, rng, -30, 30);
    Tensor y = softmax_lastdim(x);
    double c = rng.uniform(-5, 5);
    Tensor shifted = x;
    for (double& v : shifted.data) v += c;
    CHECK(max_abs_diff(softmax_lastdim(shifted), y) < 1e-12);
    for (int r = 0; r < 4; ++r) {
      double sum = 0;
      for (int j = 0; j < 7; ++j) {
        CHECK(y.at(r, j) >= 0.0);
        sum += y.at(r, j);
      }
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("sigmoid examples") {
  CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
  CHECK(std::fabs(sigmoid(Tensor::scalar(50.0)).item() - 1.0) < 1e-9);
  CHECK(sigmoid(Tensor::scalar(1.0)).item() == doctest::Approx(0.731059).epsilon(1e-5));
  Rng rng(9);
  Tensor x = Tensor::uniform({17}, rng, -6, 6);
  Tensor y = sigmoid(x);
  Tensor neg = x;
  for (double& v : neg.data) v = -v;
  Tensor yn = sigmoid(neg);
  for (int i = 0; i < 17; ++i) {
    CHECK(y.data[static_cast<std::size_t>(i)] ==
          doctest::Approx(1.0 - yn.data[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("cross entropy examples") {
  // near-perfect prediction
  Tensor hot = Tensor::zeros({1, 4});
  hot.at(0, 2) = 1e4;
  CHECK(cross_entropy(hot, {2}) < 1e-4);

  // uniform logits -> ln K
  CHECK(cross_entropy(Tensor::zeros({2, 5}), {0, 3}) == doctest::Approx(std::log(5.0)));

  CHECK(cross_entropy(Tensor({1, 2}, {1, 2}), {0}) == doctest::Approx(1.313262).epsilon(1e-5));

  CHECK_THROWS_AS((void)cross_entropy(Tensor::zeros({1, 3}), {3}), TensorError);
  CHECK_THROWS_AS((void)cross_entropy(Tensor::zeros({1, 3}), {-1}), TensorError);
}

TEST_CASE("finite_diff_check on sum of squares") {
  Rng rng(21);
  Tensor x = Tensor::uniform({3, 3}, rng, -2, 2);
  Tensor grad = x;
  for (double& v : grad.data) v *= 2.0;  // d/dx sum(x^2) = 2x
  auto f = [](const Tensor& t) {
    double s = 0;
    for (double v : t.data) s += v * v;
    return s;
  };
  CHECK(finite_diff_check(f, x, grad, 1e-5) < 1e-7);
}

TEST_CASE("sgd_step semantics") {
  Param p("w", Tensor({2}, {1.0, -0.5}));
  p.grad = Tensor({2}, {2.0, 4.0});
  std::vector<Param*> ps = {&p};

  SUBCASE("lr 0 leaves values unchanged") {
    sgd_step(ps, 0.0);
    CHECK(p.value.data == std::vector<double>{1.0, -0.5});
    CHECK(p.grad.data == std::vector<double>{0.0, 0.0});  // grads still zeroed
  }

  SUBCASE("plain update") {
    sgd_step(ps, 0.1);
    CHECK(p.value.data[0] == doctest::Approx(0.8));
    CHECK(p.value.data[1] == doctest::Approx(-0.9));
  }

  SUBCASE("non-finite gradient is rejected") {
    p.grad.data[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(sgd_step(ps, 0.1), TensorError);
  }

  SUBCASE("10 steps on x^2 from 1 with lr 0.1") {
    Param x("x", Tensor::scalar(1.0));
    std::vector<Param*> xs = {&x};
    for (int i = 0; i < 10; ++i) {
      x.grad.data[0] = 2.0 * x.value.data[0];
      sgd_step(xs, 0.1);
    }
    CHECK(x.value.item() == doctest::Approx(std::pow(0.8, 10)).epsilon(1e-12));
  }
}

TEST_CASE("ensure_finite flags NaN and Inf") {
  Tensor t({2}, {1.0, 2.0});
  CHECK_NOTHROW(t.ensure_finite("t"));
  t.data[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(t.ensure_finite("t"), TensorError);
}
