// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sglab/encoders.hpp"

using namespace sglab;

namespace {

struct MlpWeights {
  Tensor w1, b1, w2, b2;
};

MlpWeights random_mlp(Rng& rng, int in, int d) {
  return {Tensor::uniform({d, in}, rng, -0.5, 0.5), Tensor::uniform({d}, rng, -0.2, 0.2),
          Tensor::uniform({d, d}, rng, -0.5, 0.5), Tensor::uniform({d}, rng, -0.2, 0.2)};
}

// scalar-loop oracle for the two-layer MLP
Tensor mlp_oracle(const Tensor& x, const MlpWeights& m) {
  int h = m.w1.dim(0), in = m.w1.dim(1), out = m.w2.dim(0);
  Tensor hidden = Tensor::zeros({h});
  for (int r = 0; r < h; ++r) {
    double acc = m.b1.data[static_cast<std::size_t>(r)];
    for (int c = 0; c < in; ++c) {
      acc += m.w1.at(r, c) * x.data[static_cast<std::size_t>(c)];
    }
    hidden.data[static_cast<std::size_t>(r)] = acc > 0 ? acc : 0;
  }
  Tensor y = Tensor::zeros({out});
  for (int r = 0; r < out; ++r) {
    double acc = m.b2.data[static_cast<std::size_t>(r)];
    for (int c = 0; c < h; ++c) {
      acc += m.w2.at(r, c) * hidden.data[static_cast<std::size_t>(c)];
    }
    y.data[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

}  // namespace

TEST_CASE("embed_object_bbox: zero params, determinism, oracle") {
  Rng rng(7);
  int d = 16;
  BoxN b{0.1, 0.2, 0.5, 0.6};

  // all-zero params -> zero vector
  MlpWeights z{Tensor::zeros({d, 4}), Tensor::zeros({d}), Tensor::zeros({d, d}),
               Tensor::zeros({d})};
  Tensor out = embed_object_bbox(b, z.w1, z.b1, z.w2, z.b2);
  CHECK(max_abs_diff(out, Tensor::zeros({d})) == 0.0);

  MlpWeights m = random_mlp(rng, 4, d);
  Tensor a1 = embed_object_bbox(b, m.w1, m.b1, m.w2, m.b2);
  Tensor a2 = embed_object_bbox(b, m.w1, m.b1, m.w2, m.b2);
  CHECK(max_abs_diff(a1, a2) == 0.0);

  Tensor x({4}, {b.x1, b.y1, b.x2, b.y2});
  CHECK(max_abs_diff(a1, mlp_oracle(x, m)) < 1e-12);
}

TEST_CASE("embed_pair_bbox geometry features") {
  BoxN bi{0.1, 0.2, 0.5, 0.6};
  BoxN bj{0.3, 0.1, 0.9, 0.7};

  auto g = pair_geometry_features(bi, bi);
  CHECK(g[8] == 0.0);   // e_i - e_j
  CHECK(g[9] == 0.0);
  CHECK(g[10] == 0.0);  // ||b_i - b_j||
  CHECK(g.size() == 11);

  auto gij = pair_geometry_features(bi, bj);
  auto gji = pair_geometry_features(bj, bi);
  CHECK(gij[8] == doctest::Approx(-gji[8]));
  CHECK(gij[9] == doctest::Approx(-gji[9]));
  CHECK(gij[10] == doctest::Approx(gji[10]));  // norm symmetric

  Rng rng(8);
  MlpWeights m = random_mlp(rng, 11, 12);
  Tensor e = embed_pair_bbox(bi, bj, m.w1, m.b1, m.w2, m.b2);
  Tensor x({11}, std::vector<double>(gij.begin(), gij.end()));
  CHECK(max_abs_diff(e, mlp_oracle(x, m)) < 1e-12);
}

TEST_CASE("gate_fuse: degenerate weights, equal inputs, hand example") {
  Rng rng(9);
  int d = 8;
  Tensor f = Tensor::uniform({d}, rng, -2, 2);
  Tensor fc = Tensor::uniform({d}, rng, -2, 2);

  // W = 0 -> exact 0.5 mixture
  Tensor w0 = Tensor::zeros({d, d});
  Tensor out = gate_fuse(f, fc, w0, FusionMode::Gate);
  for (int i = 0; i < d; ++i) {
    CHECK(out.data[static_cast<std::size_t>(i)] ==
          0.5 * (f.data[static_cast<std::size_t>(i)] + fc.data[static_cast<std::size_t>(i)]));
  }

  // f == f_c -> output equals f (convex combination of equal points)
  Tensor w = Tensor::uniform({d, d}, rng, -0.5, 0.5);
  Tensor same = gate_fuse(f, f, w, FusionMode::Gate);
  CHECK(max_abs_diff(same, f) < 1e-15);

  // hand example in 2 dims: z = (0.731..., 0.5)
  Tensor f2({2}, {1.0, 0.0});
  Tensor fc2({2}, {0.0, 1.0});
  Tensor w2({2, 2}, {1.0, 0.0, 0.0, 0.0});  // W f = (1, 0) -> z = (sigma(1), 0.5)
  Tensor z;
  Tensor fused = gate_fuse(f2, fc2, w2, FusionMode::Gate, nullptr, &z);
  CHECK(z.data[0] == doctest::Approx(0.731059).epsilon(1e-5));
  CHECK(z.data[1] == 0.5);
  CHECK(fused.data[0] == doctest::Approx(0.731059).epsilon(1e-5));  // (1-z)*0 + z*1
  CHECK(fused.data[1] == doctest::Approx(0.5).epsilon(1e-12));      // (1-z)*1 + z*0
}

TEST_CASE("gate_fuse modes: add and concat projection") {
  Rng rng(10);
  int d = 6;
  Tensor f = Tensor::uniform({d}, rng, -1, 1);
  Tensor fc = Tensor::uniform({d}, rng, -1, 1);
  Tensor w = Tensor::uniform({d, d}, rng, -1, 1);

  Tensor added = gate_fuse(f, fc, w, FusionMode::Add);
  for (int i = 0; i < d; ++i) {
    CHECK(added.data[static_cast<std::size_t>(i)] ==
          f.data[static_cast<std::size_t>(i)] + fc.data[static_cast<std::size_t>(i)]);
  }

  Tensor proj = Tensor::uniform({d, 2 * d}, rng, -1, 1);
  Tensor projected = gate_fuse(f, fc, w, FusionMode::ConcatProj, &proj);
  for (int r = 0; r < d; ++r) {
    double acc = 0;
    for (int c = 0; c < d; ++c) {
      acc += proj.at(r, c) * f.data[static_cast<std::size_t>(c)];
      acc += proj.at(r, d + c) * fc.data[static_cast<std::size_t>(c)];
    }
    CHECK(projected.data[static_cast<std::size_t>(r)] == doctest::Approx(acc).epsilon(1e-12));
  }

  CHECK_THROWS_AS((void)gate_fuse(f, fc, w, FusionMode::ConcatProj, nullptr), TensorError);
  CHECK_THROWS_AS((void)gate_fuse(f, Tensor::zeros({d + 1}), w, FusionMode::Gate), TensorError);
}

TEST_CASE("gate convexity and strict range over random draws") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int d = rng.uniform_int(2, 12);
    Tensor f = Tensor::uniform({d}, rng, -3, 3);
    Tensor fc = Tensor::uniform({d}, rng, -3, 3);
    Tensor w = Tensor::uniform({d, d}, rng, -0.8, 0.8);
    Tensor z;
    Tensor out = gate_fuse(f, fc, w, FusionMode::Gate, nullptr, &z);
    for (int i = 0; i < d; ++i) {
      double zi = z.data[static_cast<std::size_t>(i)];
      REQUIRE(zi > 0.0);
      REQUIRE(zi < 1.0);
      double lo = std::min(f.data[static_cast<std::size_t>(i)],
                           fc.data[static_cast<std::size_t>(i)]);
      double hi = std::max(f.data[static_cast<std::size_t>(i)],
                           fc.data[static_cast<std::size_t>(i)]);
      // one rounding step of slack on the convexity bound
      REQUIRE(out.data[static_cast<std::size_t>(i)] >= lo - 1e-12);
      REQUIRE(out.data[static_cast<std::size_t>(i)] <= hi + 1e-12);
    }
  }
}

TEST_CASE("decode: tie-break, dominance, normalization") {
  int d = 4, k = 5;
  Tensor f = Tensor::zeros({d});
  Tensor w = Tensor::zeros({k, d});
  Tensor b = Tensor::zeros({k});

  // uniform logits -> label 0
  Decoded dec = decode(f, w, b);
  CHECK(dec.label == 0);
  double sum = 0;
  for (double v : dec.probs.data) sum += v;
  CHECK(std::fabs(sum - 1.0) < 1e-12);

  b.data[3] = 4.0;  // dominant class
  dec = decode(f, w, b);
  CHECK(dec.label == 3);
  CHECK(dec.probs.data[3] > 1.0 / k);
}

TEST_CASE("tape gate fusion matches the pure path row by row") {
  Rng rng(12);
  int d = 10, n = 3;
  Param gate_w("g", Tensor::uniform({d, d}, rng, -0.5, 0.5));
  Param proj_w("p", Tensor::uniform({d, 2 * d}, rng, -0.5, 0.5));
  Tensor f_rows = Tensor::uniform({n, d}, rng, -2, 2);
  Tensor fc_rows = Tensor::uniform({n, d}, rng, -2, 2);

  for (FusionMode mode : {FusionMode::Gate, FusionMode::ConcatProj, FusionMode::Add}) {
    Tape t;
    FusedRows fused =
        gate_fuse_rows(t, t.input(f_rows), t.constant(fc_rows), gate_w, proj_w, mode);
    const Tensor& out = t.value(fused.out);
    for (int r = 0; r < n; ++r) {
      Tensor f({d}, std::vector<double>(f_rows.data.begin() + r * d,
                                        f_rows.data.begin() + (r + 1) * d));
      Tensor fc({d}, std::vector<double>(fc_rows.data.begin() + r * d,
                                         fc_rows.data.begin() + (r + 1) * d));
      Tensor expect = gate_fuse(f, fc, gate_w.value, mode, &proj_w.value);
      for (int c = 0; c < d; ++c) {
        REQUIRE(out.at(r, c) == doctest::Approx(expect.data[static_cast<std::size_t>(c)])
                                    .epsilon(1e-12));
      }
    }
    if (mode == FusionMode::Gate) {
      CHECK(fused.z != Tape::kNone);
      for (double zv : t.value(fused.z).data) {
        CHECK(zv > 0.0);
        CHECK(zv < 1.0);
      }
    } else {
      CHECK(fused.z == Tape::kNone);
    }
  }
}
