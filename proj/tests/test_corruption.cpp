// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "sglab/corruption.hpp"
#include "sglab/scene.hpp"

using namespace sglab;

TEST_CASE("severity 0 is the identity for every kind") {
  auto scenes = generate_dataset(3, 1, GeneratorConfig{});
  Tensor img = rasterize(scenes[0]);
  for (CorruptionKind kind : all_corruption_kinds()) {
    Tensor out = corrupt(img, {kind, 0}, 1234);
    CHECK(max_abs_diff(out, img) == 0.0);
  }
}

TEST_CASE("corrupt stays in [0,1] and finite for all kinds x severities") {
  GeneratorConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  auto scenes = generate_dataset(17, 100, cfg);
  for (CorruptionKind kind : all_corruption_kinds()) {
    for (int severity = 1; severity <= 5; ++severity) {
      for (const SceneRecord& s : scenes) {
        Tensor out = corrupt(rasterize(s), {kind, severity},
                             hash_mix(7, static_cast<std::uint64_t>(s.id)));
        for (double v : out.data) {
          REQUIRE(std::isfinite(v));
          REQUIRE(v >= 0.0);
          REQUIRE(v <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("gaussian noise determinism and sigma table") {
  auto scenes = generate_dataset(9, 1, GeneratorConfig{});
  Tensor img = rasterize(scenes[0]);
  Tensor a = corrupt(img, {CorruptionKind::GaussianNoise, 3}, 555);
  Tensor b = corrupt(img, {CorruptionKind::GaussianNoise, 3}, 555);
  CHECK(max_abs_diff(a, b) == 0.0);
  Tensor c = corrupt(img, {CorruptionKind::GaussianNoise, 3}, 556);
  CHECK(max_abs_diff(a, c) > 0.0);

  // documented sigma table
  CHECK(corruption_params::kGaussianSigma[0] == 0.04);
  CHECK(corruption_params::kGaussianSigma[4] == 0.26);

  // interior pixels (no clamping) move by exactly sigma * eta, with eta
  // shared across severities for a fixed seed
  Tensor s1 = corrupt(img, {CorruptionKind::GaussianNoise, 1}, 9999);
  Tensor s2 = corrupt(img, {CorruptionKind::GaussianNoise, 2}, 9999);
  int checked = 0;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    double d1 = s1.data[i] - img.data[i];
    double d2 = s2.data[i] - img.data[i];
    if (s1.data[i] <= 0.0 || s1.data[i] >= 1.0 || s2.data[i] <= 0.0 || s2.data[i] >= 1.0) {
      continue;  // clamped
    }
    CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("PSNR strictly decreases with gaussian severity") {
  auto scenes = generate_dataset(31, 1, GeneratorConfig{});
  Tensor img = rasterize(scenes[0]);
  double prev = std::numeric_limits<double>::infinity();
  for (int severity = 1; severity <= 5; ++severity) {
    Tensor out = corrupt(img, {CorruptionKind::GaussianNoise, severity}, 808);
    double p = psnr(img, out);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("corruption name round trip and errors") {
  for (CorruptionKind kind : all_corruption_kinds()) {
    CHECK(corruption_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS((void)corruption_from_string("fog"), UsageError);
  auto scenes = generate_dataset(1, 1, GeneratorConfig{});
  Tensor img = rasterize(scenes[0]);
  CHECK_THROWS_AS((void)corrupt(img, {CorruptionKind::GaussianNoise, 6}, 1), UsageError);
  CHECK_THROWS_AS((void)corrupt(Tensor::zeros({1, 4, 4}), {CorruptionKind::GaussianNoise, 1}, 1),
                  TensorError);
}

TEST_CASE("pixelate produces constant blocks") {
  GeneratorConfig cfg;
  auto scenes = generate_dataset(2, 1, cfg);
  Tensor img = rasterize(scenes[0]);
  Tensor out = corrupt(img, {CorruptionKind::Pixelate, 5}, 0);  // block 8
  for (int c = 0; c < 3; ++c) {
    for (int by = 0; by < 64; by += 8) {
      for (int bx = 0; bx < 64; bx += 8) {
        double v = out.at(c, by, bx);
        for (int y = by; y < by + 8; ++y) {
          for (int x = bx; x < bx + 8; ++x) REQUIRE(out.at(c, y, x) == v);
        }
      }
    }
  }
}
