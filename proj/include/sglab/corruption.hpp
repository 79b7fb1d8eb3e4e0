// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sglab/tensor.hpp"

namespace sglab {

enum class CorruptionKind {
  GaussianNoise,
  ImpulseNoise,
  DefocusBlur,
  MotionBlur,
  Brightness,
  Contrast,
  Pixelate,
  JpegLikeBlock,
};

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::GaussianNoise;
  int severity = 0;  // 0 = identity, 1..5 increasing
};

std::string to_string(CorruptionKind k);
CorruptionKind corruption_from_string(const std::string& s);
const std::vector<CorruptionKind>& all_corruption_kinds();

// Per-severity parameter tables (severity 1..5). Repo constants; the full
// table is documented in docs/corruptions.md.
namespace corruption_params {
inline constexpr double kGaussianSigma[5] = {0.04, 0.08, 0.12, 0.18, 0.26};
inline constexpr double kImpulseProb[5] = {0.02, 0.04, 0.08, 0.14, 0.22};
inline constexpr int kDefocusRadius[5] = {1, 2, 3, 4, 6};
inline constexpr int kMotionLength[5] = {3, 5, 7, 9, 13};
inline constexpr double kBrightnessShift[5] = {0.08, 0.16, 0.26, 0.38, 0.52};
inline constexpr double kContrastFactor[5] = {0.75, 0.55, 0.40, 0.28, 0.18};
inline constexpr int kPixelateBlock[5] = {2, 3, 4, 6, 8};
inline constexpr int kJpegKeptCoeffs[5] = {5, 4, 3, 2, 1};  // of each 8x8 DCT axis
}  // namespace corruption_params

// Deterministic given (image, spec, seed); output clamped to [0,1].
// Severity 0 returns the input unchanged for every kind. Noise values are
// derived per pixel from the seed, so results do not depend on thread count.
Tensor corrupt(const Tensor& image, const CorruptionSpec& spec, std::uint64_t seed);

// 10*log10(1/MSE) with peak 1.0; +inf for identical images.
double psnr(const Tensor& a, const Tensor& b);

}  // namespace sglab
