// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/corruption.hpp"

#include <algorithm>
#include <cmath>

namespace sglab {

std::string to_string(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::GaussianNoise: return "gaussian_noise";
    case CorruptionKind::ImpulseNoise: return "impulse_noise";
    case CorruptionKind::DefocusBlur: return "defocus_blur";
    case CorruptionKind::MotionBlur: return "motion_blur";
    case CorruptionKind::Brightness: return "brightness";
    case CorruptionKind::Contrast: return "contrast";
    case CorruptionKind::Pixelate: return "pixelate";
    case CorruptionKind::JpegLikeBlock: return "jpeg_like_block";
  }
  return "gaussian_noise";
}

CorruptionKind corruption_from_string(const std::string& s) {
  for (CorruptionKind k : all_corruption_kinds()) {
    if (to_string(k) == s) return k;
  }
  throw UsageError("unknown corruption kind '" + s + "'");
}

const std::vector<CorruptionKind>& all_corruption_kinds() {
  static const std::vector<CorruptionKind> kinds = {
      CorruptionKind::GaussianNoise, CorruptionKind::ImpulseNoise, CorruptionKind::DefocusBlur,
      CorruptionKind::MotionBlur,    CorruptionKind::Brightness,   CorruptionKind::Contrast,
      CorruptionKind::Pixelate,      CorruptionKind::JpegLikeBlock};
  return kinds;
}

namespace {

using namespace corruption_params;

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline double sample_clamped(const Tensor& img, int c, int y, int x, int h, int w) {
  y = std::clamp(y, 0, h - 1);
  x = std::clamp(x, 0, w - 1);
  return img.data[(static_cast<std::size_t>(c) * h + y) * w + x];
}

Tensor gaussian_noise(const Tensor& img, double sigma, std::uint64_t seed) {
  Tensor out = img;
  std::int64_t n = img.numel();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    Rng rng(hash_mix(seed, static_cast<std::uint64_t>(i)));
    out.data[static_cast<std::size_t>(i)] =
        clamp01(img.data[static_cast<std::size_t>(i)] + sigma * rng.normal());
  }
  return out;
}

Tensor impulse_noise(const Tensor& img, double prob, std::uint64_t seed) {
  Tensor out = img;
  int h = img.dim(1), w = img.dim(2);
  int hw = h * w;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < hw; ++p) {
    Rng rng(hash_mix(seed, static_cast<std::uint64_t>(p)));
    if (rng.uniform() < prob) {
      double v = rng.uniform() < 0.5 ? 0.0 : 1.0;  // whole pixel goes salt or pepper
      for (int c = 0; c < 3; ++c) out.data[static_cast<std::size_t>(c) * hw + p] = v;
    }
  }
  return out;
}

Tensor disk_blur(const Tensor& img, int radius) {
  int h = img.dim(1), w = img.dim(2);
  std::vector<std::pair<int, int>> taps;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) taps.emplace_back(dy, dx);
    }
  }
  double inv = 1.0 / static_cast<double>(taps.size());
  Tensor out = Tensor::zeros(img.shape);
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (const auto& [dy, dx] : taps) acc += sample_clamped(img, c, y + dy, x + dx, h, w);
        out.data[(static_cast<std::size_t>(c) * h + y) * w + x] = acc * inv;
      }
    }
  }
  return out;
}

Tensor motion_blur(const Tensor& img, int length, std::uint64_t seed) {
  int h = img.dim(1), w = img.dim(2);
  // direction fixed per image; one of 0/45/90/135 degrees
  Rng rng(hash_mix(seed, 0x6d6f7469ull));
  int dir = rng.uniform_int(0, 3);
  int sy = dir == 0 ? 0 : (dir == 2 ? 1 : (dir == 1 ? 1 : -1));
  int sx = dir == 2 ? 0 : 1;
  int half = length / 2;
  double inv = 1.0 / static_cast<double>(2 * half + 1);
  Tensor out = Tensor::zeros(img.shape);
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t) {
          acc += sample_clamped(img, c, y + t * sy, x + t * sx, h, w);
        }
        out.data[(static_cast<std::size_t>(c) * h + y) * w + x] = acc * inv;
      }
    }
  }
  return out;
}

Tensor brightness(const Tensor& img, double shift) {
  Tensor out = img;
  for (double& v : out.data) v = clamp01(v + shift);
  return out;
}

Tensor contrast(const Tensor& img, double factor) {
  Tensor out = img;
  for (double& v : out.data) v = clamp01(0.5 + factor * (v - 0.5));
  return out;
}

Tensor pixelate(const Tensor& img, int block) {
  int h = img.dim(1), w = img.dim(2);
  Tensor out = Tensor::zeros(img.shape);
  int by = (h + block - 1) / block;
  int bx = (w + block - 1) / block;
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < by * bx; ++b) {
      int y0 = (b / bx) * block;
      int x0 = (b % bx) * block;
      int y1 = std::min(y0 + block, h);
      int x1 = std::min(x0 + block, w);
      double acc = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          acc += img.data[(static_cast<std::size_t>(c) * h + y) * w + x];
        }
      }
      double mean = acc / ((y1 - y0) * (x1 - x0));
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          out.data[(static_cast<std::size_t>(c) * h + y) * w + x] = mean;
        }
      }
    }
  }
  return out;
}

// 8x8 blockwise DCT-II; coefficients with u >= kept or v >= kept are zeroed.
// Partial edge tiles are reduced to their mean (the kept==1 behavior).
Tensor jpeg_like_block(const Tensor& img, int kept) {
  constexpr int kB = 8;
  int h = img.dim(1), w = img.dim(2);
  double basis[kB][kB];  // basis[u][p] = alpha(u) cos((2p+1)u pi / 16)
  for (int u = 0; u < kB; ++u) {
    double alpha = u == 0 ? std::sqrt(1.0 / kB) : std::sqrt(2.0 / kB);
    for (int p = 0; p < kB; ++p) {
      basis[u][p] = alpha * std::cos((2 * p + 1) * u * 3.14159265358979323846 / (2.0 * kB));
    }
  }
  Tensor out = img;
  int by = (h + kB - 1) / kB;
  int bx = (w + kB - 1) / kB;
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < by * bx; ++b) {
      int y0 = (b / bx) * kB;
      int x0 = (b % bx) * kB;
      int ny = std::min(kB, h - y0);
      int nx = std::min(kB, w - x0);
      const double* base = img.data.data() + static_cast<std::size_t>(c) * h * w;
      double* obase = out.data.data() + static_cast<std::size_t>(c) * h * w;
      if (ny < kB || nx < kB) {
        double acc = 0.0;
        for (int y = 0; y < ny; ++y) {
          for (int x = 0; x < nx; ++x) acc += base[(y0 + y) * w + x0 + x];
        }
        double mean = acc / (ny * nx);
        for (int y = 0; y < ny; ++y) {
          for (int x = 0; x < nx; ++x) obase[(y0 + y) * w + x0 + x] = mean;
        }
        continue;
      }
      double coef[kB][kB];
      for (int u = 0; u < kB; ++u) {
        for (int v = 0; v < kB; ++v) {
          if (u >= kept || v >= kept) {
            coef[u][v] = 0.0;
            continue;
          }
          double acc = 0.0;
          for (int y = 0; y < kB; ++y) {
            for (int x = 0; x < kB; ++x) {
              acc += base[(y0 + y) * w + x0 + x] * basis[u][y] * basis[v][x];
            }
          }
          coef[u][v] = acc;
        }
      }
      for (int y = 0; y < kB; ++y) {
        for (int x = 0; x < kB; ++x) {
          double acc = 0.0;
          for (int u = 0; u < kept; ++u) {
            for (int v = 0; v < kept; ++v) {
              acc += coef[u][v] * basis[u][y] * basis[v][x];
            }
          }
          obase[(y0 + y) * w + x0 + x] = clamp01(acc);
        }
      }
    }
  }
  return out;
}

}  // namespace

Tensor corrupt(const Tensor& image, const CorruptionSpec& spec, std::uint64_t seed) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw TensorError("corrupt: expected image [3,h,w], got " + shape_str(image.shape));
  }
  if (spec.severity < 0 || spec.severity > 5) {
    throw UsageError("corrupt: severity must be in [0,5]");
  }
  if (spec.severity == 0) return image;
  int s = spec.severity - 1;
  switch (spec.kind) {
    case CorruptionKind::GaussianNoise: return gaussian_noise(image, kGaussianSigma[s], seed);
    case CorruptionKind::ImpulseNoise: return impulse_noise(image, kImpulseProb[s], seed);
    case CorruptionKind::DefocusBlur: return disk_blur(image, kDefocusRadius[s]);
    case CorruptionKind::MotionBlur: return motion_blur(image, kMotionLength[s], seed);
    case CorruptionKind::Brightness: return brightness(image, kBrightnessShift[s]);
    case CorruptionKind::Contrast: return contrast(image, kContrastFactor[s]);
    case CorruptionKind::Pixelate: return pixelate(image, kPixelateBlock[s]);
    case CorruptionKind::JpegLikeBlock: return jpeg_like_block(image, kJpegKeptCoeffs[s]);
  }
  throw UsageError("corrupt: unknown corruption kind");
}

double psnr(const Tensor& a, const Tensor& b) {
  double mse = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    double d = a.data[static_cast<std::size_t>(i)] - b.data[static_cast<std::size_t>(i)];
    mse += d * d;
  }
  mse /= static_cast<double>(a.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace sglab
