// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace sglab {

// Axis-aligned box in normalized [0,1] coordinates, x1 < x2 and y1 < y2.
struct BoxN {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
};

inline BoxN union_box(const BoxN& a, const BoxN& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1),
          std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

inline double iou(const BoxN& a, const BoxN& b) {
  double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Squared distance from point (px,py) to the box; zero inside.
inline double dist2_point_box(double px, double py, const BoxN& b) {
  double dx = std::max({b.x1 - px, 0.0, px - b.x2});
  double dy = std::max({b.y1 - py, 0.0, py - b.y2});
  return dx * dx + dy * dy;
}

// Flat h*w indices of grid cells whose centers ((x+0.5)/w, (y+0.5)/h) fall
// inside the box. Empty selection falls back to the single cell whose center
// is nearest to the box center (first in scan order on ties).
std::vector<int> roi_cells(const BoxN& box, int h, int w);

}  // namespace sglab
