// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sglab {

struct GradCheckRow {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  bool all_pass = true;
  double worst_op_err = 0.0;        // ops checked at 1e-5
  double worst_pipeline_err = 0.0;  // full composition checked at 1e-4

  void print(std::ostream& os) const;
};

// Central finite-difference checks for every differentiable operation plus
// the full forward-to-loss composition with NRM and LEE enabled, repeated
// over `seeds` random draws. Small shapes keep the sweep under a second per
// seed; the full composition samples a random subset of coordinates of each
// parameter tensor and checks the image gradient densely.
GradCheckReport run_gradcheck(int seeds);

}  // namespace sglab
