// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sglab/geometry.hpp"
#include "sglab/tensor.hpp"

namespace sglab {

enum class ShapeKind { Rectangle, Ellipse, Triangle };

std::string to_string(ShapeKind s);
ShapeKind shape_from_string(const std::string& s);

// Object category fixes the shape and base color, so categories are visually
// learnable. Per-instance color jitter stays within the family.
struct ObjectSpec {
  int category = 0;
  ShapeKind shape = ShapeKind::Rectangle;
  std::array<double, 3> color{0.5, 0.5, 0.5};
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // pixels, x1 < x2, y1 < y2

  BoxN normalized(int canvas_w, int canvas_h) const {
    return {x1 / canvas_w, y1 / canvas_h, x2 / canvas_w, y2 / canvas_h};
  }
};

struct Relation {
  int subject = 0;
  int object = 0;
  int predicate = 0;

  bool operator==(const Relation&) const = default;
};

struct SceneRecord {
  int id = 0;
  int width = 64;
  int height = 64;
  std::vector<ObjectSpec> objects;
  std::vector<Relation> relations;
};

struct GeneratorConfig {
  int width = 64;
  int height = 64;
  int min_objects = 2;
  int max_objects = 6;
  int num_categories = 8;
  std::vector<std::string> predicates;  // defaults to the full rule set
  // Probability that a scene gets one object nested inside another, keeping
  // the rare `inside` predicate represented.
  double containment_prob = 0.25;

  GeneratorConfig();
  void validate() const;  // throws UsageError

  static GeneratorConfig from_json_file(const std::string& path);
};

// Geometric predicate rules. Each ordered pair (i,j) is assigned at most one
// predicate: the first rule in priority order (inside, overlapping, near,
// larger_than, left_of, above) that holds. Thresholds are fixed repo
// constants, documented in docs/formats.md.
namespace rules {
inline constexpr double kLeftOfMargin = 0.15;    // center_x gap, normalized
inline constexpr double kAboveMargin = 0.15;     // center_y gap, normalized
inline constexpr double kNearDistance = 0.25;    // center distance, normalized
inline constexpr double kOverlapIou = 0.15;      // IoU threshold
inline constexpr double kLargerAreaRatio = 2.0;  // area(subject) / area(object)

extern const std::vector<std::string> kAllPredicates;
}  // namespace rules

// Recomputes the relation list implied by object geometry. Generated scenes
// satisfy relations == relations_from_geometry(...) exactly.
std::vector<Relation> relations_from_geometry(const std::vector<ObjectSpec>& objects,
                                              int canvas_w, int canvas_h,
                                              const std::vector<std::string>& predicates);

std::vector<SceneRecord> generate_dataset(std::uint64_t seed, int n_scenes,
                                          const GeneratorConfig& config);

// Gray 0.5 background, objects painted in list order, values in [0,1].
Tensor rasterize(const SceneRecord& scene);

// Jitters each box corner uniformly within +-magnitude * (width or height),
// clamped to the canvas; degenerate boxes re-expanded to >= 2 px sides.
// Relations are left untouched.
SceneRecord perturb_boxes(const SceneRecord& scene, double magnitude, std::uint64_t seed);

std::vector<BoxN> normalized_boxes(const SceneRecord& scene);
std::vector<int> category_ids(const SceneRecord& scene);

// JSON-lines persistence; one SceneRecord per line. Byte-deterministic.
void save_jsonl(const std::string& path, const std::vector<SceneRecord>& scenes);
std::vector<SceneRecord> load_jsonl(const std::string& path);

}  // namespace sglab
