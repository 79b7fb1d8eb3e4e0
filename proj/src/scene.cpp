// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace sglab {

using nlohmann::json;

std::string to_string(ShapeKind s) {
  switch (s) {
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::Ellipse: return "ellipse";
    case ShapeKind::Triangle: return "triangle";
  }
  return "rectangle";
}

ShapeKind shape_from_string(const std::string& s) {
  if (s == "rectangle") return ShapeKind::Rectangle;
  if (s == "ellipse") return ShapeKind::Ellipse;
  if (s == "triangle") return ShapeKind::Triangle;
  throw FormatError("unknown shape '" + s + "'");
}

namespace rules {
const std::vector<std::string> kAllPredicates = {"left_of",     "above",  "near",
                                                 "overlapping", "inside", "larger_than"};
}  // namespace rules

GeneratorConfig::GeneratorConfig() : predicates(rules::kAllPredicates) {}

void GeneratorConfig::validate() const {
  if (width < 16 || height < 16) throw UsageError("generator: canvas must be at least 16x16");
  if (min_objects < 1 || max_objects < min_objects) {
    throw UsageError("generator: bad objects-per-scene range");
  }
  if (num_categories < 2 || num_categories > 8) {
    throw UsageError("generator: num_categories must be in [2,8]");
  }
  if (predicates.size() < 2) throw UsageError("generator: need at least 2 predicates");
  for (const auto& p : predicates) {
    if (std::find(rules::kAllPredicates.begin(), rules::kAllPredicates.end(), p) ==
        rules::kAllPredicates.end()) {
      throw UsageError("generator: unknown predicate '" + p + "'");
    }
  }
}

GeneratorConfig GeneratorConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open generator config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("bad generator config " + path + ": " + e.what());
  }
  GeneratorConfig c;
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  c.min_objects = j.value("min_objects", c.min_objects);
  c.max_objects = j.value("max_objects", c.max_objects);
  c.num_categories = j.value("num_categories", c.num_categories);
  c.containment_prob = j.value("containment_prob", c.containment_prob);
  if (j.contains("predicates")) c.predicates = j["predicates"].get<std::vector<std::string>>();
  c.validate();
  return c;
}

namespace {

struct CategoryStyle {
  ShapeKind shape;
  std::array<double, 3> color;
};

// category -> (shape, base color family)
const CategoryStyle kCategoryStyles[8] = {
    {ShapeKind::Rectangle, {0.85, 0.15, 0.15}}, {ShapeKind::Rectangle, {0.15, 0.75, 0.20}},
    {ShapeKind::Rectangle, {0.20, 0.30, 0.85}}, {ShapeKind::Ellipse, {0.90, 0.85, 0.15}},
    {ShapeKind::Ellipse, {0.85, 0.20, 0.80}},   {ShapeKind::Ellipse, {0.15, 0.80, 0.80}},
    {ShapeKind::Triangle, {0.90, 0.55, 0.15}},  {ShapeKind::Triangle, {0.55, 0.20, 0.80}},
};

constexpr int kMinSide = 8;  // px; keeps 30% corner jitter re-expansion-free

ObjectSpec make_object(int category, double x1, double y1, double x2, double y2, Rng& rng) {
  ObjectSpec o;
  o.category = category;
  const CategoryStyle& style = kCategoryStyles[category];
  o.shape = style.shape;
  for (int c = 0; c < 3; ++c) {
    double v = style.color[static_cast<std::size_t>(c)] + rng.uniform(-0.08, 0.08);
    o.color[static_cast<std::size_t>(c)] = std::clamp(v, 0.05, 0.95);
  }
  o.x1 = x1;
  o.y1 = y1;
  o.x2 = x2;
  o.y2 = y2;
  return o;
}

int predicate_index(const std::vector<std::string>& predicates, const char* name) {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

std::vector<Relation> relations_from_geometry(const std::vector<ObjectSpec>& objects,
                                              int canvas_w, int canvas_h,
                                              const std::vector<std::string>& predicates) {
  int p_inside = predicate_index(predicates, "inside");
  int p_overlap = predicate_index(predicates, "overlapping");
  int p_near = predicate_index(predicates, "near");
  int p_larger = predicate_index(predicates, "larger_than");
  int p_left = predicate_index(predicates, "left_of");
  int p_above = predicate_index(predicates, "above");

  std::vector<BoxN> boxes;
  boxes.reserve(objects.size());
  for (const auto& o : objects) boxes.push_back(o.normalized(canvas_w, canvas_h));

  std::vector<Relation> out;
  int n = static_cast<int>(objects.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const BoxN& a = boxes[static_cast<std::size_t>(i)];
      const BoxN& b = boxes[static_cast<std::size_t>(j)];
      int pred = -1;
      if (p_inside >= 0 && a.x1 >= b.x1 && a.y1 >= b.y1 && a.x2 <= b.x2 && a.y2 <= b.y2) {
        pred = p_inside;
      } else if (p_overlap >= 0 && iou(a, b) > rules::kOverlapIou) {
        pred = p_overlap;
      } else if (p_near >= 0 && std::hypot(a.cx() - b.cx(), a.cy() - b.cy()) <
                                    rules::kNearDistance) {
        pred = p_near;
      } else if (p_larger >= 0 && a.area() > rules::kLargerAreaRatio * b.area()) {
        pred = p_larger;
      } else if (p_left >= 0 && a.cx() < b.cx() - rules::kLeftOfMargin) {
        pred = p_left;
      } else if (p_above >= 0 && a.cy() < b.cy() - rules::kAboveMargin) {
        pred = p_above;
      }
      if (pred >= 0) out.push_back({i, j, pred});
    }
  }
  return out;
}

std::vector<SceneRecord> generate_dataset(std::uint64_t seed, int n_scenes,
                                          const GeneratorConfig& config) {
  config.validate();
  if (n_scenes < 1) throw UsageError("generate_dataset: n_scenes must be >= 1");

  std::vector<SceneRecord> scenes;
  scenes.reserve(static_cast<std::size_t>(n_scenes));
  for (int s = 0; s < n_scenes; ++s) {
    Rng rng(hash_mix(seed, static_cast<std::uint64_t>(s)));
    SceneRecord scene;
    scene.id = s;
    scene.width = config.width;
    scene.height = config.height;

    int n_obj = rng.uniform_int(config.min_objects, config.max_objects);
    bool add_contained = n_obj >= 2 && rng.uniform() < config.containment_prob;

    int max_w = std::min(config.width / 2, 28);
    int max_h = std::min(config.height / 2, 28);
    for (int o = 0; o < n_obj; ++o) {
      int category = rng.uniform_int(0, config.num_categories - 1);
      if (add_contained && o == 1) {
        // nest inside object 0 with a >= 2 px margin
        const ObjectSpec& host = scene.objects[0];
        int hw = static_cast<int>(host.x2 - host.x1);
        int hh = static_cast<int>(host.y2 - host.y1);
        if (hw >= kMinSide + 6 && hh >= kMinSide + 6) {
          int w = rng.uniform_int(kMinSide, hw - 5);
          int h = rng.uniform_int(kMinSide, hh - 5);
          int x1 = static_cast<int>(host.x1) + rng.uniform_int(2, hw - w - 2);
          int y1 = static_cast<int>(host.y1) + rng.uniform_int(2, hh - h - 2);
          scene.objects.push_back(make_object(category, x1, y1, x1 + w, y1 + h, rng));
          continue;
        }
      }
      int w = rng.uniform_int(kMinSide, max_w);
      int h = rng.uniform_int(kMinSide, max_h);
      if (add_contained && o == 0) {
        // make the host roomy enough for a nested child
        w = std::max(w, kMinSide + 8);
        h = std::max(h, kMinSide + 8);
      }
      int x1 = rng.uniform_int(0, config.width - w);
      int y1 = rng.uniform_int(0, config.height - h);
      scene.objects.push_back(make_object(category, x1, y1, x1 + w, y1 + h, rng));
    }

    scene.relations =
        relations_from_geometry(scene.objects, scene.width, scene.height, config.predicates);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

namespace {

bool point_in_object(const ObjectSpec& o, double px, double py) {
  if (px < o.x1 || px > o.x2 || py < o.y1 || py > o.y2) return false;
  switch (o.shape) {
    case ShapeKind::Rectangle:
      return true;
    case ShapeKind::Ellipse: {
      double rx = 0.5 * (o.x2 - o.x1);
      double ry = 0.5 * (o.y2 - o.y1);
      double dx = (px - 0.5 * (o.x1 + o.x2)) / rx;
      double dy = (py - 0.5 * (o.y1 + o.y2)) / ry;
      return dx * dx + dy * dy <= 1.0;
    }
    case ShapeKind::Triangle: {
      // apex at top center, base along the bottom edge
      double ax = 0.5 * (o.x1 + o.x2), ay = o.y1;
      double bx = o.x1, by = o.y2;
      double cx = o.x2, cy = o.y2;
      auto side = [](double x0, double y0, double x1, double y1, double x2, double y2) {
        return (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0);
      };
      double d1 = side(ax, ay, bx, by, px, py);
      double d2 = side(bx, by, cx, cy, px, py);
      double d3 = side(cx, cy, ax, ay, px, py);
      bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
      bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
      return !(has_neg && has_pos);
    }
  }
  return false;
}

}  // namespace

Tensor rasterize(const SceneRecord& scene) {
  int h = scene.height, w = scene.width;
  Tensor img = Tensor::full({3, h, w}, 0.5);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double px = x + 0.5, py = y + 0.5;
      // later objects paint over earlier ones
      for (const ObjectSpec& o : scene.objects) {
        if (point_in_object(o, px, py)) {
          for (int c = 0; c < 3; ++c) {
            img.data[(static_cast<std::size_t>(c) * h + y) * w + x] =
                o.color[static_cast<std::size_t>(c)];
          }
        }
      }
    }
  }
  return img;
}

SceneRecord perturb_boxes(const SceneRecord& scene, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0 || magnitude > 1.0) {
    throw UsageError("perturb_boxes: magnitude must be in [0,1]");
  }
  SceneRecord out = scene;
  if (magnitude == 0.0) return out;
  Rng rng(hash_mix(seed, static_cast<std::uint64_t>(scene.id)));
  for (ObjectSpec& o : out.objects) {
    double bw = o.x2 - o.x1;
    double bh = o.y2 - o.y1;
    double x1 = o.x1 + rng.uniform(-magnitude * bw, magnitude * bw);
    double x2 = o.x2 + rng.uniform(-magnitude * bw, magnitude * bw);
    double y1 = o.y1 + rng.uniform(-magnitude * bh, magnitude * bh);
    double y2 = o.y2 + rng.uniform(-magnitude * bh, magnitude * bh);
    x1 = std::clamp(x1, 0.0, static_cast<double>(scene.width));
    x2 = std::clamp(x2, 0.0, static_cast<double>(scene.width));
    y1 = std::clamp(y1, 0.0, static_cast<double>(scene.height));
    y2 = std::clamp(y2, 0.0, static_cast<double>(scene.height));
    if (x2 - x1 < 2.0) {
      double mid = std::clamp(0.5 * (x1 + x2), 1.0, scene.width - 1.0);
      x1 = mid - 1.0;
      x2 = mid + 1.0;
    }
    if (y2 - y1 < 2.0) {
      double mid = std::clamp(0.5 * (y1 + y2), 1.0, scene.height - 1.0);
      y1 = mid - 1.0;
      y2 = mid + 1.0;
    }
    o.x1 = x1;
    o.y1 = y1;
    o.x2 = x2;
    o.y2 = y2;
  }
  return out;
}

std::vector<BoxN> normalized_boxes(const SceneRecord& scene) {
  std::vector<BoxN> out;
  out.reserve(scene.objects.size());
  for (const auto& o : scene.objects) out.push_back(o.normalized(scene.width, scene.height));
  return out;
}

std::vector<int> category_ids(const SceneRecord& scene) {
  std::vector<int> out;
  out.reserve(scene.objects.size());
  for (const auto& o : scene.objects) out.push_back(o.category);
  return out;
}

namespace {

json scene_to_json(const SceneRecord& s) {
  json objs = json::array();
  for (const auto& o : s.objects) {
    objs.push_back({{"bbox", {o.x1, o.y1, o.x2, o.y2}},
                    {"category", o.category},
                    {"color", {o.color[0], o.color[1], o.color[2]}},
                    {"shape", to_string(o.shape)}});
  }
  json rels = json::array();
  for (const auto& r : s.relations) rels.push_back({r.subject, r.object, r.predicate});
  return {{"height", s.height},
          {"id", s.id},
          {"objects", objs},
          {"relations", rels},
          {"width", s.width}};
}

SceneRecord scene_from_json(const json& j) {
  SceneRecord s;
  try {
    s.id = j.at("id").get<int>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    for (const auto& jo : j.at("objects")) {
      ObjectSpec o;
      const auto& bb = jo.at("bbox");
      o.x1 = bb.at(0).get<double>();
      o.y1 = bb.at(1).get<double>();
      o.x2 = bb.at(2).get<double>();
      o.y2 = bb.at(3).get<double>();
      o.category = jo.at("category").get<int>();
      const auto& col = jo.at("color");
      o.color = {col.at(0).get<double>(), col.at(1).get<double>(), col.at(2).get<double>()};
      o.shape = shape_from_string(jo.at("shape").get<std::string>());
      if (o.x1 >= o.x2 || o.y1 >= o.y2) throw FormatError("degenerate bbox in scene record");
      s.objects.push_back(o);
    }
    for (const auto& jr : j.at("relations")) {
      Relation r{jr.at(0).get<int>(), jr.at(1).get<int>(), jr.at(2).get<int>()};
      if (r.subject == r.object) throw FormatError("self-relation in scene record");
      s.relations.push_back(r);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad scene record: ") + e.what());
  }
  return s;
}

}  // namespace

void save_jsonl(const std::string& path, const std::vector<SceneRecord>& scenes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  for (const auto& s : scenes) out << scene_to_json(s).dump() << "\n";
}

std::vector<SceneRecord> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + path);
  std::vector<SceneRecord> scenes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("bad dataset line " + std::to_string(scenes.size() + 1) + ": " +
                        e.what());
    }
    scenes.push_back(scene_from_json(j));
  }
  return scenes;
}

}  // namespace sglab
