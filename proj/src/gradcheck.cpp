// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "sglab/model.hpp"

namespace sglab {

namespace {

constexpr double kOpTol = 1e-5;
constexpr double kPipelineTol = 1e-4;

// Reduces any node to a scalar via a fixed random projection so every output
// coordinate contributes to the checked gradient.
Tape::NodeId project_to_scalar(Tape& t, Tape::NodeId x, const Tensor& weights) {
  int n = static_cast<int>(t.value(x).numel());
  Tape::NodeId flat = t.reshape(x, {1, n});
  return t.matmul(flat, t.constant(Tensor({n, 1}, weights.data)));
}

Tensor random_tensor(Rng& rng, const std::vector<int>& shape, double lo = -1.0, double hi = 1.0) {
  return Tensor::uniform(shape, rng, lo, hi);
}

// Uniform over +-[0.1, 1.1]: keeps relu inputs away from the kink.
Tensor random_tensor_off_kink(Rng& rng, const std::vector<int>& shape) {
  Tensor t = Tensor::zeros(shape);
  for (double& v : t.data) {
    double m = rng.uniform(0.1, 1.1);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

struct OpCheck {
  std::string name;
  // builds the graph from the (single) differentiated input node
  std::function<Tape::NodeId(Tape&, Tape::NodeId)> build;
  Tensor x;
  double step = 1e-5;
};

double run_op_check(const OpCheck& c, Rng& rng) {
  Tensor proj;  // fixed projection, sized lazily from the output
  {
    Tape t;
    Tape::NodeId in = t.input(c.x);
    Tape::NodeId out = c.build(t, in);
    proj = random_tensor(rng, {static_cast<int>(t.value(out).numel())});
    Tape::NodeId loss = project_to_scalar(t, out, proj);
    t.backward(loss);
    Tensor analytic = t.grad(in);
    auto f = [&](const Tensor& probe) {
      Tape t2;
      Tape::NodeId in2 = t2.input(probe);
      Tape::NodeId out2 = c.build(t2, in2);
      return t2.value(project_to_scalar(t2, out2, proj)).item();
    };
    return finite_diff_check(f, c.x, analytic, c.step);
  }
}

// Fixed two-object scene on a 16x16 canvas for the full composition check.
SceneRecord tiny_scene() {
  SceneRecord s;
  s.id = 0;
  s.width = 16;
  s.height = 16;
  ObjectSpec a;
  a.category = 0;
  a.shape = ShapeKind::Rectangle;
  a.color = {0.8, 0.2, 0.2};
  a.x1 = 1;
  a.y1 = 2;
  a.x2 = 7;
  a.y2 = 9;
  ObjectSpec b;
  b.category = 1;
  b.shape = ShapeKind::Ellipse;
  b.color = {0.2, 0.4, 0.9};
  b.x1 = 8;
  b.y1 = 6;
  b.x2 = 15;
  b.y2 = 14;
  s.objects = {a, b};
  s.relations = relations_from_geometry(s.objects, s.width, s.height, rules::kAllPredicates);
  return s;
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.num_categories = 4;
  cfg.num_predicates = 6;
  cfg.feature_dim = 16;
  cfg.cat_embed_dim = 8;
  cfg.box_embed_dim = 8;
  cfg.backbone_channels = {4, 6, 8};
  cfg.enable_nrm = true;
  cfg.enable_lee = true;
  cfg.fusion = FusionMode::Gate;
  cfg.attention = AttentionMode::Centroid;
  cfg.task = Task::SGCls;  // exercises both loss terms
  return cfg;
}

double full_pipeline_loss(ModelParams& mp, const SceneRecord& scene, const Tensor& image) {
  ForwardArtifacts art =
      forward_graph(image, normalized_boxes(scene), category_ids(scene), mp);
  Tape::NodeId loss = loss_node(art, scene, mp.config);
  return art.tape.value(loss).item();
}

// Gradient of the loss w.r.t. the image, checked densely, plus sampled
// coordinates of every parameter tensor.
double run_pipeline_check(std::uint64_t seed) {
  SceneRecord scene = tiny_scene();
  Tensor image = rasterize(scene);
  ModelParams mp = ModelParams::init(tiny_config(), seed);
  const double step = 1e-6;
  double worst = 0.0;

  // d(loss)/d(image), every pixel
  {
    ForwardArtifacts art = forward_graph(image, normalized_boxes(scene), category_ids(scene),
                                         mp, /*diff_image=*/true);
    Tape::NodeId loss = loss_node(art, scene, mp.config);
    mp.zero_grads();
    art.tape.backward(loss);
    Tensor analytic = art.tape.grad(art.image);
    mp.zero_grads();
    auto f = [&](const Tensor& probe) { return full_pipeline_loss(mp, scene, probe); };
    worst = std::max(worst, finite_diff_check(f, image, analytic, step));
  }

  // d(loss)/d(params), sampled coordinates per tensor
  ModelParams grads = ModelParams::init(tiny_config(), seed);  // same layout, holds analytic g
  {
    ForwardArtifacts a2 =
        forward_graph(image, normalized_boxes(scene), category_ids(scene), mp);
    Tape::NodeId loss = loss_node(a2, scene, mp.config);
    mp.zero_grads();
    a2.tape.backward(loss);
    for (std::size_t i = 0; i < mp.all().size(); ++i) {
      grads.all()[i].value = mp.all()[i].grad;
    }
    mp.zero_grads();
  }
  Rng rng(hash_mix(seed, 0xC0DE));
  for (Param& p : mp.all()) {
    std::vector<std::int64_t> coords;
    std::int64_t n = p.value.numel();
    if (n <= 6) {
      for (std::int64_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < 6; ++i) {
        coords.push_back(rng.uniform_int(0, static_cast<int>(n) - 1));
      }
    }
    const Tensor analytic = grads.at(p.name).value;
    Tensor original = p.value;
    auto f = [&](const Tensor& probe) {
      p.value = probe;
      double v = full_pipeline_loss(mp, scene, image);
      return v;
    };
    double err = finite_diff_check(f, original, analytic, step, coords);
    p.value = original;
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

void GradCheckReport::print(std::ostream& os) const {
  for (const GradCheckRow& r : rows) {
    os << (r.pass ? "  ok   " : "  FAIL ") << r.name << "  max_rel_err=" << r.max_rel_err
       << "  tol=" << r.tolerance << "\n";
  }
  os << (all_pass ? "gradcheck: all checks passed\n" : "gradcheck: FAILURES above\n");
}

GradCheckReport run_gradcheck(int seeds) {
  GradCheckReport report;
  auto record = [&](const std::string& name, double err, double tol, bool pipeline) {
    GradCheckRow row{name, err, tol, err < tol};
    report.all_pass = report.all_pass && row.pass;
    if (pipeline) {
      report.worst_pipeline_err = std::max(report.worst_pipeline_err, err);
    } else {
      report.worst_op_err = std::max(report.worst_op_err, err);
    }
    report.rows.push_back(std::move(row));
  };

  for (int s = 0; s < seeds; ++s) {
    std::uint64_t seed = static_cast<std::uint64_t>(s) + 1;
    Rng rng(hash_mix(seed, 0xA11));
    std::string tag = " (seed " + std::to_string(seed) + ")";

    std::vector<OpCheck> checks;
    {
      Tensor b = random_tensor(rng, {4, 3});
      checks.push_back({"add", [b](Tape& t, Tape::NodeId x) { return t.add(x, t.input(b)); },
                        random_tensor(rng, {4, 3})});
      Tensor bb = random_tensor(rng, {4, 1});
      checks.push_back({"add broadcast",
                        [bb](Tape& t, Tape::NodeId x) { return t.add(x, t.input(bb)); },
                        random_tensor(rng, {4, 3})});
      Tensor bs = random_tensor(rng, {3, 5});
      checks.push_back({"sub", [bs](Tape& t, Tape::NodeId x) { return t.sub(t.input(bs), x); },
                        random_tensor(rng, {3, 5})});
      Tensor bm = random_tensor(rng, {1, 5});
      checks.push_back({"mul broadcast",
                        [bm](Tape& t, Tape::NodeId x) { return t.mul(x, t.input(bm)); },
                        random_tensor(rng, {2, 5})});
      Tensor sc = random_tensor(rng, {1});
      checks.push_back({"mul scalar",
                        [sc](Tape& t, Tape::NodeId x) { return t.mul(x, t.input(sc)); },
                        random_tensor(rng, {3, 4})});
      Tensor mb = random_tensor(rng, {5, 3});
      checks.push_back({"matmul lhs",
                        [mb](Tape& t, Tape::NodeId x) { return t.matmul(x, t.input(mb)); },
                        random_tensor(rng, {4, 5})});
      Tensor ma = random_tensor(rng, {4, 5});
      checks.push_back({"matmul rhs",
                        [ma](Tape& t, Tape::NodeId x) { return t.matmul(t.input(ma), x); },
                        random_tensor(rng, {5, 3})});
      Tensor lw = random_tensor(rng, {4, 7});
      Tensor lb = random_tensor(rng, {4});
      checks.push_back({"linear x",
                        [lw, lb](Tape& t, Tape::NodeId x) {
                          return t.linear(x, t.input(lw), t.input(lb));
                        },
                        random_tensor(rng, {3, 7})});
      Tensor lx = random_tensor(rng, {3, 7});
      checks.push_back({"linear w",
                        [lx, lb](Tape& t, Tape::NodeId w) {
                          return t.linear(t.input(lx), w, t.input(lb));
                        },
                        lw});
      checks.push_back({"relu", [](Tape& t, Tape::NodeId x) { return t.relu(x); },
                        random_tensor_off_kink(rng, {3, 6})});
      checks.push_back({"sigmoid", [](Tape& t, Tape::NodeId x) { return t.sigmoid(x); },
                        random_tensor(rng, {2, 5}, -3.0, 3.0)});
      checks.push_back({"softmax_lastdim",
                        [](Tape& t, Tape::NodeId x) { return t.softmax_lastdim(x); },
                        random_tensor(rng, {3, 6}, -2.0, 2.0)});
      std::vector<int> labels = {1, 0, 3};
      checks.push_back({"cross_entropy",
                        [labels](Tape& t, Tape::NodeId x) {
                          return t.cross_entropy(x, labels);
                        },
                        random_tensor(rng, {3, 4}, -2.0, 2.0)});
      Tensor cw = random_tensor(rng, {3, 2, 3, 3}, -0.4, 0.4);
      Tensor cb = random_tensor(rng, {3}, -0.2, 0.2);
      checks.push_back({"conv2d x",
                        [cw, cb](Tape& t, Tape::NodeId x) {
                          return t.conv2d(x, t.input(cw), t.input(cb), 2, 1);
                        },
                        random_tensor(rng, {2, 8, 8})});
      Tensor cx = random_tensor(rng, {2, 8, 8});
      checks.push_back({"conv2d w",
                        [cx, cb](Tape& t, Tape::NodeId w) {
                          return t.conv2d(t.input(cx), w, t.input(cb), 2, 1);
                        },
                        cw});
      checks.push_back({"instance_norm",
                        [](Tape& t, Tape::NodeId x) { return t.instance_norm(x, kNrmEps); },
                        random_tensor(rng, {3, 6, 6})});
      std::vector<BoxN> boxes = {{0.1, 0.1, 0.5, 0.6}, {0.4, 0.3, 0.9, 0.9}, {0.0, 0.7, 0.3, 1.0}};
      checks.push_back({"roi_rows",
                        [boxes](Tape& t, Tape::NodeId x) { return t.roi_rows(x, boxes); },
                        random_tensor(rng, {2, 4, 4})});
      std::vector<int> ids = {0, 2, 2, 4};
      checks.push_back({"embed_rows",
                        [ids](Tape& t, Tape::NodeId x) { return t.embed_rows(x, ids); },
                        random_tensor(rng, {5, 4})});
      Tensor p1 = random_tensor(rng, {3, 2});
      Tensor p2 = random_tensor(rng, {3, 4});
      checks.push_back({"concat_cols",
                        [p1, p2](Tape& t, Tape::NodeId x) {
                          return t.concat_cols({t.input(p1), x, t.input(p2)});
                        },
                        random_tensor(rng, {3, 3})});
      std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 0}, {0, 2}, {2, 1}};
      Tensor uni = random_tensor(rng, {4, 2});
      checks.push_back({"pair_concat obj",
                        [pairs, uni](Tape& t, Tape::NodeId x) {
                          return t.pair_concat(x, t.input(uni), pairs);
                        },
                        random_tensor(rng, {3, 4})});
      Layout layout = Layout::from_boxes(boxes);
      checks.push_back({"nrm_forward",
                        [layout](Tape& t, Tape::NodeId x) {
                          return nrm_forward_node(t, x, layout, kNrmEps, AttentionMode::Centroid);
                        },
                        random_tensor(rng, {3, 8, 8})});
      checks.push_back({"nrm_forward bbox",
                        [layout](Tape& t, Tape::NodeId x) {
                          return nrm_forward_node(t, x, layout, kNrmEps, AttentionMode::Bbox);
                        },
                        random_tensor(rng, {2, 8, 8})});
    }
    for (const OpCheck& c : checks) {
      record(c.name + tag, run_op_check(c, rng), kOpTol, false);
    }

    // gate fusion across all modes, differentiating the visual feature
    for (FusionMode mode : {FusionMode::Gate, FusionMode::ConcatProj, FusionMode::Add}) {
      Param gate_w("gate.w", random_tensor(rng, {6, 6}, -0.5, 0.5));
      Param proj_w("proj.w", random_tensor(rng, {6, 12}, -0.5, 0.5));
      Tensor fc = random_tensor(rng, {2, 6});
      OpCheck c{"gate_fuse " + to_string(mode),
                [&gate_w, &proj_w, fc, mode](Tape& t, Tape::NodeId f) {
                  return gate_fuse_rows(t, f, t.input(fc), gate_w, proj_w, mode).out;
                },
                random_tensor(rng, {2, 6})};
      record(c.name + tag, run_op_check(c, rng), kOpTol, false);
    }

    record("pipeline forward-to-loss" + tag, run_pipeline_check(seed), kPipelineTol, true);
  }
  return report;
}

}  // namespace sglab
