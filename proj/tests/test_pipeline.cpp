// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "sglab/model.hpp"

using namespace sglab;

namespace {

ModelConfig small_config(Task task = Task::PredCls) {
  ModelConfig cfg;
  cfg.feature_dim = 24;
  cfg.cat_embed_dim = 8;
  cfg.box_embed_dim = 8;
  cfg.backbone_channels = {4, 6, 8};
  cfg.task = task;
  return cfg;
}

GeneratorConfig small_scenes_config() {
  GeneratorConfig g;
  g.width = 32;
  g.height = 32;
  return g;
}

}  // namespace

TEST_CASE("roi_rows: constant map, full box, scalar-loop oracle") {
  Rng rng(3);
  Tape t;
  Tape::NodeId fmap = t.constant(Tensor::full({5, 4, 4}, 2.5));
  Tape::NodeId rows = t.roi_rows(fmap, {{0.3, 0.3, 0.7, 0.9}});
  for (double v : t.value(rows).data) CHECK(v == 2.5);

  // box (0,0,1,1) is the global average pool
  Tensor fm = Tensor::uniform({3, 4, 4}, rng, -2, 2);
  Tape t2;
  Tape::NodeId rows2 = t2.roi_rows(t2.constant(fm), {{0.0, 0.0, 1.0, 1.0}});
  for (int c = 0; c < 3; ++c) {
    double mean = 0;
    for (int p = 0; p < 16; ++p) mean += fm.data[static_cast<std::size_t>(c * 16 + p)];
    mean /= 16;
    CHECK(t2.value(rows2).at(0, c) == doctest::Approx(mean).epsilon(1e-12));
  }

  // random box equals the scalar-loop average over covered cells
  BoxN box{0.26, 0.1, 0.8, 0.65};
  Tape t3;
  Tape::NodeId rows3 = t3.roi_rows(t3.constant(fm), {box});
  auto cells = roi_cells(box, 4, 4);
  REQUIRE(!cells.empty());
  for (int c = 0; c < 3; ++c) {
    double mean = 0;
    for (int cell : cells) mean += fm.data[static_cast<std::size_t>(c * 16 + cell)];
    mean /= static_cast<double>(cells.size());
    CHECK(t3.value(rows3).at(0, c) == doctest::Approx(mean).epsilon(1e-12));
  }

  // degenerate sliver falls back to the single nearest cell
  auto tiny = roi_cells({0.49, 0.49, 0.495, 0.495}, 4, 4);
  CHECK(tiny.size() == 1);
}

TEST_CASE("union_box properties") {
  BoxN a{0.0, 0.0, 0.2, 0.2};
  BoxN b{0.5, 0.5, 0.8, 0.8};
  BoxN u = union_box(a, b);
  CHECK(u.x1 == 0.0);
  CHECK(u.y1 == 0.0);
  CHECK(u.x2 == 0.8);
  CHECK(u.y2 == 0.8);

  BoxN same = union_box(a, a);
  CHECK(same.x1 == a.x1);
  CHECK(same.x2 == a.x2);

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    BoxN p{rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0.5, 1), rng.uniform(0.5, 1)};
    BoxN q{rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0.5, 1), rng.uniform(0.5, 1)};
    BoxN pq = union_box(p, q), qp = union_box(q, p);
    CHECK(pq.x1 == qp.x1);
    CHECK(pq.y1 == qp.y1);
    CHECK(pq.x2 == qp.x2);
    CHECK(pq.y2 == qp.y2);
  }
}

TEST_CASE("backbone output shape and zero-input behavior") {
  ModelParams mp = ModelParams::init(small_config(), 1);
  auto scenes = generate_dataset(2, 1, small_scenes_config());
  ForwardArtifacts art = forward_graph(rasterize(scenes[0]), normalized_boxes(scenes[0]),
                                       category_ids(scenes[0]), mp);
  CHECK(art.tape.value(art.object_logits).dim(1) == 8);

  // zero filters + zero image -> zero logits bias only
  for (Param& p : mp.all()) std::fill(p.value.data.begin(), p.value.data.end(), 0.0);
  ForwardArtifacts zart = forward_graph(Tensor::zeros({3, 32, 32}), normalized_boxes(scenes[0]),
                                        category_ids(scenes[0]), mp);
  CHECK(max_abs_diff(zart.tape.value(zart.object_logits),
                     Tensor::zeros(zart.tape.value(zart.object_logits).shape)) == 0.0);

  CHECK_THROWS_AS(
      (void)forward_graph(Tensor::zeros({3, 30, 30}), normalized_boxes(scenes[0]),
                          category_ids(scenes[0]), mp),
      TensorError);
}

TEST_CASE("baseline equivalence: flags off reproduces the plain pipeline bit-for-bit") {
  auto scenes = generate_dataset(21, 3, small_scenes_config());
  ModelConfig base_cfg = small_config();
  ModelConfig full_cfg = base_cfg;
  full_cfg.enable_nrm = false;
  full_cfg.enable_lee = false;

  // same seed -> shared params identical even though the configs differ
  ModelParams a = ModelParams::init(base_cfg, 7);
  ModelParams b = ModelParams::init(full_cfg, 7);
  for (std::size_t i = 0; i < a.all().size(); ++i) {
    CHECK(max_abs_diff(a.all()[i].value, b.all()[i].value) == 0.0);
  }

  for (const SceneRecord& s : scenes) {
    Tensor img = rasterize(s);
    Prediction pa = predict(s, img, normalized_boxes(s), a);
    Prediction pb = predict(s, img, normalized_boxes(s), b);
    CHECK(max_abs_diff(pa.predicate_probs, pb.predicate_probs) == 0.0);
    CHECK(pa.object_labels == pb.object_labels);
  }

  // disabling LEE on a LEE-capable param set bypasses fusion entirely
  ModelConfig lee_cfg = base_cfg;
  lee_cfg.enable_lee = true;
  ModelParams c = ModelParams::init(lee_cfg, 7);
  ModelConfig off_cfg = lee_cfg;
  off_cfg.enable_lee = false;
  ModelParams d = ModelParams::init(off_cfg, 7);
  const SceneRecord& s = scenes[0];
  Tensor img = rasterize(s);
  Prediction pc = predict(s, img, normalized_boxes(s), c);
  Prediction pd = predict(s, img, normalized_boxes(s), d);
  CHECK(max_abs_diff(pc.predicate_probs, pd.predicate_probs) > 0.0);  // LEE changes outputs
  CHECK(pc.gate_mean_obj >= 0.0);
  CHECK(pd.gate_mean_obj == -1.0);
}

TEST_CASE("PredCls clamps object outputs to ground truth") {
  auto scenes = generate_dataset(33, 2, small_scenes_config());
  ModelParams mp = ModelParams::init(small_config(Task::PredCls), 3);
  for (const SceneRecord& s : scenes) {
    Prediction p = predict(s, rasterize(s), normalized_boxes(s), mp);
    CHECK(p.object_labels == category_ids(s));
    for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
      CHECK(p.object_probs.at(i, s.objects[static_cast<std::size_t>(i)].category) == 1.0);
    }
    // triplet scores reduce to the predicate probability
    for (const RankedTriplet& tr : p.triplets) {
      CHECK(tr.score > 0.0);
      CHECK(tr.score <= 1.0);
    }
  }
}

TEST_CASE("triplet ranking is a strict total order under the tie-break") {
  auto scenes = generate_dataset(41, 2, small_scenes_config());
  ModelParams mp = ModelParams::init(small_config(), 5);
  for (const SceneRecord& s : scenes) {
    Prediction p = predict(s, rasterize(s), normalized_boxes(s), mp);
    int n = static_cast<int>(s.objects.size());
    auto pair_index = [n](const RankedTriplet& t) {
      return t.subject * (n - 1) + (t.object > t.subject ? t.object - 1 : t.object);
    };
    for (std::size_t i = 1; i < p.triplets.size(); ++i) {
      const RankedTriplet& hi = p.triplets[i - 1];
      const RankedTriplet& lo = p.triplets[i];
      bool strictly_ordered =
          hi.score > lo.score ||
          (hi.score == lo.score && pair_index(hi) < pair_index(lo)) ||
          (hi.score == lo.score && pair_index(hi) == pair_index(lo) &&
           hi.predicate < lo.predicate);
      REQUIRE(strictly_ordered);
    }
  }
}

TEST_CASE("compute_loss: perfect predictions, non-negativity, hand oracle") {
  auto scenes = generate_dataset(55, 4, small_scenes_config());
  ModelParams mp = ModelParams::init(small_config(), 9);
  for (const SceneRecord& s : scenes) {
    Prediction p = predict(s, rasterize(s), normalized_boxes(s), mp);
    double loss = compute_loss(p, s, Task::PredCls);
    CHECK(loss >= 0.0);

    // perfect one-hot predicate predictions drive the loss to ~0
    Prediction perfect = p;
    int bg = perfect.predicate_probs.dim(1) - 1;
    for (int m = 0; m < perfect.predicate_probs.dim(0); ++m) {
      for (int q = 0; q <= bg; ++q) perfect.predicate_probs.at(m, q) = 1e-12;
    }
    for (std::size_t m = 0; m < perfect.pairs.size(); ++m) {
      int label = bg;
      for (const Relation& r : s.relations) {
        if (r.subject == perfect.pairs[m].first && r.object == perfect.pairs[m].second) {
          label = r.predicate;
          break;
        }
      }
      perfect.predicate_probs.at(static_cast<int>(m), label) = 1.0;
    }
    CHECK(compute_loss(perfect, s, Task::PredCls) < 1e-4);
  }

  // hand-computed two-object scene
  SceneRecord s2;
  s2.width = 32;
  s2.height = 32;
  ObjectSpec o1;
  o1.category = 0;
  o1.x1 = 0;
  o1.y1 = 0;
  o1.x2 = 8;
  o1.y2 = 8;
  ObjectSpec o2 = o1;
  o2.category = 1;
  o2.x1 = 20;
  o2.x2 = 30;
  s2.objects = {o1, o2};
  s2.relations = {{0, 1, 2}};
  Prediction hand;
  hand.pairs = {{0, 1}, {1, 0}};
  hand.object_probs = Tensor({2, 2}, {1, 0, 0, 1});
  hand.predicate_probs = Tensor({2, 4}, {0.1, 0.2, 0.4, 0.3, 0.25, 0.25, 0.25, 0.25});
  hand.object_labels = {0, 1};
  double expect = -(std::log(0.4) + std::log(0.25)) / 2.0;  // pair (0,1) label 2; (1,0) bg
  CHECK(compute_loss(hand, s2, Task::PredCls) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("training decreases the loss and is deterministic") {
  GeneratorConfig g = small_scenes_config();
  auto scenes = generate_dataset(71, 50, g);
  ModelConfig cfg = small_config();

  ModelParams m1 = ModelParams::init(cfg, 11);
  TrainResult r1 = train(scenes, m1, 0.05, 5, 11);
  REQUIRE(r1.epoch_mean_loss.size() == 5);

  int decreasing = 0;
  for (int e = 1; e < 5; ++e) {
    if (r1.epoch_mean_loss[static_cast<std::size_t>(e)] <
        r1.epoch_mean_loss[static_cast<std::size_t>(e - 1)]) {
      ++decreasing;
    }
  }
  CHECK(decreasing >= 3);

  ModelParams m2 = ModelParams::init(cfg, 11);
  TrainResult r2 = train(scenes, m2, 0.05, 5, 11);
  CHECK(r1.epoch_mean_loss == r2.epoch_mean_loss);
  for (std::size_t i = 0; i < m1.all().size(); ++i) {
    CHECK(max_abs_diff(m1.all()[i].value, m2.all()[i].value) == 0.0);
  }

  // lr = 0 leaves parameters untouched
  ModelParams m3 = ModelParams::init(cfg, 11);
  ModelParams m4 = ModelParams::init(cfg, 11);
  train(scenes, m3, 0.0, 1, 11);
  for (std::size_t i = 0; i < m3.all().size(); ++i) {
    CHECK(max_abs_diff(m3.all()[i].value, m4.all()[i].value) == 0.0);
  }
}

TEST_CASE("gradient checks still pass after one epoch of training") {
  GeneratorConfig g = small_scenes_config();
  auto scenes = generate_dataset(91, 10, g);
  ModelConfig cfg = small_config(Task::SGCls);
  cfg.enable_nrm = true;
  cfg.enable_lee = true;
  ModelParams mp = ModelParams::init(cfg, 2);
  train(scenes, mp, 0.05, 1, 2);

  const SceneRecord& scene = scenes[0];
  Tensor image = rasterize(scene);
  ForwardArtifacts art =
      forward_graph(image, normalized_boxes(scene), category_ids(scene), mp);
  Tape::NodeId loss = loss_node(art, scene, mp.config);
  mp.zero_grads();
  art.tape.backward(loss);

  Rng rng(5);
  double worst = 0.0;
  for (Param* p : mp.pointers()) {
    std::vector<std::int64_t> coords;
    for (int i = 0; i < 4 && i < p->value.numel(); ++i) {
      coords.push_back(rng.uniform_int(0, static_cast<int>(p->value.numel()) - 1));
    }
    Tensor analytic = p->grad;
    Tensor original = p->value;
    auto f = [&](const Tensor& probe) {
      p->value = probe;
      ForwardArtifacts a2 =
          forward_graph(image, normalized_boxes(scene), category_ids(scene), mp);
      double v = a2.tape.value(loss_node(a2, scene, mp.config)).item();
      return v;
    };
    worst = std::max(worst, finite_diff_check(f, original, analytic, 1e-6, coords));
    p->value = original;
  }
  mp.zero_grads();
  CHECK(worst < 1e-4);
}

TEST_CASE("model save/load round trip is bit exact") {
  ModelConfig cfg = small_config();
  cfg.enable_nrm = true;
  cfg.enable_lee = true;
  cfg.fusion = FusionMode::ConcatProj;
  cfg.attention = AttentionMode::Bbox;
  ModelParams mp = ModelParams::init(cfg, 77);
  const std::string path = "/tmp/sglab_model_test.bin";
  save_model(mp, path);
  ModelParams loaded = load_model(path);
  CHECK(loaded.config.enable_nrm);
  CHECK(loaded.config.fusion == FusionMode::ConcatProj);
  CHECK(loaded.config.attention == AttentionMode::Bbox);
  CHECK(loaded.total_parameters() == mp.total_parameters());
  for (std::size_t i = 0; i < mp.all().size(); ++i) {
    CHECK(loaded.all()[i].name == mp.all()[i].name);
    REQUIRE(loaded.all()[i].value.data == mp.all()[i].value.data);  // bitwise
  }

  // corrupted magic
  {
    std::ofstream f("/tmp/sglab_bad_magic.bin", std::ios::binary);
    f << "NOPE then some bytes";
  }
  CHECK_THROWS_AS((void)load_model("/tmp/sglab_bad_magic.bin"), FormatError);

  // truncated payload
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out("/tmp/sglab_truncated.bin", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 256));
  }
  CHECK_THROWS_AS((void)load_model("/tmp/sglab_truncated.bin"), FormatError);

  // trailing garbage: header/payload mismatch
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out("/tmp/sglab_padded.bin", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    double extra = 1.0;
    out.write(reinterpret_cast<const char*>(&extra), sizeof(extra));
  }
  CHECK_THROWS_AS((void)load_model("/tmp/sglab_padded.bin"), FormatError);
}

TEST_CASE("divergence aborts with a diagnostic") {
  GeneratorConfig g = small_scenes_config();
  auto scenes = generate_dataset(13, 10, g);
  ModelParams mp = ModelParams::init(small_config(Task::SGCls), 1);
  CHECK_THROWS_AS(train(scenes, mp, 1e4, 3, 1), DivergenceError);
}

TEST_CASE("total parameter count is stable for a fixed config") {
  ModelConfig cfg = small_config();
  CHECK(ModelParams::init(cfg, 1).total_parameters() ==
        ModelParams::init(cfg, 999).total_parameters());
  CHECK(ModelParams::init(cfg, 1).total_parameters() > 0);
}
