// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace sglab {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; byte swapping is not implemented");

std::string to_string(Task t) { return t == Task::PredCls ? "predcls" : "sgcls"; }

Task task_from_string(const std::string& s) {
  if (s == "predcls") return Task::PredCls;
  if (s == "sgcls") return Task::SGCls;
  throw UsageError("unknown task '" + s + "'");
}

std::string ModelConfig::to_json_string() const {
  json j{{"num_categories", num_categories},
         {"num_predicates", num_predicates},
         {"feature_dim", feature_dim},
         {"cat_embed_dim", cat_embed_dim},
         {"box_embed_dim", box_embed_dim},
         {"backbone_channels", backbone_channels},
         {"nrm_eps", nrm_eps},
         {"enable_nrm", enable_nrm},
         {"enable_lee", enable_lee},
         {"fusion", to_string(fusion)},
         {"attention", to_string(attention)},
         {"task", to_string(task)}};
  return j.dump();
}

ModelConfig ModelConfig::from_json_string(const std::string& s) {
  ModelConfig c;
  try {
    json j = json::parse(s);
    c.num_categories = j.value("num_categories", c.num_categories);
    c.num_predicates = j.value("num_predicates", c.num_predicates);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.cat_embed_dim = j.value("cat_embed_dim", c.cat_embed_dim);
    c.box_embed_dim = j.value("box_embed_dim", c.box_embed_dim);
    if (j.contains("backbone_channels")) {
      auto v = j["backbone_channels"].get<std::vector<int>>();
      if (v.size() != 3) throw FormatError("backbone_channels must have 3 entries");
      std::copy(v.begin(), v.end(), c.backbone_channels.begin());
    }
    c.nrm_eps = j.value("nrm_eps", c.nrm_eps);
    c.enable_nrm = j.value("enable_nrm", c.enable_nrm);
    c.enable_lee = j.value("enable_lee", c.enable_lee);
    c.fusion = fusion_from_string(j.value("fusion", std::string("gate")));
    c.attention = attention_from_string(j.value("attention", std::string("centroid")));
    c.task = task_from_string(j.value("task", std::string("predcls")));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad model config: ") + e.what());
  }
  return c;
}

std::string method_name(const ModelConfig& c) {
  if (!c.enable_nrm && !c.enable_lee) return "baseline";
  std::string s;
  if (c.enable_nrm) s += "nrm[" + to_string(c.attention) + "]";
  if (c.enable_lee) {
    if (!s.empty()) s += "+";
    s += "lee[" + to_string(c.fusion) + "]";
  }
  return s;
}

void ModelParams::add(const std::string& name, Tensor value) {
  index_.emplace(name, params_.size());
  params_.emplace_back(name, std::move(value));
}

Param& ModelParams::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw TensorError("unknown param '" + name + "'");
  return params_[it->second];
}

const Param& ModelParams::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw TensorError("unknown param '" + name + "'");
  return params_[it->second];
}

std::vector<Param*> ModelParams::pointers() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (Param& p : params_) out.push_back(&p);
  return out;
}

std::int64_t ModelParams::total_parameters() const {
  std::int64_t n = 0;
  for (const Param& p : params_) n += p.value.numel();
  return n;
}

void ModelParams::zero_grads() {
  for (Param& p : params_) p.zero_grad();
}

namespace {

Tensor init_weight(const std::vector<int>& shape, std::uint64_t seed, const std::string& name) {
  std::int64_t fan_in = shape_numel(shape) / shape[0];
  double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng(hash_mix(seed, fnv1a(name)));
  return Tensor::uniform(shape, rng, -s, s);
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams mp;
  mp.config = cfg;
  int d = cfg.feature_dim;
  int c1 = cfg.backbone_channels[0], c2 = cfg.backbone_channels[1],
      c3 = cfg.backbone_channels[2];

  auto weight = [&](const std::string& name, std::vector<int> shape) {
    mp.add(name, init_weight(shape, seed, name));
  };
  auto bias = [&](const std::string& name, int n) { mp.add(name, Tensor::zeros({n})); };

  weight("backbone.conv1.w", {c1, 3, 3, 3});
  bias("backbone.conv1.b", c1);
  weight("backbone.conv2.w", {c2, c1, 3, 3});
  bias("backbone.conv2.b", c2);
  weight("backbone.conv3.w", {c3, c2, 3, 3});
  bias("backbone.conv3.b", c3);

  // one extra row: the placeholder category fed to the encoder in SGCls
  weight("embed.category", {cfg.num_categories + 1, cfg.cat_embed_dim});
  weight("embed.box.w", {cfg.box_embed_dim, 4});
  bias("embed.box.b", cfg.box_embed_dim);

  int obj_in = c3 + cfg.cat_embed_dim + cfg.box_embed_dim;
  weight("obj_enc.l1.w", {d, obj_in});
  bias("obj_enc.l1.b", d);
  weight("obj_enc.l2.w", {d, d});
  bias("obj_enc.l2.b", d);

  int pred_in = 2 * d + c3;
  weight("pred_enc.l1.w", {d, pred_in});
  bias("pred_enc.l1.b", d);
  weight("pred_enc.l2.w", {d, d});
  bias("pred_enc.l2.b", d);

  weight("dec.obj.w", {cfg.num_categories, d});
  bias("dec.obj.b", cfg.num_categories);
  weight("dec.pred.w", {cfg.num_predicates + 1, d});
  bias("dec.pred.b", cfg.num_predicates + 1);

  weight("lee.obj_bbox.l1.w", {d, 4});
  bias("lee.obj_bbox.l1.b", d);
  weight("lee.obj_bbox.l2.w", {d, d});
  bias("lee.obj_bbox.l2.b", d);
  weight("lee.pair_bbox.l1.w", {d, 11});
  bias("lee.pair_bbox.l1.b", d);
  weight("lee.pair_bbox.l2.w", {d, d});
  bias("lee.pair_bbox.l2.b", d);
  weight("lee.gate.obj.w", {d, d});
  weight("lee.gate.pred.w", {d, d});
  weight("lee.proj.obj.w", {d, 2 * d});
  weight("lee.proj.pred.w", {d, 2 * d});
  return mp;
}

void save_model(const ModelParams& mp, const std::string& path) {
  json tensors = json::array();
  for (const Param& p : mp.all()) {
    p.value.ensure_finite("param " + p.name);
    tensors.push_back({{"name", p.name}, {"shape", p.value.shape}});
  }
  json header{{"config", json::parse(mp.config.to_json_string())}, {"tensors", tensors}};
  std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write("RSGG", 4);
  std::uint32_t version = kModelVersion;
  std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&hlen), 4);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const Param& p : mp.all()) {
    out.write(reinterpret_cast<const char*>(p.value.data.data()),
              static_cast<std::streamsize>(p.value.data.size() * sizeof(double)));
  }
  if (!out) throw FormatError("short write to " + path);
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RSGG", 4) != 0) {
    throw FormatError("bad magic in " + path + " (not a model file)");
  }
  std::uint32_t version = 0, hlen = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&hlen), 4);
  if (!in) throw FormatError("truncated model header in " + path);
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version) + " in " + path);
  }
  std::string hs(hlen, '\0');
  in.read(hs.data(), hlen);
  if (!in) throw FormatError("truncated model header in " + path);

  json header;
  try {
    header = json::parse(hs);
  } catch (const json::exception& e) {
    throw FormatError("bad model header JSON: " + std::string(e.what()));
  }
  ModelConfig cfg = ModelConfig::from_json_string(header.at("config").dump());
  ModelParams mp = ModelParams::init(cfg, 0);

  const json& tensors = header.at("tensors");
  if (tensors.size() != mp.all().size()) {
    throw FormatError("model header lists " + std::to_string(tensors.size()) +
                      " tensors, expected " + std::to_string(mp.all().size()));
  }
  for (std::size_t i = 0; i < mp.all().size(); ++i) {
    Param& p = mp.all()[i];
    const json& t = tensors.at(i);
    if (t.at("name").get<std::string>() != p.name) {
      throw FormatError("model tensor " + std::to_string(i) + " is '" +
                        t.at("name").get<std::string>() + "', expected '" + p.name + "'");
    }
    if (t.at("shape").get<std::vector<int>>() != p.value.shape) {
      throw FormatError("shape mismatch for model tensor '" + p.name + "'");
    }
    in.read(reinterpret_cast<char*>(p.value.data.data()),
            static_cast<std::streamsize>(p.value.data.size() * sizeof(double)));
    if (!in) throw FormatError("model payload shorter than declared shapes in " + path);
  }
  char extra;
  if (in.read(&extra, 1)) throw FormatError("model payload longer than declared shapes in " + path);
  return mp;
}

namespace {

std::vector<std::pair<int, int>> ordered_pairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

Tensor boxes_tensor(const std::vector<BoxN>& boxes) {
  Tensor t = Tensor::zeros({static_cast<int>(boxes.size()), 4});
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    t.data[i * 4 + 0] = boxes[i].x1;
    t.data[i * 4 + 1] = boxes[i].y1;
    t.data[i * 4 + 2] = boxes[i].x2;
    t.data[i * 4 + 3] = boxes[i].y2;
  }
  return t;
}

}  // namespace

ForwardArtifacts forward_graph(const Tensor& image, const std::vector<BoxN>& boxes,
                               const std::vector<int>& categories, ModelParams& mp,
                               bool diff_image) {
  const ModelConfig& cfg = mp.config;
  if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) % 8 != 0 || image.dim(2) % 8 != 0) {
    throw TensorError("forward: image must be [3,H,W] with H, W divisible by 8");
  }
  if (boxes.empty()) throw TensorError("forward: no objects");
  if (boxes.size() != categories.size()) throw TensorError("forward: boxes/categories mismatch");
  for (int c : categories) {
    if (c < 0 || c >= cfg.num_categories) {
      throw TensorError("forward: unknown category id " + std::to_string(c));
    }
  }

  ForwardArtifacts art;
  Tape& t = art.tape;
  int n = static_cast<int>(boxes.size());

  Tape::NodeId x = diff_image ? t.input(image) : t.constant(image);
  art.image = x;
  Tape::NodeId h1 = t.relu(t.conv2d(x, t.param(mp.at("backbone.conv1.w")),
                                    t.param(mp.at("backbone.conv1.b")), 2, 1));
  Tape::NodeId h2 = t.relu(t.conv2d(h1, t.param(mp.at("backbone.conv2.w")),
                                    t.param(mp.at("backbone.conv2.b")), 2, 1));
  Tape::NodeId fmap = t.relu(t.conv2d(h2, t.param(mp.at("backbone.conv3.w")),
                                      t.param(mp.at("backbone.conv3.b")), 2, 1));

  if (cfg.enable_nrm) {
    fmap = nrm_forward_node(t, fmap, Layout::from_boxes(boxes), cfg.nrm_eps, cfg.attention);
  }

  // object features
  Tape::NodeId v_obj = t.roi_rows(fmap, boxes);
  std::vector<int> embed_ids = categories;
  if (cfg.task == Task::SGCls) {
    std::fill(embed_ids.begin(), embed_ids.end(), cfg.num_categories);  // placeholder row
  }
  Tape::NodeId cat = t.embed_rows(t.param(mp.at("embed.category")), embed_ids);
  Tape::NodeId bx = t.constant(boxes_tensor(boxes));
  Tape::NodeId bemb =
      t.linear(bx, t.param(mp.at("embed.box.w")), t.param(mp.at("embed.box.b")));
  Tape::NodeId obj_in = t.concat_cols({v_obj, cat, bemb});
  Tape::NodeId f = mlp2_rows(t, obj_in, mp.at("obj_enc.l1.w"), mp.at("obj_enc.l1.b"),
                             mp.at("obj_enc.l2.w"), mp.at("obj_enc.l2.b"));
  Tape::NodeId f_prime = f;
  if (cfg.enable_lee) {
    Tape::NodeId f_c = mlp2_rows(t, bx, mp.at("lee.obj_bbox.l1.w"), mp.at("lee.obj_bbox.l1.b"),
                                 mp.at("lee.obj_bbox.l2.w"), mp.at("lee.obj_bbox.l2.b"));
    FusedRows fused =
        gate_fuse_rows(t, f, f_c, mp.at("lee.gate.obj.w"), mp.at("lee.proj.obj.w"), cfg.fusion);
    f_prime = fused.out;
    art.gate_obj = fused.z;
  }
  art.object_logits = t.linear(f_prime, t.param(mp.at("dec.obj.w")), t.param(mp.at("dec.obj.b")));

  // predicate features over all ordered pairs
  art.pairs = ordered_pairs(n);
  if (!art.pairs.empty()) {
    std::vector<BoxN> union_boxes;
    union_boxes.reserve(art.pairs.size());
    for (auto [i, j] : art.pairs) {
      union_boxes.push_back(union_box(boxes[static_cast<std::size_t>(i)],
                                      boxes[static_cast<std::size_t>(j)]));
    }
    Tape::NodeId v_uni = t.roi_rows(fmap, union_boxes);
    Tape::NodeId p_in = t.pair_concat(f_prime, v_uni, art.pairs);
    Tape::NodeId fp = mlp2_rows(t, p_in, mp.at("pred_enc.l1.w"), mp.at("pred_enc.l1.b"),
                                mp.at("pred_enc.l2.w"), mp.at("pred_enc.l2.b"));
    Tape::NodeId fp_prime = fp;
    if (cfg.enable_lee) {
      int m = static_cast<int>(art.pairs.size());
      Tensor geo = Tensor::zeros({m, 11});
      for (int r = 0; r < m; ++r) {
        auto [i, j] = art.pairs[static_cast<std::size_t>(r)];
        auto g = pair_geometry_features(boxes[static_cast<std::size_t>(i)],
                                        boxes[static_cast<std::size_t>(j)]);
        std::copy(g.begin(), g.end(), geo.data.begin() + static_cast<std::size_t>(r) * 11);
      }
      Tape::NodeId fp_c =
          mlp2_rows(t, t.constant(std::move(geo)), mp.at("lee.pair_bbox.l1.w"),
                    mp.at("lee.pair_bbox.l1.b"), mp.at("lee.pair_bbox.l2.w"),
                    mp.at("lee.pair_bbox.l2.b"));
      FusedRows fused = gate_fuse_rows(t, fp, fp_c, mp.at("lee.gate.pred.w"),
                                       mp.at("lee.proj.pred.w"), cfg.fusion);
      fp_prime = fused.out;
      art.gate_pred = fused.z;
    }
    art.predicate_logits =
        t.linear(fp_prime, t.param(mp.at("dec.pred.w")), t.param(mp.at("dec.pred.b")));
  }
  return art;
}

Prediction predict(const SceneRecord& scene, const Tensor& image,
                   const std::vector<BoxN>& boxes, ModelParams& mp) {
  const ModelConfig& cfg = mp.config;
  ForwardArtifacts art = forward_graph(image, boxes, category_ids(scene), mp);
  int n = static_cast<int>(boxes.size());
  int k = cfg.num_categories;

  Prediction pred;
  pred.pairs = art.pairs;
  if (cfg.task == Task::PredCls) {
    pred.object_probs = Tensor::zeros({n, k});
    pred.object_labels = category_ids(scene);
    for (int i = 0; i < n; ++i) {
      pred.object_probs.at(i, pred.object_labels[static_cast<std::size_t>(i)]) = 1.0;
    }
  } else {
    pred.object_probs = softmax_lastdim(art.tape.value(art.object_logits));
    pred.object_labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      pred.object_labels[static_cast<std::size_t>(i)] =
          argmax_lowest(pred.object_probs.data.data() + static_cast<std::size_t>(i) * k, k);
    }
  }

  if (art.predicate_logits != Tape::kNone) {
    pred.predicate_probs = softmax_lastdim(art.tape.value(art.predicate_logits));
    int m = static_cast<int>(art.pairs.size());
    int p = cfg.num_predicates;
    pred.triplets.reserve(static_cast<std::size_t>(m) * p);
    for (int r = 0; r < m; ++r) {
      auto [i, j] = art.pairs[static_cast<std::size_t>(r)];
      double sp = pred.object_probs.at(i, pred.object_labels[static_cast<std::size_t>(i)]);
      double op = pred.object_probs.at(j, pred.object_labels[static_cast<std::size_t>(j)]);
      for (int q = 0; q < p; ++q) {  // background class excluded from ranking
        RankedTriplet tr;
        tr.subject = i;
        tr.object = j;
        tr.predicate = q;
        tr.subject_label = pred.object_labels[static_cast<std::size_t>(i)];
        tr.object_label = pred.object_labels[static_cast<std::size_t>(j)];
        tr.score = sp * op * pred.predicate_probs.at(r, q);
        pred.triplets.push_back(tr);
      }
    }
    // deterministic total order: score desc, pair index asc, predicate asc
    std::vector<int> order(pred.triplets.size());
    std::iota(order.begin(), order.end(), 0);
    int p_count = p;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const RankedTriplet& ta = pred.triplets[static_cast<std::size_t>(a)];
      const RankedTriplet& tb = pred.triplets[static_cast<std::size_t>(b)];
      if (ta.score != tb.score) return ta.score > tb.score;
      int pa = a / p_count, pb = b / p_count;
      if (pa != pb) return pa < pb;
      return ta.predicate < tb.predicate;
    });
    std::vector<RankedTriplet> sorted;
    sorted.reserve(order.size());
    for (int idx : order) sorted.push_back(pred.triplets[static_cast<std::size_t>(idx)]);
    pred.triplets = std::move(sorted);
  }

  auto node_mean = [&](Tape::NodeId id) {
    const Tensor& v = art.tape.value(id);
    double s = std::accumulate(v.data.begin(), v.data.end(), 0.0);
    return s / static_cast<double>(v.numel());
  };
  if (art.gate_obj != Tape::kNone) pred.gate_mean_obj = node_mean(art.gate_obj);
  if (art.gate_pred != Tape::kNone) pred.gate_mean_pred = node_mean(art.gate_pred);
  return pred;
}

namespace {

std::vector<int> pair_gt_labels(const std::vector<std::pair<int, int>>& pairs,
                                const SceneRecord& scene, int num_predicates) {
  int n = static_cast<int>(scene.objects.size());
  std::vector<int> labels(pairs.size(), num_predicates);  // background
  auto pair_index = [n](int i, int j) { return i * (n - 1) + (j > i ? j - 1 : j); };
  for (const Relation& r : scene.relations) {
    if (r.predicate < 0 || r.predicate >= num_predicates) {
      throw FormatError("relation predicate " + std::to_string(r.predicate) +
                        " out of range for this model");
    }
    int idx = pair_index(r.subject, r.object);
    if (labels[static_cast<std::size_t>(idx)] == num_predicates) {
      labels[static_cast<std::size_t>(idx)] = r.predicate;
    }
  }
  return labels;
}

}  // namespace

Tape::NodeId loss_node(ForwardArtifacts& art, const SceneRecord& scene,
                       const ModelConfig& cfg) {
  if (art.predicate_logits == Tape::kNone) {
    throw TensorError("loss: scene has no object pairs");
  }
  std::vector<int> plabels = pair_gt_labels(art.pairs, scene, cfg.num_predicates);
  Tape::NodeId ce_pred = art.tape.cross_entropy(art.predicate_logits, plabels);
  if (cfg.task == Task::PredCls) return ce_pred;
  Tape::NodeId ce_obj = art.tape.cross_entropy(art.object_logits, category_ids(scene));
  return art.tape.add(ce_obj, ce_pred);
}

double compute_loss(const Prediction& pred, const SceneRecord& scene, Task task) {
  if (pred.pairs.empty()) throw TensorError("compute_loss: prediction has no pairs");
  if (static_cast<int>(scene.objects.size()) != pred.object_probs.dim(0)) {
    throw TensorError("compute_loss: prediction/scene misalignment");
  }
  int num_predicates = pred.predicate_probs.dim(1) - 1;
  std::vector<int> plabels = pair_gt_labels(pred.pairs, scene, num_predicates);
  double loss = 0.0;
  for (std::size_t m = 0; m < pred.pairs.size(); ++m) {
    loss -= std::log(pred.predicate_probs.at(static_cast<int>(m),
                                             plabels[m]));
  }
  loss /= static_cast<double>(pred.pairs.size());
  if (task == Task::SGCls) {
    double obj = 0.0;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      obj -= std::log(pred.object_probs.at(static_cast<int>(i), scene.objects[i].category));
    }
    loss += obj / static_cast<double>(scene.objects.size());
  }
  return loss;
}

TrainResult train(const std::vector<SceneRecord>& scenes, ModelParams& mp, double lr, int epochs,
                  std::uint64_t seed) {
  if (scenes.empty()) throw UsageError("train: empty dataset");
  for (const SceneRecord& s : scenes) {
    for (const ObjectSpec& o : s.objects) {
      if (o.category < 0 || o.category >= mp.config.num_categories) {
        throw FormatError("scene " + std::to_string(s.id) + " has category " +
                          std::to_string(o.category) + " outside the model vocabulary");
      }
    }
  }
  std::vector<Param*> params = mp.pointers();
  TrainResult result;
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng rng(hash_mix(seed, 1000003ull * static_cast<std::uint64_t>(epoch + 1)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    double total = 0.0;
    int counted = 0;
    for (std::size_t idx : order) {
      const SceneRecord& scene = scenes[idx];
      if (scene.objects.size() < 2) continue;  // no pairs, no signal
      Tensor image = rasterize(scene);
      ForwardArtifacts art = forward_graph(image, normalized_boxes(scene), category_ids(scene), mp);
      Tape::NodeId loss = loss_node(art, scene, mp.config);
      double lv = art.tape.value(loss).item();
      if (!std::isfinite(lv)) {
        throw DivergenceError("training diverged: loss " + std::to_string(lv) + " at epoch " +
                              std::to_string(epoch) + ", scene " + std::to_string(scene.id));
      }
      total += lv;
      ++counted;
      art.tape.backward(loss);
      sgd_step(params, lr);
    }
    result.epoch_mean_loss.push_back(counted > 0 ? total / counted : 0.0);
  }
  return result;
}

}  // namespace sglab
