// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sglab/autograd.hpp"
#include "sglab/encoders.hpp"
#include "sglab/metrics.hpp"
#include "sglab/nrm.hpp"
#include "sglab/scene.hpp"

namespace sglab {

// PredCls: GT boxes and labels given, predicates predicted.
// SGCls:   GT boxes given, labels and predicates predicted.
enum class Task { PredCls, SGCls };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

struct ModelConfig {
  int num_categories = 8;
  int num_predicates = 6;  // background class appended in the decoder
  int feature_dim = 128;
  int cat_embed_dim = 32;
  int box_embed_dim = 32;
  std::array<int, 3> backbone_channels{16, 32, 32};
  double nrm_eps = kNrmEps;
  bool enable_nrm = false;
  bool enable_lee = false;
  FusionMode fusion = FusionMode::Gate;
  AttentionMode attention = AttentionMode::Centroid;
  Task task = Task::PredCls;

  std::string to_json_string() const;
  static ModelConfig from_json_string(const std::string& s);
};

// Short human-readable tag used as the default method name in reports.
std::string method_name(const ModelConfig& c);

// All trainable arrays in a fixed order. Storage never reallocates after
// init, so Param references stay valid for the object's lifetime.
class ModelParams {
 public:
  ModelConfig config;

  // Each param is drawn from uniform(-s, s), s = 1/sqrt(fan_in), from a
  // stream seeded by (seed, param name); biases start at zero. Params shared
  // between configurations therefore initialize identically for a fixed seed.
  static ModelParams init(const ModelConfig& config, std::uint64_t seed);

  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }
  std::vector<Param*> pointers();
  std::int64_t total_parameters() const;
  void zero_grads();

 private:
  std::vector<Param> params_;
  std::map<std::string, std::size_t> index_;

  void add(const std::string& name, Tensor value);
};

// Model file: "RSGG" magic, u32 version, u32 header length, JSON header
// (config + tensor names/shapes), then raw little-endian f64 payload.
inline constexpr std::uint32_t kModelVersion = 1;
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

struct ForwardArtifacts {
  Tape tape;
  Tape::NodeId image = Tape::kNone;
  Tape::NodeId object_logits = Tape::kNone;     // [N, K]
  Tape::NodeId predicate_logits = Tape::kNone;  // [M, P+1]; kNone when no pairs
  Tape::NodeId gate_obj = Tape::kNone;
  Tape::NodeId gate_pred = Tape::kNone;
  std::vector<std::pair<int, int>> pairs;  // ordered, subject-major
};

// image [3,H,W] with H, W divisible by 8. `boxes` provides both the NRM
// layout and the ROI boxes (pass perturbed boxes to simulate bad detections;
// the image itself stays untouched). `categories` are the GT labels; they
// feed the category embedding in PredCls and are replaced by a learned
// placeholder row in SGCls. `diff_image` registers the image as a
// differentiated leaf for gradient checks.
ForwardArtifacts forward_graph(const Tensor& image, const std::vector<BoxN>& boxes,
                               const std::vector<int>& categories, ModelParams& params,
                               bool diff_image = false);

struct Prediction {
  std::vector<int> object_labels;
  Tensor object_probs;     // [N, K]; one-hot GT in PredCls
  Tensor predicate_probs;  // [M, P+1]
  std::vector<std::pair<int, int>> pairs;
  // Sorted by (score desc, pair index asc, predicate asc); background class
  // excluded. score = subject prob * object prob * predicate prob.
  std::vector<RankedTriplet> triplets;
  double gate_mean_obj = -1.0;   // mean z over objects; -1 when gating is off
  double gate_mean_pred = -1.0;
};

Prediction predict(const SceneRecord& scene, const Tensor& image,
                   const std::vector<BoxN>& boxes, ModelParams& params);

// Sum of mean cross-entropies: predicates over all ordered pairs (background
// class for unrelated ones), plus the object term in SGCls.
Tape::NodeId loss_node(ForwardArtifacts& art, const SceneRecord& scene,
                       const ModelConfig& config);

// Same quantity recomputed from prediction probabilities.
double compute_loss(const Prediction& pred, const SceneRecord& scene, Task task);

struct TrainResult {
  std::vector<double> epoch_mean_loss;
};

// Plain SGD, batch size 1, fixed shuffle per (seed, epoch). Scenes must be
// clean renders; throws DivergenceError on non-finite loss.
TrainResult train(const std::vector<SceneRecord>& scenes, ModelParams& params, double lr,
                  int epochs, std::uint64_t seed);

}  // namespace sglab
