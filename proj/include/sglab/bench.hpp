// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sglab/corruption.hpp"
#include "sglab/metrics.hpp"
#include "sglab/model.hpp"

namespace sglab {

struct MetricsRow {
  std::string task;
  std::string method;
  std::string corruption;  // kind name, "clean", or "avg"
  int severity = 0;
  int k = 0;
  double recall = 0.0;
  double mean_recall = 0.0;
  int n_scenes = 0;
};

struct GateStatsRow {
  std::string method;
  std::string corruption;
  int severity = 0;
  double mean_z_obj = 0.0;
  double mean_z_pred = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<GateStatsRow> gate_stats;  // gate-mode LEE models only
};

struct BenchOptions {
  std::vector<std::string> model_paths;
  std::vector<std::string> names;  // optional; defaults to the model's method tag
  std::string dataset_path;
  std::vector<CorruptionKind> kinds;
  std::vector<int> severities;  // 0 collapses to a single "clean" row set
  std::vector<int> ks{20, 50, 100};
  double perturb_bbox = 0.0;
  std::uint64_t seed = 0;
};

// Evaluates every model over the corruption grid with fixed seeds.
// Corruption noise is seeded per (seed, kind, scene) — severity excluded —
// so severity sweeps share their noise realization. Per severity > 0 an
// "avg" row holds the arithmetic mean over kinds.
MetricsReport bench_run(const BenchOptions& opt);

// Evaluation of one model over one (optional) corruption cell.
struct EvalOptions {
  std::string model_path;
  std::string dataset_path;
  std::optional<CorruptionSpec> corruption;
  std::vector<int> ks{20, 50, 100};
  double perturb_bbox = 0.0;
  std::uint64_t seed = 0;
};
MetricsReport eval_run(const EvalOptions& opt);

// Matching outcome of one scene under a trained model; exported for tests.
SceneHits evaluate_scene(const SceneRecord& scene, const Tensor& image,
                         const std::vector<BoxN>& boxes, ModelParams& params);

// CSV schema: task,method,corruption,severity,k,recall,mean_recall,n_scenes
// with a header row, UTF-8, LF line endings, 6-decimal fixed floats.
void write_metrics_csv(const MetricsReport& report, const std::string& path);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);
void write_metrics_json(const MetricsReport& report, const std::string& path);

// Relative improvement (ours - base) / base, joined on
// (task, corruption, severity, k). Cells with base == 0 stay empty.
struct ImprovementRow {
  std::string task;
  std::string corruption;
  int severity = 0;
  int k = 0;
  double base_recall = 0.0, ours_recall = 0.0;
  double base_mean_recall = 0.0, ours_mean_recall = 0.0;
  std::optional<double> imp_recall;
  std::optional<double> imp_mean_recall;
};
std::vector<ImprovementRow> improvement_table(const std::vector<MetricsRow>& base,
                                              const std::vector<MetricsRow>& ours);
void write_improvement_csv(const std::vector<ImprovementRow>& rows, const std::string& path);

}  // namespace sglab
