// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace sglab {

using nlohmann::json;

SceneHits evaluate_scene(const SceneRecord& scene, const Tensor& image,
                         const std::vector<BoxN>& boxes, ModelParams& mp) {
  Prediction pred = predict(scene, image, boxes, mp);
  SceneHits hits;
  hits.gt_predicate.reserve(scene.relations.size());
  for (const Relation& r : scene.relations) hits.gt_predicate.push_back(r.predicate);
  hits.hit_rank = match_triplets(pred.triplets, scene.relations, category_ids(scene),
                                 mp.config.task == Task::SGCls);
  return hits;
}

namespace {

struct CellResult {
  std::vector<SceneHits> hits;
  double z_obj_sum = 0.0;
  double z_pred_sum = 0.0;
  int z_count = 0;
};

std::uint64_t corruption_seed(std::uint64_t seed, CorruptionKind kind, int scene_id) {
  // severity is deliberately not mixed in: a severity sweep then perturbs
  // each scene along one noise realization instead of redrawing it
  return hash_mix(hash_mix(seed, fnv1a(to_string(kind))), static_cast<std::uint64_t>(scene_id));
}

CellResult evaluate_cell(const std::vector<SceneRecord>& scenes, ModelParams& mp,
                         const std::optional<CorruptionSpec>& corr, double perturb,
                         std::uint64_t seed) {
  CellResult out;
  out.hits.resize(scenes.size());
  std::vector<double> zo(scenes.size(), -1.0), zp(scenes.size(), -1.0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const SceneRecord& scene = scenes[i];
    Tensor image = rasterize(scene);
    if (corr && corr->severity > 0) {
      image = corrupt(image, *corr, corruption_seed(seed, corr->kind, scene.id));
    }
    SceneRecord boxes_scene = scene;
    if (perturb > 0.0) {
      boxes_scene = perturb_boxes(scene, perturb, hash_mix(seed, 0xB0E5ull));
    }
    std::vector<BoxN> boxes = normalized_boxes(boxes_scene);
    Prediction pred = predict(scene, image, boxes, mp);
    SceneHits hits;
    hits.gt_predicate.reserve(scene.relations.size());
    for (const Relation& r : scene.relations) hits.gt_predicate.push_back(r.predicate);
    hits.hit_rank = match_triplets(pred.triplets, scene.relations, category_ids(scene),
                                   mp.config.task == Task::SGCls);
    out.hits[i] = std::move(hits);
    if (pred.gate_mean_obj >= 0.0) zo[i] = pred.gate_mean_obj;
    if (pred.gate_mean_pred >= 0.0) zp[i] = pred.gate_mean_pred;
  }
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (zo[i] >= 0.0 || zp[i] >= 0.0) {
      out.z_obj_sum += std::max(zo[i], 0.0);
      out.z_pred_sum += std::max(zp[i], 0.0);
      ++out.z_count;
    }
  }
  return out;
}

void validate_dataset_for_model(const std::vector<SceneRecord>& scenes, const ModelConfig& cfg) {
  for (const SceneRecord& s : scenes) {
    for (const ObjectSpec& o : s.objects) {
      if (o.category < 0 || o.category >= cfg.num_categories) {
        throw FormatError("scene " + std::to_string(s.id) + ": category " +
                          std::to_string(o.category) + " outside model vocabulary");
      }
    }
    for (const Relation& r : s.relations) {
      if (r.predicate < 0 || r.predicate >= cfg.num_predicates) {
        throw FormatError("scene " + std::to_string(s.id) + ": predicate " +
                          std::to_string(r.predicate) + " outside model vocabulary");
      }
    }
  }
}

}  // namespace

MetricsReport bench_run(const BenchOptions& opt) {
  if (opt.model_paths.empty()) throw UsageError("bench: no models given");
  if (!opt.names.empty() && opt.names.size() != opt.model_paths.size()) {
    throw UsageError("bench: --names count must match --models");
  }
  std::vector<SceneRecord> scenes = load_jsonl(opt.dataset_path);
  if (scenes.empty()) throw FormatError("bench: dataset " + opt.dataset_path + " is empty");

  bool want_clean = std::find(opt.severities.begin(), opt.severities.end(), 0) !=
                    opt.severities.end();
  std::vector<int> severities;
  for (int s : opt.severities) {
    if (s < 0 || s > 5) throw UsageError("bench: severity must be in [0,5]");
    if (s > 0) severities.push_back(s);
  }
  std::sort(severities.begin(), severities.end());
  severities.erase(std::unique(severities.begin(), severities.end()), severities.end());

  MetricsReport report;
  for (std::size_t mi = 0; mi < opt.model_paths.size(); ++mi) {
    ModelParams mp = load_model(opt.model_paths[mi]);
    validate_dataset_for_model(scenes, mp.config);
    std::string method = opt.names.empty() ? method_name(mp.config) : opt.names[mi];
    std::string task = to_string(mp.config.task);
    bool gated = mp.config.enable_lee && mp.config.fusion == FusionMode::Gate;
    int n = static_cast<int>(scenes.size());

    auto push_rows = [&](const std::string& corruption, int severity, const CellResult& cell) {
      for (int k : opt.ks) {
        MetricsRow row;
        row.task = task;
        row.method = method;
        row.corruption = corruption;
        row.severity = severity;
        row.k = k;
        row.recall = recall_at_k(cell.hits, k);
        row.mean_recall = mean_recall_at_k(cell.hits, k, mp.config.num_predicates);
        row.n_scenes = n;
        report.rows.push_back(row);
      }
      if (gated && cell.z_count > 0) {
        report.gate_stats.push_back({method, corruption, severity,
                                     cell.z_obj_sum / cell.z_count,
                                     cell.z_pred_sum / cell.z_count});
      }
    };

    if (want_clean) {
      CellResult cell = evaluate_cell(scenes, mp, std::nullopt, opt.perturb_bbox, opt.seed);
      push_rows("clean", 0, cell);
    }
    for (int severity : severities) {
      // per-kind cells, then the cross-kind average
      std::size_t first_row = report.rows.size();
      for (CorruptionKind kind : opt.kinds) {
        CellResult cell = evaluate_cell(scenes, mp, CorruptionSpec{kind, severity},
                                        opt.perturb_bbox, opt.seed);
        push_rows(to_string(kind), severity, cell);
      }
      if (!opt.kinds.empty()) {
        for (int k : opt.ks) {
          MetricsRow avg;
          avg.task = task;
          avg.method = method;
          avg.corruption = "avg";
          avg.severity = severity;
          avg.k = k;
          avg.n_scenes = n;
          int cnt = 0;
          for (std::size_t r = first_row; r < report.rows.size(); ++r) {
            if (report.rows[r].k != k) continue;
            avg.recall += report.rows[r].recall;
            avg.mean_recall += report.rows[r].mean_recall;
            ++cnt;
          }
          avg.recall /= cnt;
          avg.mean_recall /= cnt;
          report.rows.push_back(avg);
        }
      }
    }
  }
  return report;
}

MetricsReport eval_run(const EvalOptions& opt) {
  BenchOptions b;
  b.model_paths = {opt.model_path};
  b.dataset_path = opt.dataset_path;
  b.ks = opt.ks;
  b.perturb_bbox = opt.perturb_bbox;
  b.seed = opt.seed;
  if (opt.corruption && opt.corruption->severity > 0) {
    b.kinds = {opt.corruption->kind};
    b.severities = {opt.corruption->severity};
  } else {
    b.severities = {0};
  }
  MetricsReport full = bench_run(b);
  MetricsReport out;
  for (const MetricsRow& r : full.rows) {
    if (r.corruption != "avg") out.rows.push_back(r);
  }
  out.gate_stats = full.gate_stats;
  return out;
}

namespace {

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "task,method,corruption,severity,k,recall,mean_recall,n_scenes\n";
  for (const MetricsRow& r : report.rows) {
    out << r.task << "," << r.method << "," << r.corruption << "," << r.severity << "," << r.k
        << "," << fmt6(r.recall) << "," << fmt6(r.mean_recall) << "," << r.n_scenes << "\n";
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open report " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty report " + path);
  if (line != "task,method,corruption,severity,k,recall,mean_recall,n_scenes") {
    throw FormatError("unexpected CSV header in " + path);
  }
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected 8 fields");
    }
    MetricsRow r;
    try {
      r.task = fields[0];
      r.method = fields[1];
      r.corruption = fields[2];
      r.severity = std::stoi(fields[3]);
      r.k = std::stoi(fields[4]);
      r.recall = std::stod(fields[5]);
      r.mean_recall = std::stod(fields[6]);
      r.n_scenes = std::stoi(fields[7]);
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_metrics_json(const MetricsReport& report, const std::string& path) {
  json rows = json::array();
  for (const MetricsRow& r : report.rows) {
    rows.push_back({{"task", r.task},
                    {"method", r.method},
                    {"corruption", r.corruption},
                    {"severity", r.severity},
                    {"k", r.k},
                    {"recall", r.recall},
                    {"mean_recall", r.mean_recall},
                    {"n_scenes", r.n_scenes}});
  }
  json gates = json::array();
  for (const GateStatsRow& g : report.gate_stats) {
    gates.push_back({{"method", g.method},
                     {"corruption", g.corruption},
                     {"severity", g.severity},
                     {"mean_z_obj", g.mean_z_obj},
                     {"mean_z_pred", g.mean_z_pred}});
  }
  json doc{{"rows", rows}, {"gate_stats", gates}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
}

std::vector<ImprovementRow> improvement_table(const std::vector<MetricsRow>& base,
                                              const std::vector<MetricsRow>& ours) {
  auto key = [](const MetricsRow& r) {
    return r.task + "|" + r.corruption + "|" + std::to_string(r.severity) + "|" +
           std::to_string(r.k);
  };
  std::map<std::string, const MetricsRow*> ours_by_key;
  for (const MetricsRow& r : ours) ours_by_key[key(r)] = &r;
  std::vector<ImprovementRow> out;
  for (const MetricsRow& b : base) {
    auto it = ours_by_key.find(key(b));
    if (it == ours_by_key.end()) continue;
    const MetricsRow& o = *it->second;
    ImprovementRow row;
    row.task = b.task;
    row.corruption = b.corruption;
    row.severity = b.severity;
    row.k = b.k;
    row.base_recall = b.recall;
    row.ours_recall = o.recall;
    row.base_mean_recall = b.mean_recall;
    row.ours_mean_recall = o.mean_recall;
    if (b.recall > 0.0) row.imp_recall = (o.recall - b.recall) / b.recall;
    if (b.mean_recall > 0.0) {
      row.imp_mean_recall = (o.mean_recall - b.mean_recall) / b.mean_recall;
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_improvement_csv(const std::vector<ImprovementRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "task,corruption,severity,k,base_recall,ours_recall,imp_recall,"
         "base_mean_recall,ours_mean_recall,imp_mean_recall\n";
  for (const ImprovementRow& r : rows) {
    out << r.task << "," << r.corruption << "," << r.severity << "," << r.k << ","
        << fmt6(r.base_recall) << "," << fmt6(r.ours_recall) << ","
        << (r.imp_recall ? fmt6(*r.imp_recall) : "") << "," << fmt6(r.base_mean_recall) << ","
        << fmt6(r.ours_mean_recall) << ","
        << (r.imp_mean_recall ? fmt6(*r.imp_mean_recall) : "") << "\n";
  }
}

}  // namespace sglab
