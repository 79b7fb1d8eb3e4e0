// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sglab/bench.hpp"
#include "sglab/gradcheck.hpp"
#include "sglab/model.hpp"

namespace sglab {

using nlohmann::json;

namespace {

struct TrainSpec {
  std::string dataset;
  double lr = 0.05;
  int epochs = 10;
  std::uint64_t seed = 1;
  ModelConfig model;
};

TrainSpec train_spec_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open train config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("bad train config " + path + ": " + e.what());
  }
  TrainSpec s;
  try {
    s.dataset = j.value("dataset", s.dataset);
    s.lr = j.value("lr", s.lr);
    s.epochs = j.value("epochs", s.epochs);
    s.seed = j.value("seed", s.seed);
    s.model = ModelConfig::from_json_string(j.dump());
  } catch (const json::exception& e) {
    throw FormatError("bad train config " + path + ": " + e.what());
  }
  if (s.epochs < 1) throw UsageError("train: epochs must be >= 1");
  return s;
}

std::vector<CorruptionKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<CorruptionKind> kinds;
  for (const std::string& n : names) kinds.push_back(corruption_from_string(n));
  return kinds;
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"desk-scale scene graph generation lab"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset as JSON-lines");
  std::uint64_t gen_seed = 0;
  int gen_n = 500;
  std::string gen_out, gen_config;
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--n", gen_n, "number of scenes");
  gen->add_option("--out", gen_out, "output .jsonl path")->required();
  gen->add_option("--config", gen_config, "generator config JSON");

  // train
  auto* tr = app.add_subcommand("train", "train a model from a config JSON");
  std::string tr_config, tr_out, tr_loss_out, tr_fusion, tr_attention, tr_dataset;
  std::uint64_t tr_seed = 0;
  bool tr_seed_set = false, tr_nrm = false, tr_lee = false;
  tr->add_option("--config", tr_config, "train config JSON")->required();
  tr->add_option("--out", tr_out, "output model path")->required();
  tr->add_option("--dataset", tr_dataset, "override the config's dataset path");
  tr->add_option("--loss-out", tr_loss_out, "write the per-epoch loss curve as JSON");
  tr->add_option("--seed", tr_seed, "override the config's seed")
      ->each([&](const std::string&) { tr_seed_set = true; });
  tr->add_flag("--enable-nrm", tr_nrm, "enable feature-map normalization/restitution");
  tr->add_flag("--enable-lee", tr_lee, "enable layout-embedded encoding");
  tr->add_option("--fusion", tr_fusion, "gate|concat|add");
  tr->add_option("--attention", tr_attention, "centroid|bbox");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate one model, optionally corrupted");
  std::string ev_model, ev_dataset, ev_out, ev_corruption;
  int ev_severity = 0;
  std::vector<int> ev_ks{20, 50, 100};
  double ev_perturb = 0.0;
  std::uint64_t ev_seed = 0;
  ev->add_option("--model", ev_model, "model file")->required();
  ev->add_option("--dataset", ev_dataset, "dataset .jsonl")->required();
  ev->add_option("--corruption", ev_corruption, "corruption kind");
  ev->add_option("--severity", ev_severity, "severity 0..5");
  ev->add_option("--k", ev_ks, "recall cutoffs")->delimiter(',');
  ev->add_option("--perturb-bbox", ev_perturb, "box jitter magnitude in [0,1]");
  ev->add_option("--seed", ev_seed, "corruption seed");
  ev->add_option("--out", ev_out, "metrics JSON path (stdout when omitted)");

  // bench
  auto* be = app.add_subcommand("bench", "corruption-grid benchmark over models");
  std::vector<std::string> be_models, be_names, be_kinds;
  std::string be_dataset, be_out;
  std::vector<int> be_severities{0, 1, 2, 3, 4, 5};
  std::vector<int> be_ks{20, 50, 100};
  double be_perturb = 0.0;
  std::uint64_t be_seed = 0;
  be->add_option("--models", be_models, "model files")->required()->delimiter(',');
  be->add_option("--names", be_names, "method labels (default: from model flags)")
      ->delimiter(',');
  be->add_option("--dataset", be_dataset, "dataset .jsonl")->required();
  be->add_option("--kinds", be_kinds, "corruption kinds (default: all)")->delimiter(',');
  be->add_option("--severities", be_severities, "severity grid")->delimiter(',');
  be->add_option("--k", be_ks, "recall cutoffs")->delimiter(',');
  be->add_option("--perturb-bbox", be_perturb, "box jitter magnitude in [0,1]");
  be->add_option("--seed", be_seed, "corruption seed");
  be->add_option("--out", be_out, "output prefix (writes <out>.csv and <out>.json)")
      ->required();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "run the finite-difference gradient suite");
  int gc_seeds = 5;
  gc->add_option("--seeds", gc_seeds, "random seeds to sweep");

  // report
  auto* rp = app.add_subcommand("report", "join two bench CSVs into an improvement table");
  std::string rp_base, rp_ours, rp_out;
  rp->add_option("base", rp_base, "baseline bench CSV")->required();
  rp->add_option("ours", rp_ours, "treatment bench CSV")->required();
  rp->add_option("--out", rp_out, "output CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (app.got_subcommand(gen)) {
    GeneratorConfig cfg =
        gen_config.empty() ? GeneratorConfig{} : GeneratorConfig::from_json_file(gen_config);
    std::vector<SceneRecord> scenes = generate_dataset(gen_seed, gen_n, cfg);
    save_jsonl(gen_out, scenes);
    std::cout << "wrote " << scenes.size() << " scenes to " << gen_out << "\n";
    return 0;
  }

  if (app.got_subcommand(tr)) {
    TrainSpec spec = train_spec_from_file(tr_config);
    if (!tr_dataset.empty()) spec.dataset = tr_dataset;
    if (spec.dataset.empty()) throw UsageError("train: no dataset given");
    if (tr_seed_set) spec.seed = tr_seed;
    if (tr_nrm) spec.model.enable_nrm = true;
    if (tr_lee) spec.model.enable_lee = true;
    if (!tr_fusion.empty()) spec.model.fusion = fusion_from_string(tr_fusion);
    if (!tr_attention.empty()) spec.model.attention = attention_from_string(tr_attention);

    std::vector<SceneRecord> scenes = load_jsonl(spec.dataset);
    ModelParams params = ModelParams::init(spec.model, spec.seed);
    std::cout << "training " << method_name(spec.model) << " (" << to_string(spec.model.task)
              << ", " << params.total_parameters() << " parameters) on " << scenes.size()
              << " scenes\n";
    TrainResult result = train(scenes, params, spec.lr, spec.epochs, spec.seed);
    for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
      std::cout << "epoch " << e << " mean_loss " << result.epoch_mean_loss[e] << "\n";
    }
    save_model(params, tr_out);
    std::cout << "wrote model to " << tr_out << "\n";
    if (!tr_loss_out.empty()) {
      std::ofstream lo(tr_loss_out, std::ios::binary);
      if (!lo) throw FormatError("cannot open " + tr_loss_out + " for writing");
      lo << json(result.epoch_mean_loss).dump() << "\n";
    }
    return 0;
  }

  if (app.got_subcommand(ev)) {
    EvalOptions opt;
    opt.model_path = ev_model;
    opt.dataset_path = ev_dataset;
    opt.ks = ev_ks;
    opt.perturb_bbox = ev_perturb;
    opt.seed = ev_seed;
    if (!ev_corruption.empty() || ev_severity > 0) {
      CorruptionSpec cs;
      cs.kind = ev_corruption.empty() ? CorruptionKind::GaussianNoise
                                      : corruption_from_string(ev_corruption);
      cs.severity = ev_severity;
      opt.corruption = cs;
    }
    MetricsReport report = eval_run(opt);
    if (ev_out.empty()) {
      for (const MetricsRow& r : report.rows) {
        std::cout << r.task << " " << r.method << " " << r.corruption << " s" << r.severity
                  << " R@" << r.k << "=" << r.recall << " mR@" << r.k << "=" << r.mean_recall
                  << "\n";
      }
    } else {
      write_metrics_json(report, ev_out);
      std::cout << "wrote metrics to " << ev_out << "\n";
    }
    return 0;
  }

  if (app.got_subcommand(be)) {
    BenchOptions opt;
    opt.model_paths = be_models;
    opt.names = be_names;
    opt.dataset_path = be_dataset;
    opt.kinds = be_kinds.empty() ? all_corruption_kinds() : parse_kinds(be_kinds);
    opt.severities = be_severities;
    opt.ks = be_ks;
    opt.perturb_bbox = be_perturb;
    opt.seed = be_seed;
    MetricsReport report = bench_run(opt);
    write_metrics_csv(report, be_out + ".csv");
    write_metrics_json(report, be_out + ".json");
    std::cout << "wrote " << report.rows.size() << " rows to " << be_out << ".csv and "
              << be_out << ".json\n";
    return 0;
  }

  if (app.got_subcommand(gc)) {
    if (gc_seeds < 1) throw UsageError("gradcheck: --seeds must be >= 1");
    GradCheckReport report = run_gradcheck(gc_seeds);
    report.print(std::cout);
    return report.all_pass ? 0 : 1;
  }

  if (app.got_subcommand(rp)) {
    auto base = read_metrics_csv(rp_base);
    auto ours = read_metrics_csv(rp_ours);
    auto table = improvement_table(base, ours);
    write_improvement_csv(table, rp_out);
    std::cout << "wrote " << table.size() << " rows to " << rp_out << "\n";
    return 0;
  }

  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace sglab
