// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sglab/bench.hpp"
#include "sglab/cli.hpp"

using namespace sglab;
namespace fs = std::filesystem;

namespace {

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / ("sglab_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("cli: generate determinism and exit codes") {
  TempDir tmp;
  std::string out1 = tmp / "a.jsonl";
  std::string out2 = tmp / "b.jsonl";
  CHECK(run_cli({"generate", "--seed", "7", "--n", "25", "--out", out1}) == 0);
  CHECK(run_cli({"generate", "--seed", "7", "--n", "25", "--out", out2}) == 0);
  CHECK(file_bytes(out1) == file_bytes(out2));

  CHECK(run_cli({"generate"}) == 1);             // missing --out
  CHECK(run_cli({"no-such-command"}) == 1);      // usage
  CHECK(run_cli({"eval", "--model", tmp / "missing.bin", "--dataset", out1}) == 2);
}

TEST_CASE("cli: train, eval, bench, report round trip") {
  TempDir tmp;
  std::string train_set = tmp / "train.jsonl";
  std::string test_set = tmp / "test.jsonl";
  REQUIRE(run_cli({"generate", "--seed", "3", "--n", "30", "--out", train_set}) == 0);
  REQUIRE(run_cli({"generate", "--seed", "4", "--n", "12", "--out", test_set}) == 0);

  std::string cfg_path = tmp / "train.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"dataset": ")" << train_set
        << R"(", "task": "predcls", "lr": 0.05, "epochs": 2, "seed": 5,
            "feature_dim": 24, "cat_embed_dim": 8, "box_embed_dim": 8,
            "backbone_channels": [4, 6, 8]})";
  }

  std::string base_model = tmp / "base.bin";
  std::string ours_model = tmp / "ours.bin";
  std::string loss1 = tmp / "loss1.json";
  std::string loss2 = tmp / "loss2.json";
  REQUIRE(run_cli({"train", "--config", cfg_path, "--out", base_model, "--loss-out", loss1}) ==
          0);
  REQUIRE(run_cli({"train", "--config", cfg_path, "--out", ours_model, "--enable-nrm",
                   "--enable-lee", "--fusion", "gate", "--attention", "centroid"}) == 0);

  // same seed/config -> byte-identical model file and loss curve
  std::string base_model2 = tmp / "base2.bin";
  REQUIRE(run_cli({"train", "--config", cfg_path, "--out", base_model2, "--loss-out", loss2}) ==
          0);
  CHECK(file_bytes(base_model) == file_bytes(base_model2));
  CHECK(file_bytes(loss1) == file_bytes(loss2));

  // eval: clean metrics JSON with values in [0,1]
  std::string metrics = tmp / "metrics.json";
  REQUIRE(run_cli({"eval", "--model", base_model, "--dataset", test_set, "--k", "20,50",
                   "--out", metrics}) == 0);
  std::string mbytes = file_bytes(metrics);
  CHECK(mbytes.find("\"recall\"") != std::string::npos);

  // bench twice -> byte-identical CSV
  std::string rep1 = tmp / "rep1";
  std::string rep2 = tmp / "rep2";
  for (const std::string& rep : {rep1, rep2}) {
    REQUIRE(run_cli({"bench", "--models", base_model + "," + ours_model, "--names",
                     "base,ours", "--dataset", test_set, "--kinds",
                     "gaussian_noise,contrast", "--severities", "0,3,5", "--k", "20,50",
                     "--seed", "11", "--out", rep}) == 0);
  }
  CHECK(file_bytes(rep1 + ".csv") == file_bytes(rep2 + ".csv"));
  CHECK(file_bytes(rep1 + ".json") == file_bytes(rep2 + ".json"));

  // the avg rows equal the arithmetic mean of their per-kind cells
  auto rows = read_metrics_csv(rep1 + ".csv");
  for (const MetricsRow& avg : rows) {
    if (avg.corruption != "avg") continue;
    double racc = 0, macc = 0;
    int cnt = 0;
    for (const MetricsRow& r : rows) {
      if (r.method == avg.method && r.severity == avg.severity && r.k == avg.k &&
          r.corruption != "avg" && r.corruption != "clean") {
        racc += r.recall;
        macc += r.mean_recall;
        ++cnt;
      }
    }
    REQUIRE(cnt == 2);
    // the CSV carries 6 decimals, so recomputing from parsed cells can be
    // off by one quantum
    CHECK(avg.recall == doctest::Approx(racc / cnt).epsilon(5e-6));
    CHECK(avg.mean_recall == doctest::Approx(macc / cnt).epsilon(5e-6));
  }

  // all recalls are probabilities
  for (const MetricsRow& r : rows) {
    CHECK(r.recall >= 0.0);
    CHECK(r.recall <= 1.0);
    CHECK(r.mean_recall >= 0.0);
    CHECK(r.mean_recall <= 1.0);
  }

  // report: improvement table on a hand-made 2-row fixture
  std::string base_csv = tmp / "hand_base.csv";
  std::string ours_csv = tmp / "hand_ours.csv";
  {
    std::ofstream b(base_csv);
    b << "task,method,corruption,severity,k,recall,mean_recall,n_scenes\n";
    b << "predcls,base,gaussian_noise,5,50,0.500000,0.400000,10\n";
    b << "predcls,base,clean,0,50,0.800000,0.700000,10\n";
    std::ofstream o(ours_csv);
    o << "task,method,corruption,severity,k,recall,mean_recall,n_scenes\n";
    o << "predcls,ours,gaussian_noise,5,50,0.600000,0.500000,10\n";
    o << "predcls,ours,clean,0,50,0.840000,0.770000,10\n";
  }
  std::string imp_csv = tmp / "imp.csv";
  REQUIRE(run_cli({"report", base_csv, ours_csv, "--out", imp_csv}) == 0);
  std::string imp = file_bytes(imp_csv);
  // (0.6 - 0.5) / 0.5 = 0.2 and (0.5 - 0.4) / 0.4 = 0.25
  CHECK(imp.find("predcls,gaussian_noise,5,50,0.500000,0.600000,0.200000,0.400000,0.500000,0.250000") !=
        std::string::npos);
  // (0.84 - 0.8) / 0.8 = 0.05 and (0.77 - 0.7) / 0.7 = 0.1
  CHECK(imp.find("predcls,clean,0,50,0.800000,0.840000,0.050000,0.700000,0.770000,0.100000") !=
        std::string::npos);

  // malformed CSV is a format error (exit 2)
  std::string broken = tmp / "broken.csv";
  {
    std::ofstream b(broken);
    b << "nope\n";
  }
  CHECK(run_cli({"report", broken, ours_csv, "--out", tmp / "imp2.csv"}) == 2);
}

TEST_CASE("cli: perturb-bbox evaluation completes") {
  TempDir tmp;
  std::string train_set = tmp / "train.jsonl";
  REQUIRE(run_cli({"generate", "--seed", "9", "--n", "20", "--out", train_set}) == 0);
  std::string cfg_path = tmp / "cfg.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"dataset": ")" << train_set
        << R"(", "task": "predcls", "lr": 0.05, "epochs": 1, "seed": 2,
            "feature_dim": 24, "cat_embed_dim": 8, "box_embed_dim": 8,
            "backbone_channels": [4, 6, 8]})";
  }
  std::string model = tmp / "m.bin";
  REQUIRE(run_cli({"train", "--config", cfg_path, "--out", model}) == 0);
  CHECK(run_cli({"eval", "--model", model, "--dataset", train_set, "--perturb-bbox", "0.3",
                 "--out", tmp / "m.json"}) == 0);
}
