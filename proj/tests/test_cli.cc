// tests/test_cli.cc

// Copyright 2026  XSCL Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "xscl/cli.h"

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "testing_util.h"
#include "xscl/corpus.h"
#include "xscl/run_config.h"

using namespace xscl;
using namespace xscl::testing;

namespace {

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path);
  out << text;
}

const char *kSynthSpec = R"({
  "seed": 99,
  "emotion_signals": {
    "neutral": {"fundamental_hz": 180, "am_rate_hz": 2},
    "sad": {"fundamental_hz": 280, "am_rate_hz": 3.5},
    "angry": {"fundamental_hz": 420, "am_rate_hz": 5.5},
    "happy": {"fundamental_hz": 600, "am_rate_hz": 8},
    "fear": {"fundamental_hz": 820, "am_rate_hz": 11},
    "surprise": {"fundamental_hz": 1080, "am_rate_hz": 14}
  },
  "corpora": [
    {"corpus_id": "synth_a", "label_space": ["neutral", "sad", "angry", "happy"],
     "utterances_per_label": 4, "duration_samples": 160, "sample_rate": 16000,
     "spectral_tilt": 0.3, "noise_level": 0.02},
    {"corpus_id": "synth_b", "label_space": ["neutral", "sad", "angry", "happy", "fear", "surprise"],
     "utterances_per_label": 4, "duration_samples": 160, "sample_rate": 16000,
     "spectral_tilt": -0.4, "noise_level": 0.04}
  ]
})";

// Tiny but complete training config over the two generated manifests.
std::string train_config(const std::filesystem::path &dir) {
  std::ostringstream os;
  os << R"({
  "seed": 4242,
  "variant": "both",
  "folds": 2,
  "profile_batches": 2,
  "corpora": [
    {"manifest": ")" << (dir / "synth_a.jsonl").string() << R"("},
    {"manifest": ")" << (dir / "synth_b.jsonl").string() << R"("}
  ],
  "model": {"conv_layers": [[4, 4, 6], [4, 4, 8]], "d_model": 8, "n_layers": 2,
            "n_heads": 2, "ffn_dim": 16, "classifier_hidden": 16},
  "stage1": {"epochs": 1, "decay_start_epoch": 1, "batch_size": 8},
  "stage2": {"epochs": 1, "drop_epoch": 1, "batch_size": 8},
  "ft": {"epochs": 1, "decay_every": 1, "batch_size": 8}
})";
  return os.str();
}

}  // namespace

TEST_CASE("synth generates deterministic manifests") {
  TempDir tmp("cli_synth");
  const auto spec_path = tmp.path() / "spec.json";
  write_file(spec_path, kSynthSpec);

  const auto out1 = tmp.path() / "out1";
  const auto out2 = tmp.path() / "out2";
  CHECK(run_cli({"synth", "--spec", spec_path.string(), "--out",
                 out1.string()}) == 0);
  CHECK(run_cli({"synth", "--spec", spec_path.string(), "--out",
                 out2.string()}) == 0);

  for (const char *name : {"synth_a", "synth_b"}) {
    const auto m1 = out1 / (std::string(name) + ".jsonl");
    const auto m2 = out2 / (std::string(name) + ".jsonl");
    REQUIRE(std::filesystem::exists(m1));
    CHECK(read_file(m1) == read_file(m2));

    const CorpusManifest manifest = load_manifest(m1);
    CHECK(manifest.corpus_id == name);
    CHECK(manifest.utterances.size() ==
          (std::string(name) == "synth_a" ? 16 : 24));
    // Audio landed as raw files next to the manifest, byte-stable across
    // reruns.
    const auto wav1 = out1 / (std::string(name) + "_audio") /
                      (manifest.utterances[0].id + ".f32");
    const auto wav2 = out2 / (std::string(name) + "_audio") /
                      (manifest.utterances[0].id + ".f32");
    REQUIRE(std::filesystem::exists(wav1));
    CHECK(read_file(wav1) == read_file(wav2));
  }
}

TEST_CASE("synth without a seed is invalid input") {
  TempDir tmp("cli_synth_noseed");
  const auto spec_path = tmp.path() / "spec.json";
  write_file(spec_path, R"({
    "emotion_signals": {"happy": {"fundamental_hz": 600, "am_rate_hz": 8}},
    "corpora": [{"corpus_id": "x", "label_space": ["happy"],
                 "utterances_per_label": 2}]
  })");
  CHECK(run_cli({"synth", "--spec", spec_path.string(), "--out",
                 (tmp.path() / "out").string()}) == 2);
}

TEST_CASE("train runs end to end and is reproducible") {
  TempDir tmp("cli_train");
  const auto spec_path = tmp.path() / "spec.json";
  write_file(spec_path, kSynthSpec);
  REQUIRE(run_cli({"synth", "--spec", spec_path.string(), "--out",
                   tmp.path().string()}) == 0);

  const auto config_path = tmp.path() / "run.json";
  write_file(config_path, train_config(tmp.path()));

  const auto out = tmp.path() / "run";
  REQUIRE(run_cli({"train", "--config", config_path.string(), "--out",
                   out.string()}) == 0);

  CHECK(std::filesystem::exists(out / "config_resolved.json"));
  CHECK(std::filesystem::exists(out / "run_report.json"));
  CHECK(std::filesystem::exists(out / "synth_a_ua.csv"));
  CHECK(std::filesystem::exists(out / "synth_b_ua.csv"));
  CHECK(std::filesystem::exists(out / "similarity_profile.csv"));
  for (int fold = 0; fold < 2; fold++) {
    CHECK(std::filesystem::exists(
        out / "checkpoints" / ("stage1_fold" + std::to_string(fold) + ".ckpt")));
    CHECK(std::filesystem::exists(
        out / "checkpoints" /
        ("stage2_synth_a_fold" + std::to_string(fold) + ".ckpt")));
    CHECK(std::filesystem::exists(
        out / "checkpoints" /
        ("stage2_synth_b_fold" + std::to_string(fold) + ".ckpt")));
    CHECK(std::filesystem::exists(
        out / "checkpoints" /
        ("ft_synth_a_fold" + std::to_string(fold) + ".ckpt")));
    CHECK(std::filesystem::exists(
        out / "logs" / ("batchlog_stage1_fold" + std::to_string(fold) +
                        ".jsonl")));
  }
  CHECK(std::filesystem::exists(out / "curves" / "loss_stage1_fold0.csv"));

  // Same seed, fresh directory: identical report bytes.
  const auto out2 = tmp.path() / "run2";
  REQUIRE(run_cli({"train", "--config", config_path.string(), "--out",
                   out2.string()}) == 0);
  CHECK(read_file(out / "run_report.json") ==
        read_file(out2 / "run_report.json"));

  // The resolved snapshot reproduces the run bit-exactly.
  const auto out3 = tmp.path() / "run3";
  REQUIRE(run_cli({"train", "--config",
                   (out / "config_resolved.json").string(), "--out",
                   out3.string()}) == 0);
  CHECK(read_file(out / "run_report.json") ==
        read_file(out3 / "run_report.json"));

  SUBCASE("analyze and report consume the training outputs") {
    const auto analyze_out = tmp.path() / "analysis";
    REQUIRE(run_cli({"analyze", "--checkpoint",
                     (out / "checkpoints" / "stage1_fold0.ckpt").string(),
                     "--manifests", (tmp.path() / "synth_a.jsonl").string(),
                     (tmp.path() / "synth_b.jsonl").string(), "--out",
                     analyze_out.string(), "--seed", "5", "--batches",
                     "2"}) == 0);
    const auto profile = analyze_out / "similarity_profile.csv";
    REQUIRE(std::filesystem::exists(profile));
    std::istringstream lines(read_file(profile));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "variant,layer,pos_mean,neg_mean");
    int random_rows = 0, tuned_rows = 0;
    while (std::getline(lines, line)) {
      if (line.rfind("random,", 0) == 0) random_rows++;
      if (line.rfind("finetuned,", 0) == 0) tuned_rows++;
    }
    CHECK(random_rows == 2);  // n_layers rows per variant
    CHECK(tuned_rows == 2);

    // Rerun reproduces the random-stack column.
    const auto analyze_out2 = tmp.path() / "analysis2";
    REQUIRE(run_cli({"analyze", "--checkpoint",
                     (out / "checkpoints" / "stage1_fold0.ckpt").string(),
                     "--manifests", (tmp.path() / "synth_a.jsonl").string(),
                     (tmp.path() / "synth_b.jsonl").string(), "--out",
                     analyze_out2.string(), "--seed", "5", "--batches",
                     "2"}) == 0);
    CHECK(read_file(profile) ==
          read_file(analyze_out2 / "similarity_profile.csv"));

    const auto report_out = tmp.path() / "reemit";
    REQUIRE(run_cli({"report", "--report",
                     (out / "run_report.json").string(), "--out",
                     report_out.string()}) == 0);
    CHECK(read_file(report_out / "synth_a_ua.csv") ==
          read_file(out / "synth_a_ua.csv"));
    CHECK(read_file(report_out / "similarity_profile.csv") ==
          read_file(out / "similarity_profile.csv"));
  }
}

TEST_CASE("corrupt manifests abort before any checkpoint is written") {
  TempDir tmp("cli_corrupt");
  write_file(tmp.path() / "synth_a.jsonl", "{broken\n");
  write_file(tmp.path() / "synth_b.jsonl", "{broken\n");
  const auto config_path = tmp.path() / "run.json";
  write_file(config_path, train_config(tmp.path()));

  const auto out = tmp.path() / "run";
  CHECK(run_cli({"train", "--config", config_path.string(), "--out",
                 out.string()}) == 2);
  CHECK(!std::filesystem::exists(out / "checkpoints"));
  CHECK(!std::filesystem::exists(out / "run_report.json"));
}

TEST_CASE("unknown config keys are hard errors") {
  TempDir tmp("cli_unknown");
  const auto config_path = tmp.path() / "run.json";
  write_file(config_path, R"({
    "seed": 1,
    "corpora": [],
    "stage1": {"learning_rate": 0.1}
  })");
  CHECK(run_cli({"train", "--config", config_path.string(), "--out",
                 (tmp.path() / "out").string()}) == 2);
}

TEST_CASE("missing files and bad flags are invalid input") {
  CHECK(run_cli({"train", "--config", "/nonexistent/run.json", "--out",
                 "/tmp/x"}) == 2);
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"train"}) == 2);  // --config required
  CHECK(run_cli({}) == 2);
}

TEST_CASE("config parsing details") {
  TempDir tmp("cli_cfg");

  SUBCASE("missing seed is rejected at validation") {
    RunConfig cfg = parse_run_config(R"({"corpora": [
      {"manifest": "a.jsonl"}, {"manifest": "b.jsonl"}]})",
                                     tmp.path());
    CHECK(!cfg.seed.has_value());
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("seed"),
                         InputError);
  }

  SUBCASE("relative manifest paths resolve against the config directory") {
    const RunConfig cfg = parse_run_config(R"({"seed": 3, "corpora": [
      {"manifest": "a.jsonl"}, {"manifest": "sub/b.jsonl"}]})",
                                           tmp.path());
    CHECK(cfg.corpora[0].manifest_path == (tmp.path() / "a.jsonl").string());
    CHECK(cfg.corpora[1].manifest_path ==
          (tmp.path() / "sub" / "b.jsonl").string());
  }

  SUBCASE("resolved snapshots parse back to the same config") {
    const std::string text = train_config(tmp.path());
    RunConfig cfg = parse_run_config(text, tmp.path());
    cfg.out_dir = (tmp.path() / "out").string();
    const std::string snapshot = resolved_config_json(cfg);
    const RunConfig back = parse_run_config(snapshot, tmp.path());
    CHECK(resolved_config_json(back) == snapshot);
  }

  SUBCASE("synthetic corpora with mismatched shared signals are rejected") {
    const std::string bad = R"({
      "seed": 5,
      "corpora": [
        {"synthetic": {"corpus_id": "a", "label_space": ["happy"],
          "utterances_per_label": 4,
          "emotion_signals": {"happy": {"fundamental_hz": 600, "am_rate_hz": 8}}}},
        {"synthetic": {"corpus_id": "b", "label_space": ["happy"],
          "utterances_per_label": 4,
          "emotion_signals": {"happy": {"fundamental_hz": 700, "am_rate_hz": 8}}}}
      ]})";
    RunConfig cfg = parse_run_config(bad, tmp.path());
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("disagree"),
                         InputError);
  }
}
