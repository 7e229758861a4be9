// core/src/cli.cc

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
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "xscl/analysis.h"
#include "xscl/checkpoint.h"
#include "xscl/corpus.h"
#include "xscl/errors.h"
#include "xscl/logging.h"
#include "xscl/run_config.h"
#include "xscl/trainer.h"

namespace xscl {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalidInput = 2;

constexpr uint64_t kTagFoldAssign = 0xf01d;

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("short write on " + path.string());
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sanitize(const std::string &name) {
  std::string out = name;
  for (char &c : out)
    if (c == '/') c = '_';
  return out;
}

void write_loss_curve_csv(const LossCurve &curve, const fs::path &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (curve.contrastive) {
    out << "epoch,mean_L,mean_Lc,mean_Lm\n";
    for (const LossCurvePoint &p : curve.points)
      out << p.epoch << "," << p.mean_total << "," << p.mean_contrast << ","
          << p.mean_margin << "\n";
  } else {
    out << "epoch,mean_ce\n";
    for (const LossCurvePoint &p : curve.points)
      out << p.epoch << "," << p.mean_total << "\n";
  }
}

void write_batch_log(const std::vector<BatchLogEntry> &log,
                     const fs::path &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  for (const BatchLogEntry &entry : log) {
    nlohmann::json rec;
    rec["epoch"] = entry.epoch;
    rec["batch"] = entry.batch_index;
    rec["anchor"] = to_string(entry.anchor);
    rec["ids"] = entry.member_ids;
    out << rec.dump() << "\n";
  }
}

// Contrast batches drawn from whole manifests (no fold structure), used for
// the standalone analyze command.
std::vector<ContrastBatch> probe_batches(const CorpusManifest &a,
                                         const CorpusManifest &b,
                                         int batch_size, int count,
                                         uint64_t seed) {
  std::vector<const Utterance *> pool_a, pool_b;
  for (const Utterance &u : a.utterances) pool_a.push_back(&u);
  for (const Utterance &u : b.utterances) pool_b.push_back(&u);
  Rng rng(seed);
  std::vector<ContrastBatch> batches;
  for (int i = 0; i < count; i++)
    batches.push_back(sample_batch(pool_a, pool_b, batch_size, rng));
  return batches;
}

int cmd_synth(const std::string &spec_path, const std::string &out_dir) {
  const SynthFileSpec spec = parse_synth_spec(read_text(spec_path));
  fs::create_directories(out_dir);
  for (const SyntheticSpec &corpus_spec : spec.corpora) {
    const CorpusManifest manifest = generate_synthetic(corpus_spec);
    const fs::path manifest_path =
        fs::path(out_dir) / (manifest.corpus_id + ".jsonl");
    save_manifest(manifest, manifest_path, manifest.corpus_id + "_audio");
    std::cout << "wrote " << manifest_path.string() << " ("
              << manifest.utterances.size() << " utterances)\n";
  }
  return kExitOk;
}

int cmd_train(const std::string &config_path, const std::string &out_override,
              bool seed_given, uint64_t seed_override,
              const std::string &variant_override, bool parallel_folds) {
  RunConfig cfg = load_run_config(config_path);
  if (seed_given) cfg.seed = seed_override;
  if (!variant_override.empty()) cfg.variant = parse_variant(variant_override);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (parallel_folds) cfg.parallel_folds = true;
  if (cfg.out_dir.empty())
    throw InputError("config: no output directory (set out_dir or pass --out)");
  cfg.validate();

  // All inputs are loaded and validated before anything is written.
  std::vector<CorpusManifest> manifests;
  for (size_t i = 0; i < cfg.corpora.size(); i++)
    manifests.push_back(resolve_corpus(cfg.corpora[i], *cfg.seed, i));
  if (manifests[0].corpus_id == manifests[1].corpus_id)
    throw InputError("config: the two corpora share the id '" +
                     manifests[0].corpus_id + "'");
  for (size_t i = 0; i < manifests.size(); i++)
    manifests[i] = assign_folds(manifests[i], cfg.folds,
                                derive_seed(*cfg.seed, kTagFoldAssign + i));

  CrossValidateConfig cv;
  cv.model = cfg.model;
  cv.stage1 = cfg.stage1;
  cv.stage1.loss = cfg.loss;
  cv.stage2 = cfg.stage2;
  cv.ft = cfg.ft;
  cv.variant = cfg.variant;
  cv.folds = cfg.folds;
  cv.master_seed = *cfg.seed;
  cv.parallel_folds = cfg.parallel_folds;
  cv.profile_batches = cfg.profile_batches;
  if (cfg.stage2.target_corpus_id != "all" &&
      !cfg.stage2.target_corpus_id.empty())
    cv.stage2_targets = {cfg.stage2.target_corpus_id};
  cv.config_snapshot = resolved_config_json(cfg);

  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  write_text(out / "config_resolved.json", cv.config_snapshot);

  XSCL_INFO << "training variant '" << to_string(cfg.variant) << "' on '"
            << manifests[0].corpus_id << "' + '" << manifests[1].corpus_id
            << "'";
  const CrossValidateResult result =
      cross_validate(manifests[0], manifests[1], cv);

  fs::create_directories(out / "checkpoints");
  fs::create_directories(out / "logs");
  fs::create_directories(out / "curves");
  for (const FoldArtifacts &fold : result.artifacts) {
    const std::string suffix = "_fold" + std::to_string(fold.fold);
    if (fold.stage1) {
      save_checkpoint(*fold.stage1,
                      out / "checkpoints" / ("stage1" + suffix + ".ckpt"));
      write_batch_log(fold.stage1_batch_log,
                      out / "logs" / ("batchlog_stage1" + suffix + ".jsonl"));
    }
    for (const auto &[corpus, ckpt] : fold.stage2)
      save_checkpoint(ckpt, out / "checkpoints" /
                                ("stage2_" + corpus + suffix + ".ckpt"));
    for (const auto &[corpus, ckpt] : fold.ft)
      save_checkpoint(
          ckpt, out / "checkpoints" / ("ft_" + corpus + suffix + ".ckpt"));
  }
  for (const LossCurve &curve : result.report.curves)
    write_loss_curve_csv(curve,
                         out / "curves" /
                             ("loss_" + sanitize(curve.name) + ".csv"));

  write_text(out / "run_report.json", serialize_report(result.report));
  emit_report(result.report, out);

  std::cout << std::fixed << std::setprecision(2);
  for (const VariantCorpusReport &r : result.report.reports)
    std::cout << r.variant << " on " << r.corpus_id << ": mean UA "
              << 100.0 * r.mean_ua << "%\n";
  return kExitOk;
}

int cmd_analyze(const std::string &checkpoint_path,
                const std::vector<std::string> &manifest_paths,
                const std::string &out_dir, uint64_t seed, int n_batches) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (ckpt.stage != StageTag::kStage1) {
    XSCL_WARN << "checkpoint stage is '" << to_string(ckpt.stage)
              << "'; the similarity comparison expects a stage1 checkpoint";
  }
  if (manifest_paths.size() != 2)
    throw InputError("analyze: exactly two manifests are required");

  const CorpusManifest a = load_manifest(manifest_paths[0]);
  const CorpusManifest b = load_manifest(manifest_paths[1]);
  const int batch_size = 32;
  const auto batches = probe_batches(a, b, batch_size, n_batches, seed);

  const EncoderStack<float> finetuned = restore_stack(ckpt);
  ModelConfig random_cfg = ckpt.config;
  random_cfg.seed = seed;
  const EncoderStack<float> random_stack(random_cfg);

  const SimilarityProfile random_profile =
      layer_similarity_profile(random_stack, batches);
  const SimilarityProfile tuned_profile =
      layer_similarity_profile(finetuned, batches);

  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "similarity_profile.csv";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "variant,layer,pos_mean,neg_mean\n";
  for (int l = 0; l < random_profile.n_layers(); l++)
    out << "random," << (l + 1) << ","
        << random_profile.pos_mean[static_cast<size_t>(l)] << ","
        << random_profile.neg_mean[static_cast<size_t>(l)] << "\n";
  for (int l = 0; l < tuned_profile.n_layers(); l++)
    out << "finetuned," << (l + 1) << ","
        << tuned_profile.pos_mean[static_cast<size_t>(l)] << ","
        << tuned_profile.neg_mean[static_cast<size_t>(l)] << "\n";
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_report(const std::string &report_path, const std::string &out_dir) {
  const RunReport report = parse_report(read_text(report_path));
  emit_report(report, out_dir);
  std::cout << "wrote report CSVs to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string> &args) {
  CLI::App app{"Cross-corpus contrastive fine-tuning for speech emotion "
               "recognition"};
  app.require_subcommand(1);

  // synth
  auto *synth = app.add_subcommand(
      "synth", "Generate synthetic corpora from a spec file");
  std::string synth_spec, synth_out;
  synth->add_option("--spec", synth_spec, "Synthesis spec (JSON)")
      ->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // train
  auto *train = app.add_subcommand(
      "train", "Run cross-validated training from a config file");
  std::string train_config, train_out, train_variant;
  uint64_t train_seed = 0;
  bool train_parallel = false;
  train->add_option("--config", train_config, "Run config (JSON)")
      ->required();
  train->add_option("--out", train_out, "Output directory (overrides config)");
  auto *seed_opt =
      train->add_option("--seed", train_seed, "Master seed (overrides config)");
  train->add_option("--variant", train_variant,
                    "two-stage | ft-baseline | both (overrides config)");
  train->add_flag("--parallel-folds", train_parallel,
                  "Run cross-validation folds concurrently");

  // analyze
  auto *analyze = app.add_subcommand(
      "analyze",
      "Per-layer positive/negative similarity of a checkpoint versus a "
      "freshly seeded stack");
  std::string analyze_ckpt, analyze_out;
  std::vector<std::string> analyze_manifests;
  uint64_t analyze_seed = 0;
  int analyze_batches = 16;
  analyze->add_option("--checkpoint", analyze_ckpt, "Checkpoint file")
      ->required();
  analyze->add_option("--manifests", analyze_manifests,
                      "Two manifest files")
      ->expected(2)
      ->required();
  analyze->add_option("--out", analyze_out, "Output directory")->required();
  analyze->add_option("--seed", analyze_seed,
                      "Seed for probe batches and the random stack");
  analyze->add_option("--batches", analyze_batches, "Probe batch count");

  // report
  auto *report = app.add_subcommand(
      "report", "Re-emit report CSVs from a run_report.json");
  std::string report_in, report_out;
  report->add_option("--report", report_in, "run_report.json path")
      ->required();
  report->add_option("--out", report_out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    std::cerr << e.what() << "\n";
    return kExitInvalidInput;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
    if (train->parsed())
      return cmd_train(train_config, train_out, seed_opt->count() > 0,
                       train_seed, train_variant, train_parallel);
    if (analyze->parsed())
      return cmd_analyze(analyze_ckpt, analyze_manifests, analyze_out,
                         analyze_seed, analyze_batches);
    if (report->parsed()) return cmd_report(report_in, report_out);
    std::cerr << "no subcommand given\n";
    return kExitInvalidInput;
  } catch (const InputError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace xscl
