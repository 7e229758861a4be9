// core/include/xscl/trainer.h

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

// Two-stage contrastive fine-tuning, the direct fine-tuning baseline, their
// learning-rate schedules, the Adam optimizer, and 5-fold cross-validation
// orchestration.

#ifndef XSCL_TRAINER_H_
#define XSCL_TRAINER_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xscl/analysis.h"
#include "xscl/checkpoint.h"
#include "xscl/corpus.h"
#include "xscl/encoder.h"
#include "xscl/losses.h"
#include "xscl/sampler.h"

namespace xscl {

// Stage one: contrastive fine-tuning of the transformer encoder (at a
// reduced learning rate) and the pooling weights on two corpora.
struct Stage1Config {
  double base_lr = 1e-4;
  int epochs = 50;
  int decay_start_epoch = 25;  // first halving takes effect here (1-based)
  int halve_every = 5;
  double encoder_lr_multiplier = 0.4;
  int batch_size = 32;
  uint64_t seed = 0;
  LossConfig loss;

  void validate() const;
};

// Stage two: classifier and pooling fine-tuning on the target corpus with
// the representation frozen.
struct Stage2Config {
  double lr = 5e-4;
  int epochs = 10;
  int drop_epoch = 5;  // lr drops by drop_factor after this epoch
  double drop_factor = 0.1;
  int batch_size = 32;
  std::string target_corpus_id;
  uint64_t seed = 0;

  void validate() const;
};

// Direct supervised fine-tuning baseline on a single corpus.
struct FTBaselineConfig {
  double lr = 1e-3;
  int epochs = 50;
  int decay_every = 20;
  double decay_factor = 0.2;
  double encoder_lr_multiplier = 0.4;
  int batch_size = 32;
  uint64_t seed = 0;

  void validate() const;
};

// Closed-form schedules; epoch is 1-based and must be in [1, epochs].
double lr_at_epoch(const Stage1Config &cfg, int epoch);
double lr_at_epoch(const Stage2Config &cfg, int epoch);
double lr_at_epoch(const FTBaselineConfig &cfg, int epoch);

struct OptimizerState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t step_count = 0;
  // Per-parameter first/second moment accumulators, keyed by name.
  std::map<std::string, std::pair<Mat<float>, Mat<float>>> moments;
};

// One bias-corrected Adam update.  Group learning rates are lr times the
// group's multiplier (default 1).  Passing a frozen parameter is a contract
// violation and throws std::logic_error.  Parameters without a gradient
// entry are treated as having a zero gradient.
void adam_step(OptimizerState *state, const std::vector<ParamRef<float>> &params,
               const GradMap<float> &grads, double lr,
               const std::map<ParamGroup, double> &group_lr_multipliers = {});

struct Stage1Result {
  Checkpoint checkpoint;
  LossCurve curve;
  std::vector<BatchLogEntry> batch_log;
};

Stage1Result run_stage1(const CorpusManifest &corpus_a,
                        const CorpusManifest &corpus_b,
                        const ModelConfig &model_cfg, const Stage1Config &cfg,
                        int test_fold);

struct SupervisedResult {
  Checkpoint checkpoint;
  LossCurve curve;
  FoldResult eval;
};

// Requires a stage1 checkpoint; loads representation and pooling, freezes
// the whole representation model, trains pooling + a fresh classifier sized
// to the target label space, and evaluates UA on the held-out fold.
SupervisedResult run_stage2(const Checkpoint &stage1_checkpoint,
                            const CorpusManifest &target,
                            const Stage2Config &cfg, int test_fold);

SupervisedResult run_ft_baseline(const CorpusManifest &corpus,
                                 const ModelConfig &model_cfg,
                                 const FTBaselineConfig &cfg, int test_fold);

// Classification of the held-out fold with an as-initialized stack (fresh
// classifier, no training); the floor that trained variants are compared to.
FoldResult evaluate_untrained(const CorpusManifest &corpus,
                              const ModelConfig &model_cfg,
                              uint64_t classifier_seed, int test_fold);

enum class Variant { kTwoStage, kFtBaseline, kBoth };

const std::string &to_string(Variant variant);
Variant parse_variant(const std::string &name);

struct CrossValidateConfig {
  ModelConfig model;
  Stage1Config stage1;
  Stage2Config stage2;
  FTBaselineConfig ft;
  Variant variant = Variant::kBoth;
  int folds = 5;
  uint64_t master_seed = 0;
  bool parallel_folds = false;
  // Corpus ids receiving stage-2 fine-tuning; empty means every corpus.
  std::vector<std::string> stage2_targets;
  int profile_batches = 16;
  std::string config_snapshot;  // recorded verbatim in the report
};

struct FoldArtifacts {
  int fold = 0;
  std::optional<Checkpoint> stage1;
  std::vector<std::pair<std::string, Checkpoint>> stage2;  // per target
  std::vector<std::pair<std::string, Checkpoint>> ft;      // per corpus
  std::vector<BatchLogEntry> stage1_batch_log;
};

struct CrossValidateResult {
  RunReport report;
  std::vector<FoldArtifacts> artifacts;
};

// Runs the selected variant for every held-out fold.  Stage-1 sampling and
// training touch only the training folds; the similarity profiles are probed
// on batches drawn from the held-out folds.  Fully deterministic given the
// master seed; parallel execution gives results identical to serial.
CrossValidateResult cross_validate(const CorpusManifest &corpus_a,
                                   const CorpusManifest &corpus_b,
                                   const CrossValidateConfig &cfg);

// Sorted class list of a manifest's label space.
std::vector<EmotionLabel> class_list(const CorpusManifest &manifest);

}  // namespace xscl

#endif  // XSCL_TRAINER_H_
