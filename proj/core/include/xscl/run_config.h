// core/include/xscl/run_config.h

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

// Run configuration files: strict JSON with explicit keys mirroring the
// config structs.  Unknown keys are hard errors so a mistyped hyperparameter
// name cannot silently fall back to a default.  All defaults equal the
// reference training regime, so an empty override section reproduces it.

#ifndef XSCL_RUN_CONFIG_H_
#define XSCL_RUN_CONFIG_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xscl/corpus.h"
#include "xscl/trainer.h"

namespace xscl {

// Either a manifest path or an inline synthetic spec.
struct CorpusSource {
  std::string manifest_path;  // resolved absolute at parse time
  std::optional<SyntheticSpec> synthetic;
};

struct RunConfig {
  std::optional<uint64_t> seed;
  Variant variant = Variant::kBoth;
  int folds = 5;
  std::string out_dir;
  bool parallel_folds = false;
  std::vector<CorpusSource> corpora;  // exactly two
  ModelConfig model;
  LossConfig loss;
  Stage1Config stage1;
  Stage2Config stage2;  // target_corpus_id: a corpus id or "all" (default)
  FTBaselineConfig ft;
  int profile_batches = 16;

  // Checks everything that can be checked without loading corpora.
  void validate() const;
};

// Parses a run config; relative manifest paths resolve against base_dir.
RunConfig parse_run_config(const std::string &json_text,
                           const std::filesystem::path &base_dir);
RunConfig load_run_config(const std::filesystem::path &path);

// Full snapshot of a config with every default materialized; parsing the
// result reproduces the same RunConfig.
std::string resolved_config_json(const RunConfig &cfg);

// Loads or generates the corpus behind a source.  Synthetic specs without a
// seed get one derived from the master seed and their position.
CorpusManifest resolve_corpus(const CorpusSource &source, uint64_t master_seed,
                              size_t index);

// The synth command's input: one shared emotion-signal table plus per-corpus
// nuisance/shape settings.  A missing seed is a validation error.
struct SynthFileSpec {
  uint64_t seed = 0;
  std::vector<SyntheticSpec> corpora;
};

SynthFileSpec parse_synth_spec(const std::string &json_text);

}  // namespace xscl

#endif  // XSCL_RUN_CONFIG_H_
