// core/include/xscl/analysis.h

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

#ifndef XSCL_ANALYSIS_H_
#define XSCL_ANALYSIS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "xscl/corpus.h"
#include "xscl/encoder.h"
#include "xscl/sampler.h"

namespace xscl {

// Square count matrix over a fixed class list (true label rows, predicted
// columns).
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<EmotionLabel> classes);

  void add(EmotionLabel truth, EmotionLabel predicted);

  const std::vector<EmotionLabel> &classes() const { return classes_; }
  int count(int true_idx, int pred_idx) const;
  int class_index(EmotionLabel label) const;  // -1 when absent
  int total() const;

 private:
  std::vector<EmotionLabel> classes_;
  std::vector<std::vector<int>> counts_;
};

// Macro-average recall.  Every class row must have at least one sample.
double unweighted_accuracy(const ConfusionMatrix &cm);

// Mean cosine similarity of positive and negative pairs per transformer
// layer (1-based layer indices, layer count entries).
struct SimilarityProfile {
  std::vector<double> pos_mean;
  std::vector<double> neg_mean;

  int n_layers() const { return static_cast<int>(pos_mean.size()); }
};

// The layer-wise similarity probe: features are the time-mean of each
// transformer layer's activations; positive pairs are all pairs within a
// batch's positives and negative pairs all positive x negative pairs,
// averaged per batch and then over batches.
SimilarityProfile layer_similarity_profile(
    const EncoderStack<float> &stack,
    const std::vector<ContrastBatch> &batches);

// Per-fold classification outcome of one model variant on one corpus.
struct FoldResult {
  int fold = 0;
  double ua = 0.0;
  ConfusionMatrix confusion;
};

struct VariantCorpusReport {
  std::string variant;    // "two-stage" | "ft-baseline" | "untrained"
  std::string corpus_id;
  std::vector<FoldResult> folds;
  double mean_ua = 0.0;
};

struct LossCurvePoint {
  int epoch = 0;
  double mean_total = 0.0;
  double mean_contrast = 0.0;  // stage-1 only
  double mean_margin = 0.0;    // stage-1 only
};

struct LossCurve {
  std::string name;  // e.g. "stage1/fold0"
  bool contrastive = false;
  std::vector<LossCurvePoint> points;
};

struct BatchLogEntry {
  int epoch = 0;
  int batch_index = 0;
  EmotionLabel anchor = EmotionLabel::kNeutral;
  std::vector<std::string> member_ids;
};

struct RunReport {
  std::string config_snapshot;  // resolved config, JSON text
  std::vector<VariantCorpusReport> reports;
  std::vector<LossCurve> curves;
  // Stage-1 similarity profiles on held-out data, one per fold.
  std::vector<SimilarityProfile> profile_before;
  std::vector<SimilarityProfile> profile_after;

  const VariantCorpusReport *find(const std::string &variant,
                                  const std::string &corpus_id) const;
};

std::string serialize_report(const RunReport &report);
RunReport parse_report(const std::string &json_text);

// Writes `{corpus}_ua.csv` per corpus (columns model_variant,fold,ua with a
// mean row per variant) and `similarity_profile.csv` (columns
// layer,pos_mean,neg_mean; the post-stage-1 profile averaged over folds).
void emit_report(const RunReport &report, const std::filesystem::path &dir);

// Element-wise mean of profiles with identical layer counts.
SimilarityProfile mean_profile(const std::vector<SimilarityProfile> &profiles);

}  // namespace xscl

#endif  // XSCL_ANALYSIS_H_
