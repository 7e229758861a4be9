// core/include/xscl/sampler.h

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

#ifndef XSCL_SAMPLER_H_
#define XSCL_SAMPLER_H_

#include <optional>
#include <string>
#include <vector>

#include "xscl/corpus.h"
#include "xscl/rng.h"

namespace xscl {

// One contrastive training batch: N/2 positives carrying the anchor emotion
// and N/2 negatives that do not, drawn from two corpora.
struct ContrastBatch {
  EmotionLabel anchor = EmotionLabel::kNeutral;
  std::vector<const Utterance *> positives;  // N/2
  std::vector<const Utterance *> negatives;  // N/2
  int batch_size = 0;                        // N, divisible by 4
};

// Draws one batch from the two training pools.  The anchor emotion is chosen
// uniformly over the labels present in either pool.  When both corpora carry
// the anchor, N/4 positives come from each; when only one does, all N/2 come
// from it.  Negatives are always N/4 per corpus with label != anchor.
// Selection is without replacement while a pool suffices, with replacement
// otherwise.
ContrastBatch sample_batch(const std::vector<const Utterance *> &train_a,
                           const std::vector<const Utterance *> &train_b,
                           int batch_size, Rng &rng);

// Checks every ContrastBatch invariant and reports violations instead of
// throwing; an empty result means the batch is valid.  When test_fold is
// given, members from that fold are reported as leakage.
std::vector<std::string> validate_batch(
    const ContrastBatch &batch, std::optional<int> test_fold = std::nullopt);

}  // namespace xscl

#endif  // XSCL_SAMPLER_H_
