// core/src/sampler.cc

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

#include "xscl/sampler.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "xscl/errors.h"

namespace xscl {

namespace {

// Draws `count` members from `pool`; without replacement when the pool is
// large enough, with replacement otherwise.
void draw(const std::vector<const Utterance *> &pool, int count, Rng &rng,
          std::vector<const Utterance *> *out) {
  const int n = static_cast<int>(pool.size());
  if (n >= count) {
    // Partial Fisher-Yates over an index vector.
    std::vector<int> idx(pool.size());
    for (int i = 0; i < n; i++) idx[static_cast<size_t>(i)] = i;
    for (int i = 0; i < count; i++) {
      const int j = i + rng.uniform_int(n - i);
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
      out->push_back(pool[static_cast<size_t>(idx[static_cast<size_t>(i)])]);
    }
  } else {
    for (int i = 0; i < count; i++)
      out->push_back(pool[static_cast<size_t>(rng.uniform_int(n))]);
  }
}

std::vector<const Utterance *> with_label(
    const std::vector<const Utterance *> &pool, EmotionLabel label,
    bool equal) {
  std::vector<const Utterance *> out;
  for (const Utterance *u : pool) {
    if ((u->label == label) == equal) out.push_back(u);
  }
  return out;
}

}  // namespace

ContrastBatch sample_batch(const std::vector<const Utterance *> &train_a,
                           const std::vector<const Utterance *> &train_b,
                           int batch_size, Rng &rng) {
  if (batch_size < 4 || batch_size % 4 != 0) {
    std::ostringstream os;
    os << "sample_batch: batch size " << batch_size
       << " must be a positive multiple of 4";
    throw InputError(os.str());
  }
  if (train_a.empty() || train_b.empty())
    throw InputError("sample_batch: empty training pool");

  // Anchor emotion: uniform over the labels present in either pool.
  std::set<EmotionLabel> present;
  for (const Utterance *u : train_a) present.insert(u->label);
  for (const Utterance *u : train_b) present.insert(u->label);
  std::vector<EmotionLabel> labels(present.begin(), present.end());
  const EmotionLabel anchor =
      labels[static_cast<size_t>(rng.uniform_int(static_cast<int>(labels.size())))];

  const auto pos_a = with_label(train_a, anchor, true);
  const auto pos_b = with_label(train_b, anchor, true);
  const auto neg_a = with_label(train_a, anchor, false);
  const auto neg_b = with_label(train_b, anchor, false);

  ContrastBatch batch;
  batch.anchor = anchor;
  batch.batch_size = batch_size;
  const int quarter = batch_size / 4;

  if (!pos_a.empty() && !pos_b.empty()) {
    draw(pos_a, quarter, rng, &batch.positives);
    draw(pos_b, quarter, rng, &batch.positives);
  } else if (!pos_a.empty()) {
    draw(pos_a, 2 * quarter, rng, &batch.positives);
  } else {
    draw(pos_b, 2 * quarter, rng, &batch.positives);
  }

  for (const auto *corpus : {&neg_a, &neg_b}) {
    if (corpus->empty()) {
      const std::string &name =
          (corpus == &neg_a) ? train_a.front()->corpus_id
                             : train_b.front()->corpus_id;
      throw InputError("sample_batch: corpus '" + name +
                       "' has no sample with label != '" + to_string(anchor) +
                       "'");
    }
    draw(*corpus, quarter, rng, &batch.negatives);
  }
  return batch;
}

std::vector<std::string> validate_batch(const ContrastBatch &batch,
                                        std::optional<int> test_fold) {
  std::vector<std::string> violations;
  auto report = [&violations](const std::string &msg) {
    violations.push_back(msg);
  };

  if (batch.batch_size <= 0 || batch.batch_size % 4 != 0)
    report("batch size not a positive multiple of 4");
  const size_t half = static_cast<size_t>(batch.batch_size / 2);
  if (batch.positives.size() != half) report("positive count != N/2");
  if (batch.negatives.size() != half) report("negative count != N/2");

  for (const Utterance *u : batch.positives) {
    if (u == nullptr) {
      report("null positive member");
      continue;
    }
    if (u->label != batch.anchor) report("positive lacks anchor emotion");
    if (test_fold && u->fold == *test_fold)
      report("positive '" + u->id + "' drawn from test fold");
  }
  for (const Utterance *u : batch.negatives) {
    if (u == nullptr) {
      report("null negative member");
      continue;
    }
    if (u->label == batch.anchor) report("negative carries anchor emotion");
    if (test_fold && u->fold == *test_fold)
      report("negative '" + u->id + "' drawn from test fold");
  }
  return violations;
}

}  // namespace xscl
