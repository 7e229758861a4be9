// tests/test_sampler.cc

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

#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "testing_util.h"
#include "xscl/errors.h"

using namespace xscl;
using namespace xscl::testing;

namespace {

// A synthetic-free pool: waveforms are irrelevant to sampling logic.
CorpusManifest pool_manifest(const std::string &id,
                             const std::set<EmotionLabel> &labels,
                             int per_label) {
  CorpusManifest m;
  m.corpus_id = id;
  m.label_space = labels;
  int counter = 0;
  for (EmotionLabel label : labels) {
    for (int i = 0; i < per_label; i++) {
      Utterance u;
      u.id = id + "_" + std::to_string(counter++);
      u.corpus_id = id;
      u.label = label;
      u.samples = {0.0f};
      u.fold = i % 5;
      m.utterances.push_back(u);
    }
  }
  return m;
}

int count_from(const std::vector<const Utterance *> &members,
               const std::string &corpus_id) {
  int n = 0;
  for (const Utterance *u : members) n += (u->corpus_id == corpus_id) ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("batch composition matches the shared and one-sided cases") {
  const CorpusManifest a = pool_manifest("a", four_labels(), 10);
  const CorpusManifest b = pool_manifest("b", six_labels(), 10);
  const auto pa = all_pointers(a);
  const auto pb = all_pointers(b);

  Rng rng(123);
  bool saw_shared = false, saw_one_sided = false;
  for (int i = 0; i < 300; i++) {
    const ContrastBatch batch = sample_batch(pa, pb, 32, rng);
    CHECK(validate_batch(batch).empty());
    CHECK(batch.positives.size() == 16);
    CHECK(batch.negatives.size() == 16);
    CHECK(count_from(batch.negatives, "a") == 8);
    CHECK(count_from(batch.negatives, "b") == 8);

    const bool shared = batch.anchor == EmotionLabel::kNeutral ||
                        batch.anchor == EmotionLabel::kSad ||
                        batch.anchor == EmotionLabel::kAngry ||
                        batch.anchor == EmotionLabel::kHappy;
    if (shared) {
      saw_shared = true;
      CHECK(count_from(batch.positives, "a") == 8);
      CHECK(count_from(batch.positives, "b") == 8);
    } else {
      saw_one_sided = true;
      CHECK(count_from(batch.positives, "a") == 0);
      CHECK(count_from(batch.positives, "b") == 16);
    }
  }
  CHECK(saw_shared);
  CHECK(saw_one_sided);
}

TEST_CASE("smallest legal batch") {
  const CorpusManifest a = pool_manifest("a", four_labels(), 3);
  const CorpusManifest b = pool_manifest("b", four_labels(), 3);
  const auto pa = all_pointers(a);
  const auto pb = all_pointers(b);
  Rng rng(7);
  const ContrastBatch batch = sample_batch(pa, pb, 4, rng);
  CHECK(batch.positives.size() == 2);
  CHECK(batch.negatives.size() == 2);
  CHECK(count_from(batch.positives, "a") == 1);
  CHECK(count_from(batch.positives, "b") == 1);
  CHECK(count_from(batch.negatives, "a") == 1);
  CHECK(count_from(batch.negatives, "b") == 1);
  CHECK(validate_batch(batch).empty());
}

TEST_CASE("batch size must be a multiple of four") {
  const CorpusManifest a = pool_manifest("a", four_labels(), 3);
  const auto pa = all_pointers(a);
  Rng rng(7);
  CHECK_THROWS_AS(sample_batch(pa, pa, 30, rng), InputError);
  CHECK_THROWS_AS(sample_batch(pa, pa, 0, rng), InputError);
}

TEST_CASE("a corpus without negatives is reported by name") {
  const CorpusManifest a = pool_manifest("only_happy",
                                         {EmotionLabel::kHappy}, 8);
  const CorpusManifest b = pool_manifest("other", {EmotionLabel::kHappy}, 8);
  const auto pa = all_pointers(a);
  const auto pb = all_pointers(b);
  Rng rng(5);
  CHECK_THROWS_WITH_AS(sample_batch(pa, pb, 8, rng),
                       doctest::Contains("only_happy"), InputError);
}

TEST_CASE("small pools fall back to sampling with replacement") {
  // One happy utterance per corpus; positives must repeat to fill N/2.
  CorpusManifest a = pool_manifest("a", {EmotionLabel::kSad}, 6);
  CorpusManifest b = pool_manifest("b", {EmotionLabel::kSad}, 6);
  Utterance happy;
  happy.id = "a_happy";
  happy.corpus_id = "a";
  happy.label = EmotionLabel::kHappy;
  happy.samples = {0.0f};
  happy.fold = 0;
  a.utterances.push_back(happy);
  happy.id = "b_happy";
  happy.corpus_id = "b";
  b.utterances.push_back(happy);

  const auto pa = all_pointers(a);
  const auto pb = all_pointers(b);
  Rng rng(11);
  for (int i = 0; i < 50; i++) {
    const ContrastBatch batch = sample_batch(pa, pb, 16, rng);
    CHECK(validate_batch(batch).empty());
    if (batch.anchor == EmotionLabel::kHappy) {
      CHECK(batch.positives.size() == 8);
      for (const Utterance *u : batch.positives)
        CHECK(u->label == EmotionLabel::kHappy);
    }
  }
}

TEST_CASE("validate_batch reports planted faults") {
  const CorpusManifest a = pool_manifest("a", four_labels(), 10);
  const CorpusManifest b = pool_manifest("b", four_labels(), 10);
  const auto pa = all_pointers(a);
  const auto pb = all_pointers(b);
  Rng rng(3);
  ContrastBatch batch = sample_batch(pa, pb, 32, rng);
  REQUIRE(validate_batch(batch).empty());

  SUBCASE("negative carrying the anchor emotion") {
    batch.negatives[0] = batch.positives[0];
    const auto violations = validate_batch(batch);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "negative carries anchor emotion");
  }

  SUBCASE("positive count mismatch") {
    batch.positives.pop_back();
    const auto violations = validate_batch(batch);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "positive count != N/2");
  }

  SUBCASE("test-fold leakage is flagged when asked for") {
    int leak_fold = batch.positives[0]->fold;
    const auto violations = validate_batch(batch, leak_fold);
    CHECK(!violations.empty());
  }
}

TEST_CASE("anchor emotions are near-uniform over many batches") {
  const CorpusManifest a = pool_manifest("a", six_labels(), 12);
  const CorpusManifest b = pool_manifest("b", six_labels(), 12);
  const auto pa = all_pointers(a);
  const auto pb = all_pointers(b);

  Rng rng(2024);
  const int n_batches = 10000;
  std::map<EmotionLabel, int> anchors;
  for (int i = 0; i < n_batches; i++)
    anchors[sample_batch(pa, pb, 8, rng).anchor]++;

  const double p = 1.0 / 6.0;
  const double sigma = std::sqrt(n_batches * p * (1.0 - p));
  for (EmotionLabel label : all_emotion_labels()) {
    const double diff = std::abs(anchors[label] - n_batches * p);
    CHECK(diff <= 3.0 * sigma);
  }
}

TEST_CASE("sampling is deterministic per seed and never leaks test folds") {
  CorpusManifest a = pool_manifest("a", six_labels(), 10);
  CorpusManifest b = pool_manifest("b", four_labels(), 10);
  a = assign_folds(a, 5, 77);
  b = assign_folds(b, 5, 78);
  const int test_fold = 2;
  const auto [train_a, test_a] = split(a, test_fold);
  const auto [train_b, test_b] = split(b, test_fold);

  Rng rng1(99), rng2(99);
  for (int i = 0; i < 100; i++) {
    const ContrastBatch one = sample_batch(train_a, train_b, 16, rng1);
    const ContrastBatch two = sample_batch(train_a, train_b, 16, rng2);
    CHECK(one.anchor == two.anchor);
    REQUIRE(one.positives.size() == two.positives.size());
    for (size_t j = 0; j < one.positives.size(); j++)
      CHECK(one.positives[j]->id == two.positives[j]->id);
    for (size_t j = 0; j < one.negatives.size(); j++)
      CHECK(one.negatives[j]->id == two.negatives[j]->id);
    CHECK(validate_batch(one, test_fold).empty());
  }
}
