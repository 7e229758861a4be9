// benchmarks/bench_core.cc

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

#include <benchmark/benchmark.h>

#include "xscl/corpus.h"
#include "xscl/encoder.h"
#include "xscl/losses.h"
#include "xscl/rng.h"
#include "xscl/sampler.h"

namespace {

using namespace xscl;

SyntheticSpec bench_spec() {
  SyntheticSpec spec;
  spec.corpus_id = "bench";
  spec.label_space = {EmotionLabel::kNeutral, EmotionLabel::kSad,
                      EmotionLabel::kAngry, EmotionLabel::kHappy};
  spec.utterances_per_label = 8;
  spec.duration_samples = 8000;
  spec.spectral_tilt = 0.3;
  spec.noise_level = 0.02;
  spec.seed = 1;
  spec.emotion_params = {
      {EmotionLabel::kNeutral, {180.0, 2.0}},
      {EmotionLabel::kSad, {280.0, 3.5}},
      {EmotionLabel::kAngry, {420.0, 5.5}},
      {EmotionLabel::kHappy, {600.0, 8.0}},
  };
  return spec;
}

const CorpusManifest &bench_corpus() {
  static const CorpusManifest corpus = generate_synthetic(bench_spec());
  return corpus;
}

const EncoderStack<float> &bench_stack() {
  static const EncoderStack<float> stack((ModelConfig()));
  return stack;
}

void BM_SyntheticGeneration(benchmark::State &state) {
  SyntheticSpec spec = bench_spec();
  spec.utterances_per_label = 2;
  for (auto _ : state) {
    spec.seed++;
    benchmark::DoNotOptimize(generate_synthetic(spec));
  }
}
BENCHMARK(BM_SyntheticGeneration);

void BM_FrontEnd(benchmark::State &state) {
  const auto &stack = bench_stack();
  const auto &wave = bench_corpus().utterances.front().samples;
  for (auto _ : state) benchmark::DoNotOptimize(stack.front_end(wave));
}
BENCHMARK(BM_FrontEnd);

void BM_EncodeForward(benchmark::State &state) {
  const auto &stack = bench_stack();
  const Mat<float> x0 =
      stack.front_end(bench_corpus().utterances.front().samples);
  for (auto _ : state) benchmark::DoNotOptimize(stack.encode(x0));
}
BENCHMARK(BM_EncodeForward);

void BM_ForwardBackward(benchmark::State &state) {
  const auto &stack = bench_stack();
  const Mat<float> x0 =
      stack.front_end(bench_corpus().utterances.front().samples);
  Vec<float> d = Vec<float>::Ones(stack.config().d_model);
  for (auto _ : state) {
    StackTrace<float> tr = stack.encode(x0);
    stack.pool_feature(&tr);
    GradMap<float> grads;
    stack.backward_from_pooled(tr, d, &grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_ContrastLoss(benchmark::State &state) {
  Rng rng(7);
  ContrastFeatures<float> f;
  for (int i = 0; i < 32; i++) {
    Vec<float> v(32);
    for (int d = 0; d < 32; d++) v(d) = static_cast<float>(rng.normal());
    (i < 16 ? f.positives : f.negatives).push_back(v);
  }
  const LossConfig cfg;
  FeatureGrads<float> grads;
  for (auto _ : state)
    benchmark::DoNotOptimize(contrast_loss(f, cfg, &grads));
}
BENCHMARK(BM_ContrastLoss);

void BM_SampleBatch(benchmark::State &state) {
  const CorpusManifest &corpus = bench_corpus();
  std::vector<const Utterance *> pool;
  for (const Utterance &u : corpus.utterances) pool.push_back(&u);
  Rng rng(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_batch(pool, pool, 32, rng));
}
BENCHMARK(BM_SampleBatch);

}  // namespace

BENCHMARK_MAIN();
