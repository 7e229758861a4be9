// tests/test_encoder.cc

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

#include "xscl/encoder.h"

#include <chrono>
#include <cmath>

#include "doctest.h"
#include "testing_util.h"
#include "xscl/checkpoint.h"
#include "xscl/errors.h"
#include "xscl/losses.h"

using namespace xscl;
using namespace xscl::testing;

namespace {

// Desk-scale gradient-check stack: d=8, T=4, 2 layers.
ModelConfig gradcheck_config() {
  ModelConfig cfg;
  cfg.conv_layers = {{4, 4, 6}, {4, 4, 8}};
  cfg.d_model = 8;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.ffn_dim = 16;
  cfg.classifier_hidden = 8;
  cfg.n_classes = 3;
  cfg.seed = 1234;
  return cfg;
}

std::vector<float> random_wave(int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> wave(static_cast<size_t>(n));
  for (int i = 0; i < n; i++)
    wave[static_cast<size_t>(i)] =
        static_cast<float>(0.5 * std::sin(0.05 * i) + 0.3 * rng.normal());
  return wave;
}

}  // namespace

TEST_CASE("frame arithmetic of the default conv stack") {
  ModelConfig cfg;
  CHECK(cfg.total_stride() == 320);
  CHECK(cfg.frames_for(8000) == 25);
  CHECK(cfg.min_samples() == 320);
  CHECK(cfg.frames_for(319) == 0);
  CHECK(cfg.frames_for(320) == 1);
}

TEST_CASE("forward produces one activation matrix per layer") {
  ModelConfig cfg;
  cfg.seed = 5;
  const EncoderStack<float> stack(cfg);
  const auto wave = random_wave(8000, 17);
  const LayerActivations<float> acts = stack.forward(wave);
  REQUIRE(acts.layers.size() == static_cast<size_t>(cfg.n_layers) + 1);
  for (const auto &h : acts.layers) {
    CHECK(h.rows() == 25);
    CHECK(h.cols() == cfg.d_model);
  }
}

TEST_CASE("too-short waveforms report the minimum length") {
  ModelConfig cfg;
  cfg.seed = 5;
  const EncoderStack<float> stack(cfg);
  CHECK_THROWS_WITH_AS(stack.forward(std::vector<float>(100, 0.0f)),
                       doctest::Contains("320"), InputError);
}

TEST_CASE("zero waveform stays finite") {
  ModelConfig cfg;
  cfg.seed = 5;
  const EncoderStack<float> stack(cfg);
  const LayerActivations<float> acts =
      stack.forward(std::vector<float>(640, 0.0f));
  for (const auto &h : acts.layers) CHECK(h.allFinite());
}

TEST_CASE("forward is deterministic") {
  ModelConfig cfg;
  cfg.seed = 5;
  const EncoderStack<float> stack(cfg);
  const auto wave = random_wave(2000, 3);
  const auto a = stack.forward(wave);
  const auto b = stack.forward(wave);
  for (size_t l = 0; l < a.layers.size(); l++)
    CHECK(a.layers[l] == b.layers[l]);
}

TEST_CASE("pooling special cases and oracle") {
  SUBCASE("single time step returns that feature row") {
    SelfAttentionPooling<double> pooling{Vec<double>::Random(6)};
    Mat<double> h(1, 6);
    h << 1, 2, 3, 4, 5, 6;
    const Vec<double> c = attention_pool(pooling, h);
    CHECK((c - h.row(0).transpose()).norm() == doctest::Approx(0.0));
  }

  SUBCASE("zero weights give the unweighted row mean") {
    SelfAttentionPooling<double> pooling{Vec<double>::Zero(3)};
    Mat<double> h(4, 3);
    h << 1, 0, 0, 0, 2, 0, 0, 0, 3, 1, 1, 1;
    const Vec<double> expected = h.colwise().mean().transpose();
    const Vec<double> c = attention_pool(pooling, h);
    CHECK((c - expected).norm() < 1e-12);
  }

  SUBCASE("random case matches direct evaluation") {
    Rng rng(8);
    Mat<double> h(5, 4);
    Vec<double> wc(4);
    for (int t = 0; t < 5; t++)
      for (int d = 0; d < 4; d++) h(t, d) = rng.normal();
    for (int d = 0; d < 4; d++) wc(d) = rng.normal();

    // Direct softmax(wc h^T) h.
    Vec<double> logits = h * wc;
    Vec<double> weights(5);
    double denom = 0.0;
    for (int t = 0; t < 5; t++) denom += std::exp(logits(t));
    for (int t = 0; t < 5; t++) weights(t) = std::exp(logits(t)) / denom;
    Vec<double> expected = Vec<double>::Zero(4);
    for (int t = 0; t < 5; t++)
      expected += weights(t) * h.row(t).transpose();

    Vec<double> attn;
    const Vec<double> c = attention_pool<double>({wc}, h, &attn);
    CHECK((c - expected).norm() < 1e-12);
    CHECK(attn.minCoeff() >= 0.0);
    CHECK(attn.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("empty features are rejected") {
    SelfAttentionPooling<double> pooling{Vec<double>::Zero(3)};
    Mat<double> empty(0, 3);
    CHECK_THROWS_AS(attention_pool(pooling, empty), InputError);
  }
}

TEST_CASE("pooling is shift invariant in the attention logits") {
  // A constant feature column shifts every logit equally when its weight
  // changes, which must leave the pooled output unchanged.
  ModelConfig cfg = gradcheck_config();
  Rng rng(44);
  Mat<double> h(6, cfg.d_model);
  for (int t = 0; t < 6; t++)
    for (int d = 0; d < cfg.d_model; d++) h(t, d) = rng.normal();
  h.col(0).setConstant(1.0);

  Vec<double> wc(cfg.d_model);
  for (int d = 0; d < cfg.d_model; d++) wc(d) = rng.normal();
  Vec<double> wc_shifted = wc;
  wc_shifted(0) += 5.0;

  const Vec<double> a = attention_pool<double>({wc}, h);
  const Vec<double> b = attention_pool<double>({wc_shifted}, h);
  CHECK((a - b).norm() < 1e-9);
}

TEST_CASE("classifier layout and oracle") {
  ModelConfig cfg;
  cfg.seed = 21;
  CHECK(cfg.classifier_hidden == 256);
  EncoderStack<double> stack(gradcheck_config());

  SUBCASE("zeroed classifier yields zero scores") {
    for (auto &ref : stack.params()) {
      if (ref.group == ParamGroup::kClassifier) ref.value->setZero();
    }
    const Vec<double> scores = stack.classify(Vec<double>::Ones(8));
    CHECK(scores.norm() == 0.0);
  }

  SUBCASE("random feature matches a hand matrix multiply") {
    Rng rng(3);
    Vec<double> c(8);
    for (int i = 0; i < 8; i++) c(i) = rng.normal();

    Mat<double> w1, w2;
    Vec<double> b1, b2;
    for (const auto &ref : stack.params()) {
      if (ref.name == "cls.w1") w1 = *ref.value;
      if (ref.name == "cls.w2") w2 = *ref.value;
      if (ref.name == "cls.b1") b1 = ref.value->row(0).transpose();
      if (ref.name == "cls.b2") b2 = ref.value->row(0).transpose();
    }
    Vec<double> hidden = w1 * c + b1;
    for (Eigen::Index i = 0; i < hidden.size(); i++)
      hidden(i) = std::max(0.0, hidden(i));
    const Vec<double> expected = w2 * hidden + b2;
    CHECK((stack.classify(c) - expected).norm() < 1e-12);
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(stack.classify(Vec<double>::Ones(5)), InputError);
  }
}

TEST_CASE("conv and projection cannot be unfrozen") {
  EncoderStack<float> stack(gradcheck_config());
  CHECK_FALSE(stack.group_trainable(ParamGroup::kConv));
  CHECK_FALSE(stack.group_trainable(ParamGroup::kProjection));
  CHECK_THROWS_AS(stack.set_group_trainable(ParamGroup::kConv, true),
                  std::logic_error);
  CHECK_THROWS_AS(stack.set_group_trainable(ParamGroup::kProjection, true),
                  std::logic_error);
}

TEST_CASE("backward without a forward trace is a state error") {
  EncoderStack<float> stack(gradcheck_config());
  StackTrace<float> empty;
  GradMap<float> grads;
  CHECK_THROWS_AS(
      stack.backward_from_pooled(empty, Vec<float>::Zero(8), &grads),
      std::runtime_error);
  CHECK_THROWS_AS(
      stack.backward_from_scores(empty, Vec<float>::Zero(3), &grads),
      std::runtime_error);
}

// The gradient suite: every trainable parameter of the desk-scale stack is
// checked against central finite differences of the full training losses
// (contrast + margin through pooling, cross entropy through the classifier),
// in double precision.
TEST_CASE("analytic gradients match finite differences on every group") {
  const auto t_start = std::chrono::steady_clock::now();

  ModelConfig cfg = gradcheck_config();
  cfg.seed = 42;
  EncoderStack<double> stack(cfg);
  // A mild temperature keeps the objective's higher derivatives small enough
  // that the 1e-3 central-difference step stays within tolerance; the 0.07
  // regime is value-checked in the loss tests.
  LossConfig loss_cfg;
  loss_cfg.temperature = 1.0;
  loss_cfg.margin = -1.0;  // hinge always active: the objective is smooth

  // Four waveforms: two positives, two negatives, 64 samples -> T=4.
  std::vector<std::vector<float>> waves;
  for (int i = 0; i < 4; i++) waves.push_back(random_wave(64, 100 + i));
  const std::vector<int> pairing = {1, 0};
  const std::vector<int> ce_labels = {0, 2, 1, 0};

  // Frozen front-end output never changes while parameters under test vary.
  std::vector<Mat<double>> x0;
  for (const auto &w : waves) x0.push_back(stack.front_end(w));

  // Central differences are only meaningful away from the ReLU kinks; the
  // seeds above were chosen so every pre-activation has clearance.
  {
    double min_abs = 1e9;
    for (size_t i = 0; i < waves.size(); i++) {
      StackTrace<double> tr = stack.encode(x0[i]);
      for (const auto &bt : tr.blocks)
        min_abs = std::min(min_abs, bt.ffn_pre.cwiseAbs().minCoeff());
      stack.pool_feature(&tr);
      stack.classify_traced(&tr);
      min_abs = std::min(min_abs, tr.cls_hidden_pre.cwiseAbs().minCoeff());
    }
    REQUIRE(min_abs > 2e-3);
  }

  auto eval_loss = [&]() {
    ContrastFeatures<double> feats;
    std::vector<StackTrace<double>> traces;
    for (size_t i = 0; i < waves.size(); i++) {
      StackTrace<double> tr = stack.encode(x0[i]);
      stack.pool_feature(&tr);
      (i < 2 ? feats.positives : feats.negatives).push_back(tr.pooled);
      traces.push_back(std::move(tr));
    }
    double loss = total_loss(feats, loss_cfg, pairing);
    for (size_t i = 0; i < waves.size(); i++) {
      stack.classify_traced(&traces[i]);
      loss += cross_entropy<double>(traces[i].scores, ce_labels[i]) /
              static_cast<double>(waves.size());
    }
    return loss;
  };

  // Analytic gradients of the same objective.
  GradMap<double> grads;
  {
    ContrastFeatures<double> feats;
    std::vector<StackTrace<double>> traces;
    for (size_t i = 0; i < waves.size(); i++) {
      StackTrace<double> tr = stack.encode(x0[i]);
      stack.pool_feature(&tr);
      (i < 2 ? feats.positives : feats.negatives).push_back(tr.pooled);
      traces.push_back(std::move(tr));
    }
    FeatureGrads<double> fg;
    total_loss(feats, loss_cfg, pairing, &fg);
    for (size_t i = 0; i < waves.size(); i++) {
      const Vec<double> d =
          i < 2 ? fg.d_positives[i] : fg.d_negatives[i - 2];
      stack.backward_from_pooled(traces[i], d, &grads);
    }
    for (size_t i = 0; i < waves.size(); i++) {
      stack.classify_traced(&traces[i]);
      Vec<double> d_scores;
      cross_entropy<double>(traces[i].scores, ce_labels[i], &d_scores);
      d_scores /= static_cast<double>(waves.size());
      stack.backward_from_scores(traces[i], d_scores, &grads);
    }
  }

  // Frozen groups must not appear in the gradient map.
  for (const auto &[name, g] : grads.tensors) {
    CHECK(name.rfind("conv.", 0) != 0);
    CHECK(name.rfind("proj.", 0) != 0);
  }

  const double eps = 1e-3;
  int checked = 0;
  for (auto &ref : stack.params()) {
    if (!ref.trainable) continue;
    REQUIRE(grads.tensors.count(ref.name) == 1);
    const Mat<double> &analytic = grads.tensors.at(ref.name);
    for (Eigen::Index r = 0; r < ref.value->rows(); r++) {
      for (Eigen::Index c = 0; c < ref.value->cols(); c++) {
        const double saved = (*ref.value)(r, c);
        (*ref.value)(r, c) = saved + eps;
        const double up = eval_loss();
        (*ref.value)(r, c) = saved - eps;
        const double down = eval_loss();
        (*ref.value)(r, c) = saved;
        const double fd = (up - down) / (2.0 * eps);
        const double rel = std::abs(analytic(r, c) - fd) /
                           std::max(std::abs(analytic(r, c)), 1e-8);
        if (rel > 1e-4) {
          CAPTURE(ref.name);
          CAPTURE(r);
          CAPTURE(c);
          CAPTURE(analytic(r, c));
          CAPTURE(fd);
        }
        CHECK(rel <= 1e-4);
        checked++;
      }
    }
  }
  CHECK(checked > 1000);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  CHECK(seconds < 60.0);
}

TEST_CASE("doubling the upstream gradient doubles every parameter gradient") {
  const ModelConfig cfg = gradcheck_config();
  EncoderStack<double> stack(cfg);
  const auto wave = random_wave(64, 9);

  StackTrace<double> tr = stack.encode(stack.front_end(wave));
  stack.pool_feature(&tr);
  Vec<double> d = Vec<double>::Zero(cfg.d_model);
  Rng rng(2);
  for (int i = 0; i < cfg.d_model; i++) d(i) = rng.normal();

  GradMap<double> g1, g2;
  stack.backward_from_pooled(tr, d, &g1);
  stack.backward_from_pooled(tr, (2.0 * d).eval(), &g2);
  for (const auto &[name, grad] : g1.tensors) {
    const double diff = (g2.tensors.at(name) - 2.0 * grad).norm();
    CHECK(diff <= 1e-9 * std::max(1.0, grad.norm()));
  }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  ModelConfig cfg = gradcheck_config();
  cfg.seed = 777;
  EncoderStack<float> stack(cfg);
  const auto wave = random_wave(128, 55);
  const LayerActivations<float> before = stack.forward(wave);

  const Checkpoint ckpt = make_checkpoint(stack, StageTag::kStage1, 42);
  const auto bytes = serialize_checkpoint(ckpt);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back.stage == StageTag::kStage1);
  CHECK(back.rng_seed == 42);
  CHECK(back.config == cfg);

  const EncoderStack<float> restored = restore_stack(back);
  const LayerActivations<float> after = restored.forward(wave);
  REQUIRE(after.layers.size() == before.layers.size());
  for (size_t l = 0; l < after.layers.size(); l++)
    CHECK(after.layers[l] == before.layers[l]);

  // Serialization is stable byte-for-byte.
  CHECK(serialize_checkpoint(make_checkpoint(restored, StageTag::kStage1,
                                             42)) == bytes);
}

TEST_CASE("checkpoint files and corruption") {
  TempDir tmp("ckpt");
  ModelConfig cfg = gradcheck_config();
  EncoderStack<float> stack(cfg);
  const Checkpoint ckpt = make_checkpoint(stack, StageTag::kStage2, 7);
  const auto path = tmp.path() / "model.ckpt";
  save_checkpoint(ckpt, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.stage == StageTag::kStage2);
  CHECK(loaded.tensors.size() == ckpt.tensors.size());

  auto bytes = serialize_checkpoint(ckpt);
  bytes[0] = 'Y';
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(bytes),
                       doctest::Contains("magic"), InputError);
  bytes[0] = 'X';
  bytes.pop_back();
  CHECK_THROWS_AS(deserialize_checkpoint(bytes), InputError);
}

TEST_CASE("reset_classifier changes only the head") {
  ModelConfig cfg = gradcheck_config();
  EncoderStack<float> stack(cfg);
  const auto wave = random_wave(64, 1);
  StackTrace<float> tr = stack.encode(stack.front_end(wave));
  const Vec<float> pooled_before = stack.pool_feature(&tr);

  stack.reset_classifier(5, 99);
  CHECK(stack.config().n_classes == 5);
  StackTrace<float> tr2 = stack.encode(stack.front_end(wave));
  const Vec<float> pooled_after = stack.pool_feature(&tr2);
  CHECK(pooled_before == pooled_after);
  CHECK(stack.classify(pooled_after).size() == 5);
}

TEST_CASE("model config validation") {
  ModelConfig cfg;
  cfg.d_model = 30;
  cfg.n_heads = 4;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = ModelConfig{};
  cfg.conv_layers.clear();
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = ModelConfig{};
  cfg.n_classes = 1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}
