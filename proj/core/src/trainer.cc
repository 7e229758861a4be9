// core/src/trainer.cc

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

#include "xscl/trainer.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

#include "xscl/errors.h"
#include "xscl/logging.h"

namespace xscl {

namespace {

// Sub-stream tags for per-fold seed derivation.
constexpr uint64_t kTagModel = 0;
constexpr uint64_t kTagStage1 = 1;
constexpr uint64_t kTagStage2 = 2;   // +target index
constexpr uint64_t kTagFt = 8;       // +corpus index
constexpr uint64_t kTagProbe = 12;
constexpr uint64_t kTagUntrained = 14;  // +target index
constexpr uint64_t kTagClassifierInit = 0x5eed;

void check_batch_and_epochs(int batch_size, int epochs, const char *what) {
  if (batch_size < 4 || batch_size % 4 != 0)
    throw InputError(std::string(what) +
                     ": batch size must be a positive multiple of 4");
  if (epochs < 1)
    throw InputError(std::string(what) + ": epochs must be >= 1");
}

std::vector<ParamRef<float>> trainable_params(EncoderStack<float> *stack) {
  std::vector<ParamRef<float>> out;
  for (ParamRef<float> &ref : stack->params())
    if (ref.trainable) out.push_back(ref);
  return out;
}

// A trace standing in for encode() output when the transformer is frozen and
// only its final layer matters (stage-2 training on cached activations).
StackTrace<float> final_layer_trace(Mat<float> h_final) {
  StackTrace<float> trace;
  trace.layers.push_back(std::move(h_final));
  trace.valid = true;
  return trace;
}

std::map<EmotionLabel, int> class_index_map(
    const std::vector<EmotionLabel> &classes) {
  std::map<EmotionLabel, int> out;
  for (size_t i = 0; i < classes.size(); i++)
    out[classes[i]] = static_cast<int>(i);
  return out;
}

FoldResult evaluate_fold(const EncoderStack<float> &stack,
                         const std::vector<const Utterance *> &test,
                         const std::vector<EmotionLabel> &classes, int fold) {
  FoldResult result;
  result.fold = fold;
  result.confusion = ConfusionMatrix(classes);
  for (const Utterance *u : test) {
    StackTrace<float> trace = stack.encode(stack.front_end(u->samples));
    stack.pool_feature(&trace);
    const Vec<float> &scores = stack.classify_traced(&trace);
    Eigen::Index best = 0;
    scores.maxCoeff(&best);
    result.confusion.add(u->label, classes[static_cast<size_t>(best)]);
  }
  result.ua = unweighted_accuracy(result.confusion);
  return result;
}

// Shared supervised cross-entropy loop for stage 2 and the FT baseline.
// make_trace must yield a trace whose final layer feeds pooling.
template <typename LrFn, typename TraceFn>
LossCurve supervised_train(EncoderStack<float> *stack,
                           const std::vector<const Utterance *> &train,
                           const std::vector<EmotionLabel> &classes,
                           int epochs, int batch_size, LrFn lr_at,
                           TraceFn make_trace,
                           const std::map<ParamGroup, double> &lr_mult,
                           Rng *rng) {
  const auto label_index = class_index_map(classes);
  const auto opt_params = trainable_params(stack);
  OptimizerState opt;
  LossCurve curve;

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); i++) order[i] = i;

  for (int epoch = 1; epoch <= epochs; epoch++) {
    const double lr = lr_at(epoch);
    rng->shuffle(order);
    double ce_sum = 0.0;

    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(batch_size));
      const float inv_batch = 1.0f / static_cast<float>(end - start);
      GradMap<float> grads;
      for (size_t i = start; i < end; i++) {
        const Utterance *u = train[order[i]];
        StackTrace<float> trace = make_trace(u);
        stack->pool_feature(&trace);
        stack->classify_traced(&trace);
        Vec<float> d_scores;
        const float ce = cross_entropy<float>(
            trace.scores, label_index.at(u->label), &d_scores);
        ce_sum += ce;
        d_scores *= inv_batch;
        stack->backward_from_scores(trace, d_scores, &grads);
      }
      adam_step(&opt, opt_params, grads, lr, lr_mult);
    }

    LossCurvePoint point;
    point.epoch = epoch;
    point.mean_total = ce_sum / static_cast<double>(train.size());
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace

void Stage1Config::validate() const {
  check_batch_and_epochs(batch_size, epochs, "stage1 config");
  if (base_lr <= 0.0) throw InputError("stage1 config: base_lr must be positive");
  if (decay_start_epoch < 1)
    throw InputError("stage1 config: decay_start_epoch must be >= 1");
  if (halve_every < 1)
    throw InputError("stage1 config: halve_every must be >= 1");
  if (encoder_lr_multiplier <= 0.0)
    throw InputError("stage1 config: encoder_lr_multiplier must be positive");
  loss.validate();
}

void Stage2Config::validate() const {
  check_batch_and_epochs(batch_size, epochs, "stage2 config");
  if (lr <= 0.0) throw InputError("stage2 config: lr must be positive");
  if (drop_epoch < 1) throw InputError("stage2 config: drop_epoch must be >= 1");
  if (drop_factor <= 0.0)
    throw InputError("stage2 config: drop_factor must be positive");
}

void FTBaselineConfig::validate() const {
  check_batch_and_epochs(batch_size, epochs, "ft config");
  if (lr <= 0.0) throw InputError("ft config: lr must be positive");
  if (decay_every < 1) throw InputError("ft config: decay_every must be >= 1");
  if (decay_factor <= 0.0)
    throw InputError("ft config: decay_factor must be positive");
}

namespace {

void check_epoch_range(int epoch, int epochs, const char *what) {
  if (epoch < 1 || epoch > epochs) {
    std::ostringstream os;
    os << what << ": epoch " << epoch << " out of range [1, " << epochs << "]";
    throw InputError(os.str());
  }
}

}  // namespace

double lr_at_epoch(const Stage1Config &cfg, int epoch) {
  check_epoch_range(epoch, cfg.epochs, "stage1 schedule");
  if (epoch < cfg.decay_start_epoch) return cfg.base_lr;
  const int halvings =
      (epoch - cfg.decay_start_epoch) / cfg.halve_every + 1;
  double lr = cfg.base_lr;
  for (int i = 0; i < halvings; i++) lr *= 0.5;
  return lr;
}

double lr_at_epoch(const Stage2Config &cfg, int epoch) {
  check_epoch_range(epoch, cfg.epochs, "stage2 schedule");
  return epoch <= cfg.drop_epoch ? cfg.lr : cfg.lr * cfg.drop_factor;
}

double lr_at_epoch(const FTBaselineConfig &cfg, int epoch) {
  check_epoch_range(epoch, cfg.epochs, "ft schedule");
  // Each decay multiplies the then-current rate.
  double lr = cfg.lr;
  const int decays = (epoch - 1) / cfg.decay_every;
  for (int i = 0; i < decays; i++) lr *= cfg.decay_factor;
  return lr;
}

void adam_step(OptimizerState *state,
               const std::vector<ParamRef<float>> &params,
               const GradMap<float> &grads, double lr,
               const std::map<ParamGroup, double> &group_lr_multipliers) {
  for (const ParamRef<float> &ref : params) {
    if (!ref.trainable)
      throw std::logic_error("frozen group passed to optimizer: " + ref.name);
  }

  state->step_count++;
  const double bc1 = 1.0 - std::pow(state->beta1, state->step_count);
  const double bc2 = 1.0 - std::pow(state->beta2, state->step_count);
  const float b1 = static_cast<float>(state->beta1);
  const float b2 = static_cast<float>(state->beta2);

  for (const ParamRef<float> &ref : params) {
    Mat<float> &p = *ref.value;
    auto [it, inserted] = state->moments.try_emplace(
        ref.name, std::make_pair(Mat<float>::Zero(p.rows(), p.cols()),
                                 Mat<float>::Zero(p.rows(), p.cols())));
    Mat<float> &m = it->second.first;
    Mat<float> &v = it->second.second;
    if (m.rows() != p.rows() || m.cols() != p.cols())
      throw std::logic_error("optimizer state shape mismatch for " + ref.name);

    const auto git = grads.tensors.find(ref.name);
    if (git != grads.tensors.end()) {
      const Mat<float> &g = git->second;
      if (g.rows() != p.rows() || g.cols() != p.cols())
        throw std::logic_error("gradient shape mismatch for " + ref.name);
      m = (b1 * m.array() + (1.0f - b1) * g.array()).matrix();
      v = (b2 * v.array() + (1.0f - b2) * g.array().square()).matrix();
    } else {
      m *= b1;
      v *= b2;
    }

    double lr_group = lr;
    const auto mit = group_lr_multipliers.find(ref.group);
    if (mit != group_lr_multipliers.end()) lr_group *= mit->second;

    const float step = static_cast<float>(lr_group);
    const float inv_bc1 = static_cast<float>(1.0 / bc1);
    const float inv_bc2_sqrt = static_cast<float>(1.0 / std::sqrt(bc2));
    const float eps = static_cast<float>(state->epsilon);
    p.array() -= step * (m.array() * inv_bc1) /
                 ((v.array().sqrt() * inv_bc2_sqrt) + eps);
  }
}

std::vector<EmotionLabel> class_list(const CorpusManifest &manifest) {
  return {manifest.label_space.begin(), manifest.label_space.end()};
}

Stage1Result run_stage1(const CorpusManifest &corpus_a,
                        const CorpusManifest &corpus_b,
                        const ModelConfig &model_cfg, const Stage1Config &cfg,
                        int test_fold) {
  cfg.validate();
  if (!corpus_a.folds_assigned() || !corpus_b.folds_assigned())
    throw InputError("run_stage1: folds not assigned");
  const auto [train_a, test_a] = split(corpus_a, test_fold);
  const auto [train_b, test_b] = split(corpus_b, test_fold);

  EncoderStack<float> stack(model_cfg);
  stack.set_group_trainable(ParamGroup::kClassifier, false);
  const auto opt_params = trainable_params(&stack);
  const std::map<ParamGroup, double> lr_mult = {
      {ParamGroup::kEncoder, cfg.encoder_lr_multiplier},
      {ParamGroup::kPooling, 1.0}};

  OptimizerState opt;
  Rng rng(cfg.seed);
  std::map<const Utterance *, Mat<float>> x0_cache;
  auto x0_of = [&](const Utterance *u) -> const Mat<float> & {
    auto it = x0_cache.find(u);
    if (it == x0_cache.end())
      it = x0_cache.emplace(u, stack.front_end(u->samples)).first;
    return it->second;
  };

  const size_t total_train = train_a.size() + train_b.size();
  const int n_batches = static_cast<int>(
      (total_train + static_cast<size_t>(cfg.batch_size) - 1) /
      static_cast<size_t>(cfg.batch_size));
  const int half = cfg.batch_size / 2;

  Stage1Result result;
  result.curve.name = "stage1";
  result.curve.contrastive = true;

  for (int epoch = 1; epoch <= cfg.epochs; epoch++) {
    const double lr = lr_at_epoch(cfg, epoch);
    double sum_total = 0.0, sum_contrast = 0.0, sum_margin = 0.0;

    for (int batch_i = 0; batch_i < n_batches; batch_i++) {
      const ContrastBatch batch =
          sample_batch(train_a, train_b, cfg.batch_size, rng);

      BatchLogEntry log_entry;
      log_entry.epoch = epoch;
      log_entry.batch_index = batch_i;
      log_entry.anchor = batch.anchor;
      for (const Utterance *u : batch.positives)
        log_entry.member_ids.push_back(u->id);
      for (const Utterance *u : batch.negatives)
        log_entry.member_ids.push_back(u->id);
      result.batch_log.push_back(std::move(log_entry));

      std::vector<StackTrace<float>> traces;
      traces.reserve(static_cast<size_t>(cfg.batch_size));
      ContrastFeatures<float> feats;
      auto process = [&](const Utterance *u, std::vector<Vec<float>> *dst) {
        StackTrace<float> trace = stack.encode(x0_of(u));
        dst->push_back(stack.pool_feature(&trace));
        traces.push_back(std::move(trace));
      };
      for (const Utterance *u : batch.positives)
        process(u, &feats.positives);
      for (const Utterance *u : batch.negatives)
        process(u, &feats.negatives);

      const std::vector<int> pairing = margin_pairing(half, rng);
      FeatureGrads<float> g_contrast, g_margin;
      const float lc = contrast_loss(feats, cfg.loss, &g_contrast);
      const float lm = cosine_margin_loss(feats, cfg.loss, pairing, &g_margin);

      GradMap<float> grads;
      for (int i = 0; i < half; i++) {
        const Vec<float> d = g_contrast.d_positives[static_cast<size_t>(i)] +
                             g_margin.d_positives[static_cast<size_t>(i)];
        stack.backward_from_pooled(traces[static_cast<size_t>(i)], d, &grads);
      }
      for (int k = 0; k < half; k++) {
        const Vec<float> d = g_contrast.d_negatives[static_cast<size_t>(k)] +
                             g_margin.d_negatives[static_cast<size_t>(k)];
        stack.backward_from_pooled(traces[static_cast<size_t>(half + k)], d,
                                   &grads);
      }
      adam_step(&opt, opt_params, grads, lr, lr_mult);

      sum_total += static_cast<double>(lc) + static_cast<double>(lm);
      sum_contrast += lc;
      sum_margin += lm;
    }

    LossCurvePoint point;
    point.epoch = epoch;
    point.mean_total = sum_total / n_batches;
    point.mean_contrast = sum_contrast / n_batches;
    point.mean_margin = sum_margin / n_batches;
    result.curve.points.push_back(point);
    XSCL_DEBUG << "stage1 epoch " << epoch << " mean loss "
               << point.mean_total;
  }

  result.checkpoint = make_checkpoint(stack, StageTag::kStage1, cfg.seed);
  return result;
}

SupervisedResult run_stage2(const Checkpoint &stage1_checkpoint,
                            const CorpusManifest &target,
                            const Stage2Config &cfg, int test_fold) {
  cfg.validate();
  if (stage1_checkpoint.stage != StageTag::kStage1)
    throw InputError("run_stage2: checkpoint stage is '" +
                     to_string(stage1_checkpoint.stage) +
                     "', expected 'stage1'");
  if (!cfg.target_corpus_id.empty() &&
      cfg.target_corpus_id != target.corpus_id)
    throw InputError("run_stage2: target corpus '" + target.corpus_id +
                     "' does not match configured '" + cfg.target_corpus_id +
                     "'");
  if (!target.folds_assigned())
    throw InputError("run_stage2: folds not assigned");

  const auto [train, test] = split(target, test_fold);
  const std::vector<EmotionLabel> classes = class_list(target);

  EncoderStack<float> stack = restore_stack(stage1_checkpoint);
  stack.reset_classifier(static_cast<int>(classes.size()),
                         derive_seed(cfg.seed, kTagClassifierInit));
  stack.set_group_trainable(ParamGroup::kEncoder, false);

  // The representation is frozen, so each utterance's final-layer features
  // are computed once and reused every epoch.
  std::map<const Utterance *, Mat<float>> h_cache;
  auto cached_trace = [&](const Utterance *u) {
    auto it = h_cache.find(u);
    if (it == h_cache.end()) {
      StackTrace<float> full = stack.encode(stack.front_end(u->samples));
      it = h_cache.emplace(u, std::move(full.layers.back())).first;
    }
    return final_layer_trace(it->second);
  };

  Rng rng(cfg.seed);
  SupervisedResult result;
  result.curve = supervised_train(
      &stack, train, classes, cfg.epochs, cfg.batch_size,
      [&cfg](int epoch) { return lr_at_epoch(cfg, epoch); }, cached_trace,
      {{ParamGroup::kPooling, 1.0}, {ParamGroup::kClassifier, 1.0}}, &rng);
  result.curve.name = "stage2/" + target.corpus_id;
  result.eval = evaluate_fold(stack, test, classes, test_fold);
  result.checkpoint = make_checkpoint(stack, StageTag::kStage2, cfg.seed);
  return result;
}

SupervisedResult run_ft_baseline(const CorpusManifest &corpus,
                                 const ModelConfig &model_cfg,
                                 const FTBaselineConfig &cfg, int test_fold) {
  cfg.validate();
  if (!corpus.folds_assigned())
    throw InputError("run_ft_baseline: folds not assigned");

  const auto [train, test] = split(corpus, test_fold);
  const std::vector<EmotionLabel> classes = class_list(corpus);

  ModelConfig mc = model_cfg;
  mc.n_classes = static_cast<int>(classes.size());
  EncoderStack<float> stack(mc);

  std::map<const Utterance *, Mat<float>> x0_cache;
  auto encoded_trace = [&](const Utterance *u) {
    auto it = x0_cache.find(u);
    if (it == x0_cache.end())
      it = x0_cache.emplace(u, stack.front_end(u->samples)).first;
    return stack.encode(it->second);
  };

  Rng rng(cfg.seed);
  SupervisedResult result;
  result.curve = supervised_train(
      &stack, train, classes, cfg.epochs, cfg.batch_size,
      [&cfg](int epoch) { return lr_at_epoch(cfg, epoch); }, encoded_trace,
      {{ParamGroup::kEncoder, cfg.encoder_lr_multiplier},
       {ParamGroup::kPooling, 1.0},
       {ParamGroup::kClassifier, 1.0}},
      &rng);
  result.curve.name = "ft/" + corpus.corpus_id;
  result.eval = evaluate_fold(stack, test, classes, test_fold);
  result.checkpoint = make_checkpoint(stack, StageTag::kFt, cfg.seed);
  return result;
}

FoldResult evaluate_untrained(const CorpusManifest &corpus,
                              const ModelConfig &model_cfg,
                              uint64_t classifier_seed, int test_fold) {
  if (!corpus.folds_assigned())
    throw InputError("evaluate_untrained: folds not assigned");
  const auto [train, test] = split(corpus, test_fold);
  const std::vector<EmotionLabel> classes = class_list(corpus);
  EncoderStack<float> stack(model_cfg);
  stack.reset_classifier(static_cast<int>(classes.size()), classifier_seed);
  return evaluate_fold(stack, test, classes, test_fold);
}

const std::string &to_string(Variant variant) {
  static const std::vector<std::string> names = {"two-stage", "ft-baseline",
                                                 "both"};
  return names.at(static_cast<size_t>(variant));
}

Variant parse_variant(const std::string &name) {
  if (name == "two-stage") return Variant::kTwoStage;
  if (name == "ft-baseline") return Variant::kFtBaseline;
  if (name == "both") return Variant::kBoth;
  throw InputError("unknown variant '" + name + "'");
}

namespace {

struct FoldOutput {
  FoldArtifacts artifacts;
  // (variant, corpus_id, result)
  std::vector<std::tuple<std::string, std::string, FoldResult>> evals;
  std::vector<LossCurve> curves;
  std::optional<SimilarityProfile> before, after;
};

int fold_count(const CorpusManifest &manifest) {
  int max_fold = -1;
  for (const Utterance &u : manifest.utterances)
    max_fold = std::max(max_fold, u.fold);
  return max_fold + 1;
}

}  // namespace

CrossValidateResult cross_validate(const CorpusManifest &corpus_a,
                                   const CorpusManifest &corpus_b,
                                   const CrossValidateConfig &cfg) {
  if (cfg.folds < 2) throw InputError("cross_validate: folds must be >= 2");
  if (!corpus_a.folds_assigned() || !corpus_b.folds_assigned())
    throw InputError("cross_validate: folds not assigned");
  if (fold_count(corpus_a) != cfg.folds || fold_count(corpus_b) != cfg.folds)
    throw InputError("cross_validate: manifests are not split into the "
                     "configured fold count");

  std::vector<std::string> targets = cfg.stage2_targets;
  if (targets.empty()) targets = {corpus_a.corpus_id, corpus_b.corpus_id};
  for (const std::string &t : targets) {
    if (t != corpus_a.corpus_id && t != corpus_b.corpus_id)
      throw InputError("cross_validate: unknown stage2 target '" + t + "'");
  }

  const bool run_two_stage =
      cfg.variant == Variant::kTwoStage || cfg.variant == Variant::kBoth;
  const bool run_ft =
      cfg.variant == Variant::kFtBaseline || cfg.variant == Variant::kBoth;

  auto run_fold = [&](int fold) -> FoldOutput {
    FoldOutput out;
    out.artifacts.fold = fold;
    const std::string fold_tag = "/fold" + std::to_string(fold);

    ModelConfig mc = cfg.model;
    mc.seed = derive_seed(cfg.master_seed,
                          static_cast<uint64_t>(fold) * 16 + kTagModel);

    if (run_two_stage) {
      // Similarity probe batches come from the held-out fold only.
      const auto [train_a, test_a] = split(corpus_a, fold);
      const auto [train_b, test_b] = split(corpus_b, fold);
      Rng probe_rng(derive_seed(cfg.master_seed,
                                static_cast<uint64_t>(fold) * 16 + kTagProbe));
      std::vector<ContrastBatch> probe;
      for (int i = 0; i < cfg.profile_batches; i++)
        probe.push_back(
            sample_batch(test_a, test_b, cfg.stage1.batch_size, probe_rng));

      {
        const EncoderStack<float> initial(mc);
        out.before = layer_similarity_profile(initial, probe);
      }

      Stage1Config s1 = cfg.stage1;
      s1.seed = derive_seed(cfg.master_seed,
                            static_cast<uint64_t>(fold) * 16 + kTagStage1);
      Stage1Result s1_result = run_stage1(corpus_a, corpus_b, mc, s1, fold);
      s1_result.curve.name += fold_tag;
      out.curves.push_back(s1_result.curve);
      out.artifacts.stage1_batch_log = std::move(s1_result.batch_log);

      {
        const EncoderStack<float> trained = restore_stack(s1_result.checkpoint);
        out.after = layer_similarity_profile(trained, probe);
      }

      for (size_t ti = 0; ti < targets.size(); ti++) {
        const CorpusManifest &target =
            targets[ti] == corpus_a.corpus_id ? corpus_a : corpus_b;
        Stage2Config s2 = cfg.stage2;
        s2.target_corpus_id = targets[ti];
        s2.seed = derive_seed(
            cfg.master_seed, static_cast<uint64_t>(fold) * 16 + kTagStage2 + ti);
        SupervisedResult s2_result =
            run_stage2(s1_result.checkpoint, target, s2, fold);
        s2_result.curve.name += fold_tag;
        out.curves.push_back(s2_result.curve);
        out.evals.emplace_back("two-stage", targets[ti], s2_result.eval);
        out.artifacts.stage2.emplace_back(targets[ti],
                                          std::move(s2_result.checkpoint));

        const FoldResult untrained = evaluate_untrained(
            target, mc,
            derive_seed(cfg.master_seed,
                        static_cast<uint64_t>(fold) * 16 + kTagUntrained + ti),
            fold);
        out.evals.emplace_back("untrained", targets[ti], untrained);
      }
      out.artifacts.stage1 = std::move(s1_result.checkpoint);
    }

    if (run_ft) {
      const CorpusManifest *corpora[2] = {&corpus_a, &corpus_b};
      for (size_t ci = 0; ci < 2; ci++) {
        FTBaselineConfig ft = cfg.ft;
        ft.seed = derive_seed(cfg.master_seed,
                              static_cast<uint64_t>(fold) * 16 + kTagFt + ci);
        SupervisedResult ft_result =
            run_ft_baseline(*corpora[ci], mc, ft, fold);
        ft_result.curve.name += fold_tag;
        out.curves.push_back(ft_result.curve);
        out.evals.emplace_back("ft-baseline", corpora[ci]->corpus_id,
                               ft_result.eval);
        out.artifacts.ft.emplace_back(corpora[ci]->corpus_id,
                                      std::move(ft_result.checkpoint));
      }
    }
    return out;
  };

  std::vector<FoldOutput> outputs;
  outputs.reserve(static_cast<size_t>(cfg.folds));
  if (cfg.parallel_folds) {
    std::vector<std::future<FoldOutput>> futures;
    for (int fold = 0; fold < cfg.folds; fold++)
      futures.push_back(
          std::async(std::launch::async, [&run_fold, fold] { return run_fold(fold); }));
    for (auto &f : futures) outputs.push_back(f.get());
  } else {
    for (int fold = 0; fold < cfg.folds; fold++) {
      XSCL_INFO << "cross-validation fold " << fold << " of " << cfg.folds;
      outputs.push_back(run_fold(fold));
    }
  }

  CrossValidateResult result;
  result.report.config_snapshot = cfg.config_snapshot;

  // Group per-fold evals into (variant, corpus) reports, folds in order.
  std::vector<std::pair<std::string, std::string>> keys;
  for (const FoldOutput &out : outputs)
    for (const auto &[variant, corpus, eval] : out.evals)
      if (std::find(keys.begin(), keys.end(),
                    std::make_pair(variant, corpus)) == keys.end())
        keys.emplace_back(variant, corpus);

  for (const auto &[variant, corpus] : keys) {
    VariantCorpusReport report;
    report.variant = variant;
    report.corpus_id = corpus;
    double ua_sum = 0.0;
    for (const FoldOutput &out : outputs) {
      for (const auto &[v, c, eval] : out.evals) {
        if (v == variant && c == corpus) {
          report.folds.push_back(eval);
          ua_sum += eval.ua;
        }
      }
    }
    report.mean_ua = ua_sum / static_cast<double>(report.folds.size());
    result.report.reports.push_back(std::move(report));
  }

  for (FoldOutput &out : outputs) {
    for (LossCurve &curve : out.curves)
      result.report.curves.push_back(std::move(curve));
    if (out.before) result.report.profile_before.push_back(*out.before);
    if (out.after) result.report.profile_after.push_back(*out.after);
    result.artifacts.push_back(std::move(out.artifacts));
  }
  return result;
}

}  // namespace xscl
