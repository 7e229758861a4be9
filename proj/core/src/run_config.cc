// core/src/run_config.cc

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

#include "xscl/run_config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xscl/errors.h"
#include "xscl/rng.h"

namespace xscl {

using nlohmann::json;

namespace {

constexpr uint64_t kTagSyntheticCorpus = 0xc0de;

[[noreturn]] void fail(const std::string &ctx, const std::string &what) {
  throw InputError("config: " + ctx + ": " + what);
}

const json &expect_object(const json &j, const std::string &ctx) {
  if (!j.is_object()) fail(ctx, "expected an object");
  return j;
}

void check_keys(const json &obj, const std::set<std::string> &allowed,
                const std::string &ctx) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end())
      fail(ctx, "unknown key '" + it.key() + "'");
  }
}

double get_number(const json &obj, const char *key, double def,
                  const std::string &ctx) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_number()) fail(ctx, std::string(key) + " must be a number");
  return obj[key].get<double>();
}

int get_int(const json &obj, const char *key, int def,
            const std::string &ctx) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_number_integer())
    fail(ctx, std::string(key) + " must be an integer");
  return obj[key].get<int>();
}

uint64_t get_u64(const json &obj, const char *key, uint64_t def,
                 const std::string &ctx) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_number_unsigned() && !obj[key].is_number_integer())
    fail(ctx, std::string(key) + " must be a nonnegative integer");
  return obj[key].get<uint64_t>();
}

std::string get_string(const json &obj, const char *key,
                       const std::string &def, const std::string &ctx) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_string()) fail(ctx, std::string(key) + " must be a string");
  return obj[key].get<std::string>();
}

bool get_bool(const json &obj, const char *key, bool def,
              const std::string &ctx) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_boolean()) fail(ctx, std::string(key) + " must be a boolean");
  return obj[key].get<bool>();
}

ModelConfig parse_model(const json &j, const std::string &ctx) {
  expect_object(j, ctx);
  check_keys(j,
             {"conv_layers", "d_model", "n_layers", "n_heads", "ffn_dim",
              "classifier_hidden"},
             ctx);
  ModelConfig cfg;
  if (j.contains("conv_layers")) {
    if (!j["conv_layers"].is_array())
      fail(ctx, "conv_layers must be an array of [kernel, stride, channels]");
    cfg.conv_layers.clear();
    for (const json &layer : j["conv_layers"]) {
      if (!layer.is_array() || layer.size() != 3)
        fail(ctx, "conv_layers entries must be [kernel, stride, channels]");
      cfg.conv_layers.push_back(
          {layer[0].get<int>(), layer[1].get<int>(), layer[2].get<int>()});
    }
  }
  cfg.d_model = get_int(j, "d_model", cfg.d_model, ctx);
  cfg.n_layers = get_int(j, "n_layers", cfg.n_layers, ctx);
  cfg.n_heads = get_int(j, "n_heads", cfg.n_heads, ctx);
  cfg.ffn_dim = get_int(j, "ffn_dim", cfg.ffn_dim, ctx);
  cfg.classifier_hidden =
      get_int(j, "classifier_hidden", cfg.classifier_hidden, ctx);
  return cfg;
}

LossConfig parse_loss(const json &j, const std::string &ctx) {
  expect_object(j, ctx);
  check_keys(j, {"temperature", "margin", "alpha"}, ctx);
  LossConfig cfg;
  cfg.temperature = get_number(j, "temperature", cfg.temperature, ctx);
  cfg.margin = get_number(j, "margin", cfg.margin, ctx);
  cfg.alpha = get_number(j, "alpha", cfg.alpha, ctx);
  return cfg;
}

Stage1Config parse_stage1(const json &j, const std::string &ctx) {
  expect_object(j, ctx);
  check_keys(j,
             {"base_lr", "epochs", "decay_start_epoch", "halve_every",
              "encoder_lr_multiplier", "batch_size"},
             ctx);
  Stage1Config cfg;
  cfg.base_lr = get_number(j, "base_lr", cfg.base_lr, ctx);
  cfg.epochs = get_int(j, "epochs", cfg.epochs, ctx);
  cfg.decay_start_epoch =
      get_int(j, "decay_start_epoch", cfg.decay_start_epoch, ctx);
  cfg.halve_every = get_int(j, "halve_every", cfg.halve_every, ctx);
  cfg.encoder_lr_multiplier =
      get_number(j, "encoder_lr_multiplier", cfg.encoder_lr_multiplier, ctx);
  cfg.batch_size = get_int(j, "batch_size", cfg.batch_size, ctx);
  return cfg;
}

Stage2Config parse_stage2(const json &j, const std::string &ctx) {
  expect_object(j, ctx);
  check_keys(j,
             {"lr", "epochs", "drop_epoch", "drop_factor", "batch_size",
              "target_corpus_id"},
             ctx);
  Stage2Config cfg;
  cfg.lr = get_number(j, "lr", cfg.lr, ctx);
  cfg.epochs = get_int(j, "epochs", cfg.epochs, ctx);
  cfg.drop_epoch = get_int(j, "drop_epoch", cfg.drop_epoch, ctx);
  cfg.drop_factor = get_number(j, "drop_factor", cfg.drop_factor, ctx);
  cfg.batch_size = get_int(j, "batch_size", cfg.batch_size, ctx);
  cfg.target_corpus_id = get_string(j, "target_corpus_id", "all", ctx);
  return cfg;
}

FTBaselineConfig parse_ft(const json &j, const std::string &ctx) {
  expect_object(j, ctx);
  check_keys(j,
             {"lr", "epochs", "decay_every", "decay_factor",
              "encoder_lr_multiplier", "batch_size"},
             ctx);
  FTBaselineConfig cfg;
  cfg.lr = get_number(j, "lr", cfg.lr, ctx);
  cfg.epochs = get_int(j, "epochs", cfg.epochs, ctx);
  cfg.decay_every = get_int(j, "decay_every", cfg.decay_every, ctx);
  cfg.decay_factor = get_number(j, "decay_factor", cfg.decay_factor, ctx);
  cfg.encoder_lr_multiplier =
      get_number(j, "encoder_lr_multiplier", cfg.encoder_lr_multiplier, ctx);
  cfg.batch_size = get_int(j, "batch_size", cfg.batch_size, ctx);
  return cfg;
}

SyntheticSpec parse_synthetic(const json &j, const std::string &ctx,
                              bool allow_seed) {
  expect_object(j, ctx);
  std::set<std::string> keys = {"corpus_id",        "label_space",
                                "utterances_per_label", "duration_samples",
                                "sample_rate",      "spectral_tilt",
                                "noise_level",      "emotion_signals"};
  if (allow_seed) keys.insert("seed");
  check_keys(j, keys, ctx);

  SyntheticSpec spec;
  spec.corpus_id = get_string(j, "corpus_id", "", ctx);
  if (spec.corpus_id.empty()) fail(ctx, "corpus_id is required");
  if (!j.contains("label_space") || !j["label_space"].is_array())
    fail(ctx, "label_space must be an array of labels");
  for (const json &tag : j["label_space"])
    spec.label_space.insert(parse_emotion_label(tag.get<std::string>()));
  spec.utterances_per_label =
      get_int(j, "utterances_per_label", 0, ctx);
  spec.duration_samples =
      get_int(j, "duration_samples", spec.duration_samples, ctx);
  spec.sample_rate = get_int(j, "sample_rate", spec.sample_rate, ctx);
  spec.spectral_tilt = get_number(j, "spectral_tilt", 0.0, ctx);
  spec.noise_level = get_number(j, "noise_level", 0.0, ctx);
  if (allow_seed) spec.seed = get_u64(j, "seed", 0, ctx);

  if (!j.contains("emotion_signals") || !j["emotion_signals"].is_object())
    fail(ctx, "emotion_signals must map labels to signal parameters");
  for (auto it = j["emotion_signals"].begin(); it != j["emotion_signals"].end();
       ++it) {
    const EmotionLabel label = parse_emotion_label(it.key());
    const std::string sctx = ctx + ".emotion_signals." + it.key();
    expect_object(it.value(), sctx);
    check_keys(it.value(), {"fundamental_hz", "am_rate_hz"}, sctx);
    EmotionSignal sig;
    sig.fundamental_hz = get_number(it.value(), "fundamental_hz", 0.0, sctx);
    sig.am_rate_hz = get_number(it.value(), "am_rate_hz", 0.0, sctx);
    if (sig.fundamental_hz <= 0.0 || sig.am_rate_hz <= 0.0)
      fail(sctx, "signal parameters must be positive");
    spec.emotion_params[label] = sig;
  }
  return spec;
}

json synthetic_to_json(const SyntheticSpec &spec, bool with_seed) {
  json j;
  j["corpus_id"] = spec.corpus_id;
  json space = json::array();
  for (EmotionLabel label : spec.label_space) space.push_back(to_string(label));
  j["label_space"] = space;
  j["utterances_per_label"] = spec.utterances_per_label;
  j["duration_samples"] = spec.duration_samples;
  j["sample_rate"] = spec.sample_rate;
  j["spectral_tilt"] = spec.spectral_tilt;
  j["noise_level"] = spec.noise_level;
  if (with_seed) j["seed"] = spec.seed;
  json signals = json::object();
  for (const auto &[label, sig] : spec.emotion_params) {
    signals[to_string(label)] = {{"fundamental_hz", sig.fundamental_hz},
                                 {"am_rate_hz", sig.am_rate_hz}};
  }
  j["emotion_signals"] = signals;
  return j;
}

// Corpora sharing an emotion must share its signal parameters, otherwise the
// emotion is not a cross-corpus invariant.
void check_shared_signals(const std::vector<SyntheticSpec> &specs) {
  for (size_t i = 0; i < specs.size(); i++) {
    for (size_t j = i + 1; j < specs.size(); j++) {
      for (const auto &[label, sig] : specs[i].emotion_params) {
        const auto it = specs[j].emotion_params.find(label);
        if (it == specs[j].emotion_params.end()) continue;
        if (it->second.fundamental_hz != sig.fundamental_hz ||
            it->second.am_rate_hz != sig.am_rate_hz)
          throw InputError(
              "config: corpora '" + specs[i].corpus_id + "' and '" +
              specs[j].corpus_id + "' disagree on signal parameters for '" +
              to_string(label) + "'");
      }
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!seed.has_value())
    throw InputError("config: seed is mandatory (set it in the config file "
                     "or pass --seed)");
  if (corpora.size() != 2)
    throw InputError("config: exactly two corpora are required");
  if (folds < 2) throw InputError("config: folds must be >= 2");
  if (profile_batches < 1)
    throw InputError("config: profile_batches must be >= 1");
  model.validate();
  loss.validate();
  stage1.validate();
  stage2.validate();
  ft.validate();
  for (const CorpusSource &src : corpora) {
    if (src.manifest_path.empty() == !src.synthetic.has_value())
      throw InputError(
          "config: each corpus needs exactly one of 'manifest' or "
          "'synthetic'");
    if (!src.manifest_path.empty() &&
        !std::filesystem::exists(src.manifest_path))
      throw InputError("config: manifest does not exist: " +
                       src.manifest_path);
    if (src.synthetic) src.synthetic->validate();
  }
  std::vector<SyntheticSpec> specs;
  for (const CorpusSource &src : corpora)
    if (src.synthetic) specs.push_back(*src.synthetic);
  check_shared_signals(specs);
}

RunConfig parse_run_config(const std::string &json_text,
                           const std::filesystem::path &base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception &e) {
    throw InputError(std::string("config: parse error: ") + e.what());
  }
  expect_object(j, "top level");
  check_keys(j,
             {"seed", "variant", "folds", "out_dir", "parallel_folds",
              "corpora", "model", "loss", "stage1", "stage2", "ft",
              "profile_batches"},
             "top level");

  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = get_u64(j, "seed", 0, "top level");
  cfg.variant = parse_variant(
      get_string(j, "variant", to_string(cfg.variant), "top level"));
  cfg.folds = get_int(j, "folds", cfg.folds, "top level");
  cfg.out_dir = get_string(j, "out_dir", "", "top level");
  cfg.parallel_folds =
      get_bool(j, "parallel_folds", cfg.parallel_folds, "top level");
  cfg.profile_batches =
      get_int(j, "profile_batches", cfg.profile_batches, "top level");

  if (!j.contains("corpora") || !j["corpora"].is_array())
    throw InputError("config: 'corpora' must be an array of two sources");
  size_t index = 0;
  for (const json &src : j["corpora"]) {
    const std::string ctx = "corpora[" + std::to_string(index) + "]";
    expect_object(src, ctx);
    check_keys(src, {"manifest", "synthetic"}, ctx);
    CorpusSource source;
    if (src.contains("manifest")) {
      std::filesystem::path p = src["manifest"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      source.manifest_path = std::filesystem::absolute(p).lexically_normal();
    }
    if (src.contains("synthetic"))
      source.synthetic =
          parse_synthetic(src["synthetic"], ctx + ".synthetic", true);
    cfg.corpora.push_back(std::move(source));
    index++;
  }

  if (j.contains("model")) cfg.model = parse_model(j["model"], "model");
  if (j.contains("loss")) cfg.loss = parse_loss(j["loss"], "loss");
  if (j.contains("stage1")) cfg.stage1 = parse_stage1(j["stage1"], "stage1");
  if (j.contains("stage2")) cfg.stage2 = parse_stage2(j["stage2"], "stage2");
  if (j.contains("ft")) cfg.ft = parse_ft(j["ft"], "ft");
  cfg.stage1.loss = cfg.loss;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

// The output directory is deliberately not part of the snapshot: the
// recorded experiment must not depend on where its results were written.
std::string resolved_config_json(const RunConfig &cfg) {
  json j;
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["variant"] = to_string(cfg.variant);
  j["folds"] = cfg.folds;
  j["parallel_folds"] = cfg.parallel_folds;
  j["profile_batches"] = cfg.profile_batches;

  json corpora = json::array();
  for (const CorpusSource &src : cfg.corpora) {
    json s;
    if (!src.manifest_path.empty()) s["manifest"] = src.manifest_path;
    if (src.synthetic) s["synthetic"] = synthetic_to_json(*src.synthetic, true);
    corpora.push_back(s);
  }
  j["corpora"] = corpora;

  json model;
  json conv = json::array();
  for (const ConvLayerSpec &spec : cfg.model.conv_layers)
    conv.push_back({spec.kernel, spec.stride, spec.channels});
  model["conv_layers"] = conv;
  model["d_model"] = cfg.model.d_model;
  model["n_layers"] = cfg.model.n_layers;
  model["n_heads"] = cfg.model.n_heads;
  model["ffn_dim"] = cfg.model.ffn_dim;
  model["classifier_hidden"] = cfg.model.classifier_hidden;
  j["model"] = model;

  j["loss"] = {{"temperature", cfg.loss.temperature},
               {"margin", cfg.loss.margin},
               {"alpha", cfg.loss.alpha}};
  j["stage1"] = {{"base_lr", cfg.stage1.base_lr},
                 {"epochs", cfg.stage1.epochs},
                 {"decay_start_epoch", cfg.stage1.decay_start_epoch},
                 {"halve_every", cfg.stage1.halve_every},
                 {"encoder_lr_multiplier", cfg.stage1.encoder_lr_multiplier},
                 {"batch_size", cfg.stage1.batch_size}};
  j["stage2"] = {{"lr", cfg.stage2.lr},
                 {"epochs", cfg.stage2.epochs},
                 {"drop_epoch", cfg.stage2.drop_epoch},
                 {"drop_factor", cfg.stage2.drop_factor},
                 {"batch_size", cfg.stage2.batch_size},
                 {"target_corpus_id", cfg.stage2.target_corpus_id.empty()
                                          ? "all"
                                          : cfg.stage2.target_corpus_id}};
  j["ft"] = {{"lr", cfg.ft.lr},
             {"epochs", cfg.ft.epochs},
             {"decay_every", cfg.ft.decay_every},
             {"decay_factor", cfg.ft.decay_factor},
             {"encoder_lr_multiplier", cfg.ft.encoder_lr_multiplier},
             {"batch_size", cfg.ft.batch_size}};
  return j.dump(2);
}

CorpusManifest resolve_corpus(const CorpusSource &source, uint64_t master_seed,
                              size_t index) {
  if (!source.manifest_path.empty())
    return load_manifest(source.manifest_path);
  if (!source.synthetic)
    throw InputError("config: corpus source has neither manifest nor "
                     "synthetic spec");
  SyntheticSpec spec = *source.synthetic;
  if (spec.seed == 0)
    spec.seed = derive_seed(master_seed, kTagSyntheticCorpus + index);
  return generate_synthetic(spec);
}

SynthFileSpec parse_synth_spec(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception &e) {
    throw InputError(std::string("synth spec: parse error: ") + e.what());
  }
  expect_object(j, "synth spec");
  check_keys(j, {"seed", "emotion_signals", "corpora"}, "synth spec");
  if (!j.contains("seed"))
    throw InputError("synth spec: seed is mandatory");

  SynthFileSpec spec;
  spec.seed = get_u64(j, "seed", 0, "synth spec");

  if (!j.contains("emotion_signals") || !j["emotion_signals"].is_object())
    throw InputError("synth spec: emotion_signals must be an object");
  std::map<EmotionLabel, EmotionSignal> signals;
  for (auto it = j["emotion_signals"].begin(); it != j["emotion_signals"].end();
       ++it) {
    const std::string ctx = "synth spec.emotion_signals." + it.key();
    expect_object(it.value(), ctx);
    check_keys(it.value(), {"fundamental_hz", "am_rate_hz"}, ctx);
    EmotionSignal sig;
    sig.fundamental_hz = get_number(it.value(), "fundamental_hz", 0.0, ctx);
    sig.am_rate_hz = get_number(it.value(), "am_rate_hz", 0.0, ctx);
    signals[parse_emotion_label(it.key())] = sig;
  }

  if (!j.contains("corpora") || !j["corpora"].is_array() ||
      j["corpora"].empty())
    throw InputError("synth spec: corpora must be a non-empty array");
  size_t index = 0;
  for (const json &jc : j["corpora"]) {
    const std::string ctx = "synth spec.corpora[" + std::to_string(index) + "]";
    expect_object(jc, ctx);
    check_keys(jc,
               {"corpus_id", "label_space", "utterances_per_label",
                "duration_samples", "sample_rate", "spectral_tilt",
                "noise_level", "seed"},
               ctx);
    SyntheticSpec corpus;
    corpus.corpus_id = get_string(jc, "corpus_id", "", ctx);
    if (corpus.corpus_id.empty()) fail(ctx, "corpus_id is required");
    if (!jc.contains("label_space") || !jc["label_space"].is_array())
      fail(ctx, "label_space must be an array");
    for (const json &tag : jc["label_space"])
      corpus.label_space.insert(parse_emotion_label(tag.get<std::string>()));
    corpus.utterances_per_label = get_int(jc, "utterances_per_label", 0, ctx);
    corpus.duration_samples =
        get_int(jc, "duration_samples", corpus.duration_samples, ctx);
    corpus.sample_rate = get_int(jc, "sample_rate", corpus.sample_rate, ctx);
    corpus.spectral_tilt = get_number(jc, "spectral_tilt", 0.0, ctx);
    corpus.noise_level = get_number(jc, "noise_level", 0.0, ctx);
    corpus.seed = get_u64(jc, "seed", 0, ctx);
    if (corpus.seed == 0)
      corpus.seed = derive_seed(spec.seed, kTagSyntheticCorpus + index);
    for (EmotionLabel label : corpus.label_space) {
      const auto sit = signals.find(label);
      if (sit == signals.end())
        fail(ctx, "no emotion_signals entry for label '" + to_string(label) +
                      "'");
      corpus.emotion_params[label] = sit->second;
    }
    corpus.validate();
    spec.corpora.push_back(std::move(corpus));
    index++;
  }
  return spec;
}

}  // namespace xscl
