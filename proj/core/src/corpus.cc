// core/src/corpus.cc

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

#include "xscl/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xscl/errors.h"
#include "xscl/rng.h"

namespace xscl {

using nlohmann::json;

namespace {

const std::vector<std::string> kLabelTags = {"neutral", "sad",  "angry",
                                             "happy",   "fear", "surprise"};

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kCarrierAmplitude = 0.4;
constexpr double kAmDepth = 0.5;

[[noreturn]] void line_error(const std::filesystem::path &path, size_t line,
                             const std::string &what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  throw InputError(os.str());
}

void check_known_keys(const json &obj, const std::set<std::string> &allowed,
                      const std::filesystem::path &path, size_t line) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end())
      line_error(path, line, "unknown field '" + it.key() + "'");
  }
}

void validate_samples(const std::vector<float> &samples,
                      const std::string &id) {
  if (samples.empty())
    throw InputError("utterance '" + id + "' has no samples");
  for (float s : samples) {
    if (!std::isfinite(s) || s < -1.0f || s > 1.0f)
      throw InputError("utterance '" + id +
                       "' has a sample outside [-1, 1] or non-finite");
  }
}

}  // namespace

const std::string &to_string(EmotionLabel label) {
  return kLabelTags.at(static_cast<size_t>(label));
}

EmotionLabel parse_emotion_label(const std::string &tag) {
  for (size_t i = 0; i < kLabelTags.size(); i++) {
    if (kLabelTags[i] == tag) return static_cast<EmotionLabel>(i);
  }
  throw InputError("unknown emotion label '" + tag + "'");
}

const std::vector<EmotionLabel> &all_emotion_labels() {
  static const std::vector<EmotionLabel> labels = {
      EmotionLabel::kNeutral, EmotionLabel::kSad,  EmotionLabel::kAngry,
      EmotionLabel::kHappy,   EmotionLabel::kFear, EmotionLabel::kSurprise};
  return labels;
}

bool CorpusManifest::folds_assigned() const {
  return !utterances.empty() &&
         std::all_of(utterances.begin(), utterances.end(),
                     [](const Utterance &u) { return u.fold >= 0; });
}

void SyntheticSpec::validate() const {
  if (corpus_id.empty()) throw InputError("synthetic spec: empty corpus_id");
  if (label_space.empty()) throw InputError("synthetic spec: empty label_space");
  if (utterances_per_label <= 0)
    throw InputError("synthetic spec: utterances_per_label must be positive");
  if (duration_samples <= 0)
    throw InputError("synthetic spec: duration_samples must be positive");
  if (sample_rate <= 0)
    throw InputError("synthetic spec: sample_rate must be positive");
  if (noise_level < 0.0)
    throw InputError("synthetic spec: noise_level must be nonnegative");
  if (std::abs(spectral_tilt) >= 1.0)
    throw InputError("synthetic spec: spectral_tilt must be in (-1, 1)");
  for (EmotionLabel label : label_space) {
    if (emotion_params.find(label) == emotion_params.end())
      throw InputError("synthetic spec: no signal parameters for label '" +
                       to_string(label) + "'");
  }
  // Distinct emotions must stay separable in (fundamental, AM-rate).
  for (auto a = emotion_params.begin(); a != emotion_params.end(); ++a) {
    for (auto b = std::next(a); b != emotion_params.end(); ++b) {
      if (a->second.fundamental_hz == b->second.fundamental_hz &&
          a->second.am_rate_hz == b->second.am_rate_hz)
        throw InputError("synthetic spec: labels '" + to_string(a->first) +
                         "' and '" + to_string(b->first) +
                         "' share (fundamental, am_rate)");
    }
  }
}

std::vector<float> read_raw_f32(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open audio file " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff bytes = in.tellg();
  in.seekg(0, std::ios::beg);
  if (bytes <= 0 || bytes % 4 != 0)
    throw InputError("audio file " + path.string() +
                     " is empty or not a multiple of 4 bytes");
  std::vector<float> samples(static_cast<size_t>(bytes) / 4);
  in.read(reinterpret_cast<char *>(samples.data()), bytes);
  if (!in) throw InputError("short read on audio file " + path.string());
  return samples;
}

void write_raw_f32(const std::filesystem::path &path,
                   const std::vector<float> &samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write audio file " + path.string());
  out.write(reinterpret_cast<const char *>(samples.data()),
            static_cast<std::streamsize>(samples.size() * 4));
  if (!out) throw InputError("short write on audio file " + path.string());
}

CorpusManifest load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();

  CorpusManifest manifest;
  std::string line;
  size_t line_no = 0;
  bool have_header = false;
  std::set<std::string> seen_ids;

  while (std::getline(in, line)) {
    line_no++;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception &e) {
      line_error(path, line_no, std::string("parse error: ") + e.what());
    }
    if (!rec.is_object()) line_error(path, line_no, "record is not an object");

    if (!have_header) {
      check_known_keys(rec, {"corpus_id", "label_space"}, path, line_no);
      if (!rec.contains("corpus_id") || !rec["corpus_id"].is_string())
        line_error(path, line_no, "header needs string field 'corpus_id'");
      if (!rec.contains("label_space") || !rec["label_space"].is_array())
        line_error(path, line_no, "header needs array field 'label_space'");
      manifest.corpus_id = rec["corpus_id"].get<std::string>();
      for (const auto &tag : rec["label_space"]) {
        if (!tag.is_string())
          line_error(path, line_no, "label_space entries must be strings");
        manifest.label_space.insert(
            parse_emotion_label(tag.get<std::string>()));
      }
      if (manifest.label_space.empty())
        line_error(path, line_no, "label_space is empty");
      have_header = true;
      continue;
    }

    check_known_keys(
        rec, {"id", "corpus_id", "label", "sample_rate", "audio_path",
              "samples"},
        path, line_no);
    for (const char *field : {"id", "corpus_id", "label"}) {
      if (!rec.contains(field) || !rec[field].is_string())
        line_error(path, line_no,
                   std::string("record needs string field '") + field + "'");
    }
    if (!rec.contains("sample_rate") ||
        !rec["sample_rate"].is_number_integer())
      line_error(path, line_no, "record needs integer field 'sample_rate'");

    Utterance utt;
    utt.id = rec["id"].get<std::string>();
    utt.corpus_id = rec["corpus_id"].get<std::string>();
    utt.sample_rate = rec["sample_rate"].get<int>();
    if (utt.sample_rate <= 0)
      line_error(path, line_no, "sample_rate must be positive");
    if (utt.corpus_id != manifest.corpus_id)
      line_error(path, line_no, "corpus_id '" + utt.corpus_id +
                                    "' does not match header '" +
                                    manifest.corpus_id + "'");
    try {
      utt.label = parse_emotion_label(rec["label"].get<std::string>());
    } catch (const InputError &e) {
      line_error(path, line_no, e.what());
    }
    if (manifest.label_space.find(utt.label) == manifest.label_space.end())
      line_error(path, line_no, "label '" + to_string(utt.label) +
                                    "' outside declared label_space");

    const bool has_path = rec.contains("audio_path");
    const bool has_samples = rec.contains("samples");
    if (has_path == has_samples)
      line_error(path, line_no,
                 "record needs exactly one of 'audio_path' or 'samples'");
    try {
      if (has_path) {
        if (!rec["audio_path"].is_string())
          line_error(path, line_no, "'audio_path' must be a string");
        utt.samples =
            read_raw_f32(base / rec["audio_path"].get<std::string>());
      } else {
        if (!rec["samples"].is_array())
          line_error(path, line_no, "'samples' must be an array");
        utt.samples.reserve(rec["samples"].size());
        for (const auto &v : rec["samples"]) {
          if (!v.is_number())
            line_error(path, line_no, "'samples' entries must be numbers");
          utt.samples.push_back(v.get<float>());
        }
      }
      validate_samples(utt.samples, utt.id);
    } catch (const InputError &e) {
      line_error(path, line_no, e.what());
    }

    if (!seen_ids.insert(utt.id).second)
      line_error(path, line_no, "duplicate utterance id '" + utt.id + "'");
    manifest.utterances.push_back(std::move(utt));
  }

  if (!have_header)
    throw InputError("manifest " + path.string() + " has no header record");
  if (manifest.utterances.empty())
    throw InputError("manifest " + path.string() + ": empty corpus");
  return manifest;
}

void save_manifest(const CorpusManifest &manifest,
                   const std::filesystem::path &path,
                   const std::string &audio_dir) {
  const std::filesystem::path base = path.parent_path();
  if (!audio_dir.empty())
    std::filesystem::create_directories(base / audio_dir);
  if (!base.empty()) std::filesystem::create_directories(base);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write manifest " + path.string());

  json header;
  header["corpus_id"] = manifest.corpus_id;
  json space = json::array();
  for (EmotionLabel label : manifest.label_space) space.push_back(to_string(label));
  header["label_space"] = space;
  out << header.dump() << "\n";

  for (const Utterance &utt : manifest.utterances) {
    json rec;
    rec["id"] = utt.id;
    rec["corpus_id"] = utt.corpus_id;
    rec["label"] = to_string(utt.label);
    rec["sample_rate"] = utt.sample_rate;
    if (audio_dir.empty()) {
      rec["samples"] = utt.samples;
    } else {
      const std::string rel = audio_dir + "/" + utt.id + ".f32";
      write_raw_f32(base / rel, utt.samples);
      rec["audio_path"] = rel;
    }
    out << rec.dump() << "\n";
  }
  if (!out) throw InputError("short write on manifest " + path.string());
}

CorpusManifest generate_synthetic(const SyntheticSpec &spec) {
  spec.validate();

  CorpusManifest manifest;
  manifest.corpus_id = spec.corpus_id;
  manifest.label_space = spec.label_space;

  uint64_t utt_counter = 0;
  for (EmotionLabel label : spec.label_space) {
    const EmotionSignal &sig = spec.emotion_params.at(label);
    for (int i = 0; i < spec.utterances_per_label; i++) {
      Rng rng(derive_seed(spec.seed, utt_counter));
      utt_counter++;

      const double phase = rng.uniform() * kTwoPi;
      const double am_phase = rng.uniform() * kTwoPi;

      std::vector<float> wave(static_cast<size_t>(spec.duration_samples));
      double prev = 0.0;
      for (int n = 0; n < spec.duration_samples; n++) {
        const double t = static_cast<double>(n) / spec.sample_rate;
        const double carrier =
            std::sin(kTwoPi * sig.fundamental_hz * t + phase);
        const double am =
            1.0 + kAmDepth * std::sin(kTwoPi * sig.am_rate_hz * t + am_phase);
        const double x = kCarrierAmplitude * carrier * am;
        double y = x - spec.spectral_tilt * prev;
        prev = x;
        y += spec.noise_level * rng.normal();
        y = std::clamp(y, -1.0, 1.0);
        wave[static_cast<size_t>(n)] = static_cast<float>(y);
      }

      Utterance utt;
      std::ostringstream id;
      id << spec.corpus_id << "_" << to_string(label) << "_";
      id.fill('0');
      id.width(3);
      id << i;
      utt.id = id.str();
      utt.corpus_id = spec.corpus_id;
      utt.samples = std::move(wave);
      utt.sample_rate = spec.sample_rate;
      utt.label = label;
      manifest.utterances.push_back(std::move(utt));
    }
  }
  return manifest;
}

CorpusManifest assign_folds(CorpusManifest manifest, int k, uint64_t seed) {
  if (k < 2) throw InputError("assign_folds: k must be at least 2");
  if (manifest.utterances.empty())
    throw InputError("assign_folds: empty corpus");

  std::map<EmotionLabel, std::vector<size_t>> by_label;
  for (size_t i = 0; i < manifest.utterances.size(); i++)
    by_label[manifest.utterances[i].label].push_back(i);

  for (const auto &[label, indices] : by_label) {
    if (static_cast<int>(indices.size()) < k) {
      std::ostringstream os;
      os << "assign_folds: label '" << to_string(label) << "' has "
         << indices.size() << " utterances, need at least " << k;
      throw InputError(os.str());
    }
  }

  Rng rng(seed);
  for (auto &[label, indices] : by_label) {
    rng.shuffle(indices);
    for (size_t j = 0; j < indices.size(); j++)
      manifest.utterances[indices[j]].fold = static_cast<int>(j % k);
  }
  return manifest;
}

std::pair<std::vector<const Utterance *>, std::vector<const Utterance *>>
split(const CorpusManifest &manifest, int test_fold) {
  if (!manifest.folds_assigned())
    throw InputError("split: folds not assigned");
  int max_fold = 0;
  for (const Utterance &u : manifest.utterances)
    max_fold = std::max(max_fold, u.fold);
  if (test_fold < 0 || test_fold > max_fold) {
    std::ostringstream os;
    os << "split: test_fold " << test_fold << " out of range [0, "
       << max_fold + 1 << ")";
    throw InputError(os.str());
  }

  std::vector<const Utterance *> train, test;
  for (const Utterance &u : manifest.utterances) {
    (u.fold == test_fold ? test : train).push_back(&u);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace xscl
