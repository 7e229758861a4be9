// core/include/xscl/corpus.h

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

#ifndef XSCL_CORPUS_H_
#define XSCL_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace xscl {

// Closed label set.  Four-emotion corpora (IEMOCAP-style) use the first
// four tags; six-emotion corpora (CASIA-style) use all of them.
enum class EmotionLabel : int {
  kNeutral = 0,
  kSad = 1,
  kAngry = 2,
  kHappy = 3,
  kFear = 4,
  kSurprise = 5,
};

constexpr int kNumEmotionLabels = 6;

const std::string &to_string(EmotionLabel label);
// Throws InputError on an unknown tag.
EmotionLabel parse_emotion_label(const std::string &tag);

// All six labels, in enum order.
const std::vector<EmotionLabel> &all_emotion_labels();

struct Utterance {
  std::string id;
  std::string corpus_id;
  std::vector<float> samples;  // mono, amplitudes in [-1, 1]
  int sample_rate = 16000;
  EmotionLabel label = EmotionLabel::kNeutral;
  int fold = -1;  // unassigned until assign_folds()
};

struct CorpusManifest {
  std::string corpus_id;
  std::set<EmotionLabel> label_space;
  std::vector<Utterance> utterances;

  bool folds_assigned() const;
};

// Per-emotion signal parameters.  Distinct emotions must use distinct
// (fundamental, AM-rate) pairs; corpora sharing an emotion must share its
// parameters so the emotion is the cross-corpus invariant.
struct EmotionSignal {
  double fundamental_hz = 0.0;
  double am_rate_hz = 0.0;
};

struct SyntheticSpec {
  std::string corpus_id;
  std::set<EmotionLabel> label_space;
  int utterances_per_label = 0;
  int duration_samples = 8000;
  int sample_rate = 16000;
  std::map<EmotionLabel, EmotionSignal> emotion_params;
  // Corpus-level nuisance: first-order spectral tilt filter plus noise floor.
  double spectral_tilt = 0.0;  // in (-1, 1)
  double noise_level = 0.0;    // gaussian sigma
  uint64_t seed = 0;

  // Throws InputError if the spec violates its invariants.
  void validate() const;
};

// Reads a line-delimited manifest: a header record declaring corpus_id and
// label_space, followed by one utterance record per line.  Waveforms are
// either inline sample arrays or external raw little-endian float32 files
// resolved relative to the manifest's directory.  Throws InputError with the
// offending 1-based line number on malformed input.
CorpusManifest load_manifest(const std::filesystem::path &path);

// Writes the manifest next to its waveforms.  When audio_dir is non-empty,
// waveforms go to one raw float32 file per utterance under that directory
// (relative to the manifest's parent) and records reference them by path;
// otherwise samples are inlined.
void save_manifest(const CorpusManifest &manifest,
                   const std::filesystem::path &path,
                   const std::string &audio_dir = "");

// Deterministic synthetic corpus: per utterance, a sinusoid at the emotion
// fundamental, amplitude-modulated at the emotion rate, passed through the
// corpus tilt filter with gaussian noise added.  Labels are balanced at
// utterances_per_label.
CorpusManifest generate_synthetic(const SyntheticSpec &spec);

// Stratified-by-label random fold assignment; per-label fold sizes differ by
// at most one.  Requires at least k utterances of every label present.
CorpusManifest assign_folds(CorpusManifest manifest, int k, uint64_t seed);

// Train/test views for one held-out fold.  Pointers remain valid while the
// manifest is alive.
std::pair<std::vector<const Utterance *>, std::vector<const Utterance *>>
split(const CorpusManifest &manifest, int test_fold);

// Raw little-endian float32 waveform IO.
std::vector<float> read_raw_f32(const std::filesystem::path &path);
void write_raw_f32(const std::filesystem::path &path,
                   const std::vector<float> &samples);

}  // namespace xscl

#endif  // XSCL_CORPUS_H_
