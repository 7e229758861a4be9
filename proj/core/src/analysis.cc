// core/src/analysis.cc

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

#include "xscl/analysis.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "xscl/errors.h"
#include "xscl/losses.h"

namespace xscl {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(std::vector<EmotionLabel> classes)
    : classes_(std::move(classes)) {
  if (classes_.empty())
    throw InputError("confusion matrix: empty class list");
  counts_.assign(classes_.size(), std::vector<int>(classes_.size(), 0));
}

int ConfusionMatrix::class_index(EmotionLabel label) const {
  for (size_t i = 0; i < classes_.size(); i++)
    if (classes_[i] == label) return static_cast<int>(i);
  return -1;
}

void ConfusionMatrix::add(EmotionLabel truth, EmotionLabel predicted) {
  const int t = class_index(truth);
  const int p = class_index(predicted);
  if (t < 0 || p < 0)
    throw InputError("confusion matrix: label outside class list");
  counts_[static_cast<size_t>(t)][static_cast<size_t>(p)]++;
}

int ConfusionMatrix::count(int true_idx, int pred_idx) const {
  return counts_.at(static_cast<size_t>(true_idx))
      .at(static_cast<size_t>(pred_idx));
}

int ConfusionMatrix::total() const {
  int sum = 0;
  for (const auto &row : counts_)
    for (int c : row) sum += c;
  return sum;
}

double unweighted_accuracy(const ConfusionMatrix &cm) {
  const int n = static_cast<int>(cm.classes().size());
  if (n == 0) throw InputError("unweighted_accuracy: empty confusion matrix");
  double recall_sum = 0.0;
  for (int t = 0; t < n; t++) {
    int row_sum = 0;
    for (int p = 0; p < n; p++) row_sum += cm.count(t, p);
    if (row_sum == 0)
      throw InputError("unweighted_accuracy: class '" +
                       to_string(cm.classes()[static_cast<size_t>(t)]) +
                       "' has no test samples");
    recall_sum += static_cast<double>(cm.count(t, t)) / row_sum;
  }
  return recall_sum / n;
}

namespace {

// Time-mean features for every layer of every member, positives first.
std::vector<std::vector<Vec<double>>> layer_means(
    const EncoderStack<float> &stack, const ContrastBatch &batch) {
  std::vector<std::vector<Vec<double>>> means;  // [member][layer]
  auto process = [&](const Utterance *u) {
    const LayerActivations<float> acts = stack.forward(u->samples);
    std::vector<Vec<double>> per_layer;
    // Transformer layers only; entry 0 is the projection output.
    for (size_t l = 1; l < acts.layers.size(); l++) {
      const Mat<float> &h = acts.layers[l];
      Vec<double> mean = Vec<double>::Zero(h.cols());
      for (Eigen::Index t = 0; t < h.rows(); t++)
        mean += h.row(t).transpose().cast<double>();
      mean /= static_cast<double>(h.rows());
      per_layer.push_back(std::move(mean));
    }
    means.push_back(std::move(per_layer));
  };
  for (const Utterance *u : batch.positives) process(u);
  for (const Utterance *u : batch.negatives) process(u);
  return means;
}

void append_csv_double(std::ostream &os, double v) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
}

json profile_to_json(const SimilarityProfile &p) {
  return json{{"pos_mean", p.pos_mean}, {"neg_mean", p.neg_mean}};
}

SimilarityProfile profile_from_json(const json &j) {
  SimilarityProfile p;
  p.pos_mean = j.at("pos_mean").get<std::vector<double>>();
  p.neg_mean = j.at("neg_mean").get<std::vector<double>>();
  return p;
}

}  // namespace

SimilarityProfile layer_similarity_profile(
    const EncoderStack<float> &stack,
    const std::vector<ContrastBatch> &batches) {
  if (batches.empty())
    throw InputError("layer_similarity_profile: no batches");
  const int n_layers = stack.config().n_layers;

  SimilarityProfile profile;
  profile.pos_mean.assign(static_cast<size_t>(n_layers), 0.0);
  profile.neg_mean.assign(static_cast<size_t>(n_layers), 0.0);

  for (const ContrastBatch &batch : batches) {
    const auto means = layer_means(stack, batch);
    const size_t n_pos = batch.positives.size();
    const size_t n_all = means.size();

    for (int l = 0; l < n_layers; l++) {
      double pos_sum = 0.0;
      int pos_count = 0;
      for (size_t i = 0; i < n_pos; i++) {
        for (size_t j = i + 1; j < n_pos; j++) {
          pos_sum += cosine_sim<double>(means[i][static_cast<size_t>(l)],
                                        means[j][static_cast<size_t>(l)]);
          pos_count++;
        }
      }
      double neg_sum = 0.0;
      int neg_count = 0;
      for (size_t i = 0; i < n_pos; i++) {
        for (size_t k = n_pos; k < n_all; k++) {
          neg_sum += cosine_sim<double>(means[i][static_cast<size_t>(l)],
                                        means[k][static_cast<size_t>(l)]);
          neg_count++;
        }
      }
      if (pos_count == 0 || neg_count == 0)
        throw InputError("layer_similarity_profile: degenerate batch");
      profile.pos_mean[static_cast<size_t>(l)] += pos_sum / pos_count;
      profile.neg_mean[static_cast<size_t>(l)] += neg_sum / neg_count;
    }
  }
  for (int l = 0; l < n_layers; l++) {
    profile.pos_mean[static_cast<size_t>(l)] /=
        static_cast<double>(batches.size());
    profile.neg_mean[static_cast<size_t>(l)] /=
        static_cast<double>(batches.size());
  }
  return profile;
}

SimilarityProfile mean_profile(
    const std::vector<SimilarityProfile> &profiles) {
  if (profiles.empty()) throw InputError("mean_profile: empty input");
  SimilarityProfile out;
  const size_t layers = profiles.front().pos_mean.size();
  out.pos_mean.assign(layers, 0.0);
  out.neg_mean.assign(layers, 0.0);
  for (const SimilarityProfile &p : profiles) {
    if (p.pos_mean.size() != layers || p.neg_mean.size() != layers)
      throw InputError("mean_profile: layer count mismatch");
    for (size_t l = 0; l < layers; l++) {
      out.pos_mean[l] += p.pos_mean[l];
      out.neg_mean[l] += p.neg_mean[l];
    }
  }
  for (size_t l = 0; l < layers; l++) {
    out.pos_mean[l] /= static_cast<double>(profiles.size());
    out.neg_mean[l] /= static_cast<double>(profiles.size());
  }
  return out;
}

const VariantCorpusReport *RunReport::find(const std::string &variant,
                                           const std::string &corpus_id) const {
  for (const VariantCorpusReport &r : reports)
    if (r.variant == variant && r.corpus_id == corpus_id) return &r;
  return nullptr;
}

std::string serialize_report(const RunReport &report) {
  json j;
  if (!report.config_snapshot.empty())
    j["config"] = json::parse(report.config_snapshot);
  else
    j["config"] = json::object();

  json reports = json::array();
  for (const VariantCorpusReport &r : report.reports) {
    json jr;
    jr["variant"] = r.variant;
    jr["corpus_id"] = r.corpus_id;
    jr["mean_ua"] = r.mean_ua;
    json folds = json::array();
    for (const FoldResult &f : r.folds) {
      json jf;
      jf["fold"] = f.fold;
      jf["ua"] = f.ua;
      json classes = json::array();
      for (EmotionLabel c : f.confusion.classes())
        classes.push_back(to_string(c));
      jf["classes"] = classes;
      json counts = json::array();
      const int n = static_cast<int>(f.confusion.classes().size());
      for (int t = 0; t < n; t++) {
        json row = json::array();
        for (int p = 0; p < n; p++) row.push_back(f.confusion.count(t, p));
        counts.push_back(row);
      }
      jf["counts"] = counts;
      folds.push_back(jf);
    }
    jr["folds"] = folds;
    reports.push_back(jr);
  }
  j["reports"] = reports;

  json curves = json::array();
  for (const LossCurve &c : report.curves) {
    json jc;
    jc["name"] = c.name;
    jc["contrastive"] = c.contrastive;
    json points = json::array();
    for (const LossCurvePoint &p : c.points) {
      points.push_back(json{{"epoch", p.epoch},
                            {"mean_total", p.mean_total},
                            {"mean_contrast", p.mean_contrast},
                            {"mean_margin", p.mean_margin}});
    }
    jc["points"] = points;
    curves.push_back(jc);
  }
  j["curves"] = curves;

  json before = json::array(), after = json::array();
  for (const SimilarityProfile &p : report.profile_before)
    before.push_back(profile_to_json(p));
  for (const SimilarityProfile &p : report.profile_after)
    after.push_back(profile_to_json(p));
  j["profile_before"] = before;
  j["profile_after"] = after;

  return j.dump(2);
}

RunReport parse_report(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception &e) {
    throw InputError(std::string("run report: parse error: ") + e.what());
  }
  RunReport report;
  try {
    report.config_snapshot = j.at("config").dump(2);
    for (const json &jr : j.at("reports")) {
      VariantCorpusReport r;
      r.variant = jr.at("variant").get<std::string>();
      r.corpus_id = jr.at("corpus_id").get<std::string>();
      r.mean_ua = jr.at("mean_ua").get<double>();
      for (const json &jf : jr.at("folds")) {
        std::vector<EmotionLabel> classes;
        for (const json &c : jf.at("classes"))
          classes.push_back(parse_emotion_label(c.get<std::string>()));
        FoldResult f;
        f.fold = jf.at("fold").get<int>();
        f.ua = jf.at("ua").get<double>();
        f.confusion = ConfusionMatrix(classes);
        const auto &counts = jf.at("counts");
        for (size_t t = 0; t < classes.size(); t++) {
          for (size_t p = 0; p < classes.size(); p++) {
            const int c = counts.at(t).at(p).get<int>();
            for (int rep = 0; rep < c; rep++)
              f.confusion.add(classes[t], classes[p]);
          }
        }
        r.folds.push_back(std::move(f));
      }
      report.reports.push_back(std::move(r));
    }
    for (const json &jc : j.at("curves")) {
      LossCurve c;
      c.name = jc.at("name").get<std::string>();
      c.contrastive = jc.at("contrastive").get<bool>();
      for (const json &jp : jc.at("points")) {
        LossCurvePoint p;
        p.epoch = jp.at("epoch").get<int>();
        p.mean_total = jp.at("mean_total").get<double>();
        p.mean_contrast = jp.at("mean_contrast").get<double>();
        p.mean_margin = jp.at("mean_margin").get<double>();
        c.points.push_back(p);
      }
      report.curves.push_back(std::move(c));
    }
    for (const json &jp : j.at("profile_before"))
      report.profile_before.push_back(profile_from_json(jp));
    for (const json &jp : j.at("profile_after"))
      report.profile_after.push_back(profile_from_json(jp));
  } catch (const json::exception &e) {
    throw InputError(std::string("run report: bad structure: ") + e.what());
  }
  return report;
}

void emit_report(const RunReport &report, const std::filesystem::path &dir) {
  if (report.reports.empty()) throw InputError("emit_report: empty report");
  std::filesystem::create_directories(dir);

  std::vector<std::string> corpora;
  for (const VariantCorpusReport &r : report.reports)
    if (std::find(corpora.begin(), corpora.end(), r.corpus_id) ==
        corpora.end())
      corpora.push_back(r.corpus_id);

  for (const std::string &corpus : corpora) {
    const std::filesystem::path path = dir / (corpus + "_ua.csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << "model_variant,fold,ua\n";
    for (const VariantCorpusReport &r : report.reports) {
      if (r.corpus_id != corpus) continue;
      for (const FoldResult &f : r.folds) {
        out << r.variant << "," << f.fold << ",";
        append_csv_double(out, f.ua);
        out << "\n";
      }
      out << r.variant << ",mean,";
      append_csv_double(out, r.mean_ua);
      out << "\n";
    }
    if (!out) throw InputError("short write on " + path.string());
  }

  if (!report.profile_after.empty()) {
    const SimilarityProfile mean = mean_profile(report.profile_after);
    const std::filesystem::path path = dir / "similarity_profile.csv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << "layer,pos_mean,neg_mean\n";
    for (int l = 0; l < mean.n_layers(); l++) {
      out << (l + 1) << ",";
      append_csv_double(out, mean.pos_mean[static_cast<size_t>(l)]);
      out << ",";
      append_csv_double(out, mean.neg_mean[static_cast<size_t>(l)]);
      out << "\n";
    }
    if (!out) throw InputError("short write on " + path.string());
  }
}

}  // namespace xscl
