// core/include/xscl/losses.h

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

// Contrastive training objectives over pooled utterance features: the
// InfoNCE contrast loss, the cosine margin loss, their sum, and the
// cross-entropy used for classifier fine-tuning.  Each loss optionally
// returns analytic gradients with respect to the input feature vectors.
// Templated on the scalar type: training runs in float, gradient
// verification in double.

#ifndef XSCL_LOSSES_H_
#define XSCL_LOSSES_H_

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "xscl/errors.h"
#include "xscl/rng.h"

namespace xscl {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct LossConfig {
  double temperature = 0.07;
  double margin = 0.4;
  double alpha = 0.5;

  void validate() const {
    if (temperature <= 0.0) throw InputError("loss config: temperature must be positive");
    if (margin < -1.0 || margin > 1.0)
      throw InputError("loss config: margin must be in [-1, 1]");
    if (alpha < 0.0) throw InputError("loss config: alpha must be nonnegative");
  }
};

// Pooled features of one contrast batch, positives first.
template <typename S>
struct ContrastFeatures {
  std::vector<Vec<S>> positives;
  std::vector<Vec<S>> negatives;
};

// Gradients of a loss with respect to every feature vector.
template <typename S>
struct FeatureGrads {
  std::vector<Vec<S>> d_positives;
  std::vector<Vec<S>> d_negatives;

  void resize_like(const ContrastFeatures<S> &f) {
    d_positives.assign(f.positives.size(), Vec<S>());
    d_negatives.assign(f.negatives.size(), Vec<S>());
    for (size_t i = 0; i < f.positives.size(); i++)
      d_positives[i] = Vec<S>::Zero(f.positives[i].size());
    for (size_t i = 0; i < f.negatives.size(); i++)
      d_negatives[i] = Vec<S>::Zero(f.negatives[i].size());
  }
};

template <typename S>
S cosine_sim(const Vec<S> &x, const Vec<S> &y) {
  const S nx = x.norm();
  const S ny = y.norm();
  if (nx == S(0) || ny == S(0))
    throw InputError("cosine_sim: zero vector");
  return x.dot(y) / (nx * ny);
}

namespace internal {

// d sim(x, y) / dx = y / (|x||y|) - sim * x / |x|^2; accumulated scaled by w.
template <typename S>
void accumulate_cosine_grad(const Vec<S> &x, const Vec<S> &y, S sim, S w,
                            Vec<S> *dx, Vec<S> *dy) {
  const S nx = x.norm();
  const S ny = y.norm();
  *dx += w * (y / (nx * ny) - sim * x / (nx * nx));
  *dy += w * (x / (nx * ny) - sim * y / (ny * ny));
}

template <typename S>
void check_features(const ContrastFeatures<S> &f) {
  if (f.positives.size() != f.negatives.size())
    throw InputError("contrast features: positive and negative counts differ");
  for (const auto &v : f.positives)
    if (v.size() == 0 || !v.allFinite() || v.norm() == S(0))
      throw InputError("contrast features: zero or non-finite positive");
  for (const auto &v : f.negatives)
    if (v.size() == 0 || !v.allFinite() || v.norm() == S(0))
      throw InputError("contrast features: zero or non-finite negative");
}

// Margin loss as a function of precomputed similarities: aligned holds the
// sims of the paired positive halves, cross every positive-negative sim.
template <typename S>
S margin_from_sims(const std::vector<S> &aligned, const std::vector<S> &cross,
                   const LossConfig &cfg) {
  if (aligned.empty() || cross.empty())
    throw InputError("margin_from_sims: empty similarity lists");
  S term1 = S(0);
  for (S sim : aligned) term1 += S(1) - sim;
  term1 = static_cast<S>(cfg.alpha) * term1 / static_cast<S>(aligned.size());
  S term2 = S(0);
  for (S sim : cross) term2 += std::max(S(0), sim - static_cast<S>(cfg.margin));
  term2 /= static_cast<S>(cross.size());
  return term1 + term2;
}

}  // namespace internal

// InfoNCE contrast loss.  For ordered positives (i, j) the per-pair term is
//   l_ij = -log( exp(s_ij/t) / (exp(s_ij/t) + sum_k exp(s_ik^n / t)) )
// with s_ij the positive-positive cosine similarity and s_ik^n the anchor's
// similarities to all negatives; the batch loss averages l_ij + l_ji over
// unordered pairs, i.e. L = 4/(N(N-2)) * sum_{i<j} (l_ij + l_ji).
// Computed with max-subtracted log-sum-exp so arbitrary temperatures are
// safe.  Strictly positive for any finite input.
template <typename S>
S contrast_loss(const ContrastFeatures<S> &f, const LossConfig &cfg,
                FeatureGrads<S> *grads = nullptr) {
  cfg.validate();
  internal::check_features(f);
  const int p = static_cast<int>(f.positives.size());
  if (p < 2) throw InputError("contrast_loss: need at least 2 positives");
  const int n = 2 * p;  // batch size N
  const S inv_tau = S(1) / static_cast<S>(cfg.temperature);

  // Pairwise similarity tables.
  Mat<S> pp(p, p), pn(p, p);
  for (int i = 0; i < p; i++) {
    for (int j = i + 1; j < p; j++) {
      pp(i, j) = cosine_sim(f.positives[static_cast<size_t>(i)],
                            f.positives[static_cast<size_t>(j)]);
      pp(j, i) = pp(i, j);
    }
    for (int k = 0; k < p; k++)
      pn(i, k) = cosine_sim(f.positives[static_cast<size_t>(i)],
                            f.negatives[static_cast<size_t>(k)]);
  }

  const S coeff = S(4) / (S(n) * S(n - 2));
  // dL/d(similarity) accumulators, filled only when gradients are wanted.
  Mat<S> g_pp, g_pn;
  if (grads != nullptr) {
    g_pp = Mat<S>::Zero(p, p);
    g_pn = Mat<S>::Zero(p, p);
  }

  S total = S(0);
  for (int i = 0; i < p; i++) {
    for (int j = 0; j < p; j++) {
      if (j == i) continue;
      const S z_pos = pp(i, j) * inv_tau;
      S zmax = z_pos;
      for (int k = 0; k < p; k++) zmax = std::max(zmax, pn(i, k) * inv_tau);
      S denom = std::exp(z_pos - zmax);
      for (int k = 0; k < p; k++) denom += std::exp(pn(i, k) * inv_tau - zmax);
      const S lse = zmax + std::log(denom);
      total += lse - z_pos;  // l_ij

      if (grads != nullptr) {
        const S p_pos = std::exp(z_pos - lse);
        g_pp(i, j) += coeff * (p_pos - S(1)) * inv_tau;
        for (int k = 0; k < p; k++)
          g_pn(i, k) += coeff * std::exp(pn(i, k) * inv_tau - lse) * inv_tau;
      }
    }
  }
  const S loss = coeff * total;

  if (grads != nullptr) {
    grads->resize_like(f);
    for (int i = 0; i < p; i++) {
      for (int j = i + 1; j < p; j++) {
        const S w = g_pp(i, j) + g_pp(j, i);  // both orders hit sim(i, j)
        if (w != S(0))
          internal::accumulate_cosine_grad(
              f.positives[static_cast<size_t>(i)],
              f.positives[static_cast<size_t>(j)], pp(i, j), w,
              &grads->d_positives[static_cast<size_t>(i)],
              &grads->d_positives[static_cast<size_t>(j)]);
      }
      for (int k = 0; k < p; k++) {
        if (g_pn(i, k) != S(0))
          internal::accumulate_cosine_grad(
              f.positives[static_cast<size_t>(i)],
              f.negatives[static_cast<size_t>(k)], pn(i, k), g_pn(i, k),
              &grads->d_positives[static_cast<size_t>(i)],
              &grads->d_negatives[static_cast<size_t>(k)]);
      }
    }
  }
  return loss;
}

// Random pairing of the positives for the margin loss: a shuffled index
// permutation, first half aligned against second half.
inline std::vector<int> margin_pairing(int n_positives, Rng &rng) {
  std::vector<int> perm(static_cast<size_t>(n_positives));
  for (int i = 0; i < n_positives; i++) perm[static_cast<size_t>(i)] = i;
  rng.shuffle(perm);
  return perm;
}

// Cosine margin loss.  The positives are split into two aligned halves by
// the given permutation; term one pulls aligned pairs to similarity 1,
// term two hinges every positive-negative similarity below the margin:
//   L_m = alpha * mean_i (1 - sim(p1_i, p2_i))
//       + mean_{p,k} max(0, sim(x_p, x_n^k) - m)
template <typename S>
S cosine_margin_loss(const ContrastFeatures<S> &f, const LossConfig &cfg,
                     const std::vector<int> &pairing,
                     FeatureGrads<S> *grads = nullptr) {
  cfg.validate();
  internal::check_features(f);
  const int p = static_cast<int>(f.positives.size());
  if (p < 2 || p % 2 != 0)
    throw InputError("cosine_margin_loss: positive count must be even and >= 2");
  if (static_cast<int>(pairing.size()) != p)
    throw InputError("cosine_margin_loss: pairing size mismatch");

  if (grads != nullptr) grads->resize_like(f);

  const int half = p / 2;
  const S alpha = static_cast<S>(cfg.alpha);
  const S margin = static_cast<S>(cfg.margin);

  std::vector<S> aligned(static_cast<size_t>(half));
  for (int i = 0; i < half; i++) {
    const auto a = static_cast<size_t>(pairing[static_cast<size_t>(i)]);
    const auto b = static_cast<size_t>(pairing[static_cast<size_t>(i + half)]);
    const S sim = cosine_sim(f.positives[a], f.positives[b]);
    aligned[static_cast<size_t>(i)] = sim;
    if (grads != nullptr) {
      const S w = -alpha / S(half);
      internal::accumulate_cosine_grad(f.positives[a], f.positives[b], sim, w,
                                       &grads->d_positives[a],
                                       &grads->d_positives[b]);
    }
  }

  std::vector<S> cross;
  cross.reserve(static_cast<size_t>(p) * static_cast<size_t>(p));
  const S pair_count = S(p) * S(p);
  for (int i = 0; i < p; i++) {
    for (int k = 0; k < p; k++) {
      const S sim = cosine_sim(f.positives[static_cast<size_t>(i)],
                               f.negatives[static_cast<size_t>(k)]);
      cross.push_back(sim);
      if (grads != nullptr && sim > margin)
        internal::accumulate_cosine_grad(
            f.positives[static_cast<size_t>(i)],
            f.negatives[static_cast<size_t>(k)], sim, S(1) / pair_count,
            &grads->d_positives[static_cast<size_t>(i)],
            &grads->d_negatives[static_cast<size_t>(k)]);
    }
  }

  return internal::margin_from_sims(aligned, cross, cfg);
}

template <typename S>
S cosine_margin_loss(const ContrastFeatures<S> &f, const LossConfig &cfg,
                     Rng &rng, FeatureGrads<S> *grads = nullptr) {
  const auto pairing =
      margin_pairing(static_cast<int>(f.positives.size()), rng);
  return cosine_margin_loss(f, cfg, pairing, grads);
}

// Total stage-one objective: contrast loss plus cosine margin loss.
template <typename S>
S total_loss(const ContrastFeatures<S> &f, const LossConfig &cfg,
             const std::vector<int> &pairing,
             FeatureGrads<S> *grads = nullptr) {
  FeatureGrads<S> margin_grads;
  const S lc = contrast_loss(f, cfg, grads);
  const S lm = cosine_margin_loss(
      f, cfg, pairing, grads != nullptr ? &margin_grads : nullptr);
  if (grads != nullptr) {
    for (size_t i = 0; i < grads->d_positives.size(); i++)
      grads->d_positives[i] += margin_grads.d_positives[i];
    for (size_t i = 0; i < grads->d_negatives.size(); i++)
      grads->d_negatives[i] += margin_grads.d_negatives[i];
  }
  return lc + lm;
}

template <typename S>
S total_loss(const ContrastFeatures<S> &f, const LossConfig &cfg, Rng &rng,
             FeatureGrads<S> *grads = nullptr) {
  const auto pairing =
      margin_pairing(static_cast<int>(f.positives.size()), rng);
  return total_loss(f, cfg, pairing, grads);
}

// Numerically stable -log softmax(scores)[label].
template <typename S>
S cross_entropy(const Vec<S> &scores, int label, Vec<S> *d_scores = nullptr) {
  if (scores.size() == 0) throw InputError("cross_entropy: empty scores");
  if (!scores.allFinite())
    throw InputError("cross_entropy: non-finite scores");
  if (label < 0 || label >= scores.size()) {
    std::ostringstream os;
    os << "cross_entropy: label " << label << " out of range [0, "
       << scores.size() << ")";
    throw InputError(os.str());
  }
  const S zmax = scores.maxCoeff();
  const Vec<S> shifted = (scores.array() - zmax).matrix();
  const S lse = std::log(shifted.array().exp().sum());
  if (d_scores != nullptr) {
    *d_scores = (shifted.array() - lse).exp().matrix();  // softmax
    (*d_scores)(label) -= S(1);
  }
  return lse - shifted(label);
}

}  // namespace xscl

#endif  // XSCL_LOSSES_H_
