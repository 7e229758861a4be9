// tests/test_losses.cc

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

#include "xscl/losses.h"

#include <cmath>

#include "doctest.h"
#include "xscl/errors.h"
#include "xscl/rng.h"

using namespace xscl;

namespace {

using VecD = Vec<double>;

// ---- scalar-loop oracles, no Eigen reductions, no log-sum-exp tricks ----

double oracle_cosine(const VecD &x, const VecD &y) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (Eigen::Index i = 0; i < x.size(); i++) {
    dot += x(i) * y(i);
    nx += x(i) * x(i);
    ny += y(i) * y(i);
  }
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

// Direct evaluation of the InfoNCE ratio and its -log, summed over ordered
// positive pairs.
double oracle_contrast(const ContrastFeatures<double> &f,
                       const LossConfig &cfg) {
  const int p = static_cast<int>(f.positives.size());
  const int n = 2 * p;
  double total = 0.0;
  for (int i = 0; i < p; i++) {
    for (int j = 0; j < p; j++) {
      if (i == j) continue;
      const double num = std::exp(
          oracle_cosine(f.positives[(size_t)i], f.positives[(size_t)j]) /
          cfg.temperature);
      double denom = num;
      for (int k = 0; k < p; k++)
        denom += std::exp(
            oracle_cosine(f.positives[(size_t)i], f.negatives[(size_t)k]) /
            cfg.temperature);
      total += -std::log(num / denom);
    }
  }
  return 4.0 / (static_cast<double>(n) * (n - 2)) * total;
}

double oracle_margin(const ContrastFeatures<double> &f, const LossConfig &cfg,
                     const std::vector<int> &pairing) {
  const int p = static_cast<int>(f.positives.size());
  const int half = p / 2;
  double term1 = 0.0;
  for (int i = 0; i < half; i++) {
    term1 += 1.0 - oracle_cosine(f.positives[(size_t)pairing[(size_t)i]],
                                 f.positives[(size_t)pairing[(size_t)(i + half)]]);
  }
  term1 = cfg.alpha * term1 / half;
  double term2 = 0.0;
  for (int i = 0; i < p; i++)
    for (int k = 0; k < p; k++) {
      const double s =
          oracle_cosine(f.positives[(size_t)i], f.negatives[(size_t)k]);
      if (s > cfg.margin) term2 += s - cfg.margin;
    }
  term2 /= static_cast<double>(p) * p;
  return term1 + term2;
}

double oracle_cross_entropy(const VecD &scores, int label) {
  double denom = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); i++)
    denom += std::exp(scores(i));
  return -std::log(std::exp(scores(label)) / denom);
}

VecD unit(int dim, int axis) {
  VecD v = VecD::Zero(dim);
  v(axis) = 1.0;
  return v;
}

ContrastFeatures<double> random_features(int n_pos, int dim, Rng *rng) {
  ContrastFeatures<double> f;
  for (int i = 0; i < n_pos; i++) {
    VecD v(dim);
    for (int d = 0; d < dim; d++) v(d) = rng->normal();
    f.positives.push_back(v);
  }
  for (int i = 0; i < n_pos; i++) {
    VecD v(dim);
    for (int d = 0; d < dim; d++) v(d) = rng->normal();
    f.negatives.push_back(v);
  }
  return f;
}

std::vector<int> identity_pairing(int n) {
  std::vector<int> p((size_t)n);
  for (int i = 0; i < n; i++) p[(size_t)i] = i;
  return p;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  VecD v(3);
  v << 0.3, -1.2, 2.0;
  CHECK(cosine_sim<double>(v, v) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(cosine_sim<double>(unit(2, 0), unit(2, 1)) ==
        doctest::Approx(0.0).epsilon(1e-12));

  VecD w(3);
  w << 1.0, 0.5, -0.25;
  CHECK(cosine_sim<double>((3.0 * v).eval(), w) ==
        doctest::Approx(cosine_sim<double>(v, w)).epsilon(1e-12));

  CHECK_THROWS_AS(cosine_sim<double>(VecD::Zero(3), v), InputError);
}

TEST_CASE("contrast loss at perfect separation is tiny") {
  // Two identical unit positives, two orthogonal negatives, N=4.
  LossConfig cfg;
  ContrastFeatures<double> f;
  f.positives = {unit(4, 0), unit(4, 0)};
  f.negatives = {unit(4, 1), unit(4, 2)};

  const double lc = contrast_loss(f, cfg);
  CHECK(lc < 1e-5);
  CHECK(lc > 0.0);
  // Closed form: every l_ij = log(1 + 2 e^{-1/tau}).
  const double expected = std::log(1.0 + 2.0 * std::exp(-1.0 / 0.07));
  CHECK(lc == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("contrast loss with all-equal similarities is log 3") {
  LossConfig cfg;
  VecD v(3);
  v << 0.2, -0.4, 0.9;
  ContrastFeatures<double> f;
  f.positives = {v, v};
  f.negatives = {v, v};
  CHECK(std::abs(contrast_loss(f, cfg) - std::log(3.0)) < 1e-9);

  // The ratio collapses to 1/(1 + N/2) for any common similarity value.
  ContrastFeatures<double> g;
  VecD w = (2.5 * v).eval();
  g.positives = {v, w};
  g.negatives = {w, v};
  CHECK(std::abs(contrast_loss(g, cfg) - std::log(3.0)) < 1e-9);
}

TEST_CASE("contrast loss requires two positives and nonzero vectors") {
  LossConfig cfg;
  ContrastFeatures<double> f;
  f.positives = {unit(3, 0)};
  f.negatives = {unit(3, 1)};
  CHECK_THROWS_AS(contrast_loss(f, cfg), InputError);

  ContrastFeatures<double> g;
  g.positives = {unit(3, 0), VecD::Zero(3)};
  g.negatives = {unit(3, 1), unit(3, 2)};
  CHECK_THROWS_AS(contrast_loss(g, cfg), InputError);
}

TEST_CASE("vectorized losses match the scalar-loop oracles") {
  LossConfig cfg;
  Rng rng(31337);
  for (int n : {4, 8, 32}) {
    for (int rep = 0; rep < 100; rep++) {
      const auto f = random_features(n / 2, 16, &rng);
      const auto pairing = margin_pairing(n / 2, rng);
      CHECK(std::abs(contrast_loss(f, cfg) - oracle_contrast(f, cfg)) <=
            1e-6);
      CHECK(std::abs(cosine_margin_loss(f, cfg, pairing) -
                     oracle_margin(f, cfg, pairing)) <= 1e-6);
    }
  }
}

TEST_CASE("margin loss floors and hand values") {
  LossConfig cfg;

  SUBCASE("identical halves and sub-margin negatives give zero") {
    ContrastFeatures<double> f;
    f.positives = {unit(4, 0), unit(4, 0), unit(4, 0), unit(4, 0)};
    f.negatives = {unit(4, 1), unit(4, 1), unit(4, 2), unit(4, 3)};
    CHECK(cosine_margin_loss(f, cfg, identity_pairing(4)) == 0.0);
  }

  SUBCASE("formula-level hand case: orthogonal halves, saturated negatives") {
    // aligned sims 0, every cross sim 1 -> 0.5 * 1 + (1 - 0.4) = 1.1.
    const std::vector<double> aligned = {0.0, 0.0};
    const std::vector<double> cross(16, 1.0);
    CHECK(internal::margin_from_sims(aligned, cross, cfg) ==
          doctest::Approx(1.1).epsilon(1e-12));
  }

  SUBCASE("colinear positives and negatives hit only the hinge") {
    VecD v(3);
    v << 1.0, 2.0, -0.5;
    ContrastFeatures<double> f;
    f.positives = {v, (2.0 * v).eval()};
    f.negatives = {(0.5 * v).eval(), (3.0 * v).eval()};
    // term1 = alpha * (1 - 1) = 0; every cross sim is 1 -> term2 = 0.6.
    CHECK(cosine_margin_loss(f, cfg, identity_pairing(2)) ==
          doctest::Approx(0.6).epsilon(1e-12));
  }

  SUBCASE("odd positive count is rejected") {
    ContrastFeatures<double> f;
    f.positives = {unit(3, 0), unit(3, 1), unit(3, 2)};
    f.negatives = {unit(3, 0), unit(3, 1), unit(3, 2)};
    CHECK_THROWS_AS(cosine_margin_loss(f, cfg, identity_pairing(3)),
                    InputError);
  }
}

TEST_CASE("total loss is the sum of its parts") {
  LossConfig cfg;
  Rng rng(42);
  const auto f = random_features(4, 8, &rng);
  const auto pairing = identity_pairing(4);
  const double lc = contrast_loss(f, cfg);
  const double lm = cosine_margin_loss(f, cfg, pairing);
  CHECK(total_loss(f, cfg, pairing) == doctest::Approx(lc + lm).epsilon(1e-12));

  // Perfect separation: the margin term vanishes and only the InfoNCE
  // residual remains.
  ContrastFeatures<double> g;
  g.positives = {unit(4, 0), unit(4, 0)};
  g.negatives = {unit(4, 1), unit(4, 2)};
  CHECK(total_loss(g, cfg, identity_pairing(2)) < 1e-5);
}

TEST_CASE("contrast loss invariances") {
  LossConfig cfg;
  Rng rng(7);
  const auto f = random_features(4, 8, &rng);
  const double base = contrast_loss(f, cfg);

  SUBCASE("permutation of positives and negatives") {
    ContrastFeatures<double> g;
    g.positives = {f.positives[2], f.positives[0], f.positives[3],
                   f.positives[1]};
    g.negatives = {f.negatives[1], f.negatives[3], f.negatives[0],
                   f.negatives[2]};
    CHECK(contrast_loss(g, cfg) == doctest::Approx(base).epsilon(1e-9));
  }

  SUBCASE("positive rescaling of a single feature") {
    ContrastFeatures<double> g = f;
    g.positives[1] *= 37.5;
    g.negatives[2] *= 0.01;
    CHECK(contrast_loss(g, cfg) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("moving a negative toward the positives never decreases the loss") {
  LossConfig cfg;
  VecD v = unit(4, 0);
  ContrastFeatures<double> f;
  f.positives = {v, v};

  double prev_lc = -1.0, prev_term2 = -1.0;
  for (int step = 0; step <= 10; step++) {
    const double t = static_cast<double>(step) / 10.0;
    VecD n = ((1.0 - t) * unit(4, 1) + t * v).eval();
    n.normalize();
    ContrastFeatures<double> g = f;
    g.negatives = {n, unit(4, 2)};
    const double lc = contrast_loss(g, cfg);
    const std::vector<double> aligned = {1.0};
    const std::vector<double> cross = {
        cosine_sim<double>(g.positives[0], g.negatives[0]),
        cosine_sim<double>(g.positives[0], g.negatives[1])};
    const double term2 = internal::margin_from_sims(aligned, cross, cfg);
    if (step > 0) {
      CHECK(lc >= prev_lc - 1e-12);
      CHECK(term2 >= prev_term2 - 1e-12);
    }
    prev_lc = lc;
    prev_term2 = term2;
  }
}

TEST_CASE("cross entropy values and oracle") {
  VecD uniform = VecD::Zero(4);
  CHECK(cross_entropy<double>(uniform, 2) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));

  VecD spread(4);
  spread << 100.0, 0.0, 0.0, 0.0;
  CHECK(cross_entropy<double>(spread, 0) < 1e-6);

  Rng rng(5);
  for (int rep = 0; rep < 100; rep++) {
    VecD scores(6);
    for (int i = 0; i < 6; i++) scores(i) = rng.normal() * 3.0;
    const int label = rng.uniform_int(6);
    CHECK(std::abs(cross_entropy<double>(scores, label) -
                   oracle_cross_entropy(scores, label)) <= 1e-9);
  }

  CHECK_THROWS_AS(cross_entropy<double>(uniform, 4), InputError);
  CHECK_THROWS_AS(cross_entropy<double>(uniform, -1), InputError);
}

TEST_CASE("loss gradients match central finite differences") {
  LossConfig cfg;
  Rng rng(90210);
  auto f = random_features(4, 6, &rng);
  const auto pairing = margin_pairing(4, rng);

  FeatureGrads<double> grads;
  total_loss(f, cfg, pairing, &grads);

  const double eps = 1e-5;
  auto check_entry = [&](VecD *vec, const VecD &analytic, Eigen::Index d) {
    const double saved = (*vec)(d);
    (*vec)(d) = saved + eps;
    const double up = total_loss(f, cfg, pairing);
    (*vec)(d) = saved - eps;
    const double down = total_loss(f, cfg, pairing);
    (*vec)(d) = saved;
    const double fd = (up - down) / (2.0 * eps);
    const double rel =
        std::abs(analytic(d) - fd) / std::max(std::abs(analytic(d)), 1e-8);
    CHECK(rel <= 1e-4);
  };

  for (size_t i = 0; i < f.positives.size(); i++)
    for (Eigen::Index d = 0; d < f.positives[i].size(); d++)
      check_entry(&f.positives[i], grads.d_positives[i], d);
  for (size_t k = 0; k < f.negatives.size(); k++)
    for (Eigen::Index d = 0; d < f.negatives[k].size(); d++)
      check_entry(&f.negatives[k], grads.d_negatives[k], d);
}

TEST_CASE("temperature must be positive") {
  LossConfig cfg;
  cfg.temperature = 0.0;
  Rng rng(1);
  const auto f = random_features(2, 4, &rng);
  CHECK_THROWS_AS(contrast_loss(f, cfg), InputError);
}
