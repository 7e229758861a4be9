// core/include/xscl/encoder-inl.h

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

// Template definitions for EncoderStack; included by encoder.cc where the
// float and double instantiations live.

#ifndef XSCL_ENCODER_INL_H_
#define XSCL_ENCODER_INL_H_

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "xscl/encoder.h"
#include "xscl/errors.h"

namespace xscl {

namespace internal {

constexpr double kLayerNormEps = 1e-5;

template <typename S>
void fill_normal(Mat<S> *m, Rng *rng, double scale) {
  for (Eigen::Index i = 0; i < m->rows(); i++)
    for (Eigen::Index j = 0; j < m->cols(); j++)
      (*m)(i, j) = static_cast<S>(rng->normal() * scale);
}

template <typename S>
Mat<S> layer_norm_forward(const Mat<S> &x, const Mat<S> &g, const Mat<S> &b,
                          LayerNormCache<S> *cache) {
  const Eigen::Index t = x.rows(), d = x.cols();
  cache->xhat.resize(t, d);
  cache->inv_std.resize(t);
  Mat<S> out(t, d);
  for (Eigen::Index r = 0; r < t; r++) {
    const S mu = x.row(r).mean();
    const auto centered = (x.row(r).array() - mu).eval();
    const S var = centered.square().mean();
    const S inv = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
    cache->inv_std(r) = inv;
    cache->xhat.row(r) = (centered * inv).matrix();
    out.row(r) = (cache->xhat.row(r).array() * g.row(0).array() +
                  b.row(0).array())
                     .matrix();
  }
  return out;
}

// dg/db may be null when the affine parameters are frozen.
template <typename S>
Mat<S> layer_norm_backward(const Mat<S> &d_out, const LayerNormCache<S> &cache,
                           const Mat<S> &g, Mat<S> *dg, Mat<S> *db) {
  const Eigen::Index t = d_out.rows(), d = d_out.cols();
  Mat<S> dx(t, d);
  for (Eigen::Index r = 0; r < t; r++) {
    const auto dxhat = (d_out.row(r).array() * g.row(0).array()).eval();
    if (dg != nullptr)
      dg->row(0).array() += d_out.row(r).array() * cache.xhat.row(r).array();
    if (db != nullptr) db->row(0) += d_out.row(r);
    const S m1 = dxhat.mean();
    const S m2 = (dxhat * cache.xhat.row(r).array()).mean();
    dx.row(r) = (cache.inv_std(r) *
                 (dxhat - m1 - cache.xhat.row(r).array() * m2))
                    .matrix();
  }
  return dx;
}

template <typename S>
Mat<S> softmax_rows(const Mat<S> &scores) {
  Mat<S> out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); r++) {
    const S zmax = scores.row(r).maxCoeff();
    out.row(r) = (scores.row(r).array() - zmax).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

// d softmax per row: ds = p * (dp - <dp, p>).
template <typename S>
Mat<S> softmax_rows_backward(const Mat<S> &p, const Mat<S> &dp) {
  Mat<S> ds(p.rows(), p.cols());
  for (Eigen::Index r = 0; r < p.rows(); r++) {
    const S dot = p.row(r).dot(dp.row(r));
    ds.row(r) = (p.row(r).array() * (dp.row(r).array() - dot)).matrix();
  }
  return ds;
}

template <typename S>
void gelu_inplace(Mat<S> *m) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  for (Eigen::Index i = 0; i < m->rows(); i++)
    for (Eigen::Index j = 0; j < m->cols(); j++) {
      const double x = static_cast<double>((*m)(i, j));
      (*m)(i, j) = static_cast<S>(0.5 * x * (1.0 + std::erf(x * kInvSqrt2)));
    }
}

template <typename S>
Vec<S> pool_rows(const Vec<S> &wc, const Mat<S> &h, Vec<S> *attn_out) {
  if (h.rows() == 0 || h.cols() == 0)
    throw InputError("attention_pool: empty feature matrix");
  if (wc.size() != h.cols())
    throw InputError("attention_pool: weight/feature dimension mismatch");
  Vec<S> z = h * wc;
  const S zmax = z.maxCoeff();
  Vec<S> a = (z.array() - zmax).exp().matrix();
  a /= a.sum();
  if (attn_out != nullptr) *attn_out = a;
  return h.transpose() * a;
}

}  // namespace internal

template <typename S>
Vec<S> attention_pool(const SelfAttentionPooling<S> &pooling, const Mat<S> &h,
                      Vec<S> *attn) {
  return internal::pool_rows(pooling.wc, h, attn);
}

template <typename S>
EncoderStack<S>::EncoderStack(const ModelConfig &cfg) : config_(cfg) {
  config_.validate();
  const int d = config_.d_model;
  const int ffn = config_.ffn_dim;

  int in_ch = 1;
  for (const ConvLayerSpec &spec : config_.conv_layers) {
    ConvLayer layer;
    layer.w = Mat<S>::Zero(spec.channels, in_ch * spec.kernel);
    layer.b = Mat<S>::Zero(1, spec.channels);
    conv_.push_back(std::move(layer));
    in_ch = spec.channels;
  }
  const int conv_out = in_ch;
  proj_ln_g_ = Mat<S>::Zero(1, conv_out);
  proj_ln_b_ = Mat<S>::Zero(1, conv_out);
  proj_w_ = Mat<S>::Zero(d, conv_out);
  proj_b_ = Mat<S>::Zero(1, d);

  blocks_.resize(static_cast<size_t>(config_.n_layers));
  for (Block &blk : blocks_) {
    blk.ln1_g = Mat<S>::Zero(1, d);
    blk.ln1_b = Mat<S>::Zero(1, d);
    blk.wq = Mat<S>::Zero(d, d);
    blk.bq = Mat<S>::Zero(1, d);
    blk.wk = Mat<S>::Zero(d, d);
    blk.wv = Mat<S>::Zero(d, d);
    blk.bv = Mat<S>::Zero(1, d);
    blk.wo = Mat<S>::Zero(d, d);
    blk.bo = Mat<S>::Zero(1, d);
    blk.ln2_g = Mat<S>::Zero(1, d);
    blk.ln2_b = Mat<S>::Zero(1, d);
    blk.ffn_w1 = Mat<S>::Zero(ffn, d);
    blk.ffn_b1 = Mat<S>::Zero(1, ffn);
    blk.ffn_w2 = Mat<S>::Zero(d, ffn);
    blk.ffn_b2 = Mat<S>::Zero(1, d);
  }

  pool_wc_ = Mat<S>::Zero(1, d);
  cls_w1_ = Mat<S>::Zero(config_.classifier_hidden, d);
  cls_b1_ = Mat<S>::Zero(1, config_.classifier_hidden);
  cls_w2_ = Mat<S>::Zero(config_.n_classes, config_.classifier_hidden);
  cls_b2_ = Mat<S>::Zero(1, config_.n_classes);

  init_parameters();
}

// Draw order below is fixed; it defines what a seed means.
template <typename S>
void EncoderStack<S>::init_parameters() {
  Rng rng(config_.seed);
  const double d_scale = 1.0 / std::sqrt(static_cast<double>(config_.d_model));

  for (ConvLayer &layer : conv_) {
    internal::fill_normal(&layer.w, &rng,
                          1.0 / std::sqrt(static_cast<double>(layer.w.cols())));
    // biases stay zero
  }
  proj_ln_g_.setOnes();
  internal::fill_normal(&proj_w_, &rng,
                        1.0 / std::sqrt(static_cast<double>(proj_w_.cols())));

  for (Block &blk : blocks_) {
    blk.ln1_g.setOnes();
    internal::fill_normal(&blk.wq, &rng, d_scale);
    internal::fill_normal(&blk.wk, &rng, d_scale);
    internal::fill_normal(&blk.wv, &rng, d_scale);
    internal::fill_normal(&blk.wo, &rng, d_scale);
    blk.ln2_g.setOnes();
    internal::fill_normal(&blk.ffn_w1, &rng, d_scale);
    internal::fill_normal(
        &blk.ffn_w2, &rng,
        1.0 / std::sqrt(static_cast<double>(config_.ffn_dim)));
  }

  internal::fill_normal(&pool_wc_, &rng, d_scale);

  internal::fill_normal(&cls_w1_, &rng, std::sqrt(2.0) * d_scale);
  internal::fill_normal(
      &cls_w2_, &rng,
      std::sqrt(2.0 / static_cast<double>(config_.classifier_hidden)));
}

template <typename S>
void EncoderStack<S>::reset_classifier(int n_classes, uint64_t seed) {
  if (n_classes < 2)
    throw InputError("reset_classifier: need at least 2 classes");
  config_.n_classes = n_classes;
  Rng rng(seed);
  cls_w1_ = Mat<S>::Zero(config_.classifier_hidden, config_.d_model);
  cls_b1_ = Mat<S>::Zero(1, config_.classifier_hidden);
  cls_w2_ = Mat<S>::Zero(n_classes, config_.classifier_hidden);
  cls_b2_ = Mat<S>::Zero(1, n_classes);
  internal::fill_normal(
      &cls_w1_, &rng,
      std::sqrt(2.0 / static_cast<double>(config_.d_model)));
  internal::fill_normal(
      &cls_w2_, &rng,
      std::sqrt(2.0 / static_cast<double>(config_.classifier_hidden)));
}

template <typename S>
Mat<S> EncoderStack<S>::positional_encoding(int t) const {
  // Sinusoidal encoding at reduced amplitude; the normalized projection
  // output has unit scale, so a full-strength encoding would dominate it.
  constexpr double kPositionalScale = 0.5;
  const int d = config_.d_model;
  Mat<S> pe(t, d);
  for (int pos = 0; pos < t; pos++) {
    for (int i = 0; i < d / 2; i++) {
      const double rate =
          std::pow(10000.0, -2.0 * static_cast<double>(i) / d);
      pe(pos, 2 * i) = static_cast<S>(kPositionalScale * std::sin(pos * rate));
      pe(pos, 2 * i + 1) =
          static_cast<S>(kPositionalScale * std::cos(pos * rate));
    }
  }
  return pe;
}

template <typename S>
Mat<S> EncoderStack<S>::front_end(const std::vector<float> &samples) const {
  const int frames = config_.frames_for(static_cast<int>(samples.size()));
  if (frames < 1) {
    std::ostringstream os;
    os << "waveform of " << samples.size()
       << " samples is too short; minimum is " << config_.min_samples();
    throw InputError(os.str());
  }

  Mat<S> cur(static_cast<Eigen::Index>(samples.size()), 1);
  for (size_t i = 0; i < samples.size(); i++)
    cur(static_cast<Eigen::Index>(i), 0) = static_cast<S>(samples[i]);

  for (size_t l = 0; l < conv_.size(); l++) {
    const ConvLayerSpec &spec = config_.conv_layers[l];
    const ConvLayer &layer = conv_[l];
    const Eigen::Index in_len = cur.rows();
    const Eigen::Index in_ch = cur.cols();
    const Eigen::Index t_out = (in_len - spec.kernel) / spec.stride + 1;
    Mat<S> patches(t_out, in_ch * spec.kernel);
    for (Eigen::Index t = 0; t < t_out; t++)
      for (Eigen::Index c = 0; c < in_ch; c++)
        for (int j = 0; j < spec.kernel; j++)
          patches(t, c * spec.kernel + j) = cur(t * spec.stride + j, c);
    Mat<S> out = patches * layer.w.transpose();
    out.rowwise() += layer.b.row(0);
    internal::gelu_inplace(&out);
    cur = std::move(out);
  }

  internal::LayerNormCache<S> ln;
  Mat<S> normed = internal::layer_norm_forward(cur, proj_ln_g_, proj_ln_b_, &ln);
  Mat<S> x = normed * proj_w_.transpose();
  x.rowwise() += proj_b_.row(0);
  x += positional_encoding(static_cast<int>(x.rows()));
  return x;
}

template <typename S>
void EncoderStack<S>::block_forward(const Mat<S> &x_in, const Block &blk,
                                    internal::BlockTrace<S> *bt,
                                    Mat<S> *out) const {
  const int n_heads = config_.n_heads;
  const Eigen::Index d = config_.d_model;
  const Eigen::Index dh = d / n_heads;
  const S inv_sqrt_dh = S(1) / std::sqrt(static_cast<S>(dh));

  bt->n1 = internal::layer_norm_forward(x_in, blk.ln1_g, blk.ln1_b, &bt->ln1);
  bt->q = bt->n1 * blk.wq.transpose();
  bt->q.rowwise() += blk.bq.row(0);
  bt->k = bt->n1 * blk.wk.transpose();
  bt->v = bt->n1 * blk.wv.transpose();
  bt->v.rowwise() += blk.bv.row(0);

  bt->attn.clear();
  bt->concat.resize(x_in.rows(), d);
  for (int h = 0; h < n_heads; h++) {
    const auto qh = bt->q.middleCols(h * dh, dh);
    const auto kh = bt->k.middleCols(h * dh, dh);
    const auto vh = bt->v.middleCols(h * dh, dh);
    Mat<S> scores = qh * kh.transpose() * inv_sqrt_dh;
    Mat<S> p = internal::softmax_rows(scores);
    bt->concat.middleCols(h * dh, dh) = p * vh;
    bt->attn.push_back(std::move(p));
  }

  Mat<S> attn_out = bt->concat * blk.wo.transpose();
  attn_out.rowwise() += blk.bo.row(0);
  const Mat<S> a = x_in + attn_out;

  bt->n2 = internal::layer_norm_forward(a, blk.ln2_g, blk.ln2_b, &bt->ln2);
  bt->ffn_pre = bt->n2 * blk.ffn_w1.transpose();
  bt->ffn_pre.rowwise() += blk.ffn_b1.row(0);
  Mat<S> relu = bt->ffn_pre.cwiseMax(S(0));
  Mat<S> f2 = relu * blk.ffn_w2.transpose();
  f2.rowwise() += blk.ffn_b2.row(0);
  *out = a + f2;
}

template <typename S>
Mat<S> EncoderStack<S>::block_backward(const internal::BlockTrace<S> &bt,
                                       const Block &blk, const Mat<S> &d_out,
                                       int block_index,
                                       GradMap<S> *grads) const {
  const int n_heads = config_.n_heads;
  const Eigen::Index d = config_.d_model;
  const Eigen::Index dh = d / n_heads;
  const S inv_sqrt_dh = S(1) / std::sqrt(static_cast<S>(dh));
  const std::string prefix = "enc." + std::to_string(block_index) + ".";
  auto grad = [&](const std::string &name, Eigen::Index rows,
                  Eigen::Index cols) -> Mat<S> & {
    return grads->at_or_zero(prefix + name, rows, cols);
  };

  // FFN half: y = a + relu(n2 w1^T + b1) w2^T + b2.
  Mat<S> da = d_out;
  const Mat<S> relu = bt.ffn_pre.cwiseMax(S(0));
  grad("ffn.w2", d, config_.ffn_dim) += d_out.transpose() * relu;
  grad("ffn.b2", 1, d) += d_out.colwise().sum();
  Mat<S> dr = d_out * blk.ffn_w2;
  Mat<S> dpre =
      ((bt.ffn_pre.array() > S(0)).template cast<S>() * dr.array()).matrix();
  grad("ffn.w1", config_.ffn_dim, d) += dpre.transpose() * bt.n2;
  grad("ffn.b1", 1, config_.ffn_dim) += dpre.colwise().sum();
  Mat<S> dn2 = dpre * blk.ffn_w1;
  da += internal::layer_norm_backward(dn2, bt.ln2, blk.ln2_g,
                                      &grad("ln2.g", 1, d),
                                      &grad("ln2.b", 1, d));

  // Attention half: a = x_in + (concat wo^T + bo).
  Mat<S> dx_in = da;
  grad("attn.wo", d, d) += da.transpose() * bt.concat;
  grad("attn.bo", 1, d) += da.colwise().sum();
  Mat<S> dconcat = da * blk.wo;

  Mat<S> dq(bt.q.rows(), d), dk(bt.k.rows(), d), dv(bt.v.rows(), d);
  for (int h = 0; h < n_heads; h++) {
    const auto qh = bt.q.middleCols(h * dh, dh);
    const auto kh = bt.k.middleCols(h * dh, dh);
    const auto vh = bt.v.middleCols(h * dh, dh);
    const Mat<S> &p = bt.attn[static_cast<size_t>(h)];
    const auto doh = dconcat.middleCols(h * dh, dh);
    Mat<S> dp = doh * vh.transpose();
    dv.middleCols(h * dh, dh) = p.transpose() * doh;
    Mat<S> ds = internal::softmax_rows_backward(p, dp);
    dq.middleCols(h * dh, dh) = ds * kh * inv_sqrt_dh;
    dk.middleCols(h * dh, dh) = ds.transpose() * qh * inv_sqrt_dh;
  }

  grad("attn.wq", d, d) += dq.transpose() * bt.n1;
  grad("attn.bq", 1, d) += dq.colwise().sum();
  grad("attn.wk", d, d) += dk.transpose() * bt.n1;
  grad("attn.wv", d, d) += dv.transpose() * bt.n1;
  grad("attn.bv", 1, d) += dv.colwise().sum();

  Mat<S> dn1 = dq * blk.wq + dk * blk.wk + dv * blk.wv;
  dx_in += internal::layer_norm_backward(dn1, bt.ln1, blk.ln1_g,
                                         &grad("ln1.g", 1, d),
                                         &grad("ln1.b", 1, d));
  return dx_in;
}

template <typename S>
StackTrace<S> EncoderStack<S>::encode(const Mat<S> &x0) const {
  if (x0.rows() < 1 || x0.cols() != config_.d_model)
    throw InputError("encode: input must be T x d_model with T >= 1");
  StackTrace<S> trace;
  trace.layers.reserve(static_cast<size_t>(config_.n_layers) + 1);
  trace.layers.push_back(x0);
  trace.blocks.resize(blocks_.size());
  Mat<S> x = x0;
  for (size_t b = 0; b < blocks_.size(); b++) {
    Mat<S> out;
    block_forward(x, blocks_[b], &trace.blocks[b], &out);
    trace.layers.push_back(out);
    x = std::move(out);
  }
  trace.valid = true;
  return trace;
}

template <typename S>
LayerActivations<S> EncoderStack<S>::forward(
    const std::vector<float> &samples) const {
  StackTrace<S> trace = encode(front_end(samples));
  LayerActivations<S> acts;
  acts.layers = std::move(trace.layers);
  return acts;
}

template <typename S>
const Vec<S> &EncoderStack<S>::pool_feature(StackTrace<S> *trace) const {
  if (trace == nullptr || !trace->valid)
    throw std::runtime_error("pool_feature: no forward trace");
  const Vec<S> wc = pool_wc_.row(0).transpose();
  trace->pooled = internal::pool_rows(wc, trace->layers.back(),
                                      &trace->attn_weights);
  trace->pooled_valid = true;
  return trace->pooled;
}

template <typename S>
const Vec<S> &EncoderStack<S>::classify_traced(StackTrace<S> *trace) const {
  if (trace == nullptr || !trace->pooled_valid)
    throw std::runtime_error("classify_traced: no pooled feature in trace");
  trace->cls_hidden_pre = cls_w1_ * trace->pooled + cls_b1_.row(0).transpose();
  trace->scores = cls_w2_ * trace->cls_hidden_pre.cwiseMax(S(0)) +
                  cls_b2_.row(0).transpose();
  trace->scores_valid = true;
  return trace->scores;
}

template <typename S>
Vec<S> EncoderStack<S>::classify(const Vec<S> &pooled) const {
  if (pooled.size() != config_.d_model) {
    std::ostringstream os;
    os << "classify: feature dimension " << pooled.size()
       << " does not match d_model " << config_.d_model;
    throw InputError(os.str());
  }
  const Vec<S> hidden =
      (cls_w1_ * pooled + cls_b1_.row(0).transpose()).cwiseMax(S(0));
  return cls_w2_ * hidden + cls_b2_.row(0).transpose();
}

template <typename S>
void EncoderStack<S>::backward_from_pooled(const StackTrace<S> &trace,
                                           const Vec<S> &d_pooled,
                                           GradMap<S> *grads) const {
  if (!trace.valid || !trace.pooled_valid)
    throw std::runtime_error("backward before forward: missing pooling trace");
  if (d_pooled.size() != config_.d_model)
    throw InputError("backward_from_pooled: gradient dimension mismatch");

  const Mat<S> &h = trace.layers.back();
  const Vec<S> &a = trace.attn_weights;

  const Vec<S> hdc = h * d_pooled;  // T
  const S adot = a.dot(hdc);
  const Vec<S> dz = (a.array() * (hdc.array() - adot)).matrix();

  if (pooling_trainable_) {
    grads->at_or_zero("pool.wc", 1, config_.d_model).row(0) +=
        (h.transpose() * dz).transpose();
  }
  if (encoder_trainable_) {
    Mat<S> dh = a * d_pooled.transpose();
    dh += dz * pool_wc_.row(0);
    for (int b = static_cast<int>(blocks_.size()) - 1; b >= 0; b--) {
      dh = block_backward(trace.blocks[static_cast<size_t>(b)],
                          blocks_[static_cast<size_t>(b)], dh, b, grads);
    }
  }
}

template <typename S>
void EncoderStack<S>::backward_from_scores(const StackTrace<S> &trace,
                                           const Vec<S> &d_scores,
                                           GradMap<S> *grads) const {
  if (!trace.scores_valid)
    throw std::runtime_error("backward before forward: missing score trace");
  if (d_scores.size() != config_.n_classes)
    throw InputError("backward_from_scores: gradient dimension mismatch");

  const Vec<S> relu = trace.cls_hidden_pre.cwiseMax(S(0));
  if (classifier_trainable_) {
    grads->at_or_zero("cls.w2", config_.n_classes, config_.classifier_hidden) +=
        d_scores * relu.transpose();
    grads->at_or_zero("cls.b2", 1, config_.n_classes).row(0) +=
        d_scores.transpose();
  }
  const Vec<S> dr = cls_w2_.transpose() * d_scores;
  const Vec<S> du = ((trace.cls_hidden_pre.array() > S(0)).template cast<S>() *
                     dr.array())
                        .matrix();
  if (classifier_trainable_) {
    grads->at_or_zero("cls.w1", config_.classifier_hidden, config_.d_model) +=
        du * trace.pooled.transpose();
    grads->at_or_zero("cls.b1", 1, config_.classifier_hidden).row(0) +=
        du.transpose();
  }
  if (pooling_trainable_ || encoder_trainable_) {
    const Vec<S> d_pooled = cls_w1_.transpose() * du;
    backward_from_pooled(trace, d_pooled, grads);
  }
}

template <typename S>
std::vector<ParamRef<S>> EncoderStack<S>::params() {
  std::vector<ParamRef<S>> refs;
  for (size_t i = 0; i < conv_.size(); i++) {
    const std::string p = "conv." + std::to_string(i) + ".";
    refs.push_back({p + "w", ParamGroup::kConv, false, &conv_[i].w});
    refs.push_back({p + "b", ParamGroup::kConv, false, &conv_[i].b});
  }
  refs.push_back({"proj.ln.g", ParamGroup::kProjection, false, &proj_ln_g_});
  refs.push_back({"proj.ln.b", ParamGroup::kProjection, false, &proj_ln_b_});
  refs.push_back({"proj.w", ParamGroup::kProjection, false, &proj_w_});
  refs.push_back({"proj.b", ParamGroup::kProjection, false, &proj_b_});
  for (size_t i = 0; i < blocks_.size(); i++) {
    Block &blk = blocks_[i];
    const std::string p = "enc." + std::to_string(i) + ".";
    const bool t = encoder_trainable_;
    refs.push_back({p + "ln1.g", ParamGroup::kEncoder, t, &blk.ln1_g});
    refs.push_back({p + "ln1.b", ParamGroup::kEncoder, t, &blk.ln1_b});
    refs.push_back({p + "attn.wq", ParamGroup::kEncoder, t, &blk.wq});
    refs.push_back({p + "attn.bq", ParamGroup::kEncoder, t, &blk.bq});
    refs.push_back({p + "attn.wk", ParamGroup::kEncoder, t, &blk.wk});
    refs.push_back({p + "attn.wv", ParamGroup::kEncoder, t, &blk.wv});
    refs.push_back({p + "attn.bv", ParamGroup::kEncoder, t, &blk.bv});
    refs.push_back({p + "attn.wo", ParamGroup::kEncoder, t, &blk.wo});
    refs.push_back({p + "attn.bo", ParamGroup::kEncoder, t, &blk.bo});
    refs.push_back({p + "ln2.g", ParamGroup::kEncoder, t, &blk.ln2_g});
    refs.push_back({p + "ln2.b", ParamGroup::kEncoder, t, &blk.ln2_b});
    refs.push_back({p + "ffn.w1", ParamGroup::kEncoder, t, &blk.ffn_w1});
    refs.push_back({p + "ffn.b1", ParamGroup::kEncoder, t, &blk.ffn_b1});
    refs.push_back({p + "ffn.w2", ParamGroup::kEncoder, t, &blk.ffn_w2});
    refs.push_back({p + "ffn.b2", ParamGroup::kEncoder, t, &blk.ffn_b2});
  }
  refs.push_back({"pool.wc", ParamGroup::kPooling, pooling_trainable_,
                  &pool_wc_});
  refs.push_back(
      {"cls.w1", ParamGroup::kClassifier, classifier_trainable_, &cls_w1_});
  refs.push_back(
      {"cls.b1", ParamGroup::kClassifier, classifier_trainable_, &cls_b1_});
  refs.push_back(
      {"cls.w2", ParamGroup::kClassifier, classifier_trainable_, &cls_w2_});
  refs.push_back(
      {"cls.b2", ParamGroup::kClassifier, classifier_trainable_, &cls_b2_});
  return refs;
}

template <typename S>
std::vector<ConstParamRef<S>> EncoderStack<S>::params() const {
  auto *self = const_cast<EncoderStack<S> *>(this);
  std::vector<ConstParamRef<S>> refs;
  for (const ParamRef<S> &r : self->params())
    refs.push_back({r.name, r.group, r.trainable, r.value});
  return refs;
}

template <typename S>
bool EncoderStack<S>::group_trainable(ParamGroup group) const {
  switch (group) {
    case ParamGroup::kConv:
    case ParamGroup::kProjection:
      return false;
    case ParamGroup::kEncoder:
      return encoder_trainable_;
    case ParamGroup::kPooling:
      return pooling_trainable_;
    case ParamGroup::kClassifier:
      return classifier_trainable_;
  }
  return false;
}

template <typename S>
void EncoderStack<S>::set_group_trainable(ParamGroup group, bool trainable) {
  switch (group) {
    case ParamGroup::kConv:
    case ParamGroup::kProjection:
      if (trainable)
        throw std::logic_error("group '" + to_string(group) +
                               "' is permanently frozen");
      return;
    case ParamGroup::kEncoder:
      encoder_trainable_ = trainable;
      return;
    case ParamGroup::kPooling:
      pooling_trainable_ = trainable;
      return;
    case ParamGroup::kClassifier:
      classifier_trainable_ = trainable;
      return;
  }
}

template <typename S>
SelfAttentionPooling<S> EncoderStack<S>::pooling() const {
  return {pool_wc_.row(0).transpose()};
}

}  // namespace xscl

#endif  // XSCL_ENCODER_INL_H_
