// core/include/xscl/encoder.h

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

// The model stack: a frozen convolutional waveform front-end, a frozen
// feature projection, a trainable pre-norm transformer encoder, learned
// self-attention pooling, and a two-layer classifier head.  Forward passes
// record the intermediates needed for an exact hand-written backward pass;
// gradients are produced only for parameter groups marked trainable.
// Templated on the scalar type: training runs in float, gradient
// verification in double.

#ifndef XSCL_ENCODER_H_
#define XSCL_ENCODER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xscl/losses.h"  // Mat/Vec aliases
#include "xscl/rng.h"

namespace xscl {

struct ConvLayerSpec {
  int kernel = 0;
  int stride = 0;
  int channels = 0;
};

struct ModelConfig {
  // Desk-scale defaults: total stride 320, so 8000 samples -> 25 frames.
  // Paper-scale reference would be d_model=768 with a 12-layer encoder.
  std::vector<ConvLayerSpec> conv_layers = {{5, 5, 16}, {8, 8, 24}, {8, 8, 32}};
  int d_model = 32;
  int n_layers = 4;
  int n_heads = 2;
  int ffn_dim = 64;
  int classifier_hidden = 256;
  int n_classes = 4;
  uint64_t seed = 0;

  void validate() const;
  int total_stride() const;
  // Smallest waveform length that yields one output frame.
  int min_samples() const;
  // Output frame count for a waveform, 0 when too short.
  int frames_for(int n_samples) const;

  bool operator==(const ModelConfig &other) const;
};

enum class ParamGroup {
  kConv = 0,
  kProjection = 1,
  kEncoder = 2,
  kPooling = 3,
  kClassifier = 4,
};

const std::string &to_string(ParamGroup group);

template <typename S>
struct ParamRef {
  std::string name;
  ParamGroup group;
  bool trainable;
  Mat<S> *value;
};

template <typename S>
struct ConstParamRef {
  std::string name;
  ParamGroup group;
  bool trainable;
  const Mat<S> *value;
};

// Gradient tensors keyed by parameter name; only trainable groups appear.
template <typename S>
struct GradMap {
  std::map<std::string, Mat<S>> tensors;

  Mat<S> &at_or_zero(const std::string &name, Eigen::Index rows,
                     Eigen::Index cols) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      it = tensors.emplace(name, Mat<S>::Zero(rows, cols)).first;
    return it->second;
  }
  void clear() { tensors.clear(); }
};

// All layer outputs of one forward pass: entry 0 is the projection output,
// entry l is the output of transformer block l.
template <typename S>
struct LayerActivations {
  std::vector<Mat<S>> layers;
};

template <typename S>
struct SelfAttentionPooling {
  Vec<S> wc;
};

// C = softmax(wc . h_t) - weighted sum of the rows of h.  The attention
// weights are returned through attn when requested.
template <typename S>
Vec<S> attention_pool(const SelfAttentionPooling<S> &pooling, const Mat<S> &h,
                      Vec<S> *attn = nullptr);

namespace internal {

template <typename S>
struct LayerNormCache {
  Mat<S> xhat;     // normalized rows
  Vec<S> inv_std;  // per row
};

template <typename S>
struct BlockTrace {
  LayerNormCache<S> ln1;
  Mat<S> n1;                  // LN1 output
  Mat<S> q, k, v;             // T x d
  std::vector<Mat<S>> attn;   // per head, T x T softmax rows
  Mat<S> concat;              // heads concatenated, T x d
  LayerNormCache<S> ln2;
  Mat<S> n2;                  // LN2 output
  Mat<S> ffn_pre;             // T x ffn, pre-ReLU
};

}  // namespace internal

// Recorded intermediates of one utterance's forward pass.
template <typename S>
struct StackTrace {
  bool valid = false;
  std::vector<Mat<S>> layers;                     // H_0 .. H_L
  std::vector<internal::BlockTrace<S>> blocks;    // per transformer block

  bool pooled_valid = false;
  Vec<S> attn_weights;  // T
  Vec<S> pooled;        // d

  bool scores_valid = false;
  Vec<S> cls_hidden_pre;  // pre-ReLU hidden
  Vec<S> scores;          // n_classes
};

template <typename S>
class EncoderStack {
 public:
  explicit EncoderStack(const ModelConfig &cfg);

  const ModelConfig &config() const { return config_; }

  // Frozen path: conv stack, layer norm, projection, positional encoding.
  // Throws InputError when the waveform is shorter than min_samples().
  Mat<S> front_end(const std::vector<float> &samples) const;

  // Transformer blocks over a front-end output, recording intermediates.
  StackTrace<S> encode(const Mat<S> &x0) const;

  // Full forward pass returning every layer's activations.
  LayerActivations<S> forward(const std::vector<float> &samples) const;

  // Pooling / classifier over an encode() trace (appends to the trace).
  const Vec<S> &pool_feature(StackTrace<S> *trace) const;
  const Vec<S> &classify_traced(StackTrace<S> *trace) const;

  // Standalone classifier application; validates the feature dimension.
  Vec<S> classify(const Vec<S> &pooled) const;

  // Backward from a gradient on the pooled feature.  Fills gradients for
  // the pooling group and, when the encoder group is trainable, for every
  // transformer parameter.  Throws when the trace lacks a forward pass.
  void backward_from_pooled(const StackTrace<S> &trace, const Vec<S> &d_pooled,
                            GradMap<S> *grads) const;

  // Backward from a gradient on the class scores (classifier, then pooling,
  // then the encoder when trainable).
  void backward_from_scores(const StackTrace<S> &trace, const Vec<S> &d_scores,
                            GradMap<S> *grads) const;

  std::vector<ParamRef<S>> params();
  std::vector<ConstParamRef<S>> params() const;

  bool group_trainable(ParamGroup group) const;
  // Conv front-end and projection are permanently frozen; enabling them
  // throws std::logic_error.
  void set_group_trainable(ParamGroup group, bool trainable);

  SelfAttentionPooling<S> pooling() const;

  // Replaces the classifier head for a new label-space size, freshly seeded.
  void reset_classifier(int n_classes, uint64_t seed);

 private:
  struct ConvLayer {
    Mat<S> w;  // out_ch x (in_ch * kernel)
    Mat<S> b;  // 1 x out_ch
  };
  struct Block {
    Mat<S> ln1_g, ln1_b;
    // No key bias: a shared key offset shifts every attention
    // logit in a row equally, which softmax cancels.
    Mat<S> wq, bq, wk, wv, bv, wo, bo;
    Mat<S> ln2_g, ln2_b;
    Mat<S> ffn_w1, ffn_b1;  // ffn x d, 1 x ffn
    Mat<S> ffn_w2, ffn_b2;  // d x ffn, 1 x d
  };

  void init_parameters();
  Mat<S> positional_encoding(int t) const;
  void block_forward(const Mat<S> &x_in, const Block &blk,
                     internal::BlockTrace<S> *bt, Mat<S> *out) const;
  // Returns the gradient with respect to the block input.
  Mat<S> block_backward(const internal::BlockTrace<S> &bt, const Block &blk,
                        const Mat<S> &d_out, int block_index,
                        GradMap<S> *grads) const;

  ModelConfig config_;
  std::vector<ConvLayer> conv_;
  Mat<S> proj_ln_g_, proj_ln_b_;  // 1 x conv_out
  Mat<S> proj_w_, proj_b_;        // d x conv_out, 1 x d
  std::vector<Block> blocks_;
  Mat<S> pool_wc_;  // 1 x d
  Mat<S> cls_w1_, cls_b1_, cls_w2_, cls_b2_;

  bool encoder_trainable_ = true;
  bool pooling_trainable_ = true;
  bool classifier_trainable_ = true;
};

extern template class EncoderStack<float>;
extern template class EncoderStack<double>;
extern template Vec<float> attention_pool(const SelfAttentionPooling<float> &,
                                          const Mat<float> &, Vec<float> *);
extern template Vec<double> attention_pool(
    const SelfAttentionPooling<double> &, const Mat<double> &, Vec<double> *);

}  // namespace xscl

#endif  // XSCL_ENCODER_H_
