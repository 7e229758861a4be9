// core/src/encoder.cc

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

#include "xscl/encoder-inl.h"
#include "xscl/errors.h"

namespace xscl {

void ModelConfig::validate() const {
  if (conv_layers.empty())
    throw InputError("model config: conv_layers must not be empty");
  for (const ConvLayerSpec &spec : conv_layers) {
    if (spec.kernel < 1 || spec.stride < 1 || spec.channels < 1)
      throw InputError("model config: conv layer fields must be positive");
  }
  if (d_model < 2 || d_model % 2 != 0)
    throw InputError("model config: d_model must be a positive even number");
  if (n_heads < 1 || d_model % n_heads != 0)
    throw InputError("model config: d_model must be divisible by n_heads");
  if (n_layers < 1) throw InputError("model config: n_layers must be >= 1");
  if (ffn_dim < 1) throw InputError("model config: ffn_dim must be >= 1");
  if (classifier_hidden < 1)
    throw InputError("model config: classifier_hidden must be positive");
  if (n_classes < 2) throw InputError("model config: n_classes must be >= 2");
}

int ModelConfig::total_stride() const {
  int s = 1;
  for (const ConvLayerSpec &spec : conv_layers) s *= spec.stride;
  return s;
}

int ModelConfig::min_samples() const {
  int rf = 1;
  int stride_prod = 1;
  for (const ConvLayerSpec &spec : conv_layers) {
    rf += (spec.kernel - 1) * stride_prod;
    stride_prod *= spec.stride;
  }
  return rf;
}

int ModelConfig::frames_for(int n_samples) const {
  int len = n_samples;
  for (const ConvLayerSpec &spec : conv_layers) {
    if (len < spec.kernel) return 0;
    len = (len - spec.kernel) / spec.stride + 1;
  }
  return len;
}

bool ModelConfig::operator==(const ModelConfig &other) const {
  if (conv_layers.size() != other.conv_layers.size()) return false;
  for (size_t i = 0; i < conv_layers.size(); i++) {
    if (conv_layers[i].kernel != other.conv_layers[i].kernel ||
        conv_layers[i].stride != other.conv_layers[i].stride ||
        conv_layers[i].channels != other.conv_layers[i].channels)
      return false;
  }
  return d_model == other.d_model && n_layers == other.n_layers &&
         n_heads == other.n_heads && ffn_dim == other.ffn_dim &&
         classifier_hidden == other.classifier_hidden &&
         n_classes == other.n_classes && seed == other.seed;
}

const std::string &to_string(ParamGroup group) {
  static const std::vector<std::string> names = {
      "conv", "projection", "encoder", "pooling", "classifier"};
  return names.at(static_cast<size_t>(group));
}

template class EncoderStack<float>;
template class EncoderStack<double>;
template Vec<float> attention_pool(const SelfAttentionPooling<float> &,
                                   const Mat<float> &, Vec<float> *);
template Vec<double> attention_pool(const SelfAttentionPooling<double> &,
                                    const Mat<double> &, Vec<double> *);

}  // namespace xscl
