// core/include/xscl/checkpoint.h

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

// Checkpoint container and its binary format: magic bytes "XSCL", one format
// version byte, then a length-prefixed list of named tensors stored as
// little-endian float32.  Model configuration, stage tag and rng seed are
// encoded as reserved "meta/..." and "config/..." entries in the same tensor
// list (integers and byte values are exactly representable in float32).

#ifndef XSCL_CHECKPOINT_H_
#define XSCL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xscl/encoder.h"

namespace xscl {

enum class StageTag : int { kStage1 = 1, kStage2 = 2, kFt = 3 };

const std::string &to_string(StageTag tag);
StageTag parse_stage_tag(const std::string &tag);

struct NamedTensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;
};

struct Checkpoint {
  uint8_t version = 1;
  ModelConfig config;
  StageTag stage = StageTag::kStage1;
  uint64_t rng_seed = 0;
  std::vector<NamedTensor> tensors;  // parameters, registry order
};

Checkpoint make_checkpoint(const EncoderStack<float> &stack, StageTag stage,
                           uint64_t rng_seed);

// Rebuilds a stack from a checkpoint; every parameter tensor must be present
// with its exact shape.
EncoderStack<float> restore_stack(const Checkpoint &ckpt);

std::vector<uint8_t> serialize_checkpoint(const Checkpoint &ckpt);
Checkpoint deserialize_checkpoint(const std::vector<uint8_t> &bytes);

void save_checkpoint(const Checkpoint &ckpt,
                     const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace xscl

#endif  // XSCL_CHECKPOINT_H_
