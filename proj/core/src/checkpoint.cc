// core/src/checkpoint.cc

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

#include "xscl/checkpoint.h"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "xscl/errors.h"

namespace xscl {

namespace {

constexpr char kMagic[4] = {'X', 'S', 'C', 'L'};
constexpr uint8_t kFormatVersion = 1;

void put_u32(std::vector<uint8_t> *out, uint32_t v) {
  out->push_back(static_cast<uint8_t>(v & 0xff));
  out->push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out->push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out->push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<uint8_t> *out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t> &bytes) : bytes_(bytes) {}

  uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(bytes_[pos_]) |
                 (static_cast<uint32_t>(bytes_[pos_ + 1]) << 8) |
                 (static_cast<uint32_t>(bytes_[pos_ + 2]) << 16) |
                 (static_cast<uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  float f32() {
    const uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str(size_t len) {
    need(len);
    std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size())
      throw InputError("checkpoint: truncated data");
  }
  const std::vector<uint8_t> &bytes_;
  size_t pos_ = 0;
};

NamedTensor scalar_entry(const std::string &name, float value) {
  return {name, {1}, {value}};
}

NamedTensor u64_entry(const std::string &name, uint64_t value) {
  NamedTensor t;
  t.name = name;
  t.shape = {8};
  for (int i = 0; i < 8; i++)
    t.data.push_back(static_cast<float>((value >> (8 * i)) & 0xff));
  return t;
}

uint64_t decode_u64(const NamedTensor &t) {
  if (t.data.size() != 8)
    throw InputError("checkpoint: bad u64 entry '" + t.name + "'");
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) {
    const float f = t.data[static_cast<size_t>(i)];
    if (f < 0.0f || f > 255.0f || f != static_cast<float>(static_cast<int>(f)))
      throw InputError("checkpoint: bad u64 byte in '" + t.name + "'");
    v |= static_cast<uint64_t>(static_cast<int>(f)) << (8 * i);
  }
  return v;
}

int decode_int(const NamedTensor &t) {
  if (t.data.size() != 1)
    throw InputError("checkpoint: bad scalar entry '" + t.name + "'");
  return static_cast<int>(t.data[0]);
}

}  // namespace

const std::string &to_string(StageTag tag) {
  static const std::vector<std::string> names = {"stage1", "stage2", "ft"};
  return names.at(static_cast<size_t>(static_cast<int>(tag) - 1));
}

StageTag parse_stage_tag(const std::string &tag) {
  if (tag == "stage1") return StageTag::kStage1;
  if (tag == "stage2") return StageTag::kStage2;
  if (tag == "ft") return StageTag::kFt;
  throw InputError("unknown stage tag '" + tag + "'");
}

Checkpoint make_checkpoint(const EncoderStack<float> &stack, StageTag stage,
                           uint64_t rng_seed) {
  Checkpoint ckpt;
  ckpt.version = kFormatVersion;
  ckpt.config = stack.config();
  ckpt.stage = stage;
  ckpt.rng_seed = rng_seed;
  for (const ConstParamRef<float> &ref : stack.params()) {
    NamedTensor t;
    t.name = ref.name;
    t.shape = {static_cast<uint32_t>(ref.value->rows()),
               static_cast<uint32_t>(ref.value->cols())};
    t.data.assign(ref.value->data(),
                  ref.value->data() + ref.value->size());
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

EncoderStack<float> restore_stack(const Checkpoint &ckpt) {
  EncoderStack<float> stack(ckpt.config);
  std::map<std::string, const NamedTensor *> by_name;
  for (const NamedTensor &t : ckpt.tensors) by_name[t.name] = &t;

  for (ParamRef<float> &ref : stack.params()) {
    auto it = by_name.find(ref.name);
    if (it == by_name.end())
      throw InputError("checkpoint: missing parameter '" + ref.name + "'");
    const NamedTensor &t = *it->second;
    if (t.shape.size() != 2 ||
        static_cast<Eigen::Index>(t.shape[0]) != ref.value->rows() ||
        static_cast<Eigen::Index>(t.shape[1]) != ref.value->cols())
      throw InputError("checkpoint: shape mismatch for '" + ref.name + "'");
    std::memcpy(ref.value->data(), t.data.data(), t.data.size() * 4);
  }
  return stack;
}

std::vector<uint8_t> serialize_checkpoint(const Checkpoint &ckpt) {
  std::vector<NamedTensor> entries;
  entries.push_back(scalar_entry("meta/stage",
                                 static_cast<float>(static_cast<int>(ckpt.stage))));
  entries.push_back(u64_entry("meta/rng_seed", ckpt.rng_seed));
  entries.push_back(
      scalar_entry("config/d_model", static_cast<float>(ckpt.config.d_model)));
  entries.push_back(scalar_entry("config/n_layers",
                                 static_cast<float>(ckpt.config.n_layers)));
  entries.push_back(
      scalar_entry("config/n_heads", static_cast<float>(ckpt.config.n_heads)));
  entries.push_back(
      scalar_entry("config/ffn_dim", static_cast<float>(ckpt.config.ffn_dim)));
  entries.push_back(
      scalar_entry("config/classifier_hidden",
                   static_cast<float>(ckpt.config.classifier_hidden)));
  entries.push_back(scalar_entry("config/n_classes",
                                 static_cast<float>(ckpt.config.n_classes)));
  entries.push_back(u64_entry("config/seed", ckpt.config.seed));
  {
    NamedTensor conv;
    conv.name = "config/conv_layers";
    conv.shape = {static_cast<uint32_t>(ckpt.config.conv_layers.size()), 3};
    for (const ConvLayerSpec &spec : ckpt.config.conv_layers) {
      conv.data.push_back(static_cast<float>(spec.kernel));
      conv.data.push_back(static_cast<float>(spec.stride));
      conv.data.push_back(static_cast<float>(spec.channels));
    }
    entries.push_back(std::move(conv));
  }
  for (const NamedTensor &t : ckpt.tensors) entries.push_back(t);

  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(ckpt.version);
  put_u32(&out, static_cast<uint32_t>(entries.size()));
  for (const NamedTensor &t : entries) {
    put_u32(&out, static_cast<uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_u32(&out, static_cast<uint32_t>(t.shape.size()));
    size_t count = 1;
    for (uint32_t dim : t.shape) {
      put_u32(&out, dim);
      count *= dim;
    }
    if (count != t.data.size())
      throw std::logic_error("checkpoint: tensor '" + t.name +
                             "' shape/data mismatch");
    for (float v : t.data) put_f32(&out, v);
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::vector<uint8_t> &bytes) {
  Reader reader(bytes);
  const std::string magic = reader.str(4);
  if (magic != std::string(kMagic, 4))
    throw InputError("checkpoint: bad magic bytes");
  Checkpoint ckpt;
  ckpt.version = reader.u8();
  if (ckpt.version != kFormatVersion) {
    std::ostringstream os;
    os << "checkpoint: unsupported format version "
       << static_cast<int>(ckpt.version);
    throw InputError(os.str());
  }

  const uint32_t n_entries = reader.u32();
  std::map<std::string, NamedTensor> meta;
  for (uint32_t i = 0; i < n_entries; i++) {
    NamedTensor t;
    const uint32_t name_len = reader.u32();
    t.name = reader.str(name_len);
    const uint32_t rank = reader.u32();
    size_t count = 1;
    for (uint32_t r = 0; r < rank; r++) {
      t.shape.push_back(reader.u32());
      count *= t.shape.back();
    }
    if (count > bytes.size())  // cheap sanity bound before allocating
      throw InputError("checkpoint: tensor '" + t.name + "' too large");
    t.data.resize(count);
    for (size_t j = 0; j < count; j++) t.data[j] = reader.f32();

    if (t.name.rfind("meta/", 0) == 0 || t.name.rfind("config/", 0) == 0)
      meta.emplace(t.name, std::move(t));
    else
      ckpt.tensors.push_back(std::move(t));
  }
  if (!reader.done()) throw InputError("checkpoint: trailing bytes");

  auto require = [&meta](const std::string &name) -> const NamedTensor & {
    auto it = meta.find(name);
    if (it == meta.end())
      throw InputError("checkpoint: missing entry '" + name + "'");
    return it->second;
  };

  const int stage = decode_int(require("meta/stage"));
  if (stage < 1 || stage > 3)
    throw InputError("checkpoint: bad stage tag");
  ckpt.stage = static_cast<StageTag>(stage);
  ckpt.rng_seed = decode_u64(require("meta/rng_seed"));
  ckpt.config.d_model = decode_int(require("config/d_model"));
  ckpt.config.n_layers = decode_int(require("config/n_layers"));
  ckpt.config.n_heads = decode_int(require("config/n_heads"));
  ckpt.config.ffn_dim = decode_int(require("config/ffn_dim"));
  ckpt.config.classifier_hidden =
      decode_int(require("config/classifier_hidden"));
  ckpt.config.n_classes = decode_int(require("config/n_classes"));
  ckpt.config.seed = decode_u64(require("config/seed"));
  {
    const NamedTensor &conv = require("config/conv_layers");
    if (conv.shape.size() != 2 || conv.shape[1] != 3)
      throw InputError("checkpoint: bad conv_layers entry");
    ckpt.config.conv_layers.clear();
    for (uint32_t i = 0; i < conv.shape[0]; i++) {
      ConvLayerSpec spec;
      spec.kernel = static_cast<int>(conv.data[3 * i]);
      spec.stride = static_cast<int>(conv.data[3 * i + 1]);
      spec.channels = static_cast<int>(conv.data[3 * i + 2]);
      ckpt.config.conv_layers.push_back(spec);
    }
  }
  ckpt.config.validate();
  return ckpt;
}

void save_checkpoint(const Checkpoint &ckpt,
                     const std::filesystem::path &path) {
  const std::vector<uint8_t> bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("short write on checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  in.read(reinterpret_cast<char *>(bytes.data()), size);
  if (!in) throw InputError("short read on checkpoint " + path.string());
  return deserialize_checkpoint(bytes);
}

}  // namespace xscl
