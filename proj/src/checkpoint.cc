// Copyright 2026 The SANAC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sanac/checkpoint.h"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sanac {

namespace {

constexpr char kMagic[4] = {'S', 'N', 'C', 'K'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void PutU64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t GetU64(std::span<const uint8_t> in, size_t& pos) {
  if (in.size() - pos < 8) throw std::runtime_error("checkpoint truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(in[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

nlohmann::json ConfigToJson(const ModelConfig& c) {
  return {{"frame_size", c.frame_size},
          {"code_length", c.code_length},
          {"vq_dim", c.vq_dim},
          {"num_sources", c.num_sources},
          {"trunk_channels", c.trunk_channels},
          {"bottleneck_channels", c.bottleneck_channels},
          {"transform_channels", c.transform_channels},
          {"conv_kernel", c.conv_kernel},
          {"num_centroids", c.num_centroids},
          {"encoder_blocks", c.encoder_blocks},
          {"post_blocks", c.post_blocks},
          {"transform_blocks", c.transform_blocks},
          {"decoder_blocks", c.decoder_blocks}};
}

ModelConfig ConfigFromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.frame_size = j.at("frame_size");
  c.code_length = j.at("code_length");
  c.vq_dim = j.at("vq_dim");
  c.num_sources = j.at("num_sources");
  c.trunk_channels = j.at("trunk_channels");
  c.bottleneck_channels = j.at("bottleneck_channels");
  c.transform_channels = j.at("transform_channels");
  c.conv_kernel = j.at("conv_kernel");
  c.num_centroids = j.at("num_centroids");
  c.encoder_blocks = j.at("encoder_blocks");
  c.post_blocks = j.at("post_blocks");
  c.transform_blocks = j.at("transform_blocks");
  c.decoder_blocks = j.at("decoder_blocks");
  return c;
}

Checkpoint Parse(std::span<const uint8_t> body) {
  if (body.size() < 8 || std::memcmp(body.data(), kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file");
  }
  uint32_t version = 0;
  std::memcpy(&version, body.data() + 4, 4);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  size_t pos = 8;
  const uint64_t meta_size = GetU64(body, pos);
  if (body.size() - pos < meta_size) {
    throw std::runtime_error("checkpoint truncated");
  }
  const auto meta = nlohmann::json::parse(body.begin() + pos,
                                          body.begin() + pos + meta_size);
  pos += meta_size;

  Checkpoint c;
  c.kind = ParseCodecKind(meta.at("kind"));
  c.config = ConfigFromJson(meta.at("model"));
  c.frame_spec.frame_size = c.config.frame_size;
  c.frame_spec.crossfade_len = meta.at("crossfade_len");
  c.sample_rate = meta.at("sample_rate");
  c.stage = meta.at("stage");
  c.alpha = meta.at("alpha");
  c.target_entropy = meta.at("target_entropy");
  c.target_ratio = meta.at("target_ratio");
  c.usage_counts = meta.at("usage_counts").get<std::vector<std::vector<double>>>();

  const uint64_t count = GetU64(body, pos);
  if ((body.size() - pos) / sizeof(double) < count) {
    throw std::runtime_error("checkpoint truncated");
  }
  c.parameters.resize(count);
  std::memcpy(c.parameters.data(), body.data() + pos, count * sizeof(double));
  pos += count * sizeof(double);
  if (pos != body.size()) throw std::runtime_error("checkpoint has trailing data");
  return c;
}

std::vector<uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

void WriteFile(const std::filesystem::path& path,
               std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& c) {
  nlohmann::json meta = {{"kind", CodecKindName(c.kind)},
                         {"model", ConfigToJson(c.config)},
                         {"crossfade_len", c.frame_spec.crossfade_len},
                         {"sample_rate", c.sample_rate},
                         {"stage", c.stage},
                         {"alpha", c.alpha},
                         {"target_entropy", c.target_entropy},
                         {"target_ratio", c.target_ratio},
                         {"usage_counts", c.usage_counts}};
  const std::string text = meta.dump();

  std::vector<uint8_t> out(kMagic, kMagic + 4);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<uint8_t>(kCheckpointVersion >> (8 * i)));
  }
  PutU64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  PutU64(out, c.parameters.size());
  const auto* raw = reinterpret_cast<const uint8_t*>(c.parameters.data());
  out.insert(out.end(), raw, raw + c.parameters.size() * sizeof(double));
  return out;
}

ContentHash Sha256(std::span<const uint8_t> bytes) {
  ContentHash out{};
  unsigned int size = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &size, EVP_sha256(),
                 nullptr) != 1 ||
      size != out.size()) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

ContentHash HashCheckpoint(const Checkpoint& checkpoint) {
  return Sha256(SerializeCheckpoint(checkpoint));
}

std::string HexDigest(const ContentHash& hash) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (uint8_t b : hash) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& checkpoint) {
  std::vector<uint8_t> bytes = SerializeCheckpoint(checkpoint);
  const ContentHash hash = Sha256(bytes);
  bytes.insert(bytes.end(), hash.begin(), hash.end());
  WriteFile(path, bytes);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFile(path);
  if (bytes.size() < 32) throw std::runtime_error("checkpoint truncated");
  const std::span<const uint8_t> body(bytes.data(), bytes.size() - 32);
  const ContentHash stored = [&] {
    ContentHash h{};
    std::copy(bytes.end() - 32, bytes.end(), h.begin());
    return h;
  }();
  if (Sha256(body) != stored) {
    throw std::runtime_error(path.string() + ": checkpoint integrity check failed");
  }
  return Parse(body);
}

Checkpoint MakeCheckpoint(const Model& model, const FrameSpec& frame_spec,
                          int sample_rate) {
  Checkpoint c;
  c.kind = model.kind();
  c.config = model.config();
  c.frame_spec = frame_spec;
  c.frame_spec.frame_size = model.config().frame_size;
  c.sample_rate = sample_rate;
  c.parameters.assign(model.parameters().begin(), model.parameters().end());
  c.usage_counts.assign(model.num_codes(),
                        std::vector<double>(model.config().num_centroids, 1.0));
  return c;
}

Model ModelFromCheckpoint(const Checkpoint& checkpoint) {
  Model model(checkpoint.config, checkpoint.kind);
  model.set_parameters(checkpoint.parameters);
  if (checkpoint.usage_counts.size() != size_t(model.num_codes())) {
    throw std::runtime_error("checkpoint: usage table count mismatch");
  }
  return model;
}

CodebookExport ExportCodebook(const Checkpoint& checkpoint, int code_block) {
  const Model model = ModelFromCheckpoint(checkpoint);
  const auto cb = model.codebook(code_block);
  CodebookExport out;
  out.size = checkpoint.config.num_centroids;
  out.dim = checkpoint.config.vq_dim;
  out.centroids.assign(cb.begin(), cb.end());
  return out;
}

void WriteCodebookFile(const std::filesystem::path& path,
                       const CodebookExport& codebook) {
  std::vector<uint8_t> out;
  for (uint32_t v : {uint32_t(codebook.size), uint32_t(codebook.dim)}) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  const auto* raw = reinterpret_cast<const uint8_t*>(codebook.centroids.data());
  out.insert(out.end(), raw, raw + codebook.centroids.size() * sizeof(double));
  WriteFile(path, out);
}

CodebookExport ReadCodebookFile(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFile(path);
  if (bytes.size() < 8) throw std::runtime_error("codebook file truncated");
  uint32_t size = 0, dim = 0;
  std::memcpy(&size, bytes.data(), 4);
  std::memcpy(&dim, bytes.data() + 4, 4);
  const size_t count = size_t(size) * dim;
  if (bytes.size() != 8 + count * sizeof(double)) {
    throw std::runtime_error("codebook file has wrong size");
  }
  CodebookExport out;
  out.size = static_cast<int>(size);
  out.dim = static_cast<int>(dim);
  out.centroids.resize(count);
  std::memcpy(out.centroids.data(), bytes.data() + 8, count * sizeof(double));
  return out;
}

}  // namespace sanac
