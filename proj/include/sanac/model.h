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

#ifndef SANAC_MODEL_H_
#define SANAC_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sanac/layers.h"

namespace sanac {

// Architecture dimensions. Defaults are the full-size codec.
struct ModelConfig {
  int frame_size = 512;
  int code_length = 256;        // code vectors per source per frame
  int vq_dim = 6;               // channels per source block
  int num_sources = 2;
  int trunk_channels = 30;
  int bottleneck_channels = 10;
  int transform_channels = 60;  // num_sources * trunk_channels
  int conv_kernel = 9;
  int num_centroids = 128;
  int encoder_blocks = 2;       // bottlenecks before downsampling
  int post_blocks = 1;          // bottlenecks after downsampling
  int transform_blocks = 2;
  int decoder_blocks = 2;

  // Throws std::invalid_argument if the dimensions are inconsistent.
  void Validate() const;
  int code_channels() const { return num_sources * vq_dim; }

  bool operator==(const ModelConfig&) const = default;
};

enum class CodecKind {
  kSourceAware,  // one code block, codebook and decoder pass per source
  kBaseline,     // a single code block for the mixture
};

std::string CodecKindName(CodecKind kind);
// Accepts "sanac" and "baseline".
CodecKind ParseCodecKind(const std::string& name);

// Encoder output: code_channels x code_length, source k owning channel rows
// [k * vq_dim, (k + 1) * vq_dim).
using CodeMap = FeatureMap;

struct SourceCode {
  FeatureMap values;  // vq_dim x code_length
  int source_index = 0;
};

std::vector<SourceCode> SplitCodes(const CodeMap& codes, int num_sources);
CodeMap EmbedCodes(std::span<const SourceCode> sources);
// Places one source block into an otherwise zero code map.
CodeMap PadSourceCode(const SourceCode& source, int num_sources);

struct Reconstruction {
  std::vector<std::vector<double>> sources;  // one frame per code block
  std::vector<double> mixture;               // sum of the sources
};

// Caches for the hand-written backward pass.
struct EncoderTape {
  FeatureMap input;
  FeatureMap pre_lift;
  std::vector<BottleneckBlock::Cache> blocks;
  FeatureMap down_input;
  FeatureMap pre_down;
  std::vector<BottleneckBlock::Cache> post;
  FeatureMap code_input;
};

struct DecoderTape {
  std::vector<FeatureMap> codes;
  std::vector<FeatureMap> pre_change;
  std::vector<BottleneckBlock::Cache> transform;
  std::vector<std::vector<BottleneckBlock::Cache>> decoder;
  std::vector<FeatureMap> projection_input;
};

// Convolutional encoder, per-source channel changers with sub-pixel
// upsampling, a joint transformation block and a decoder shared by all
// sources. The baseline variant has a single code block and decodes once.
// Codebooks live in the same flat parameter vector as the network weights.
class Model {
 public:
  Model(const ModelConfig& config, CodecKind kind);

  const ModelConfig& config() const { return config_; }
  CodecKind kind() const { return kind_; }
  // Number of code blocks: num_sources, or 1 for the baseline.
  int num_codes() const { return num_codes_; }
  const ParameterLayout& layout() const { return layout_; }
  size_t num_parameters() const { return params_.size(); }

  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }
  void set_parameters(std::vector<double> params);

  // Random weights, zero biases, and random codebooks; deterministic in seed.
  void Initialize(uint64_t seed);

  // M x L row-major centroids of code block k.
  std::span<const double> codebook(int k) const;
  std::span<double> mutable_codebook(int k);
  ParamSlice codebook_slice(int k) const { return codebooks_.at(k); }

  // Inference. Throws std::invalid_argument on shape errors.
  CodeMap Encode(std::span<const double> frame) const;
  Reconstruction Decode(std::span<const SourceCode> codes) const;

  // Training passes; tapes may be null when no backward pass follows.
  CodeMap EncodeForward(std::span<const double> frame,
                        EncoderTape* tape) const;
  void EncodeBackward(const EncoderTape& tape, const CodeMap& grad,
                      std::span<double> grads) const;
  std::vector<std::vector<double>> DecodeForward(
      std::span<const FeatureMap> codes, DecoderTape* tape) const;
  // Returns the gradient with respect to each code block.
  std::vector<FeatureMap> DecodeBackward(
      const DecoderTape& tape, std::span<const std::vector<double>> grads_out,
      std::span<double> grads) const;

 private:
  ModelConfig config_;
  CodecKind kind_;
  int num_codes_;
  ParameterLayout layout_;

  Conv1d lift_;
  std::vector<BottleneckBlock> encoder_blocks_;
  Conv1d down_;
  std::vector<BottleneckBlock> post_blocks_;
  Conv1d code_;
  std::vector<Conv1d> channel_change_;
  std::vector<BottleneckBlock> transform_;
  std::vector<BottleneckBlock> decoder_blocks_;
  Conv1d projection_;
  std::vector<ParamSlice> codebooks_;

  std::vector<double> params_;
};

}  // namespace sanac

#endif  // SANAC_MODEL_H_
