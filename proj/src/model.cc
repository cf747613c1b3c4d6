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

#include "sanac/model.h"

#include <algorithm>
#include <stdexcept>

namespace sanac {

void ModelConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("ModelConfig: " + what);
  };
  if (frame_size <= 0 || frame_size % 2 != 0) fail("frame_size must be even");
  if (code_length * 2 != frame_size) fail("code_length must be frame_size/2");
  if (vq_dim <= 0) fail("vq_dim must be positive");
  if (num_sources < 2) fail("num_sources must be at least 2");
  if (trunk_channels <= 0 || bottleneck_channels <= 0) {
    fail("channel counts must be positive");
  }
  if (transform_channels != num_sources * trunk_channels) {
    fail("transform_channels must equal num_sources * trunk_channels");
  }
  if (conv_kernel <= 0 || conv_kernel % 2 == 0) {
    fail("conv_kernel must be a positive odd integer");
  }
  if (num_centroids < 2) fail("num_centroids must be at least 2");
  if (encoder_blocks < 0 || post_blocks < 0 || transform_blocks < 0 ||
      decoder_blocks < 0) {
    fail("block counts must be non-negative");
  }
}

std::string CodecKindName(CodecKind kind) {
  return kind == CodecKind::kSourceAware ? "sanac" : "baseline";
}

CodecKind ParseCodecKind(const std::string& name) {
  if (name == "sanac") return CodecKind::kSourceAware;
  if (name == "baseline") return CodecKind::kBaseline;
  throw std::invalid_argument("unknown codec kind '" + name + "'");
}

std::vector<SourceCode> SplitCodes(const CodeMap& codes, int num_sources) {
  auto blocks = SplitChannels(codes, num_sources);
  std::vector<SourceCode> out;
  out.reserve(blocks.size());
  for (int k = 0; k < num_sources; ++k) {
    out.push_back({std::move(blocks[k]), k});
  }
  return out;
}

CodeMap EmbedCodes(std::span<const SourceCode> sources) {
  std::vector<FeatureMap> blocks(sources.size());
  for (const auto& s : sources) {
    if (s.source_index < 0 || size_t(s.source_index) >= sources.size()) {
      throw std::invalid_argument("EmbedCodes: bad source index");
    }
    blocks[s.source_index] = s.values;
  }
  for (const auto& b : blocks) {
    if (!b.SameShape(blocks[0]) || b.data.empty()) {
      throw std::invalid_argument("EmbedCodes: inconsistent source blocks");
    }
  }
  return ConcatChannels(blocks);
}

CodeMap PadSourceCode(const SourceCode& source, int num_sources) {
  const int rows = source.values.channels;
  CodeMap out(rows * num_sources, source.values.length);
  std::copy(source.values.data.begin(), source.values.data.end(),
            out.data.begin() + size_t(source.source_index) * rows *
                                   source.values.length);
  return out;
}

Model::Model(const ModelConfig& config, CodecKind kind)
    : config_(config), kind_(kind) {
  config_.Validate();
  num_codes_ = kind == CodecKind::kSourceAware ? config_.num_sources : 1;
  const int c = config_.trunk_channels;
  const int cr = config_.bottleneck_channels;
  const int k = config_.conv_kernel;
  const int l = config_.vq_dim;

  lift_ = Conv1d(layout_, "encoder.lift", 1, c, k);
  for (int i = 0; i < config_.encoder_blocks; ++i) {
    encoder_blocks_.emplace_back(layout_, "encoder.block" + std::to_string(i),
                                 c, cr, k);
  }
  down_ = Conv1d(layout_, "encoder.down", c, c, k, 2);
  for (int i = 0; i < config_.post_blocks; ++i) {
    post_blocks_.emplace_back(layout_, "encoder.post" + std::to_string(i), c,
                              cr, k);
  }
  code_ = Conv1d(layout_, "encoder.code", c, num_codes_ * l, k);
  for (int s = 0; s < num_codes_; ++s) {
    channel_change_.emplace_back(
        layout_, "decoder.change" + std::to_string(s), l, 2 * c, k);
  }
  for (int i = 0; i < config_.transform_blocks; ++i) {
    transform_.emplace_back(layout_, "transform.block" + std::to_string(i),
                            num_codes_ * c, num_codes_ * cr, k);
  }
  for (int i = 0; i < config_.decoder_blocks; ++i) {
    decoder_blocks_.emplace_back(layout_, "decoder.block" + std::to_string(i),
                                 c, cr, k);
  }
  projection_ = Conv1d(layout_, "decoder.projection", c, 1, k);
  for (int s = 0; s < num_codes_; ++s) {
    codebooks_.push_back(layout_.Add("codebook" + std::to_string(s),
                                     size_t(config_.num_centroids) * l));
  }
  params_.assign(layout_.total(), 0.0);
}

void Model::set_parameters(std::vector<double> params) {
  if (params.size() != layout_.total()) {
    throw std::invalid_argument("Model: parameter count mismatch");
  }
  params_ = std::move(params);
}

void Model::Initialize(uint64_t seed) {
  Rng rng(seed);
  lift_.Initialize(params_, rng);
  for (const auto& b : encoder_blocks_) b.Initialize(params_, rng);
  down_.Initialize(params_, rng);
  for (const auto& b : post_blocks_) b.Initialize(params_, rng);
  code_.Initialize(params_, rng);
  for (const auto& cc : channel_change_) cc.Initialize(params_, rng);
  for (const auto& b : transform_) b.Initialize(params_, rng);
  for (const auto& b : decoder_blocks_) b.Initialize(params_, rng);
  projection_.Initialize(params_, rng);
  for (const auto& cb : codebooks_) {
    for (size_t i = 0; i < cb.size; ++i) params_[cb.offset + i] = rng.Normal();
  }
}

std::span<const double> Model::codebook(int k) const {
  const ParamSlice s = codebooks_.at(k);
  return std::span<const double>(params_).subspan(s.offset, s.size);
}

std::span<double> Model::mutable_codebook(int k) {
  const ParamSlice s = codebooks_.at(k);
  return std::span<double>(params_).subspan(s.offset, s.size);
}

CodeMap Model::EncodeForward(std::span<const double> frame,
                             EncoderTape* tape) const {
  if (frame.size() != size_t(config_.frame_size)) {
    throw std::invalid_argument("Encode: frame length " +
                                std::to_string(frame.size()) + ", expected " +
                                std::to_string(config_.frame_size));
  }
  FeatureMap x(1, config_.frame_size);
  std::copy(frame.begin(), frame.end(), x.data.begin());

  FeatureMap pre_lift = lift_.Forward(params_, x);
  FeatureMap h = LeakyRelu(pre_lift);
  if (tape != nullptr) {
    tape->blocks.resize(encoder_blocks_.size());
    tape->post.resize(post_blocks_.size());
  }
  for (size_t i = 0; i < encoder_blocks_.size(); ++i) {
    h = encoder_blocks_[i].Forward(params_, h,
                                   tape ? &tape->blocks[i] : nullptr);
  }
  FeatureMap pre_down = down_.Forward(params_, h);
  if (tape != nullptr) tape->down_input = std::move(h);
  h = LeakyRelu(pre_down);
  for (size_t i = 0; i < post_blocks_.size(); ++i) {
    h = post_blocks_[i].Forward(params_, h, tape ? &tape->post[i] : nullptr);
  }
  CodeMap codes = code_.Forward(params_, h);
  if (codes.channels != num_codes_ * config_.vq_dim ||
      codes.length != config_.code_length) {
    throw std::logic_error("Encode: unexpected code map shape");
  }
  if (tape != nullptr) {
    tape->input = std::move(x);
    tape->pre_lift = std::move(pre_lift);
    tape->pre_down = std::move(pre_down);
    tape->code_input = std::move(h);
  }
  return codes;
}

void Model::EncodeBackward(const EncoderTape& tape, const CodeMap& grad,
                           std::span<double> grads) const {
  FeatureMap g = code_.Backward(params_, tape.code_input, grad, grads);
  for (size_t i = post_blocks_.size(); i-- > 0;) {
    g = post_blocks_[i].Backward(params_, tape.post[i], g, grads);
  }
  LeakyReluBackward(tape.pre_down, g);
  g = down_.Backward(params_, tape.down_input, g, grads);
  for (size_t i = encoder_blocks_.size(); i-- > 0;) {
    g = encoder_blocks_[i].Backward(params_, tape.blocks[i], g, grads);
  }
  LeakyReluBackward(tape.pre_lift, g);
  lift_.Backward(params_, tape.input, g, grads);
}

std::vector<std::vector<double>> Model::DecodeForward(
    std::span<const FeatureMap> codes, DecoderTape* tape) const {
  if (codes.size() != size_t(num_codes_)) {
    throw std::invalid_argument("Decode: expected " +
                                std::to_string(num_codes_) + " code blocks");
  }
  for (const auto& c : codes) {
    if (c.channels != config_.vq_dim || c.length != config_.code_length) {
      throw std::invalid_argument("Decode: code block shape mismatch");
    }
  }
  if (tape != nullptr) {
    tape->codes.assign(codes.begin(), codes.end());
    tape->pre_change.resize(num_codes_);
    tape->transform.resize(transform_.size());
    tape->decoder.assign(num_codes_, {});
    tape->projection_input.resize(num_codes_);
  }

  std::vector<FeatureMap> upsampled(num_codes_);
  for (int s = 0; s < num_codes_; ++s) {
    FeatureMap pre = channel_change_[s].Forward(params_, codes[s]);
    upsampled[s] = SubpixelUpsample(LeakyRelu(pre));
    if (tape != nullptr) tape->pre_change[s] = std::move(pre);
  }
  FeatureMap joint = ConcatChannels(upsampled);
  for (size_t i = 0; i < transform_.size(); ++i) {
    joint =
        transform_[i].Forward(params_, joint, tape ? &tape->transform[i] : nullptr);
  }
  std::vector<FeatureMap> per_source = SplitChannels(joint, num_codes_);

  std::vector<std::vector<double>> out(num_codes_);
  for (int s = 0; s < num_codes_; ++s) {
    FeatureMap h = std::move(per_source[s]);
    if (tape != nullptr) tape->decoder[s].resize(decoder_blocks_.size());
    for (size_t i = 0; i < decoder_blocks_.size(); ++i) {
      h = decoder_blocks_[i].Forward(params_, h,
                                     tape ? &tape->decoder[s][i] : nullptr);
    }
    FeatureMap y = projection_.Forward(params_, h);
    out[s] = std::move(y.data);
    if (tape != nullptr) tape->projection_input[s] = std::move(h);
  }
  return out;
}

std::vector<FeatureMap> Model::DecodeBackward(
    const DecoderTape& tape, std::span<const std::vector<double>> grads_out,
    std::span<double> grads) const {
  std::vector<FeatureMap> per_source(num_codes_);
  for (int s = 0; s < num_codes_; ++s) {
    FeatureMap dy(1, config_.frame_size);
    std::copy(grads_out[s].begin(), grads_out[s].end(), dy.data.begin());
    FeatureMap g =
        projection_.Backward(params_, tape.projection_input[s], dy, grads);
    for (size_t i = decoder_blocks_.size(); i-- > 0;) {
      g = decoder_blocks_[i].Backward(params_, tape.decoder[s][i], g, grads);
    }
    per_source[s] = std::move(g);
  }
  FeatureMap joint = ConcatChannels(per_source);
  for (size_t i = transform_.size(); i-- > 0;) {
    joint = transform_[i].Backward(params_, tape.transform[i], joint, grads);
  }
  std::vector<FeatureMap> upsampled = SplitChannels(joint, num_codes_);
  std::vector<FeatureMap> out(num_codes_);
  for (int s = 0; s < num_codes_; ++s) {
    FeatureMap g = SubpixelDownsample(upsampled[s]);
    LeakyReluBackward(tape.pre_change[s], g);
    out[s] = channel_change_[s].Backward(params_, tape.codes[s], g, grads);
  }
  return out;
}

CodeMap Model::Encode(std::span<const double> frame) const {
  return EncodeForward(frame, nullptr);
}

Reconstruction Model::Decode(std::span<const SourceCode> codes) const {
  std::vector<FeatureMap> blocks(codes.size());
  for (const auto& c : codes) {
    if (c.source_index < 0 || size_t(c.source_index) >= codes.size()) {
      throw std::invalid_argument("Decode: bad source index");
    }
    blocks[c.source_index] = c.values;
  }
  Reconstruction out;
  out.sources = DecodeForward(blocks, nullptr);
  out.mixture.assign(config_.frame_size, 0.0);
  for (const auto& s : out.sources) {
    for (size_t t = 0; t < s.size(); ++t) out.mixture[t] += s[t];
  }
  return out;
}

}  // namespace sanac
