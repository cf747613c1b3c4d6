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

#include "sanac/codec.h"

#include <stdexcept>

#include "sanac/quantizer.h"

namespace sanac {

Codec::Codec(Checkpoint checkpoint)
    : checkpoint_(std::move(checkpoint)),
      model_(ModelFromCheckpoint(checkpoint_)),
      hash_(HashCheckpoint(checkpoint_)) {
  checkpoint_.frame_spec.Validate();
  for (const auto& counts : checkpoint_.usage_counts) {
    tables_.push_back(BuildHuffman(counts));
  }
}

CodeIndices Codec::Quantize(std::span<const double> signal) const {
  const FrameSequence frames = Segment(signal, checkpoint_.frame_spec);
  const ModelConfig& cfg = model_.config();
  const int blocks = model_.num_codes();
  CodeIndices out(static_cast<int>(frames.frames.size()), blocks,
                  cfg.code_length);
  std::vector<double> y(cfg.vq_dim);
  for (size_t f = 0; f < frames.frames.size(); ++f) {
    const CodeMap codes = model_.Encode(frames.frames[f]);
    for (int k = 0; k < blocks; ++k) {
      const CodebookView book(model_.codebook(k), cfg.vq_dim);
      for (int p = 0; p < cfg.code_length; ++p) {
        for (int l = 0; l < cfg.vq_dim; ++l) {
          y[l] = codes.at(k * cfg.vq_dim + l, p);
        }
        out.at(static_cast<int>(f), k, p) = NearestCentroid(y, book);
      }
    }
  }
  return out;
}

DecodedAudio Codec::Reconstruct(const CodeIndices& indices,
                                size_t original_length) const {
  const ModelConfig& cfg = model_.config();
  const int blocks = model_.num_codes();
  if (indices.sources != blocks || indices.positions != cfg.code_length) {
    throw std::invalid_argument("Reconstruct: index tensor shape mismatch");
  }
  FrameSequence mixture{{}, checkpoint_.frame_spec, original_length};
  std::vector<FrameSequence> sources(
      blocks, FrameSequence{{}, checkpoint_.frame_spec, original_length});
  for (int f = 0; f < indices.frames; ++f) {
    std::vector<SourceCode> codes;
    for (int k = 0; k < blocks; ++k) {
      const CodebookView book(model_.codebook(k), cfg.vq_dim);
      SourceCode code{FeatureMap(cfg.vq_dim, cfg.code_length), k};
      for (int p = 0; p < cfg.code_length; ++p) {
        const int i = indices.at(f, k, p);
        if (i < 0 || i >= book.size()) {
          throw std::invalid_argument("Reconstruct: index out of range");
        }
        const auto mu = book.centroid(i);
        for (int l = 0; l < cfg.vq_dim; ++l) code.values.at(l, p) = mu[l];
      }
      codes.push_back(std::move(code));
    }
    Reconstruction r = model_.Decode(codes);
    mixture.frames.push_back(std::move(r.mixture));
    for (int k = 0; k < blocks; ++k) {
      sources[k].frames.push_back(std::move(r.sources[k]));
    }
  }
  DecodedAudio out;
  out.mixture = OverlapAdd(mixture);
  for (const auto& s : sources) out.sources.push_back(OverlapAdd(s));
  return out;
}

CodecHeader Codec::MakeHeader(int frame_count, size_t original_length) const {
  const ModelConfig& cfg = model_.config();
  CodecHeader h;
  h.sample_rate = static_cast<uint32_t>(checkpoint_.sample_rate);
  h.frame_size = static_cast<uint32_t>(cfg.frame_size);
  h.hop = static_cast<uint32_t>(checkpoint_.frame_spec.hop());
  h.num_sources = static_cast<uint16_t>(model_.num_codes());
  h.vq_dim = static_cast<uint16_t>(cfg.vq_dim);
  h.code_length = static_cast<uint32_t>(cfg.code_length);
  h.num_centroids = static_cast<uint32_t>(cfg.num_centroids);
  h.model_hash = hash_;
  h.frame_count = static_cast<uint32_t>(frame_count);
  h.original_length = original_length;
  for (const auto& t : tables_) h.code_lengths.push_back(t.lengths);
  return h;
}

EncodedStream Codec::Encode(const AudioSignal& signal) const {
  if (signal.sample_rate != checkpoint_.sample_rate) {
    throw std::invalid_argument("Encode: sample rate differs from checkpoint");
  }
  const CodeIndices indices = Quantize(signal.samples);
  return EncodeStream(MakeHeader(indices.frames, signal.size()), indices);
}

DecodedAudio Codec::Decode(std::span<const uint8_t> bytes) const {
  const DecodedStream stream = DecodeStream(bytes, hash_);
  const CodecHeader& h = stream.header;
  const ModelConfig& cfg = model_.config();
  if (h.frame_size != uint32_t(cfg.frame_size) ||
      h.hop != uint32_t(checkpoint_.frame_spec.hop()) ||
      h.vq_dim != cfg.vq_dim || h.num_centroids != uint32_t(cfg.num_centroids)) {
    throw BitstreamError(BitstreamErrorCode::kBadHeader,
                         "stream geometry differs from checkpoint");
  }
  if (stream.indices.frames == 0) {
    DecodedAudio empty;
    empty.sources.resize(model_.num_codes());
    return empty;
  }
  return Reconstruct(stream.indices, h.original_length);
}

}  // namespace sanac
