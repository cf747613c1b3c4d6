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

#include <gtest/gtest.h>

#include "test_util.h"

namespace sanac {
namespace {

ModelConfig Frame128() {
  ModelConfig c = testing::TinyConfig();
  c.frame_size = 128;
  c.code_length = 64;
  c.num_centroids = 8;
  return c;
}

Codec MakeCodec(CodecKind kind, uint64_t seed) {
  Model model(Frame128(), kind);
  model.Initialize(seed);
  Checkpoint c = MakeCheckpoint(model, FrameSpec{128, 16}, 16000);
  // Skewed usage so the tables are not all the same length.
  for (auto& counts : c.usage_counts) counts = {40, 20, 10, 5, 3, 2, 1, 1};
  return Codec(std::move(c));
}

AudioSignal Signal(size_t n, uint64_t seed) {
  Rng rng(seed);
  return AudioSignal{testing::RandomSignal(n, rng, 0.3), 16000};
}

TEST(CodecTest, OutputLengthMatchesInput) {
  const Codec codec = MakeCodec(CodecKind::kSourceAware, 1);
  for (size_t n : {1, 100, 128, 129, 1000, 4000}) {
    const EncodedStream s = codec.Encode(Signal(n, n));
    const DecodedAudio d = codec.Decode(s.bytes);
    EXPECT_EQ(d.mixture.size(), n);
    ASSERT_EQ(d.sources.size(), 2u);
    EXPECT_EQ(d.sources[0].size(), n);
    EXPECT_EQ(d.sources[1].size(), n);
  }
}

TEST(CodecTest, BitstreamDecodeMatchesDirectDecodeExactly) {
  for (CodecKind kind : {CodecKind::kSourceAware, CodecKind::kBaseline}) {
    const Codec codec = MakeCodec(kind, 2);
    const AudioSignal x = Signal(3000, 7);
    const CodeIndices idx = codec.Quantize(x.samples);
    const DecodedAudio direct = codec.Reconstruct(idx, x.size());
    const DecodedAudio via = codec.Decode(codec.Encode(x).bytes);
    EXPECT_EQ(direct.mixture, via.mixture);
    EXPECT_EQ(direct.sources, via.sources);
  }
}

TEST(CodecTest, SourcesSumToMixture) {
  const Codec codec = MakeCodec(CodecKind::kSourceAware, 3);
  const AudioSignal x = Signal(2000, 8);
  const DecodedAudio d = codec.Decode(codec.Encode(x).bytes);
  for (size_t i = 0; i < d.mixture.size(); ++i) {
    ASSERT_NEAR(d.mixture[i], d.sources[0][i] + d.sources[1][i], 1e-12);
  }
}

TEST(CodecTest, HeaderDescribesModel) {
  const Codec codec = MakeCodec(CodecKind::kSourceAware, 4);
  const EncodedStream s = codec.Encode(Signal(1000, 9));
  const DecodedStream d = DecodeStream(s.bytes);
  EXPECT_EQ(d.header.frame_size, 128u);
  EXPECT_EQ(d.header.hop, 112u);
  EXPECT_EQ(d.header.num_sources, 2u);
  EXPECT_EQ(d.header.code_length, 64u);
  EXPECT_EQ(d.header.num_centroids, 8u);
  EXPECT_EQ(d.header.original_length, 1000u);
  EXPECT_EQ(d.header.frame_count, 9u);
  EXPECT_EQ(d.header.model_hash, codec.hash());
}

TEST(CodecTest, BaselineHasOneCodeBlock) {
  const Codec codec = MakeCodec(CodecKind::kBaseline, 5);
  const CodeIndices idx = codec.Quantize(Signal(500, 10).samples);
  EXPECT_EQ(idx.sources, 1);
  EXPECT_EQ(codec.tables().size(), 1u);
}

TEST(CodecTest, ForeignStreamRejected) {
  const Codec a = MakeCodec(CodecKind::kSourceAware, 6);
  const Codec b = MakeCodec(CodecKind::kSourceAware, 7);
  const EncodedStream s = a.Encode(Signal(500, 11));
  try {
    b.Decode(s.bytes);
    ADD_FAILURE();
  } catch (const BitstreamError& e) {
    EXPECT_EQ(e.code(), BitstreamErrorCode::kHashMismatch);
  }
}

TEST(CodecTest, EmptySignalRejected) {
  const Codec codec = MakeCodec(CodecKind::kSourceAware, 8);
  EXPECT_THROW(codec.Encode(AudioSignal{{}, 16000}), std::invalid_argument);
}

TEST(CodecTest, SampleRateMismatchRejected) {
  const Codec codec = MakeCodec(CodecKind::kSourceAware, 9);
  EXPECT_THROW(codec.Encode(AudioSignal{{0.0, 0.1}, 8000}), std::invalid_argument);
}

TEST(CodecTest, PayloadBitsFollowTables) {
  const Codec codec = MakeCodec(CodecKind::kSourceAware, 10);
  const AudioSignal x = Signal(1500, 12);
  const CodeIndices idx = codec.Quantize(x.samples);
  size_t bits = 0;
  for (int f = 0; f < idx.frames; ++f) {
    for (int k = 0; k < idx.sources; ++k) {
      for (int p = 0; p < idx.positions; ++p) {
        bits += codec.tables()[k].lengths[idx.at(f, k, p)];
      }
    }
  }
  EXPECT_EQ(codec.Encode(x).payload_bits, bits);
}

}  // namespace
}  // namespace sanac
