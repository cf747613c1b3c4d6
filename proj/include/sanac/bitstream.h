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

// Entropy-coded container for quantized code indices. The byte layout is
// documented in docs/bitstream.md.

#ifndef SANAC_BITSTREAM_H_
#define SANAC_BITSTREAM_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sanac/huffman.h"

namespace sanac {

using ContentHash = std::array<uint8_t, 32>;

constexpr uint16_t kBitstreamVersion = 1;

// Index tensor of shape (frames, sources, positions), row-major.
struct CodeIndices {
  int frames = 0;
  int sources = 0;
  int positions = 0;
  std::vector<int> values;

  CodeIndices() = default;
  CodeIndices(int f, int k, int p)
      : frames(f), sources(k), positions(p), values(size_t(f) * k * p, 0) {}
  int& at(int f, int k, int p) {
    return values[(size_t(f) * sources + k) * positions + p];
  }
  int at(int f, int k, int p) const {
    return values[(size_t(f) * sources + k) * positions + p];
  }
  bool operator==(const CodeIndices&) const = default;
};

struct CodecHeader {
  uint16_t version = kBitstreamVersion;
  uint32_t sample_rate = 16000;
  uint32_t frame_size = 512;
  uint32_t hop = 448;
  uint16_t num_sources = 2;
  uint16_t vq_dim = 6;
  uint32_t code_length = 256;
  uint32_t num_centroids = 128;
  ContentHash model_hash{};
  uint32_t frame_count = 0;
  uint64_t original_length = 0;
  // Code lengths per source, num_centroids entries each.
  std::vector<std::vector<uint8_t>> code_lengths;

  bool operator==(const CodecHeader&) const = default;
};

enum class BitstreamErrorCode {
  kBadMagic,
  kUnsupportedVersion,
  kBadHeader,
  kHashMismatch,
  kTruncated,
  kCorruptPayload,
  kIndexOutOfRange,
};

std::string BitstreamErrorName(BitstreamErrorCode code);

class BitstreamError : public std::runtime_error {
 public:
  BitstreamError(BitstreamErrorCode code, const std::string& what)
      : std::runtime_error(BitstreamErrorName(code) + ": " + what),
        code_(code) {}
  BitstreamErrorCode code() const { return code_; }

 private:
  BitstreamErrorCode code_;
};

struct EncodedStream {
  std::vector<uint8_t> bytes;
  size_t header_bytes = 0;
  size_t payload_bits = 0;  // Huffman bits, excluding alignment padding
};

struct DecodedStream {
  CodecHeader header;
  CodeIndices indices;
};

// Serializes header and Huffman-coded payload. Each (frame, source) run of
// `code_length` codes is padded to a byte boundary. The header's
// frame_count, num_sources and code_length must match `indices`.
EncodedStream EncodeStream(const CodecHeader& header,
                           const CodeIndices& indices);

// Parses and decodes a stream; checks the model hash when one is given.
DecodedStream DecodeStream(std::span<const uint8_t> bytes,
                           const std::optional<ContentHash>& expected_hash =
                               std::nullopt);

// Bits per second for a total entropy of `bits_per_vector` per code
// position: sample_rate * positions * bits / hop.
double TheoreticalBitrate(double bits_per_vector, int positions,
                          int sample_rate, int hop);

}  // namespace sanac

#endif  // SANAC_BITSTREAM_H_
