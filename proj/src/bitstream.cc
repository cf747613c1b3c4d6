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

#include "sanac/bitstream.h"

#include <algorithm>
#include <cstring>

namespace sanac {

std::string BitstreamErrorName(BitstreamErrorCode code) {
  switch (code) {
    case BitstreamErrorCode::kBadMagic:
      return "bad magic";
    case BitstreamErrorCode::kUnsupportedVersion:
      return "unsupported version";
    case BitstreamErrorCode::kBadHeader:
      return "bad header";
    case BitstreamErrorCode::kHashMismatch:
      return "model hash mismatch";
    case BitstreamErrorCode::kTruncated:
      return "truncated stream";
    case BitstreamErrorCode::kCorruptPayload:
      return "corrupt payload";
    case BitstreamErrorCode::kIndexOutOfRange:
      return "index out of range";
  }
  return "unknown error";
}

namespace {

constexpr char kMagic[4] = {'S', 'A', 'N', 'C'};

class ByteWriter {
 public:
  template <typename T>
  void Put(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<uint8_t>(uint64_t(v) >> (8 * i)));
    }
  }
  void PutBytes(std::span<const uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  std::vector<uint8_t>& bytes() { return out_; }

 private:
  std::vector<uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> in) : in_(in) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::span<const uint8_t> GetBytes(size_t n) {
    Need(n);
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  size_t position() const { return pos_; }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(size_t n) const {
    if (in_.size() - pos_ < n) {
      throw BitstreamError(BitstreamErrorCode::kTruncated,
                           "stream ends inside the header");
    }
  }

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

void CheckDimensions(const CodecHeader& h) {
  if (h.sample_rate == 0 || h.frame_size == 0 || h.hop == 0 ||
      h.num_sources == 0 || h.vq_dim == 0 || h.code_length == 0 ||
      h.num_centroids < 2) {
    throw BitstreamError(BitstreamErrorCode::kBadHeader,
                         "dimensions must be positive");
  }
  if (h.code_lengths.size() != h.num_sources) {
    throw BitstreamError(BitstreamErrorCode::kBadHeader,
                         "one code table per source required");
  }
  for (const auto& t : h.code_lengths) {
    if (t.size() != h.num_centroids) {
      throw BitstreamError(BitstreamErrorCode::kBadHeader,
                           "code table size differs from num_centroids");
    }
  }
}

std::vector<HuffmanTable> TablesOf(const CodecHeader& h) {
  std::vector<HuffmanTable> tables;
  for (const auto& lengths : h.code_lengths) {
    try {
      tables.push_back(CanonicalFromLengths(lengths));
    } catch (const std::invalid_argument& e) {
      throw BitstreamError(BitstreamErrorCode::kBadHeader, e.what());
    }
  }
  return tables;
}

}  // namespace

EncodedStream EncodeStream(const CodecHeader& header,
                           const CodeIndices& indices) {
  CheckDimensions(header);
  if (indices.frames != int64_t(header.frame_count) ||
      indices.sources != header.num_sources ||
      indices.positions != int64_t(header.code_length)) {
    throw BitstreamError(BitstreamErrorCode::kBadHeader,
                         "index tensor shape differs from header");
  }
  const auto tables = TablesOf(header);

  ByteWriter w;
  w.PutBytes(std::span(reinterpret_cast<const uint8_t*>(kMagic), 4));
  w.Put<uint16_t>(header.version);
  w.Put<uint32_t>(header.sample_rate);
  w.Put<uint32_t>(header.frame_size);
  w.Put<uint32_t>(header.hop);
  w.Put<uint16_t>(header.num_sources);
  w.Put<uint16_t>(header.vq_dim);
  w.Put<uint32_t>(header.code_length);
  w.Put<uint32_t>(header.num_centroids);
  w.PutBytes(header.model_hash);
  w.Put<uint32_t>(header.frame_count);
  w.Put<uint64_t>(header.original_length);
  for (const auto& t : header.code_lengths) w.PutBytes(t);

  BitWriter bits;
  size_t payload_bits = 0;
  for (int f = 0; f < indices.frames; ++f) {
    for (int k = 0; k < indices.sources; ++k) {
      const HuffmanTable& table = tables[k];
      for (int p = 0; p < indices.positions; ++p) {
        const int i = indices.at(f, k, p);
        if (i < 0 || i >= int64_t(header.num_centroids)) {
          throw BitstreamError(BitstreamErrorCode::kIndexOutOfRange,
                               "index " + std::to_string(i));
        }
        bits.Write(table.codes[i], table.lengths[i]);
        payload_bits += table.lengths[i];
      }
      bits.AlignToByte();
    }
  }
  w.Put<uint64_t>(bits.bytes().size());

  EncodedStream out;
  out.header_bytes = w.bytes().size();
  w.PutBytes(bits.bytes());
  out.bytes = std::move(w.bytes());
  out.payload_bits = payload_bits;
  return out;
}

DecodedStream DecodeStream(std::span<const uint8_t> bytes,
                           const std::optional<ContentHash>& expected_hash) {
  ByteReader r(bytes);
  if (bytes.size() < 4) {
    throw BitstreamError(BitstreamErrorCode::kTruncated, "missing magic");
  }
  if (std::memcmp(r.GetBytes(4).data(), kMagic, 4) != 0) {
    throw BitstreamError(BitstreamErrorCode::kBadMagic, "not a SANC stream");
  }
  DecodedStream out;
  CodecHeader& h = out.header;
  h.version = r.Get<uint16_t>();
  if (h.version != kBitstreamVersion) {
    throw BitstreamError(BitstreamErrorCode::kUnsupportedVersion,
                         "version " + std::to_string(h.version));
  }
  h.sample_rate = r.Get<uint32_t>();
  h.frame_size = r.Get<uint32_t>();
  h.hop = r.Get<uint32_t>();
  h.num_sources = r.Get<uint16_t>();
  h.vq_dim = r.Get<uint16_t>();
  h.code_length = r.Get<uint32_t>();
  h.num_centroids = r.Get<uint32_t>();
  const auto hash = r.GetBytes(32);
  std::copy(hash.begin(), hash.end(), h.model_hash.begin());
  h.frame_count = r.Get<uint32_t>();
  h.original_length = r.Get<uint64_t>();
  if (h.num_centroids > (1u << 20) || h.num_sources > 1024) {
    throw BitstreamError(BitstreamErrorCode::kBadHeader,
                         "implausible dimensions");
  }
  for (int k = 0; k < h.num_sources; ++k) {
    const auto t = r.GetBytes(h.num_centroids);
    h.code_lengths.emplace_back(t.begin(), t.end());
  }
  CheckDimensions(h);
  if (expected_hash.has_value() && *expected_hash != h.model_hash) {
    throw BitstreamError(BitstreamErrorCode::kHashMismatch,
                         "stream was encoded with a different checkpoint");
  }
  const auto tables = TablesOf(h);
  const uint64_t payload_size = r.Get<uint64_t>();
  if (payload_size > r.remaining()) {
    throw BitstreamError(BitstreamErrorCode::kTruncated,
                         "payload shorter than declared");
  }
  const auto payload = r.GetBytes(payload_size);

  out.indices = CodeIndices(h.frame_count, h.num_sources, h.code_length);
  std::vector<HuffmanDecoder> decoders;
  for (const auto& t : tables) decoders.emplace_back(t);
  BitReader bits(payload);
  for (uint32_t f = 0; f < h.frame_count; ++f) {
    for (int k = 0; k < h.num_sources; ++k) {
      for (uint32_t p = 0; p < h.code_length; ++p) {
        const int s = decoders[k].Decode(bits);
        if (s == -1) {
          throw BitstreamError(BitstreamErrorCode::kTruncated,
                               "payload ends at frame " + std::to_string(f));
        }
        if (s < 0) {
          throw BitstreamError(BitstreamErrorCode::kCorruptPayload,
                               "invalid code word");
        }
        out.indices.at(f, k, p) = s;
      }
      bits.AlignToByte();
    }
  }
  if (bits.bit_position() != payload.size() * 8) {
    throw BitstreamError(BitstreamErrorCode::kCorruptPayload,
                         "trailing payload bytes");
  }
  return out;
}

double TheoreticalBitrate(double bits_per_vector, int positions,
                          int sample_rate, int hop) {
  return static_cast<double>(sample_rate) * positions * bits_per_vector / hop;
}

}  // namespace sanac
