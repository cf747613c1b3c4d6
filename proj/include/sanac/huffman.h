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

#ifndef SANAC_HUFFMAN_H_
#define SANAC_HUFFMAN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sanac {

constexpr int kMaxCodeLength = 63;

// Canonical prefix code: symbols sorted by (length, index) receive
// consecutive code values.
struct HuffmanTable {
  std::vector<uint8_t> lengths;
  std::vector<uint64_t> codes;  // MSB-first, lengths[i] significant bits

  size_t size() const { return lengths.size(); }
  double ExpectedLength(std::span<const double> q) const;
  double KraftSum() const;
  bool IsPrefixFree() const;
};

// Huffman code for the given (unnormalized) weights. Ties merge the
// lowest-index node first. Zero-weight symbols still receive (the longest)
// codes. Throws std::invalid_argument if all weights are zero or any is
// negative, std::runtime_error if a code would exceed kMaxCodeLength bits.
HuffmanTable BuildHuffman(std::span<const double> weights);

// Rebuilds canonical codes from code lengths. Throws std::invalid_argument
// when the lengths violate the Kraft inequality.
HuffmanTable CanonicalFromLengths(std::span<const uint8_t> lengths);

class BitWriter {
 public:
  void Write(uint64_t code, int bits);
  void AlignToByte();
  size_t bit_count() const { return bit_count_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  size_t bit_count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  // Returns 0 or 1, or -1 past the end of the buffer.
  int ReadBit();
  void AlignToByte();
  size_t bit_position() const { return pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

class HuffmanDecoder {
 public:
  explicit HuffmanDecoder(const HuffmanTable& table);
  // Returns the decoded symbol, -1 when the input ends mid-code, or -2 for
  // a bit pattern that is not a code word.
  int Decode(BitReader& reader) const;

 private:
  std::vector<int> count_;    // code words per length
  std::vector<int> symbols_;  // in canonical order
  int max_length_ = 0;
};

}  // namespace sanac

#endif  // SANAC_HUFFMAN_H_
