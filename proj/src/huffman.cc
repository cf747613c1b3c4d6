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

#include "sanac/huffman.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace sanac {

double HuffmanTable::ExpectedLength(std::span<const double> q) const {
  double acc = 0.0;
  for (size_t i = 0; i < lengths.size() && i < q.size(); ++i) {
    acc += q[i] * lengths[i];
  }
  return acc;
}

double HuffmanTable::KraftSum() const {
  double acc = 0.0;
  for (uint8_t len : lengths) acc += std::ldexp(1.0, -int(len));
  return acc;
}

bool HuffmanTable::IsPrefixFree() const {
  for (size_t a = 0; a < lengths.size(); ++a) {
    for (size_t b = 0; b < lengths.size(); ++b) {
      if (a == b || lengths[a] > lengths[b]) continue;
      if (lengths[a] == 0) return false;
      const uint64_t prefix = codes[b] >> (lengths[b] - lengths[a]);
      if (prefix == codes[a]) return false;
    }
  }
  return true;
}

HuffmanTable BuildHuffman(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("BuildHuffman: no symbols");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("BuildHuffman: invalid weight");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("BuildHuffman: all-zero histogram");
  }
  const size_t n = weights.size();
  if (n == 1) return CanonicalFromLengths(std::vector<uint8_t>{1});

  // (weight, node id); ids of merged nodes grow, so equal weights resolve
  // toward the lowest index.
  using Entry = std::tuple<double, size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  std::vector<size_t> parent(2 * n - 1, 0);
  for (size_t i = 0; i < n; ++i) heap.emplace(weights[i], i);
  size_t next = n;
  while (heap.size() > 1) {
    const auto [wa, a] = heap.top();
    heap.pop();
    const auto [wb, b] = heap.top();
    heap.pop();
    parent[a] = next;
    parent[b] = next;
    heap.emplace(wa + wb, next);
    ++next;
  }
  const size_t root = next - 1;

  std::vector<uint8_t> lengths(n);
  for (size_t i = 0; i < n; ++i) {
    int depth = 0;
    for (size_t v = i; v != root; v = parent[v]) ++depth;
    if (depth > kMaxCodeLength) {
      throw std::runtime_error("BuildHuffman: code length exceeds limit");
    }
    lengths[i] = static_cast<uint8_t>(depth);
  }
  return CanonicalFromLengths(lengths);
}

HuffmanTable CanonicalFromLengths(std::span<const uint8_t> lengths) {
  HuffmanTable table;
  table.lengths.assign(lengths.begin(), lengths.end());
  table.codes.assign(lengths.size(), 0);
  for (uint8_t len : lengths) {
    if (len == 0 || len > kMaxCodeLength) {
      throw std::invalid_argument("CanonicalFromLengths: bad code length");
    }
  }
  if (table.KraftSum() > 1.0) {
    throw std::invalid_argument("CanonicalFromLengths: Kraft sum exceeds 1");
  }
  std::vector<size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return lengths[a] < lengths[b];
  });
  uint64_t code = 0;
  int prev_len = lengths[order[0]];
  for (size_t i = 0; i < order.size(); ++i) {
    const int len = lengths[order[i]];
    if (i > 0) {
      ++code;
      code <<= (len - prev_len);
    }
    table.codes[order[i]] = code;
    prev_len = len;
  }
  return table;
}

void BitWriter::Write(uint64_t code, int bits) {
  for (int i = bits - 1; i >= 0; --i) {
    if (bit_count_ % 8 == 0) bytes_.push_back(0);
    if ((code >> i) & 1u) {
      bytes_.back() |= static_cast<uint8_t>(0x80u >> (bit_count_ % 8));
    }
    ++bit_count_;
  }
}

void BitWriter::AlignToByte() { bit_count_ = bytes_.size() * 8; }

int BitReader::ReadBit() {
  if (pos_ >= bytes_.size() * 8) return -1;
  const int bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
  ++pos_;
  return bit;
}

void BitReader::AlignToByte() { pos_ = (pos_ + 7) / 8 * 8; }

HuffmanDecoder::HuffmanDecoder(const HuffmanTable& table) {
  for (uint8_t len : table.lengths) max_length_ = std::max<int>(max_length_, len);
  count_.assign(max_length_ + 1, 0);
  for (uint8_t len : table.lengths) ++count_[len];
  symbols_.resize(table.size());
  std::iota(symbols_.begin(), symbols_.end(), 0);
  std::stable_sort(symbols_.begin(), symbols_.end(), [&](int a, int b) {
    return table.lengths[a] < table.lengths[b];
  });
}

int HuffmanDecoder::Decode(BitReader& reader) const {
  // Canonical decoding: within each length, code words are consecutive and
  // start right after the (shifted) last code of the previous length.
  uint64_t code = 0;
  uint64_t first = 0;
  size_t index = 0;
  for (int len = 1; len <= max_length_; ++len) {
    const int bit = reader.ReadBit();
    if (bit < 0) return -1;
    code |= static_cast<uint64_t>(bit);
    const uint64_t count = count_[len];
    if (code - first < count) {
      return symbols_[index + (code - first)];
    }
    index += count;
    first += count;
    first <<= 1;
    code <<= 1;
  }
  return -2;
}

}  // namespace sanac
