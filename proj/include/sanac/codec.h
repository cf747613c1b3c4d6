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

#ifndef SANAC_CODEC_H_
#define SANAC_CODEC_H_

#include <span>
#include <vector>

#include "sanac/audio.h"
#include "sanac/bitstream.h"
#include "sanac/checkpoint.h"
#include "sanac/huffman.h"
#include "sanac/model.h"

namespace sanac {

struct DecodedAudio {
  std::vector<double> mixture;
  // One waveform per code block (speech, noise for the source-aware codec).
  std::vector<std::vector<double>> sources;
};

// Waveform codec around a trained checkpoint: framing, encoder, nearest-
// centroid quantization, Huffman bitstream, decoder and overlap-add.
class Codec {
 public:
  explicit Codec(Checkpoint checkpoint);

  const Checkpoint& checkpoint() const { return checkpoint_; }
  const Model& model() const { return model_; }
  const ContentHash& hash() const { return hash_; }
  const std::vector<HuffmanTable>& tables() const { return tables_; }

  CodeIndices Quantize(std::span<const double> signal) const;
  DecodedAudio Reconstruct(const CodeIndices& indices,
                           size_t original_length) const;

  CodecHeader MakeHeader(int frame_count, size_t original_length) const;
  EncodedStream Encode(const AudioSignal& signal) const;
  // Throws BitstreamError, including kHashMismatch for streams produced by a
  // different checkpoint.
  DecodedAudio Decode(std::span<const uint8_t> bytes) const;

 private:
  Checkpoint checkpoint_;
  Model model_;
  ContentHash hash_;
  std::vector<HuffmanTable> tables_;
};

}  // namespace sanac

#endif  // SANAC_CODEC_H_
