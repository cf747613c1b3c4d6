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

#ifndef SANAC_CHECKPOINT_H_
#define SANAC_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sanac/audio.h"
#include "sanac/bitstream.h"
#include "sanac/model.h"

namespace sanac {

constexpr uint32_t kCheckpointVersion = 1;

// Everything a decoder needs: architecture, weights (codebooks included),
// annealing state and the hard-count centroid usage used for Huffman tables.
struct Checkpoint {
  CodecKind kind = CodecKind::kSourceAware;
  ModelConfig config;
  FrameSpec frame_spec;
  int sample_rate = kDefaultSampleRate;
  int stage = 1;
  double alpha = 0.0;
  double target_entropy = 0.0;  // total bits per code position
  double target_ratio = 0.0;
  std::vector<double> parameters;
  // Per code block, num_centroids counts.
  std::vector<std::vector<double>> usage_counts;
};

// Canonical byte image (without the integrity trailer).
std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& checkpoint);
// SHA-256 of the canonical byte image.
ContentHash HashCheckpoint(const Checkpoint& checkpoint);
ContentHash Sha256(std::span<const uint8_t> bytes);
std::string HexDigest(const ContentHash& hash);

// File = byte image + 32-byte SHA-256 trailer. Load verifies the trailer
// and throws std::runtime_error on corruption or version mismatch.
void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

Checkpoint MakeCheckpoint(const Model& model, const FrameSpec& frame_spec,
                          int sample_rate);
Model ModelFromCheckpoint(const Checkpoint& checkpoint);

// Standalone codebook export: (M, L, row-major centroids).
struct CodebookExport {
  int size = 0;
  int dim = 0;
  std::vector<double> centroids;
};
CodebookExport ExportCodebook(const Checkpoint& checkpoint, int code_block);
// Little-endian u32 M, u32 L, then M * L float64 values.
void WriteCodebookFile(const std::filesystem::path& path,
                       const CodebookExport& codebook);
CodebookExport ReadCodebookFile(const std::filesystem::path& path);

}  // namespace sanac

#endif  // SANAC_CHECKPOINT_H_
