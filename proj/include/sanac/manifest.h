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

// Dataset manifests: tab-separated rows of
//
//   speech_path <TAB> noise_path <TAB> snr_db <TAB> split
//
// with split one of "train", "val", "test". Lines starting with '#' are
// comments. Relative paths resolve against $SANAC_DATA_ROOT when it is set
// and against the manifest's directory otherwise.

#ifndef SANAC_MANIFEST_H_
#define SANAC_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sanac/audio.h"
#include "sanac/training.h"

namespace sanac {

enum class Split { kTrain, kValidation, kTest };

const char* SplitName(Split split);
Split ParseSplit(const std::string& name);

struct ManifestRow {
  std::string speech_path;
  std::string noise_path;
  double snr_db = 0.0;
  Split split = Split::kTrain;
};

struct Manifest {
  std::vector<ManifestRow> rows;
  std::filesystem::path base_dir;  // for relative paths

  std::vector<ManifestRow> Rows(Split split) const;
  std::filesystem::path Resolve(const std::string& path) const;
};

Manifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path, const Manifest& manifest);

struct SplitSizes {
  int train = 500;
  int validation = 0;
  int test = 50;
};

// Lists *.wav files under each directory (recursively, sorted), shuffles the
// speech files with `seed` and assigns them to splits in order. Each row gets
// a randomly drawn noise file and SNR. Throws std::invalid_argument naming
// the shortfall when there are too few speech files.
Manifest PrepareManifest(const std::filesystem::path& speech_dir,
                         const std::filesystem::path& noise_dir,
                         const std::vector<double>& snrs_db,
                         const SplitSizes& sizes, uint64_t seed);

struct Utterance {
  std::string name;  // speech file stem
  double snr_db = 0.0;
  AudioSignal mixture;
  AudioSignal speech;
  AudioSignal noise;  // scaled, aligned with speech
};

Utterance LoadUtterance(const Manifest& manifest, const ManifestRow& row,
                        int sample_rate);

UtteranceFrames FrameUtterance(const Utterance& utterance,
                               const FrameSpec& spec);

// Loads and frames every row of `split`. Throws on unreadable files.
Dataset LoadDataset(const Manifest& manifest, Split split,
                    const FrameSpec& spec, int sample_rate);

}  // namespace sanac

#endif  // SANAC_MANIFEST_H_
