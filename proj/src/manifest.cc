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

#include "sanac/manifest.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sanac/random.h"

namespace sanac {

namespace fs = std::filesystem;

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + name + "'");
}

std::vector<ManifestRow> Manifest::Rows(Split split) const {
  std::vector<ManifestRow> out;
  for (const auto& r : rows) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

fs::path Manifest::Resolve(const std::string& path) const {
  const fs::path p(path);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("SANAC_DATA_ROOT"); root && *root) {
    return fs::path(root) / p;
  }
  return base_dir / p;
}

Manifest ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  Manifest m;
  m.base_dir = path.parent_path();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 4 tab-separated fields");
    }
    ManifestRow row;
    row.speech_path = fields[0];
    row.noise_path = fields[1];
    try {
      size_t used = 0;
      row.snr_db = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("");
      row.split = ParseSplit(fields[3]);
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad snr or split");
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

void WriteManifest(const fs::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << "# speech_path\tnoise_path\tsnr_db\tsplit\n";
  for (const auto& r : manifest.rows) {
    std::ostringstream snr;
    snr << r.snr_db;
    out << r.speech_path << '\t' << r.noise_path << '\t' << snr.str() << '\t'
        << SplitName(r.split) << '\n';
  }
}

namespace {

std::vector<fs::path> ListWavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::invalid_argument("not a directory: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") out.push_back(fs::absolute(e.path()).lexically_normal());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Manifest PrepareManifest(const fs::path& speech_dir, const fs::path& noise_dir,
                         const std::vector<double>& snrs_db,
                         const SplitSizes& sizes, uint64_t seed) {
  if (sizes.train < 0 || sizes.validation < 0 || sizes.test < 0) {
    throw std::invalid_argument("split sizes must be non-negative");
  }
  if (snrs_db.empty()) throw std::invalid_argument("no SNR values given");
  std::vector<fs::path> speech = ListWavs(speech_dir);
  const std::vector<fs::path> noise = ListWavs(noise_dir);
  const size_t needed = size_t(sizes.train) + sizes.validation + sizes.test;
  if (speech.size() < needed) {
    throw std::invalid_argument(
        "need " + std::to_string(needed) + " speech utterances in " +
        speech_dir.string() + " but found " + std::to_string(speech.size()) +
        " (short by " + std::to_string(needed - speech.size()) + ")");
  }
  if (noise.empty()) {
    throw std::invalid_argument("no noise recordings in " + noise_dir.string());
  }

  Rng rng(seed);
  rng.Shuffle(speech);
  Manifest m;
  for (size_t i = 0; i < needed; ++i) {
    ManifestRow row;
    row.speech_path = speech[i].string();
    row.noise_path = noise[rng.Index(noise.size())].string();
    row.snr_db = snrs_db[rng.Index(snrs_db.size())];
    row.split = i < size_t(sizes.train) ? Split::kTrain
                : i < size_t(sizes.train + sizes.validation)
                    ? Split::kValidation
                    : Split::kTest;
    m.rows.push_back(std::move(row));
  }
  return m;
}

Utterance LoadUtterance(const Manifest& manifest, const ManifestRow& row,
                        int sample_rate) {
  const fs::path speech_path = manifest.Resolve(row.speech_path);
  const AudioSignal speech = ReadWav(speech_path, sample_rate);
  const AudioSignal noise =
      ReadWav(manifest.Resolve(row.noise_path), sample_rate);
  MixResult mix = MixAtSnr(speech, noise, row.snr_db);
  Utterance u;
  u.name = speech_path.stem().string();
  u.snr_db = row.snr_db;
  u.speech = speech;
  u.mixture = std::move(mix.mixture);
  u.noise = std::move(mix.scaled_noise);
  return u;
}

UtteranceFrames FrameUtterance(const Utterance& utterance,
                               const FrameSpec& spec) {
  UtteranceFrames f;
  f.mixture = Segment(utterance.mixture, spec).frames;
  f.speech = Segment(utterance.speech, spec).frames;
  f.noise = Segment(utterance.noise, spec).frames;
  return f;
}

Dataset LoadDataset(const Manifest& manifest, Split split,
                    const FrameSpec& spec, int sample_rate) {
  Dataset out;
  for (const auto& row : manifest.Rows(split)) {
    out.push_back(FrameUtterance(LoadUtterance(manifest, row, sample_rate), spec));
  }
  return out;
}

}  // namespace sanac
