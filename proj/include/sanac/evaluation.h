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

#ifndef SANAC_EVALUATION_H_
#define SANAC_EVALUATION_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sanac/audio.h"
#include "sanac/checkpoint.h"
#include "sanac/codec.h"
#include "sanac/manifest.h"

namespace sanac {

// Reported in place of +inf for a distortion-free estimate.
constexpr double kSiSdrCap = 100.0;

// Scale-invariant SDR in dB, clamped to [-kSiSdrCap, kSiSdrCap]. Throws
// std::invalid_argument on length mismatch or a zero reference.
double SiSdr(std::span<const double> estimate,
             std::span<const double> reference);

// SiSdr(estimate, reference) - SiSdr(mixture, reference).
double SiSdrImprovement(std::span<const double> estimate,
                        std::span<const double> mixture,
                        std::span<const double> reference);

// Intelligibility scores from an external program, run as
//
//   <command> <reference.wav> <estimate.wav>
//
// which must print one number in [0, 1] on stdout.
class StoiAdapter {
 public:
  StoiAdapter() = default;  // unavailable
  explicit StoiAdapter(std::string command) : command_(std::move(command)) {}

  bool available() const { return !command_.empty(); }
  // nullopt when unavailable or when the program fails.
  std::optional<double> Score(const AudioSignal& estimate,
                              const AudioSignal& reference) const;

 private:
  std::string command_;
};

struct SystemMetrics {
  double kbps = 0.0;            // payload bits / duration
  double sisdr_mixture = 0.0;
  std::optional<double> sisdr_speech;   // source-aware codec only
  std::optional<double> sisdri_speech;
  std::optional<double> stoi_mixture;
  std::optional<double> stoi_speech;
  bool consistent = false;  // bitstream decode == direct decode, bit-exact
};

// Runs one utterance through the full bitstream path of `codec`.
SystemMetrics EvaluateUtterance(const Codec& codec, const Utterance& utterance,
                                const StoiAdapter& stoi);

struct EvalRow {
  std::string utterance;
  double snr_db = 0.0;
  double xi = 0.0;
  SystemMetrics sanac;
  SystemMetrics baseline;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

// Codecs for one target-entropy setting.
struct SystemPair {
  double xi = 0.0;
  const Codec* sanac = nullptr;
  const Codec* baseline = nullptr;
};

struct EvalOptions {
  std::vector<double> snr_filter;  // empty = all
  StoiAdapter stoi;
  std::function<void(const std::string&)> warn;
};

// One row per (test utterance, pair), in manifest order. Unreadable rows are
// skipped with a warning; throws std::runtime_error if nothing is left.
EvalReport EvaluateCorpus(std::span<const SystemPair> pairs,
                          const Manifest& manifest, const EvalOptions& options);

struct SummaryRow {
  std::string system;
  double xi = 0.0;
  double snr_db = 0.0;
  int count = 0;
  double kbps = 0.0;
  double sisdr_mixture = 0.0;
  std::optional<double> sisdr_speech;
  std::optional<double> sisdri_speech;
  std::optional<double> stoi_mixture;
  std::optional<double> stoi_speech;
};

// Means per (system, xi, snr).
std::vector<SummaryRow> Summarize(const EvalReport& report);

std::string ReportToTsv(const EvalReport& report);
std::string SummaryToTsv(const std::vector<SummaryRow>& summary);

// Writes report.tsv, summary.tsv and four bar-chart panels as SVG.
void WriteReport(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace sanac

#endif  // SANAC_EVALUATION_H_
