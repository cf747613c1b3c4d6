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

// sanac: dataset preparation, training, coding and evaluation.
//
// Exit status: 0 on success, 1 on usage errors, 2 on runtime errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sanac/audio.h"
#include "sanac/checkpoint.h"
#include "sanac/codec.h"
#include "sanac/config.h"
#include "sanac/evaluation.h"
#include "sanac/manifest.h"
#include "sanac/training.h"

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<uint8_t> ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

void WriteBytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::string ConfigKeyHelp() {
  std::ostringstream out;
  out << "Run-config keys (JSON file sections or --set key=value):\n";
  for (const auto& k : sanac::ConfigKeys()) {
    out << "  " << k.name << " = " << k.default_value << "\n      " << k.help
        << "\n";
  }
  return out.str();
}

struct PrepareArgs {
  std::string speech_dir, noise_dir, out = "manifest.tsv";
  std::vector<double> snrs = {0.0, 5.0};
  int train = 500, val = 0, test = 50;
  uint64_t seed = 1;
};

void RunPrepare(const PrepareArgs& a) {
  const sanac::Manifest m = sanac::PrepareManifest(
      a.speech_dir, a.noise_dir, a.snrs, {a.train, a.val, a.test}, a.seed);
  sanac::WriteManifest(a.out, m);
  std::cerr << "wrote " << m.rows.size() << " rows to " << a.out << "\n";
}

struct TrainArgs {
  std::string config, manifest, out, log;
  std::vector<std::string> overrides;
};

void RunTrain(const TrainArgs& a) {
  sanac::RunConfig cfg;
  try {
    if (!a.config.empty()) cfg = sanac::LoadRunConfig(a.config);
    for (const auto& o : a.overrides) sanac::ApplyOverride(cfg, o);
    if (!a.manifest.empty()) cfg.manifest = a.manifest;
    if (!a.out.empty()) cfg.checkpoint = a.out;
    if (!a.log.empty()) cfg.log = a.log;
    sanac::FinalizeRunConfig(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.manifest.empty()) throw UsageError("no manifest (paths.manifest)");
  if (cfg.checkpoint.empty()) throw UsageError("no output (paths.checkpoint)");

  const auto& t = cfg.training;
  const sanac::Manifest manifest = sanac::ReadManifest(cfg.manifest);
  const sanac::Dataset train =
      sanac::LoadDataset(manifest, sanac::Split::kTrain, t.frames, t.sample_rate);
  const sanac::Dataset val = sanac::LoadDataset(
      manifest, sanac::Split::kValidation, t.frames, t.sample_rate);
  if (train.empty() || val.empty()) {
    throw std::runtime_error("manifest needs train and val rows for training");
  }

  std::unique_ptr<std::ofstream> log;
  if (!cfg.log.empty()) {
    log = std::make_unique<std::ofstream>(cfg.log, std::ios::app);
    if (!*log) throw std::runtime_error("cannot open log " + cfg.log);
  }
  const auto on_epoch = [&](const sanac::EpochRecord& r) {
    const nlohmann::json j = {{"epoch", r.epoch},
                              {"stage", r.stage},
                              {"alpha", r.alpha},
                              {"train_loss", r.train_loss},
                              {"validation_loss", r.validation_loss},
                              {"entropies", r.entropies},
                              {"improved", r.improved}};
    std::cerr << j.dump() << "\n";
    if (log) *log << j.dump() << std::endl;
  };
  const sanac::TrainingResult result =
      sanac::RunTraining(t, train, val, on_epoch);
  sanac::SaveCheckpoint(cfg.checkpoint, result.checkpoint);
  std::cerr << "wrote " << cfg.checkpoint << " (sha256 "
            << sanac::HexDigest(sanac::HashCheckpoint(result.checkpoint))
            << ")\n";
}

void RunEncode(const std::string& checkpoint, const std::string& in,
               const std::string& out) {
  const sanac::Codec codec(sanac::LoadCheckpoint(checkpoint));
  const sanac::AudioSignal x =
      sanac::ReadWav(in, codec.checkpoint().sample_rate);
  const sanac::EncodedStream stream = codec.Encode(x);
  WriteBytes(out, stream.bytes);
  std::cerr << "wrote " << stream.bytes.size() << " bytes, "
            << static_cast<double>(stream.payload_bits) /
                   std::max(x.duration_seconds(), 1e-9) / 1000.0
            << " kbps payload\n";
}

std::vector<std::string> SourceNames(int count) {
  if (count == 2) return {"speech", "noise"};
  std::vector<std::string> out;
  for (int k = 0; k < count; ++k) out.push_back("source" + std::to_string(k));
  return out;
}

void RunDecode(const std::string& checkpoint, const std::string& in,
               const std::string& prefix) {
  const sanac::Codec codec(sanac::LoadCheckpoint(checkpoint));
  const sanac::DecodedAudio audio = codec.Decode(ReadBytes(in));
  const int rate = codec.checkpoint().sample_rate;
  sanac::WriteWav(prefix + "_mixture.wav", {audio.mixture, rate});
  if (codec.model().kind() == sanac::CodecKind::kSourceAware) {
    const auto names = SourceNames(static_cast<int>(audio.sources.size()));
    for (size_t k = 0; k < audio.sources.size(); ++k) {
      sanac::WriteWav(prefix + "_" + names[k] + ".wav", {audio.sources[k], rate});
    }
  }
}

struct EvalArgs {
  std::string manifest, out = "eval", stoi_command;
  std::vector<std::string> sanac, baseline;
  std::vector<double> xis, snrs;
};

void RunEval(const EvalArgs& a) {
  if (a.sanac.size() != a.baseline.size()) {
    throw UsageError("--sanac and --baseline must be given the same number of times");
  }
  std::vector<std::unique_ptr<sanac::Codec>> codecs;
  std::vector<sanac::SystemPair> pairs;
  for (size_t i = 0; i < a.sanac.size(); ++i) {
    auto s = std::make_unique<sanac::Codec>(sanac::LoadCheckpoint(a.sanac[i]));
    auto b = std::make_unique<sanac::Codec>(sanac::LoadCheckpoint(a.baseline[i]));
    const double xi = s->checkpoint().target_entropy;
    if (!a.xis.empty() &&
        std::find(a.xis.begin(), a.xis.end(), xi) == a.xis.end()) {
      continue;
    }
    pairs.push_back({xi, s.get(), b.get()});
    codecs.push_back(std::move(s));
    codecs.push_back(std::move(b));
  }
  if (pairs.empty()) throw UsageError("no checkpoint pair matches --xi");

  sanac::EvalOptions options;
  options.snr_filter = a.snrs;
  options.stoi = sanac::StoiAdapter(a.stoi_command);
  options.warn = [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  const sanac::EvalReport report =
      sanac::EvaluateCorpus(pairs, sanac::ReadManifest(a.manifest), options);
  sanac::WriteReport(a.out, report);
  std::cout << sanac::SummaryToTsv(sanac::Summarize(report));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-aware neural audio codec"};
  app.require_subcommand(1);

  PrepareArgs prepare;
  auto* p = app.add_subcommand("prepare", "Write a dataset manifest");
  p->add_option("--speech-dir", prepare.speech_dir, "clean speech WAVs")->required();
  p->add_option("--noise-dir", prepare.noise_dir, "noise WAVs")->required();
  p->add_option("--snr", prepare.snrs, "mixing SNRs in dB")->delimiter(',')
      ->capture_default_str();
  p->add_option("--train", prepare.train, "training utterances")->capture_default_str();
  p->add_option("--val", prepare.val, "validation utterances")->capture_default_str();
  p->add_option("--test", prepare.test, "test utterances")->capture_default_str();
  p->add_option("--seed", prepare.seed, "shuffle seed")->capture_default_str();
  p->add_option("-o,--out", prepare.out, "manifest path")->capture_default_str();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a codec");
  t->add_option("-c,--config", train.config, "JSON run config");
  t->add_option("--set", train.overrides, "override a config key (key=value)");
  t->add_option("--manifest", train.manifest, "overrides paths.manifest");
  t->add_option("-o,--out", train.out, "overrides paths.checkpoint");
  t->add_option("--log", train.log, "overrides paths.log");
  t->footer(ConfigKeyHelp());

  std::string ckpt, in, out;
  auto* e = app.add_subcommand("encode", "Encode a WAV file into a bitstream");
  e->add_option("--checkpoint", ckpt, "trained checkpoint")->required();
  e->add_option("-i,--in", in, "input WAV")->required();
  e->add_option("-o,--out", out, "output bitstream")->required();

  auto* d = app.add_subcommand(
      "decode", "Decode a bitstream into mixture and per-source WAVs");
  d->add_option("--checkpoint", ckpt, "trained checkpoint")->required();
  d->add_option("-i,--in", in, "input bitstream")->required();
  d->add_option("-o,--out", out,
                "output prefix; writes <prefix>_mixture.wav and, for the "
                "source-aware codec, <prefix>_speech.wav and <prefix>_noise.wav")
      ->required();

  EvalArgs eval;
  auto* v = app.add_subcommand("eval", "Compare source-aware and baseline codecs");
  v->add_option("--manifest", eval.manifest, "manifest with test rows")->required();
  v->add_option("--sanac", eval.sanac, "source-aware checkpoint, one per xi")->required();
  v->add_option("--baseline", eval.baseline, "baseline checkpoint, paired in order")
      ->required();
  v->add_option("--xi", eval.xis, "evaluate only these target entropies")
      ->delimiter(',');
  v->add_option("--snr", eval.snrs, "evaluate only these input SNRs")->delimiter(',');
  v->add_option("--stoi-command", eval.stoi_command,
                "external STOI program: <cmd> <ref.wav> <est.wav>");
  v->add_option("-o,--out", eval.out, "report directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  try {
    if (*p) RunPrepare(prepare);
    if (*t) RunTrain(train);
    if (*e) RunEncode(ckpt, in, out);
    if (*d) RunDecode(ckpt, in, out);
    if (*v) RunEval(eval);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
