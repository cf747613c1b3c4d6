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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sanac/audio.h"
#include "sanac/bitstream.h"
#include "sanac/checkpoint.h"
#include "sanac/manifest.h"
#include "test_util.h"
#include "toy_corpus.h"

namespace sanac {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int status = -1;
  std::string out;  // stdout and stderr
};

RunResult Sanac(const std::string& args) {
  const std::string cmd = std::string(SANAC_CLI) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 512> buf;
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string TinyModelFlags() {
  std::string s;
  for (const char* kv :
       {"model.frame_size=16", "model.code_length=8", "model.vq_dim=2",
        "model.trunk_channels=4", "model.bottleneck_channels=2",
        "model.transform_channels=8", "model.conv_kernel=3",
        "model.num_centroids=4", "model.encoder_blocks=1", "model.post_blocks=1",
        "model.transform_blocks=1", "model.decoder_blocks=1",
        "frames.crossfade_len=2", "early_stop.max_stage_epochs=1",
        "early_stop.max_epochs=3", "training.learning_rate=0.003",
        "training.kmeans_iterations=3"}) {
    s += std::string(" --set ") + kv;
  }
  return s;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir();
    testing::WriteToyWavs(dir_->path(), 8, 2, 0.1, 5);
    const RunResult prep =
        Sanac("prepare --speech-dir " + P("speech") + " --noise-dir " + P("noise") +
            " --train 4 --val 2 --test 2 -o " + P("m.tsv"));
    ASSERT_EQ(prep.status, 0) << prep.out;
    for (const char* kind : {"sanac", "baseline"}) {
      const RunResult r = Sanac("train --manifest " + P("m.tsv") + TinyModelFlags() +
                              " --set training.kind=" + kind + " --set loss.xi=1" +
                              " -o " + P(std::string(kind) + ".ckpt") + " --log " +
                              P(std::string(kind) + ".jsonl"));
      ASSERT_EQ(r.status, 0) << r.out;
    }
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string P(const std::string& name) { return (*dir_ / name).string(); }

  static testing::TempDir* dir_;
};

testing::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, PrepareWroteSplits) {
  const Manifest m = ReadManifest(P("m.tsv"));
  EXPECT_EQ(m.Rows(Split::kTrain).size(), 4u);
  EXPECT_EQ(m.Rows(Split::kValidation).size(), 2u);
  EXPECT_EQ(m.Rows(Split::kTest).size(), 2u);
}

TEST_F(CliTest, TrainWroteCheckpointAndLog) {
  const Checkpoint c = LoadCheckpoint(P("sanac.ckpt"));
  EXPECT_EQ(c.config.frame_size, 16);
  EXPECT_EQ(c.target_entropy, 1.0);
  EXPECT_EQ(c.kind, CodecKind::kSourceAware);
  EXPECT_EQ(LoadCheckpoint(P("baseline.ckpt")).kind, CodecKind::kBaseline);
  std::ifstream log(P("sanac.jsonl"));
  int lines = 0;
  for (std::string line; std::getline(log, line);) {
    EXPECT_NE(line.find("\"validation_loss\""), std::string::npos);
    ++lines;
  }
  EXPECT_EQ(lines, 3);
}

TEST_F(CliTest, EncodeDecodeKeepsLength) {
  const std::string wav = P("speech/toy0000.wav");
  const RunResult enc =
      Sanac("encode --checkpoint " + P("sanac.ckpt") + " -i " + wav + " -o " + P("x.sanc"));
  ASSERT_EQ(enc.status, 0) << enc.out;
  const RunResult dec = Sanac("decode --checkpoint " + P("sanac.ckpt") + " -i " +
                            P("x.sanc") + " -o " + P("x"));
  ASSERT_EQ(dec.status, 0) << dec.out;
  const size_t n = ReadWav(wav, 16000).size();
  EXPECT_EQ(ReadWav(P("x_mixture.wav"), 16000).size(), n);
  EXPECT_EQ(ReadWav(P("x_speech.wav"), 16000).size(), n);
  EXPECT_EQ(ReadWav(P("x_noise.wav"), 16000).size(), n);

  const RunResult bdec = Sanac("decode --checkpoint " + P("baseline.ckpt") + " -i " +
                             P("x.sanc") + " -o " + P("y"));
  EXPECT_EQ(bdec.status, 2);
  EXPECT_NE(bdec.out.find("model hash mismatch"), std::string::npos) << bdec.out;
}

TEST_F(CliTest, EvalWritesReport) {
  const RunResult r = Sanac("eval --manifest " + P("m.tsv") + " --sanac " + P("sanac.ckpt") +
                          " --baseline " + P("baseline.ckpt") + " -o " + P("eval"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("system\txi"), std::string::npos);
  std::ifstream in(P("eval/report.tsv"));
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 1 + 2);
  for (const char* f : {"summary.tsv", "stoi_mixture.svg", "sisdri_speech.svg"}) {
    EXPECT_TRUE(fs::exists(*dir_ / "eval" / f)) << f;
  }
  const RunResult filtered = Sanac("eval --manifest " + P("m.tsv") + " --sanac " +
                                 P("sanac.ckpt") + " --baseline " + P("baseline.ckpt") +
                                 " --xi 2 -o " + P("eval2"));
  EXPECT_EQ(filtered.status, 1) << filtered.out;
}

TEST_F(CliTest, UsageErrors) {
  const RunResult unknown = Sanac("train --manifest " + P("m.tsv") + " --set loss.zeta=1 -o " +
                                P("z.ckpt"));
  EXPECT_EQ(unknown.status, 1);
  EXPECT_NE(unknown.out.find("loss.zeta"), std::string::npos) << unknown.out;
  EXPECT_EQ(Sanac("").status, 1);
  EXPECT_EQ(Sanac("encode -i x.wav").status, 1);
  EXPECT_EQ(Sanac("eval --manifest " + P("m.tsv") + " --sanac a --baseline b --baseline c")
                .status,
            1);
  EXPECT_EQ(Sanac("encode --checkpoint " + P("missing.ckpt") + " -i a -o b").status, 2);
}

TEST_F(CliTest, HelpListsConfigKeys) {
  const RunResult r = Sanac("train --help");
  EXPECT_EQ(r.status, 0);
  for (const char* key : {"model.code_length", "loss.xi", "loss.psi", "alpha.max",
                          "early_stop.stop_patience", "training.learning_rate",
                          "paths.manifest"}) {
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace sanac
