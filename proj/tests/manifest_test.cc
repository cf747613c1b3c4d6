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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "test_util.h"
#include "toy_corpus.h"

namespace sanac {
namespace {

namespace fs = std::filesystem;

TEST(ManifestTest, DefaultSplitOfFiveHundredFifty) {
  testing::TempDir dir;
  testing::WriteToyWavs(dir.path(), 550, 3, 0.01, 1);
  const Manifest m =
      PrepareManifest(dir / "speech", dir / "noise", {0.0, 5.0}, SplitSizes{}, 7);
  ASSERT_EQ(m.rows.size(), 550u);
  EXPECT_EQ(m.Rows(Split::kTrain).size(), 500u);
  EXPECT_EQ(m.Rows(Split::kValidation).size(), 0u);
  EXPECT_EQ(m.Rows(Split::kTest).size(), 50u);
  std::set<std::string> speech;
  std::set<double> snrs;
  for (const auto& r : m.rows) {
    speech.insert(r.speech_path);
    snrs.insert(r.snr_db);
    EXPECT_TRUE(fs::path(r.speech_path).is_absolute());
  }
  EXPECT_EQ(speech.size(), 550u);  // no utterance in two splits
  EXPECT_EQ(snrs, (std::set<double>{0.0, 5.0}));
}

TEST(ManifestTest, DeterministicInSeed) {
  testing::TempDir dir;
  testing::WriteToyWavs(dir.path(), 30, 3, 0.01, 2);
  const SplitSizes sizes{20, 5, 5};
  const Manifest a = PrepareManifest(dir / "speech", dir / "noise", {0, 5}, sizes, 3);
  const Manifest b = PrepareManifest(dir / "speech", dir / "noise", {0, 5}, sizes, 3);
  const Manifest c = PrepareManifest(dir / "speech", dir / "noise", {0, 5}, sizes, 4);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  bool differs = false;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].speech_path, b.rows[i].speech_path);
    EXPECT_EQ(a.rows[i].noise_path, b.rows[i].noise_path);
    EXPECT_EQ(a.rows[i].snr_db, b.rows[i].snr_db);
    differs |= a.rows[i].speech_path != c.rows[i].speech_path;
  }
  EXPECT_TRUE(differs);
}

TEST(ManifestTest, ShortfallNamesTheCount) {
  testing::TempDir dir;
  testing::WriteToyWavs(dir.path(), 10, 1, 0.01, 3);
  try {
    PrepareManifest(dir / "speech", dir / "noise", {0}, SplitSizes{8, 2, 3}, 1);
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("need 13"), std::string::npos) << what;
    EXPECT_NE(what.find("found 10"), std::string::npos) << what;
    EXPECT_NE(what.find("short by 3"), std::string::npos) << what;
  }
  EXPECT_THROW(PrepareManifest(dir / "speech", dir / "missing", {0},
                               SplitSizes{1, 0, 1}, 1),
               std::exception);
  EXPECT_THROW(PrepareManifest(dir / "speech", dir / "noise", {},
                               SplitSizes{1, 0, 1}, 1),
               std::invalid_argument);
}

TEST(ManifestTest, WriteReadRoundTrip) {
  testing::TempDir dir;
  Manifest m;
  m.rows = {{"a/s1.wav", "n/n1.wav", 0.0, Split::kTrain},
            {"a/s2.wav", "n/n2.wav", 5.0, Split::kValidation},
            {"/abs/s3.wav", "n/n1.wav", -2.5, Split::kTest}};
  WriteManifest(dir / "m.tsv", m);
  const Manifest back = ReadManifest(dir / "m.tsv");
  ASSERT_EQ(back.rows.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.rows[i].speech_path, m.rows[i].speech_path);
    EXPECT_EQ(back.rows[i].noise_path, m.rows[i].noise_path);
    EXPECT_EQ(back.rows[i].snr_db, m.rows[i].snr_db);
    EXPECT_EQ(back.rows[i].split, m.rows[i].split);
  }
  EXPECT_EQ(back.base_dir, dir.path());
}

TEST(ManifestTest, RelativePathsAndDataRoot) {
  Manifest m;
  m.base_dir = "/data/here";
  unsetenv("SANAC_DATA_ROOT");
  EXPECT_EQ(m.Resolve("x/y.wav"), fs::path("/data/here/x/y.wav"));
  EXPECT_EQ(m.Resolve("/abs.wav"), fs::path("/abs.wav"));
  setenv("SANAC_DATA_ROOT", "/elsewhere", 1);
  EXPECT_EQ(m.Resolve("x/y.wav"), fs::path("/elsewhere/x/y.wav"));
  unsetenv("SANAC_DATA_ROOT");
}

TEST(ManifestTest, MalformedRowsRejected) {
  testing::TempDir dir;
  { std::ofstream(dir / "bad.tsv") << "a.wav\tb.wav\t0\n"; }
  EXPECT_THROW(ReadManifest(dir / "bad.tsv"), std::exception);
  { std::ofstream(dir / "bad2.tsv") << "a.wav\tb.wav\tzero\ttrain\n"; }
  EXPECT_THROW(ReadManifest(dir / "bad2.tsv"), std::exception);
  { std::ofstream(dir / "bad3.tsv") << "a.wav\tb.wav\t0\tdev\n"; }
  EXPECT_THROW(ReadManifest(dir / "bad3.tsv"), std::exception);
  { std::ofstream(dir / "ok.tsv") << "# comment\n\na.wav\tb.wav\t0\tval\n"; }
  EXPECT_EQ(ReadManifest(dir / "ok.tsv").rows.size(), 1u);
}

TEST(ManifestTest, LoadedUtteranceMixesAtRequestedSnr) {
  testing::TempDir dir;
  testing::WriteToyWavs(dir.path(), 3, 1, 0.5, 4);
  const Manifest m =
      PrepareManifest(dir / "speech", dir / "noise", {5.0}, SplitSizes{2, 0, 1}, 1);
  const Utterance u = LoadUtterance(m, m.rows[0], 16000);
  double ps = 0.0, pn = 0.0;
  for (size_t i = 0; i < u.speech.size(); ++i) {
    ps += u.speech.samples[i] * u.speech.samples[i];
    pn += u.noise.samples[i] * u.noise.samples[i];
    ASSERT_NEAR(u.mixture.samples[i], u.speech.samples[i] + u.noise.samples[i], 1e-12);
  }
  EXPECT_NEAR(10.0 * std::log10(ps / pn), 5.0, 1e-6);

  const FrameSpec spec{128, 16};
  const Dataset d = LoadDataset(m, Split::kTrain, spec, 16000);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].mixture.size(), FrameCount(8000, spec));
  EXPECT_EQ(d[0].speech.size(), d[0].mixture.size());
  EXPECT_EQ(d[0].noise.size(), d[0].mixture.size());
}

}  // namespace
}  // namespace sanac
