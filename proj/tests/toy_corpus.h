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

// Synthetic speech-like and noise signals for tests.
//
// "Speech" is a harmonic tone with a wandering pitch, gated into syllable-
// length bursts. "Noise" is coloured noise with a slow random gain.

#ifndef SANAC_TESTS_TOY_CORPUS_H_
#define SANAC_TESTS_TOY_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sanac/audio.h"
#include "sanac/manifest.h"
#include "sanac/random.h"

namespace sanac::testing {

AudioSignal ToySpeech(size_t length, int sample_rate, Rng& rng);
AudioSignal ToyNoise(size_t length, int sample_rate, Rng& rng);

struct ToyCorpusOptions {
  int utterances = 10;
  double seconds = 3.0;
  int sample_rate = kDefaultSampleRate;
  std::vector<double> snrs_db = {0.0, 5.0};
  uint64_t seed = 1;
};

// Mixtures at SNRs drawn from `snrs_db`, named toy0000, toy0001, ...
std::vector<Utterance> MakeToyCorpus(const ToyCorpusOptions& options);

// Writes speech/toyNNNN.wav and noise/noiseNNNN.wav under `dir`.
void WriteToyWavs(const std::filesystem::path& dir, int speech_count,
                  int noise_count, double seconds, uint64_t seed);

}  // namespace sanac::testing

#endif  // SANAC_TESTS_TOY_CORPUS_H_
