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

#ifndef SANAC_AUDIO_H_
#define SANAC_AUDIO_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace sanac {

constexpr int kDefaultSampleRate = 16000;

struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Framing geometry. Adjacent frames overlap by `crossfade_len` samples, and
// the crossfade uses the two halves of a periodic Hann window of length
// 2 * crossfade_len.
struct FrameSpec {
  int frame_size = 512;
  int crossfade_len = 64;

  int hop() const { return frame_size - crossfade_len; }
  int window_length() const { return 2 * crossfade_len; }
  // Throws std::invalid_argument on inconsistent geometry.
  void Validate() const;
};

struct FrameSequence {
  std::vector<std::vector<double>> frames;
  FrameSpec spec;
  size_t original_length = 0;
};

// Rising and falling halves of the periodic Hann window of length 2 * n;
// rise[t] + fall[t] = 1 for every t in [0, n).
std::vector<double> CrossfadeRise(int n);
std::vector<double> CrossfadeFall(int n);

// Number of frames needed to cover `length` samples.
size_t FrameCount(size_t length, const FrameSpec& spec);

// Splits `signal` into overlapping frames; the last frame is zero-padded.
FrameSequence Segment(std::span<const double> signal, const FrameSpec& spec);
inline FrameSequence Segment(const AudioSignal& signal,
                             const FrameSpec& spec) {
  return Segment(signal.samples, spec);
}

// Crossfades adjacent frames over the overlap and truncates the result to
// frames.original_length.
std::vector<double> OverlapAdd(const FrameSequence& frames);

double MeanPower(std::span<const double> x);

// Repeats or truncates `noise` to `length` samples.
std::vector<double> FitToLength(std::span<const double> noise, size_t length);

struct MixResult {
  AudioSignal mixture;
  AudioSignal scaled_noise;
  double noise_gain = 0.0;
};

// Scales the noise so that 10 log10(P_speech / P_noise) equals `snr_db` and
// adds it to the speech. Throws std::invalid_argument for silent inputs or
// mismatched sample rates.
MixResult MixAtSnr(const AudioSignal& speech, const AudioSignal& noise,
                   double snr_db);

// 16-bit PCM mono WAV. Samples are scaled by 1/32768 on read.
AudioSignal ReadWav(const std::filesystem::path& path);
// Reads and checks the sample rate; resampling is not supported.
AudioSignal ReadWav(const std::filesystem::path& path, int expected_rate);
// Samples are clipped to [-1, 32767/32768] before conversion.
void WriteWav(const std::filesystem::path& path, const AudioSignal& signal);

}  // namespace sanac

#endif  // SANAC_AUDIO_H_
