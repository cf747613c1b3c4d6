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

#include "sanac/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sanac {

void FrameSpec::Validate() const {
  if (frame_size <= 0 || crossfade_len <= 0 || crossfade_len >= frame_size) {
    throw std::invalid_argument(
        "FrameSpec: need 0 < crossfade_len < frame_size");
  }
  // Only adjacent frames may overlap.
  if (2 * crossfade_len > frame_size) {
    throw std::invalid_argument("FrameSpec: crossfade longer than half frame");
  }
}

std::vector<double> CrossfadeRise(int n) {
  std::vector<double> rise(n);
  for (int t = 0; t < n; ++t) {
    rise[t] = 0.5 - 0.5 * std::cos(std::numbers::pi * t / n);
  }
  return rise;
}

std::vector<double> CrossfadeFall(int n) {
  std::vector<double> fall(n);
  for (int t = 0; t < n; ++t) {
    fall[t] = 0.5 + 0.5 * std::cos(std::numbers::pi * t / n);
  }
  return fall;
}

size_t FrameCount(size_t length, const FrameSpec& spec) {
  const size_t n = spec.frame_size;
  const size_t hop = spec.hop();
  if (length <= n) return 1;
  return (length - n + hop - 1) / hop + 1;
}

FrameSequence Segment(std::span<const double> signal, const FrameSpec& spec) {
  spec.Validate();
  if (signal.empty()) throw std::invalid_argument("Segment: empty signal");
  FrameSequence out;
  out.spec = spec;
  out.original_length = signal.size();
  const size_t count = FrameCount(signal.size(), spec);
  out.frames.assign(count, std::vector<double>(spec.frame_size, 0.0));
  for (size_t i = 0; i < count; ++i) {
    const size_t start = i * spec.hop();
    const size_t end = std::min(signal.size(), start + spec.frame_size);
    std::copy(signal.begin() + start, signal.begin() + end,
              out.frames[i].begin());
  }
  return out;
}

std::vector<double> OverlapAdd(const FrameSequence& frames) {
  if (frames.frames.empty()) return {};
  const FrameSpec& spec = frames.spec;
  spec.Validate();
  const size_t hop = spec.hop();
  const size_t fade = spec.crossfade_len;
  const auto rise = CrossfadeRise(spec.crossfade_len);
  const auto fall = CrossfadeFall(spec.crossfade_len);

  std::vector<double> out((frames.frames.size() - 1) * hop + spec.frame_size,
                          0.0);
  for (size_t i = 0; i < frames.frames.size(); ++i) {
    const auto& frame = frames.frames[i];
    if (frame.size() != static_cast<size_t>(spec.frame_size)) {
      throw std::invalid_argument("OverlapAdd: frame size mismatch");
    }
    const size_t start = i * hop;
    const bool has_prev = i > 0;
    const bool has_next = i + 1 < frames.frames.size();
    for (size_t t = 0; t < frame.size(); ++t) {
      double w = 1.0;
      if (has_prev && t < fade) w = rise[t];
      if (has_next && t >= hop) w = fall[t - hop];
      out[start + t] += w * frame[t];
    }
  }
  out.resize(std::min(out.size(), frames.original_length));
  return out;
}

double MeanPower(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

std::vector<double> FitToLength(std::span<const double> noise, size_t length) {
  if (noise.empty()) throw std::invalid_argument("FitToLength: empty noise");
  std::vector<double> out(length);
  for (size_t i = 0; i < length; ++i) out[i] = noise[i % noise.size()];
  return out;
}

MixResult MixAtSnr(const AudioSignal& speech, const AudioSignal& noise,
                   double snr_db) {
  if (speech.sample_rate != noise.sample_rate) {
    throw std::invalid_argument("MixAtSnr: sample rate mismatch");
  }
  if (!std::isfinite(snr_db)) {
    throw std::invalid_argument("MixAtSnr: non-finite SNR");
  }
  const double speech_power = MeanPower(speech.samples);
  if (!(speech_power > 0.0)) {
    throw std::invalid_argument("MixAtSnr: speech has zero power");
  }
  if (noise.samples.empty() || !(MeanPower(noise.samples) > 0.0)) {
    throw std::invalid_argument("MixAtSnr: noise has zero power");
  }
  std::vector<double> fitted = FitToLength(noise.samples, speech.size());
  const double noise_power = MeanPower(fitted);
  if (!(noise_power > 0.0)) {
    throw std::invalid_argument("MixAtSnr: noise has zero power over speech");
  }

  MixResult out;
  out.noise_gain =
      std::sqrt(speech_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  out.scaled_noise.sample_rate = speech.sample_rate;
  out.mixture.sample_rate = speech.sample_rate;
  out.scaled_noise.samples = std::move(fitted);
  out.mixture.samples.resize(speech.size());
  for (size_t i = 0; i < speech.size(); ++i) {
    out.scaled_noise.samples[i] *= out.noise_gain;
    out.mixture.samples[i] = speech.samples[i] + out.scaled_noise.samples[i];
  }
  return out;
}

namespace {

uint32_t ReadU32(const char* p) {
  const auto* b = reinterpret_cast<const unsigned char*>(p);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t{b[3]} << 24);
}

uint16_t ReadU16(const char* p) {
  const auto* b = reinterpret_cast<const unsigned char*>(p);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioSignal ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    throw std::runtime_error(where + "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const uint32_t size = ReadU32(&bytes[pos + 4]);
    const size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > bytes.size()) {
        throw std::runtime_error(where + "truncated fmt chunk");
      }
      format = ReadU16(&bytes[body]);
      channels = ReadU16(&bytes[body + 2]);
      rate = ReadU32(&bytes[body + 4]);
      bits = ReadU16(&bytes[body + 14]);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw std::runtime_error(where + "data before fmt");
      if (format != 1 || bits != 16 || channels != 1) {
        throw std::runtime_error(where + "only 16-bit PCM mono is supported");
      }
      const size_t available = std::min<size_t>(size, bytes.size() - body);
      AudioSignal out;
      out.sample_rate = static_cast<int>(rate);
      out.samples.resize(available / 2);
      for (size_t i = 0; i < out.samples.size(); ++i) {
        const auto v = static_cast<int16_t>(ReadU16(&bytes[body + 2 * i]));
        out.samples[i] = v / 32768.0;
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw std::runtime_error(where + "no data chunk");
}

AudioSignal ReadWav(const std::filesystem::path& path, int expected_rate) {
  AudioSignal signal = ReadWav(path);
  if (signal.sample_rate != expected_rate) {
    throw std::runtime_error(path.string() + ": sample rate " +
                             std::to_string(signal.sample_rate) +
                             " Hz, expected " + std::to_string(expected_rate));
  }
  return signal;
}

void WriteWav(const std::filesystem::path& path, const AudioSignal& signal) {
  const uint32_t data_bytes = static_cast<uint32_t>(signal.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(signal.sample_rate));
  PutU32(out, static_cast<uint32_t>(signal.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (double v : signal.samples) {
    const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
    const auto s = static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    PutU16(out, static_cast<uint16_t>(s));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace sanac
