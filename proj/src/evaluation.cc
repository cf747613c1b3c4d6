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

#include "sanac/evaluation.h"

#include <stdlib.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace sanac {

namespace fs = std::filesystem;

double SiSdr(std::span<const double> estimate,
             std::span<const double> reference) {
  if (estimate.size() != reference.size() || reference.empty()) {
    throw std::invalid_argument("SiSdr: length mismatch");
  }
  double dot = 0.0, ref_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    dot += estimate[i] * reference[i];
    ref_energy += reference[i] * reference[i];
  }
  if (ref_energy == 0.0) throw std::invalid_argument("SiSdr: silent reference");
  const double a = dot / ref_energy;
  double target = 0.0, error = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double t = a * reference[i];
    const double e = estimate[i] - t;
    target += t * t;
    error += e * e;
  }
  if (target == 0.0) return -kSiSdrCap;
  if (error == 0.0) return kSiSdrCap;
  return std::clamp(10.0 * std::log10(target / error), -kSiSdrCap, kSiSdrCap);
}

double SiSdrImprovement(std::span<const double> estimate,
                        std::span<const double> mixture,
                        std::span<const double> reference) {
  return SiSdr(estimate, reference) - SiSdr(mixture, reference);
}

namespace {

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

std::optional<double> StoiAdapter::Score(const AudioSignal& estimate,
                                         const AudioSignal& reference) const {
  if (!available()) return std::nullopt;
  std::string dir_template = (fs::temp_directory_path() / "sanac-stoi-XXXXXX").string();
  if (mkdtemp(dir_template.data()) == nullptr) return std::nullopt;
  const fs::path dir(dir_template);
  const fs::path ref_path = dir / "reference.wav";
  const fs::path est_path = dir / "estimate.wav";
  std::optional<double> score;
  try {
    WriteWav(ref_path, reference);
    WriteWav(est_path, estimate);
    const std::string cmd = command_ + " " + ShellQuote(ref_path.string()) +
                            " " + ShellQuote(est_path.string()) +
                            " 2>/dev/null";
    if (FILE* pipe = popen(cmd.c_str(), "r")) {
      std::string text;
      std::array<char, 256> buf;
      while (fgets(buf.data(), buf.size(), pipe) != nullptr) text += buf.data();
      const int status = pclose(pipe);
      if (status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0) {
        std::istringstream in(text);
        double v = 0.0;
        if (in >> v && std::isfinite(v)) score = v;
      }
    }
  } catch (const std::exception&) {
    score.reset();
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return score;
}

SystemMetrics EvaluateUtterance(const Codec& codec, const Utterance& utterance,
                                const StoiAdapter& stoi) {
  const AudioSignal& x = utterance.mixture;
  const EncodedStream stream = codec.Encode(x);
  const DecodedAudio decoded = codec.Decode(stream.bytes);
  const DecodedAudio direct =
      codec.Reconstruct(codec.Quantize(x.samples), x.size());

  SystemMetrics m;
  m.consistent =
      decoded.mixture == direct.mixture && decoded.sources == direct.sources;
  m.kbps = static_cast<double>(stream.payload_bits) / x.duration_seconds() /
           1000.0;
  m.sisdr_mixture = SiSdr(decoded.mixture, x.samples);
  const AudioSignal mixture_hat{decoded.mixture, x.sample_rate};
  m.stoi_mixture = stoi.Score(mixture_hat, x);
  if (codec.model().kind() == CodecKind::kSourceAware) {
    const auto& speech_hat = decoded.sources[0];
    m.sisdr_speech = SiSdr(speech_hat, utterance.speech.samples);
    m.sisdri_speech = SiSdrImprovement(speech_hat, x.samples,
                                       utterance.speech.samples);
    m.stoi_speech =
        stoi.Score(AudioSignal{speech_hat, x.sample_rate}, utterance.speech);
  }
  return m;
}

EvalReport EvaluateCorpus(std::span<const SystemPair> pairs,
                          const Manifest& manifest, const EvalOptions& options) {
  if (pairs.empty()) throw std::invalid_argument("EvaluateCorpus: no systems");
  const Checkpoint& ref = pairs[0].sanac->checkpoint();
  for (const auto& p : pairs) {
    for (const Codec* c : {p.sanac, p.baseline}) {
      if (c == nullptr) throw std::invalid_argument("EvaluateCorpus: null codec");
      const Checkpoint& k = c->checkpoint();
      if (k.sample_rate != ref.sample_rate ||
          k.frame_spec.frame_size != ref.frame_spec.frame_size ||
          k.frame_spec.crossfade_len != ref.frame_spec.crossfade_len) {
        throw std::invalid_argument(
            "EvaluateCorpus: checkpoints use different framing");
      }
    }
  }

  EvalReport report;
  for (const auto& row : manifest.Rows(Split::kTest)) {
    if (!options.snr_filter.empty() &&
        std::find(options.snr_filter.begin(), options.snr_filter.end(),
                  row.snr_db) == options.snr_filter.end()) {
      continue;
    }
    Utterance u;
    try {
      u = LoadUtterance(manifest, row, ref.sample_rate);
    } catch (const std::exception& e) {
      if (options.warn) options.warn("skipping " + row.speech_path + ": " + e.what());
      continue;
    }
    for (const auto& p : pairs) {
      EvalRow r;
      r.utterance = u.name;
      r.snr_db = row.snr_db;
      r.xi = p.xi;
      r.sanac = EvaluateUtterance(*p.sanac, u, options.stoi);
      r.baseline = EvaluateUtterance(*p.baseline, u, options.stoi);
      // The baseline has no separated speech output.
      r.baseline.sisdr_speech.reset();
      r.baseline.sisdri_speech.reset();
      r.baseline.stoi_speech.reset();
      report.rows.push_back(std::move(r));
    }
  }
  if (report.rows.empty()) throw std::runtime_error("evaluation produced no rows");
  return report;
}

namespace {

struct Mean {
  double sum = 0.0;
  int n = 0;
  void Add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> Get() const {
    return n > 0 ? std::optional<double>(sum / n) : std::nullopt;
  }
};

struct Accumulator {
  int count = 0;
  Mean kbps, sisdr_mixture, sisdr_speech, sisdri_speech, stoi_mixture,
      stoi_speech;
  void Add(const SystemMetrics& m) {
    ++count;
    kbps.Add(m.kbps);
    sisdr_mixture.Add(m.sisdr_mixture);
    sisdr_speech.Add(m.sisdr_speech);
    sisdri_speech.Add(m.sisdri_speech);
    stoi_mixture.Add(m.stoi_mixture);
    stoi_speech.Add(m.stoi_speech);
  }
};

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string Num(const std::optional<double>& v) { return v ? Num(*v) : "NA"; }

std::string Short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::vector<SummaryRow> Summarize(const EvalReport& report) {
  std::map<std::tuple<std::string, double, double>, Accumulator> groups;
  for (const auto& r : report.rows) {
    groups[{"sanac", r.xi, r.snr_db}].Add(r.sanac);
    groups[{"baseline", r.xi, r.snr_db}].Add(r.baseline);
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, acc] : groups) {
    SummaryRow s;
    std::tie(s.system, s.xi, s.snr_db) = key;
    s.count = acc.count;
    s.kbps = acc.kbps.Get().value_or(0.0);
    s.sisdr_mixture = acc.sisdr_mixture.Get().value_or(0.0);
    s.sisdr_speech = acc.sisdr_speech.Get();
    s.sisdri_speech = acc.sisdri_speech.Get();
    s.stoi_mixture = acc.stoi_mixture.Get();
    s.stoi_speech = acc.stoi_speech.Get();
    out.push_back(std::move(s));
  }
  return out;
}

std::string ReportToTsv(const EvalReport& report) {
  std::ostringstream out;
  out << "utterance\tsnr_db\txi"
         "\tsanac_kbps\tsanac_sisdr_mixture\tsanac_sisdr_speech"
         "\tsanac_sisdri_speech\tsanac_stoi_mixture\tsanac_stoi_speech"
         "\tsanac_consistent"
         "\tbaseline_kbps\tbaseline_sisdr_mixture\tbaseline_stoi_mixture"
         "\tbaseline_consistent\n";
  for (const auto& r : report.rows) {
    out << r.utterance << '\t' << Num(r.snr_db) << '\t' << Num(r.xi) << '\t'
        << Num(r.sanac.kbps) << '\t' << Num(r.sanac.sisdr_mixture) << '\t'
        << Num(r.sanac.sisdr_speech) << '\t' << Num(r.sanac.sisdri_speech)
        << '\t' << Num(r.sanac.stoi_mixture) << '\t'
        << Num(r.sanac.stoi_speech) << '\t' << (r.sanac.consistent ? 1 : 0)
        << '\t' << Num(r.baseline.kbps) << '\t'
        << Num(r.baseline.sisdr_mixture) << '\t'
        << Num(r.baseline.stoi_mixture) << '\t'
        << (r.baseline.consistent ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string SummaryToTsv(const std::vector<SummaryRow>& summary) {
  std::ostringstream out;
  out << "system\txi\tsnr_db\tcount\tkbps\tsisdr_mixture\tsisdr_speech"
         "\tsisdri_speech\tstoi_mixture\tstoi_speech\n";
  for (const auto& s : summary) {
    out << s.system << '\t' << Num(s.xi) << '\t' << Num(s.snr_db) << '\t'
        << s.count << '\t' << Num(s.kbps) << '\t' << Num(s.sisdr_mixture)
        << '\t' << Num(s.sisdr_speech) << '\t' << Num(s.sisdri_speech) << '\t'
        << Num(s.stoi_mixture) << '\t' << Num(s.stoi_speech) << '\n';
  }
  return out.str();
}

namespace {

struct Bar {
  std::string series;  // "sanac 0 dB"
  double xi;
  double value;
};

std::string BarChartSvg(const std::string& title, const std::vector<Bar>& bars) {
  constexpr double kWidth = 640, kHeight = 360, kLeft = 60, kRight = 150,
                   kTop = 40, kBottom = 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << title << "</text>\n";
  if (bars.empty()) {
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\">no data</text>\n</svg>\n";
    return svg.str();
  }
  std::vector<double> xis;
  std::vector<std::string> series;
  double lo = 0.0, hi = 0.0;
  for (const auto& b : bars) {
    if (std::find(xis.begin(), xis.end(), b.xi) == xis.end()) xis.push_back(b.xi);
    if (std::find(series.begin(), series.end(), b.series) == series.end()) {
      series.push_back(b.series);
    }
    lo = std::min(lo, b.value);
    hi = std::max(hi, b.value);
  }
  std::sort(xis.begin(), xis.end());
  if (hi == lo) hi = lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto y_of = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b"};
  const double group_w = plot_w / xis.size();
  const double bar_w = group_w * 0.8 / series.size();

  svg << "<line x1=\"" << kLeft << "\" y1=\"" << y_of(0) << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << y_of(0) << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << y_of(hi) + 4
      << "\" text-anchor=\"end\">" << Num(hi) << "</text>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << y_of(lo) + 4
      << "\" text-anchor=\"end\">" << Num(lo) << "</text>\n";
  for (size_t g = 0; g < xis.size(); ++g) {
    const double x0 = kLeft + g * group_w + group_w * 0.1;
    svg << "<text x=\"" << kLeft + (g + 0.5) * group_w << "\" y=\""
        << kTop + plot_h + 20 << "\" text-anchor=\"middle\">xi = "
        << Num(xis[g]) << "</text>\n";
    for (const auto& b : bars) {
      if (b.xi != xis[g]) continue;
      const size_t s =
          std::find(series.begin(), series.end(), b.series) - series.begin();
      const double top = y_of(std::max(b.value, 0.0));
      const double height = std::abs(y_of(b.value) - y_of(0.0));
      svg << "<rect x=\"" << x0 + s * bar_w << "\" y=\"" << top
          << "\" width=\"" << bar_w * 0.9 << "\" height=\"" << height
          << "\" fill=\"" << kColors[s % 6] << "\"/>\n";
    }
  }
  for (size_t s = 0; s < series.size(); ++s) {
    const double y = kTop + 10 + 18 * s;
    svg << "<rect x=\"" << kWidth - kRight + 15 << "\" y=\"" << y - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << kColors[s % 6]
        << "\"/>\n<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << y
        << "\">" << series[s] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void WriteReport(const fs::path& dir, const EvalReport& report) {
  fs::create_directories(dir);
  const std::vector<SummaryRow> summary = Summarize(report);
  WriteText(dir / "report.tsv", ReportToTsv(report));
  WriteText(dir / "summary.tsv", SummaryToTsv(summary));

  using Getter = std::optional<double> (*)(const SummaryRow&);
  const std::vector<std::tuple<std::string, std::string, Getter>> panels = {
      {"stoi_mixture.svg", "STOI of recovered mixtures",
       [](const SummaryRow& s) { return s.stoi_mixture; }},
      {"stoi_speech.svg", "STOI of recovered speech",
       [](const SummaryRow& s) { return s.stoi_speech; }},
      {"sisdr_mixture.svg", "SiSDR of recovered mixtures (dB)",
       [](const SummaryRow& s) {
         return std::optional<double>(s.sisdr_mixture);
       }},
      {"sisdri_speech.svg", "SiSDR improvement of recovered speech (dB)",
       [](const SummaryRow& s) { return s.sisdri_speech; }},
  };
  for (const auto& [file, title, get] : panels) {
    std::vector<Bar> bars;
    for (const auto& s : summary) {
      if (const auto v = get(s)) {
        bars.push_back({s.system + " " + Short(s.snr_db) + " dB", s.xi, *v});
      }
    }
    WriteText(dir / file, BarChartSvg(title, bars));
  }
}

}  // namespace sanac
