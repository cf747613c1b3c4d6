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

#include "sanac/training.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sanac {

void LossConfig::Validate() const {
  if (!(mse_weight >= 0.0) || !(total_entropy_weight >= 0.0) ||
      !(ratio_weight >= 0.0)) {
    throw std::invalid_argument("LossConfig: weights must be non-negative");
  }
  if (!(target_entropy > 0.0) || !(target_ratio > 0.0)) {
    throw std::invalid_argument("LossConfig: targets must be positive");
  }
  if (!(ratio_floor > 0.0)) {
    throw std::invalid_argument("LossConfig: ratio_floor must be positive");
  }
}

double MeanSquaredError(std::span<const double> reference,
                        std::span<const double> estimate) {
  if (reference.size() != estimate.size() || reference.empty()) {
    throw std::invalid_argument("MeanSquaredError: length mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double d = estimate[i] - reference[i];
    acc += d * d;
  }
  return acc / static_cast<double>(reference.size());
}

EntropyPenalty ComputeEntropyPenalty(std::span<const double> entropies,
                                     const LossConfig& config) {
  EntropyPenalty out;
  out.grad.assign(entropies.size(), 0.0);
  if (entropies.empty()) return out;

  double total = 0.0;
  for (double h : entropies) total += h;
  const double gap = config.target_entropy - total;
  out.value = config.total_entropy_weight * gap * gap;
  for (double& g : out.grad) g = -2.0 * config.total_entropy_weight * gap;

  if (entropies.size() >= 2) {
    const bool floored = entropies[1] < config.ratio_floor;
    const double denom = floored ? config.ratio_floor : entropies[1];
    const double ratio = entropies[0] / denom;
    const double miss = config.target_ratio - ratio;
    out.value += config.ratio_weight * miss * miss;
    out.grad[0] += -2.0 * config.ratio_weight * miss / denom;
    if (!floored) {
      out.grad[1] += 2.0 * config.ratio_weight * miss * ratio / denom;
    }
  }
  return out;
}

double TotalLoss(std::span<const double> speech,
                 std::span<const double> speech_estimate,
                 std::span<const double> mixture,
                 std::span<const double> mixture_estimate,
                 std::span<const double> entropies, const LossConfig& config,
                 int stage) {
  double mse = MeanSquaredError(mixture, mixture_estimate);
  if (!speech.empty() || !speech_estimate.empty()) {
    mse += MeanSquaredError(speech, speech_estimate);
  }
  double loss = config.mse_weight * mse;
  if (stage >= 3) loss += ComputeEntropyPenalty(entropies, config).value;
  return loss;
}

void EarlyStopPolicy::Validate() const {
  if (stage_patience < 1 || stop_patience < stage_patience) {
    throw std::invalid_argument(
        "EarlyStopPolicy: need 1 <= stage_patience <= stop_patience");
  }
  if (min_stage1_epochs < 0 || max_stage_epochs < 0 || max_epochs < 0 ||
      !(min_improvement >= 0.0)) {
    throw std::invalid_argument("EarlyStopPolicy: negative limit");
  }
}

StageController::StageController(const EarlyStopPolicy& policy)
    : policy_(policy) {
  policy_.Validate();
}

StageController::Action StageController::Observe(double validation_loss) {
  StageState& s = state_;
  ++s.epochs_in_stage;
  ++s.total_epochs;
  last_improved_ =
      validation_loss <
      s.best_validation_loss * (1.0 - policy_.min_improvement);
  if (std::isinf(s.best_validation_loss)) last_improved_ = true;
  if (last_improved_) {
    s.best_validation_loss = validation_loss;
    s.epochs_since_improvement = 0;
  } else {
    ++s.epochs_since_improvement;
  }

  if (policy_.max_epochs > 0 && s.total_epochs >= policy_.max_epochs) {
    return Action::kStop;
  }
  if (s.stage < 3) {
    const bool stalled = s.epochs_since_improvement >= policy_.stage_patience &&
                         (s.stage != 1 ||
                          s.epochs_in_stage >= policy_.min_stage1_epochs);
    const bool capped = policy_.max_stage_epochs > 0 &&
                        s.epochs_in_stage >= policy_.max_stage_epochs;
    if (stalled || capped) {
      ++s.stage;
      s.epochs_in_stage = 0;
      s.best_validation_loss = std::numeric_limits<double>::infinity();
      s.epochs_since_improvement = 0;
      return Action::kAdvance;
    }
    return Action::kContinue;
  }
  if (s.epochs_since_improvement >= policy_.stop_patience) {
    return Action::kStop;
  }
  return Action::kContinue;
}

Adam::Adam(size_t size, const AdamConfig& config)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("Adam: learning rate must be positive");
  }
}

void Adam::Step(std::span<double> params, std::span<const double> grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, double(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, double(t_));
  const double step = config_.learning_rate * std::sqrt(c2) / c1;
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
    params[i] -=
        step * m_[i] / (std::sqrt(v_[i]) + config_.epsilon * std::sqrt(c2));
  }
}

namespace {

double SquaredDistance(const double* a, const double* b, int dim) {
  double acc = 0.0;
  for (int l = 0; l < dim; ++l) {
    const double d = a[l] - b[l];
    acc += d * d;
  }
  return acc;
}

int Nearest(const double* x, std::span<const double> centroids, int dim,
            double* best_d) {
  const int k = static_cast<int>(centroids.size() / dim);
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    const double d = SquaredDistance(x, centroids.data() + size_t(c) * dim, dim);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  if (best_d != nullptr) *best_d = bd;
  return best;
}

}  // namespace

double Inertia(std::span<const double> data, int dim,
               std::span<const double> centroids) {
  double total = 0.0;
  const size_t n = data.size() / dim;
  for (size_t i = 0; i < n; ++i) {
    double d = 0.0;
    Nearest(data.data() + i * dim, centroids, dim, &d);
    total += d;
  }
  return total;
}

KMeansResult KMeans(std::span<const double> data, int dim, int k,
                    int iterations, Rng& rng) {
  if (dim <= 0 || k <= 0 || data.size() % size_t(dim) != 0 || data.empty()) {
    throw std::invalid_argument("KMeans: bad data shape");
  }
  const size_t n = data.size() / dim;
  KMeansResult out;
  out.centroids.assign(size_t(k) * dim, 0.0);
  auto set_centroid = [&](int c, size_t row) {
    std::copy_n(data.begin() + row * dim, dim,
                out.centroids.begin() + size_t(c) * dim);
  };

  // k-means++ seeding.
  set_centroid(0, rng.Index(n));
  std::vector<double> d2(n);
  for (size_t i = 0; i < n; ++i) {
    d2[i] = SquaredDistance(data.data() + i * dim, out.centroids.data(), dim);
  }
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    size_t pick = n - 1;
    if (total > 0.0) {
      double r = rng.Uniform() * total;
      for (size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can run past the end; fall back to the last positive row.
      if (d2[pick] <= 0.0) {
        for (size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = rng.Index(n);  // fewer distinct rows than centroids
    }
    set_centroid(c, pick);
    const double* mu = out.centroids.data() + size_t(c) * dim;
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(data.data() + i * dim, mu, dim));
    }
  }

  // Lloyd iterations; empty clusters keep their centroid.
  std::vector<int> assignment(n, -1);
  std::vector<double> sums(size_t(k) * dim);
  std::vector<size_t> counts(k);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t i = 0; i < n; ++i) {
      const int c = Nearest(data.data() + i * dim, out.centroids, dim, nullptr);
      if (c != assignment[i]) changed = true;
      assignment[i] = c;
      ++counts[c];
      for (int l = 0; l < dim; ++l) sums[size_t(c) * dim + l] += data[i * dim + l];
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int l = 0; l < dim; ++l) {
        out.centroids[size_t(c) * dim + l] = sums[size_t(c) * dim + l] / counts[c];
      }
    }
  }
  JitterDuplicateCentroids(out.centroids, dim, rng);
  out.inertia = Inertia(data, dim, out.centroids);
  return out;
}

size_t CountFrames(const Dataset& data) {
  size_t n = 0;
  for (const auto& u : data) n += u.mixture.size();
  return n;
}

namespace {

struct FrameWork {
  EncoderTape tape;
  CodeMap codes;
  // [block][position]
  std::vector<std::vector<SoftAssignment>> assignments;
  std::vector<FeatureMap> quantized;
};

// Encodes one frame and (from stage 2) soft-quantizes each code vector.
void EncodeAndQuantize(const Model& model, std::span<const double> frame,
                       bool quantize, double alpha, bool keep_tape,
                       FrameWork& work) {
  const ModelConfig& cfg = model.config();
  const int blocks = model.num_codes();
  work.codes = model.EncodeForward(frame, keep_tape ? &work.tape : nullptr);
  work.quantized = SplitChannels(work.codes, blocks);
  if (!quantize) return;
  work.assignments.assign(blocks, {});
  std::vector<double> y(cfg.vq_dim);
  for (int k = 0; k < blocks; ++k) {
    const CodebookView book(model.codebook(k), cfg.vq_dim);
    auto& out = work.assignments[k];
    out.reserve(cfg.code_length);
    FeatureMap& q = work.quantized[k];
    for (int p = 0; p < cfg.code_length; ++p) {
      for (int l = 0; l < cfg.vq_dim; ++l) y[l] = q.at(l, p);
      out.push_back(SoftAssign(y, book, alpha));
      const auto value = SoftQuantize(out.back(), book);
      for (int l = 0; l < cfg.vq_dim; ++l) q.at(l, p) = value[l];
    }
  }
}

// dH/dq for H = -sum q log2 q.
std::vector<double> EntropyGradient(std::span<const double> q) {
  std::vector<double> g(q.size(), 0.0);
  for (size_t m = 0; m < q.size(); ++m) {
    if (q[m] > 0.0) g[m] = -(std::log2(q[m]) + 1.0 / std::numbers::ln2);
  }
  return g;
}

struct FrameLoss {
  double mse = 0.0;
  std::vector<std::vector<double>> grad_outputs;  // per code block
};

// Weighted MSE of one frame; gradients are scaled by `scale`.
FrameLoss ReconstructionLoss(const Model& model,
                             const std::vector<std::vector<double>>& outputs,
                             const TrainingExample& ex,
                             const LossConfig& loss, double scale) {
  const size_t n = outputs[0].size();
  std::vector<double> mixture(n, 0.0);
  for (const auto& o : outputs) {
    for (size_t t = 0; t < n; ++t) mixture[t] += o[t];
  }
  FrameLoss out;
  out.grad_outputs.assign(outputs.size(), std::vector<double>(n, 0.0));
  const double g = loss.mse_weight * scale * 2.0 / static_cast<double>(n);
  out.mse = MeanSquaredError(ex.mixture, mixture);
  for (size_t t = 0; t < n; ++t) {
    const double d = g * (mixture[t] - ex.mixture[t]);
    for (auto& go : out.grad_outputs) go[t] = d;
  }
  if (model.kind() == CodecKind::kSourceAware) {
    out.mse += MeanSquaredError(ex.speech, outputs[0]);
    for (size_t t = 0; t < n; ++t) {
      out.grad_outputs[0][t] += g * (outputs[0][t] - ex.speech[t]);
    }
  }
  out.mse *= loss.mse_weight;
  return out;
}

}  // namespace

BatchResult ComputeBatch(const Model& model,
                         std::span<const TrainingExample> examples, int stage,
                         double alpha, const LossConfig& loss,
                         bool with_gradient) {
  if (examples.empty()) throw std::invalid_argument("ComputeBatch: empty");
  const ModelConfig& cfg = model.config();
  const int blocks = model.num_codes();
  const bool quantize = stage >= 2;
  const bool entropy_terms = stage >= 3;
  const double batch = static_cast<double>(examples.size());

  std::vector<FrameWork> work(examples.size());
  std::vector<std::vector<double>> usage(blocks,
                                         std::vector<double>(cfg.num_centroids));
  for (size_t b = 0; b < examples.size(); ++b) {
    EncodeAndQuantize(model, examples[b].mixture, quantize, alpha,
                      with_gradient, work[b]);
    if (!quantize) continue;
    for (int k = 0; k < blocks; ++k) {
      for (const auto& a : work[b].assignments[k]) {
        for (int m = 0; m < cfg.num_centroids; ++m) usage[k][m] += a.probabilities[m];
      }
    }
  }

  BatchResult result;
  const double vectors = batch * cfg.code_length;
  std::vector<std::vector<double>> grad_prob(blocks);
  if (quantize) {
    for (int k = 0; k < blocks; ++k) {
      for (double& v : usage[k]) v /= vectors;
      result.entropies.push_back(EstimateEntropy(usage[k]));
    }
  }
  if (entropy_terms) {
    const EntropyPenalty penalty = ComputeEntropyPenalty(result.entropies, loss);
    result.loss += penalty.value;
    for (int k = 0; k < blocks; ++k) {
      grad_prob[k] = EntropyGradient(usage[k]);
      for (double& g : grad_prob[k]) g *= penalty.grad[k] / vectors;
    }
  }
  if (with_gradient) result.grads.assign(model.num_parameters(), 0.0);

  double mse_total = 0.0;
  std::vector<double> y(cfg.vq_dim), grad_value(cfg.vq_dim);
  for (size_t b = 0; b < examples.size(); ++b) {
    FrameWork& w = work[b];
    DecoderTape tape;
    const auto outputs =
        model.DecodeForward(w.quantized, with_gradient ? &tape : nullptr);
    FrameLoss fl = ReconstructionLoss(model, outputs, examples[b], loss,
                                      1.0 / batch);
    mse_total += fl.mse;
    if (!with_gradient) continue;

    const auto grad_codes = model.DecodeBackward(tape, fl.grad_outputs,
                                                 result.grads);
    CodeMap grad_map(blocks * cfg.vq_dim, cfg.code_length);
    for (int k = 0; k < blocks; ++k) {
      if (!quantize) {
        std::copy(grad_codes[k].data.begin(), grad_codes[k].data.end(),
                  grad_map.data.begin() + size_t(k) * cfg.vq_dim * cfg.code_length);
        continue;
      }
      const CodebookView book(model.codebook(k), cfg.vq_dim);
      const ParamSlice slice = model.codebook_slice(k);
      std::span<double> grad_book(result.grads.data() + slice.offset, slice.size);
      for (int p = 0; p < cfg.code_length; ++p) {
        for (int l = 0; l < cfg.vq_dim; ++l) {
          y[l] = w.codes.at(k * cfg.vq_dim + l, p);
          grad_value[l] = grad_codes[k].at(l, p);
        }
        const auto grad_y = SoftQuantizeBackward(
            y, book, alpha, w.assignments[k][p], grad_value, grad_prob[k],
            grad_book);
        for (int l = 0; l < cfg.vq_dim; ++l) {
          grad_map.at(k * cfg.vq_dim + l, p) = grad_y[l];
        }
      }
    }
    model.EncodeBackward(w.tape, grad_map, result.grads);
  }
  result.mse = mse_total / batch;
  result.loss += result.mse;
  return result;
}

BatchResult EvaluateLoss(const Model& model, const Dataset& data, int stage,
                         double alpha, const LossConfig& loss) {
  const ModelConfig& cfg = model.config();
  const int blocks = model.num_codes();
  const bool quantize = stage >= 2;
  std::vector<std::vector<double>> usage(blocks,
                                         std::vector<double>(cfg.num_centroids));
  double mse_total = 0.0;
  size_t frames = 0;
  FrameWork work;
  for (const auto& u : data) {
    for (size_t f = 0; f < u.mixture.size(); ++f) {
      const TrainingExample ex{u.mixture[f], u.speech[f]};
      EncodeAndQuantize(model, ex.mixture, quantize, alpha, false, work);
      if (quantize) {
        for (int k = 0; k < blocks; ++k) {
          for (const auto& a : work.assignments[k]) {
            for (int m = 0; m < cfg.num_centroids; ++m) {
              usage[k][m] += a.probabilities[m];
            }
          }
        }
      }
      const auto outputs = model.DecodeForward(work.quantized, nullptr);
      mse_total += ReconstructionLoss(model, outputs, ex, loss, 1.0).mse;
      ++frames;
    }
  }
  if (frames == 0) throw std::invalid_argument("EvaluateLoss: empty dataset");
  BatchResult result;
  result.mse = mse_total / static_cast<double>(frames);
  result.loss = result.mse;
  if (quantize) {
    const double vectors = double(frames) * cfg.code_length;
    for (int k = 0; k < blocks; ++k) {
      for (double& v : usage[k]) v /= vectors;
      result.entropies.push_back(EstimateEntropy(usage[k]));
    }
  }
  if (stage >= 3) {
    result.loss += ComputeEntropyPenalty(result.entropies, loss).value;
  }
  return result;
}

BatchResult EvaluateHardLoss(const Model& model, const Dataset& data,
                             int stage, const LossConfig& loss) {
  const ModelConfig& cfg = model.config();
  const int blocks = model.num_codes();
  std::vector<std::vector<double>> counts(
      blocks, std::vector<double>(cfg.num_centroids, 0.0));
  double mse_total = 0.0;
  size_t frames = 0;
  std::vector<double> y(cfg.vq_dim);
  for (const auto& u : data) {
    for (size_t f = 0; f < u.mixture.size(); ++f) {
      const TrainingExample ex{u.mixture[f], u.speech[f]};
      std::vector<FeatureMap> codes =
          SplitChannels(model.EncodeForward(ex.mixture, nullptr), blocks);
      for (int k = 0; k < blocks; ++k) {
        const CodebookView book(model.codebook(k), cfg.vq_dim);
        FeatureMap& q = codes[k];
        for (int p = 0; p < cfg.code_length; ++p) {
          for (int l = 0; l < cfg.vq_dim; ++l) y[l] = q.at(l, p);
          const int i = NearestCentroid(y, book);
          counts[k][i] += 1.0;
          const auto mu = book.centroid(i);
          for (int l = 0; l < cfg.vq_dim; ++l) q.at(l, p) = mu[l];
        }
      }
      const auto outputs = model.DecodeForward(codes, nullptr);
      mse_total += ReconstructionLoss(model, outputs, ex, loss, 1.0).mse;
      ++frames;
    }
  }
  if (frames == 0) throw std::invalid_argument("EvaluateHardLoss: empty dataset");
  BatchResult result;
  result.mse = mse_total / static_cast<double>(frames);
  result.loss = result.mse;
  const double vectors = double(frames) * cfg.code_length;
  for (auto& c : counts) {
    for (double& v : c) v /= vectors;
    result.entropies.push_back(EstimateEntropy(c));
  }
  if (stage >= 3) {
    result.loss += ComputeEntropyPenalty(result.entropies, loss).value;
  }
  return result;
}

void TrainingConfig::Validate() const {
  model.Validate();
  loss.Validate();
  alpha.Validate();
  early_stop.Validate();
  frames.Validate();
  if (frames.frame_size != model.frame_size) {
    throw std::invalid_argument("TrainingConfig: frame size mismatch");
  }
  if (batch_size <= 0 || kmeans_iterations < 0 || kmeans_max_vectors <= 0) {
    throw std::invalid_argument("TrainingConfig: bad batch/k-means settings");
  }
  if (!(adam.learning_rate > 0.0)) {
    throw std::invalid_argument("TrainingConfig: learning rate must be > 0");
  }
}

void InitializeCentroids(Model& model, const Dataset& data, int iterations,
                         int max_vectors, Rng& rng) {
  const ModelConfig& cfg = model.config();
  const int blocks = model.num_codes();
  std::vector<std::pair<size_t, size_t>> frames;
  for (size_t u = 0; u < data.size(); ++u) {
    for (size_t f = 0; f < data[u].mixture.size(); ++f) frames.emplace_back(u, f);
  }
  if (frames.empty()) throw std::invalid_argument("InitializeCentroids: no data");
  rng.Shuffle(frames);
  const size_t wanted =
      std::max<size_t>(1, (size_t(max_vectors) + cfg.code_length - 1) /
                              cfg.code_length);
  frames.resize(std::min(frames.size(), wanted));

  std::vector<std::vector<double>> samples(blocks);
  for (const auto& [u, f] : frames) {
    const CodeMap codes = model.Encode(data[u].mixture[f]);
    for (int k = 0; k < blocks; ++k) {
      for (int p = 0; p < cfg.code_length; ++p) {
        for (int l = 0; l < cfg.vq_dim; ++l) {
          samples[k].push_back(codes.at(k * cfg.vq_dim + l, p));
        }
      }
    }
  }
  for (int k = 0; k < blocks; ++k) {
    const KMeansResult km =
        KMeans(samples[k], cfg.vq_dim, cfg.num_centroids, iterations, rng);
    auto book = model.mutable_codebook(k);
    std::copy(km.centroids.begin(), km.centroids.end(), book.begin());
  }
}

CorpusEntropy MeasureCorpusEntropy(const Model& model, const Dataset& data) {
  const ModelConfig& cfg = model.config();
  const int blocks = model.num_codes();
  CorpusEntropy out;
  out.counts.assign(blocks, std::vector<double>(cfg.num_centroids, 0.0));
  std::vector<double> y(cfg.vq_dim);
  double total = 0.0;
  for (const auto& u : data) {
    for (const auto& frame : u.mixture) {
      const CodeMap codes = model.Encode(frame);
      for (int k = 0; k < blocks; ++k) {
        const CodebookView book(model.codebook(k), cfg.vq_dim);
        for (int p = 0; p < cfg.code_length; ++p) {
          for (int l = 0; l < cfg.vq_dim; ++l) y[l] = codes.at(k * cfg.vq_dim + l, p);
          out.counts[k][NearestCentroid(y, book)] += 1.0;
        }
      }
      total += cfg.code_length;
    }
  }
  if (total == 0.0) throw std::invalid_argument("MeasureCorpusEntropy: empty");
  for (int k = 0; k < blocks; ++k) {
    std::vector<double> q = out.counts[k];
    for (double& v : q) v /= total;
    out.entropies.push_back(EstimateEntropy(q));
    out.bits_per_position += out.entropies.back();
  }
  return out;
}

TrainingResult RunTraining(
    const TrainingConfig& config, const Dataset& train,
    const Dataset& validation,
    const std::function<void(const EpochRecord&)>& on_epoch) {
  config.Validate();
  if (CountFrames(train) == 0 || CountFrames(validation) == 0) {
    throw std::invalid_argument(
        "RunTraining: train and validation splits must be non-empty");
  }
  Rng rng(config.seed);
  Model model(config.model, config.kind);
  model.Initialize(rng.NextU64());
  Adam adam(model.num_parameters(), config.adam);
  StageController controller(config.early_stop);

  TrainingResult result;
  result.initial_train_loss =
      EvaluateLoss(model, train, 1, 0.0, config.loss).loss;

  std::vector<double> best_params(model.parameters().begin(),
                                  model.parameters().end());
  double best_alpha = 0.0;
  int annealed_epochs = 0;

  for (int epoch = 1;; ++epoch) {
    const int stage = controller.state().stage;
    const double alpha = stage >= 2 ? config.alpha.AlphaAt(annealed_epochs) : 0.0;

    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.Shuffle(order);
    std::vector<TrainingExample> schedule;
    for (size_t u : order) {
      for (size_t f = 0; f < train[u].mixture.size(); ++f) {
        schedule.push_back({train[u].mixture[f], train[u].speech[f]});
      }
    }

    double train_loss = 0.0;
    for (size_t start = 0; start < schedule.size();
         start += config.batch_size) {
      const size_t end =
          std::min(schedule.size(), start + size_t(config.batch_size));
      const std::span<const TrainingExample> batch(schedule.data() + start,
                                                   end - start);
      const BatchResult r =
          ComputeBatch(model, batch, stage, alpha, config.loss, true);
      if (!std::isfinite(r.loss)) {
        throw std::runtime_error("non-finite training loss at epoch " +
                                 std::to_string(epoch));
      }
      train_loss += r.loss * static_cast<double>(batch.size());
      adam.Step(model.mutable_parameters(), r.grads);
    }
    train_loss /= static_cast<double>(schedule.size());

    const BatchResult val =
        stage >= 2 ? EvaluateHardLoss(model, validation, stage, config.loss)
                   : EvaluateLoss(model, validation, stage, alpha, config.loss);
    if (!std::isfinite(val.loss)) {
      throw std::runtime_error("non-finite validation loss at epoch " +
                               std::to_string(epoch));
    }
    const StageController::Action action = controller.Observe(val.loss);

    EpochRecord record;
    record.epoch = epoch;
    record.stage = stage;
    record.alpha = alpha;
    record.train_loss = train_loss;
    record.validation_loss = val.loss;
    record.entropies = val.entropies;
    record.improved = controller.last_improved();
    result.history.push_back(record);
    result.final_train_loss = train_loss;
    if (record.improved) {
      best_params.assign(model.parameters().begin(), model.parameters().end());
      best_alpha = alpha;
    }
    if (on_epoch) on_epoch(record);
    if (stage >= 2) ++annealed_epochs;

    if (action == StageController::Action::kStop) break;
    if (action == StageController::Action::kAdvance) {
      // The next stage starts from the best weights of the one just ended.
      model.set_parameters(best_params);
      const int next = controller.state().stage;
      if (next == 2) {
        InitializeCentroids(model, train, config.kmeans_iterations,
                            config.kmeans_max_vectors, rng);
        annealed_epochs = 0;
        result.stage2_start_epoch = epoch + 1;
      } else if (next == 3) {
        result.stage3_start_epoch = epoch + 1;
      }
      best_params.assign(model.parameters().begin(), model.parameters().end());
    }
  }

  model.set_parameters(best_params);
  if (controller.state().stage == 1) {
    // Stopped before quantization was trained; seed usable codebooks anyway.
    InitializeCentroids(model, train, config.kmeans_iterations,
                        config.kmeans_max_vectors, rng);
  }
  Checkpoint& ckpt = result.checkpoint;
  ckpt = MakeCheckpoint(model, config.frames, config.sample_rate);
  ckpt.stage = controller.state().stage;
  ckpt.alpha = best_alpha;
  ckpt.target_entropy = config.loss.target_entropy;
  ckpt.target_ratio = config.loss.target_ratio;
  ckpt.usage_counts = MeasureCorpusEntropy(model, train).counts;
  return result;
}

}  // namespace sanac
