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

// Three-stage training.
//
//   1. Autoencoding/separation without quantization; codes go straight to
//      the decoder.
//   2. Codebooks are initialized by k-means on stage-1 codes and soft-to-
//      hard quantization is switched on, with alpha annealed per epoch.
//   3. Entropy terms join the loss: a squared error on the total code
//      entropy and, for the source-aware codec, on the speech/noise entropy
//      ratio.
//
// A stage advances when the validation loss has not improved for
// `stage_patience` epochs; training stops when it has not improved for
// `stop_patience` epochs in the last stage.

#ifndef SANAC_TRAINING_H_
#define SANAC_TRAINING_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "sanac/audio.h"
#include "sanac/checkpoint.h"
#include "sanac/model.h"
#include "sanac/quantizer.h"

namespace sanac {

struct LossConfig {
  double mse_weight = 1.0;
  double total_entropy_weight = 1.0 / 5.0;
  double ratio_weight = 1.0 / 60.0;
  double target_entropy = 2.0;  // bits per code position, all sources
  double target_ratio = 3.0;    // speech entropy / noise entropy
  double ratio_floor = 1e-3;    // lower bound on the ratio denominator, bits

  void Validate() const;
};

double MeanSquaredError(std::span<const double> reference,
                        std::span<const double> estimate);

struct EntropyPenalty {
  double value = 0.0;
  std::vector<double> grad;  // d value / d H_k
};

// Entropy regularizer for per-block entropies in bits. With one block only
// the total term applies; with two or more the ratio H_0 / H_1 is also
// pulled toward target_ratio.
EntropyPenalty ComputeEntropyPenalty(std::span<const double> entropies,
                                     const LossConfig& config);

// Per-frame training objective. `speech` and `speech_estimate` may be empty
// (baseline codec). Entropy terms are added in stage 3 only.
double TotalLoss(std::span<const double> speech,
                 std::span<const double> speech_estimate,
                 std::span<const double> mixture,
                 std::span<const double> mixture_estimate,
                 std::span<const double> entropies, const LossConfig& config,
                 int stage);

struct EarlyStopPolicy {
  int stage_patience = 3;
  int stop_patience = 10;
  int min_stage1_epochs = 3;
  int max_stage_epochs = 0;  // forces stages 1 and 2 to end; 0 = no limit
  int max_epochs = 0;        // overall cap; 0 = no limit
  // Relative decrease needed to count as an improvement.
  double min_improvement = 0.0;

  void Validate() const;
};

struct StageState {
  int stage = 1;
  int epochs_in_stage = 0;
  int total_epochs = 0;
  double best_validation_loss = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;
};

class StageController {
 public:
  enum class Action { kContinue, kAdvance, kStop };

  explicit StageController(const EarlyStopPolicy& policy);

  // Records one epoch's validation loss. After kAdvance the state already
  // describes the new stage.
  Action Observe(double validation_loss);
  const StageState& state() const { return state_; }
  bool last_improved() const { return last_improved_; }

 private:
  EarlyStopPolicy policy_;
  StageState state_;
  bool last_improved_ = false;
};

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(size_t size, const AdamConfig& config);
  void Step(std::span<double> params, std::span<const double> grads);

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  int64_t t_ = 0;
};

struct KMeansResult {
  std::vector<double> centroids;  // k x dim
  double inertia = 0.0;
};

// Sum of squared distances from each row of `data` to its nearest centroid.
double Inertia(std::span<const double> data, int dim,
               std::span<const double> centroids);

// k-means++ seeding followed by Lloyd iterations. When the data has fewer
// than k distinct rows the remaining centroids are jittered duplicates.
KMeansResult KMeans(std::span<const double> data, int dim, int k,
                    int iterations, Rng& rng);

// Framed, time-aligned mixture and source signals of one utterance.
struct UtteranceFrames {
  std::vector<std::vector<double>> mixture;
  std::vector<std::vector<double>> speech;
  std::vector<std::vector<double>> noise;
};
using Dataset = std::vector<UtteranceFrames>;

size_t CountFrames(const Dataset& data);

struct TrainingExample {
  std::span<const double> mixture;
  std::span<const double> speech;
};

struct BatchResult {
  double loss = 0.0;
  double mse = 0.0;                 // weighted MSE part, batch mean
  std::vector<double> entropies;    // usage entropies (stages 2-3)
  std::vector<double> grads;        // empty unless requested
};

// Loss over `examples` (MSE averaged over frames; entropies from the soft
// usage of all code vectors in the set) and, optionally, its gradient with
// respect to every model parameter.
BatchResult ComputeBatch(const Model& model,
                         std::span<const TrainingExample> examples, int stage,
                         double alpha, const LossConfig& loss,
                         bool with_gradient);

// Same loss without gradients or per-frame storage, for large sets.
BatchResult EvaluateLoss(const Model& model, const Dataset& data, int stage,
                         double alpha, const LossConfig& loss);

// Same loss with nearest-centroid quantization and hard-count entropies, as
// the codec runs at test time. Used for validation from stage 2 on.
BatchResult EvaluateHardLoss(const Model& model, const Dataset& data,
                             int stage, const LossConfig& loss);

struct TrainingConfig {
  ModelConfig model;
  CodecKind kind = CodecKind::kSourceAware;
  LossConfig loss;
  AlphaSchedule alpha;
  EarlyStopPolicy early_stop;
  AdamConfig adam;
  FrameSpec frames;
  int sample_rate = kDefaultSampleRate;
  int batch_size = 64;
  int kmeans_iterations = 20;
  int kmeans_max_vectors = 20000;
  uint64_t seed = 1;

  void Validate() const;
};

struct EpochRecord {
  int epoch = 0;
  int stage = 1;
  double alpha = 0.0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::vector<double> entropies;  // validation hard-count entropies
  bool improved = false;
};

struct TrainingResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> history;
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  int stage2_start_epoch = 0;  // first epoch run in stage 2, 0 if never
  int stage3_start_epoch = 0;
};

// Seeds each code block's codebook with k-means over encoder outputs of up
// to `max_vectors` code vectors drawn from `data`.
void InitializeCentroids(Model& model, const Dataset& data, int iterations,
                         int max_vectors, Rng& rng);

// Runs the staged schedule to completion. Deterministic for a fixed seed.
// Throws std::invalid_argument for empty splits and std::runtime_error on a
// non-finite loss.
TrainingResult RunTraining(
    const TrainingConfig& config, const Dataset& train,
    const Dataset& validation,
    const std::function<void(const EpochRecord&)>& on_epoch = {});

struct CorpusEntropy {
  std::vector<double> entropies;            // hard-count entropy per block
  std::vector<std::vector<double>> counts;  // index histogram per block
  double bits_per_position = 0.0;           // sum of entropies
};

// Hard-quantizes every mixture frame of `data`.
CorpusEntropy MeasureCorpusEntropy(const Model& model, const Dataset& data);

}  // namespace sanac

#endif  // SANAC_TRAINING_H_
