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

#include "gradient_check.h"
#include "test_util.h"

namespace sanac {
namespace {

struct Batch {
  std::vector<std::vector<double>> mixture, speech;
  std::vector<TrainingExample> examples;
};

Batch RandomBatch(int n, int frame, Rng& rng) {
  Batch b;
  for (int i = 0; i < n; ++i) {
    b.mixture.push_back(testing::RandomSignal(frame, rng));
    b.speech.push_back(testing::RandomSignal(frame, rng));
  }
  for (int i = 0; i < n; ++i) b.examples.push_back({b.mixture[i], b.speech[i]});
  return b;
}

Model PerturbedModel(CodecKind kind, Rng& rng) {
  Model m(testing::TinyConfig(), kind);
  m.Initialize(3);
  // Non-zero biases and spread-out centroids.
  for (double& v : m.mutable_parameters()) v += 0.05 * rng.Normal();
  return m;
}

struct Case {
  CodecKind kind;
  int stage;
  double alpha;
  double mse_weight;
};

class GradientTest : public ::testing::TestWithParam<Case> {};

TEST_P(GradientTest, EveryGroupMatchesFiniteDifferences) {
  const Case c = GetParam();
  Rng rng(7);
  const Model model = PerturbedModel(c.kind, rng);
  const Batch batch = RandomBatch(3, 16, rng);
  LossConfig loss;
  loss.mse_weight = c.mse_weight;
  const auto errors =
      testing::CheckGradients(model, batch.examples, c.stage, c.alpha, loss, 1e-5);
  ASSERT_FALSE(errors.empty());
  for (const auto& e : errors) {
    EXPECT_LE(e.rel_error, 1e-4) << e.name << " (" << e.size << " values, |g| = "
                                 << e.analytic_norm << ")";
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllStages, GradientTest,
    ::testing::Values(Case{CodecKind::kSourceAware, 1, 0.0, 1.0},
                      Case{CodecKind::kSourceAware, 2, 3.0, 1.0},
                      Case{CodecKind::kSourceAware, 3, 3.0, 1.0},
                      Case{CodecKind::kSourceAware, 3, 20.0, 1.0},
                      Case{CodecKind::kSourceAware, 3, 3.0, 0.0},
                      Case{CodecKind::kBaseline, 1, 0.0, 1.0},
                      Case{CodecKind::kBaseline, 2, 3.0, 1.0},
                      Case{CodecKind::kBaseline, 3, 3.0, 1.0}));

TEST(GradientTest, EntropyTermsReachTheCodebooks) {
  Rng rng(8);
  const Model model = PerturbedModel(CodecKind::kSourceAware, rng);
  const Batch batch = RandomBatch(3, 16, rng);
  LossConfig loss;
  loss.mse_weight = 0.0;
  const auto g = ComputeBatch(model, batch.examples, 3, 3.0, loss, true).grads;
  for (int k = 0; k < 2; ++k) {
    const ParamSlice s = model.codebook_slice(k);
    double norm = 0.0;
    for (size_t i = s.offset; i < s.offset + s.size; ++i) norm += g[i] * g[i];
    EXPECT_GT(norm, 0.0) << "codebook " << k;
  }
}

}  // namespace
}  // namespace sanac
