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

// Soft-to-hard vector quantization.
//
// During training a code vector y is replaced by the convex combination
// sum_m p_m mu_m with p = softmax(-alpha * ||y - mu_m||); at test time by
// the nearest centroid. Raising alpha moves the first toward the second.

#ifndef SANAC_QUANTIZER_H_
#define SANAC_QUANTIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sanac/random.h"

namespace sanac {

// Non-owning view of M centroids of dimension L, stored row-major.
class CodebookView {
 public:
  CodebookView(std::span<const double> centroids, int dim);

  int size() const { return size_; }
  int dim() const { return dim_; }
  std::span<const double> centroid(int m) const {
    return centroids_.subspan(size_t(m) * dim_, dim_);
  }
  std::span<const double> data() const { return centroids_; }

 private:
  std::span<const double> centroids_;
  int dim_;
  int size_;
};

struct SoftAssignment {
  std::vector<double> probabilities;  // p, sums to 1
  std::vector<double> distances;      // d, Euclidean
};

// Throws std::invalid_argument for non-positive alpha or non-finite y.
SoftAssignment SoftAssign(std::span<const double> y, const CodebookView& book,
                          double alpha);
std::vector<double> SoftQuantize(const SoftAssignment& assignment,
                                 const CodebookView& book);

struct HardCode {
  int index = 0;
  std::vector<double> value;
};

// Nearest centroid; ties go to the lowest index.
HardCode HardQuantize(std::span<const double> y, const CodebookView& book);
int NearestCentroid(std::span<const double> y, const CodebookView& book);

// Backward pass of SoftQuantize(SoftAssign(y)). `grad_value` is dL/dy_bar,
// `grad_prob` an optional extra dL/dp (from entropy terms; may be empty).
// Adds dL/dmu into `grad_centroids` and returns dL/dy.
std::vector<double> SoftQuantizeBackward(std::span<const double> y,
                                         const CodebookView& book, double alpha,
                                         const SoftAssignment& assignment,
                                         std::span<const double> grad_value,
                                         std::span<const double> grad_prob,
                                         std::span<double> grad_centroids);

// Frequencies of centroid use, summing to one.
struct UsageHistogram {
  std::vector<double> q;
};

// Shannon entropy in bits; 0 log 0 is taken as 0.
double EstimateEntropy(std::span<const double> q);
inline double EstimateEntropy(const UsageHistogram& h) {
  return EstimateEntropy(h.q);
}

// Soft usage: mean of the probability vectors.
UsageHistogram BatchUsage(std::span<const SoftAssignment> assignments);
// Hard usage: normalized index counts. Throws if `indices` is empty.
UsageHistogram CountUsage(std::span<const int> indices, int num_centroids);

// Growth factor for a schedule that reaches alpha_max after `epochs`.
double GrowthForEpochs(double alpha_start, double alpha_max, int epochs);

// Exponential annealing of the softmax scale, clamped at alpha_max.
struct AlphaSchedule {
  double alpha_start = 10.0;
  double alpha_max = 500.0;
  // Multiplicative growth per epoch; default reaches alpha_max in 20 epochs.
  double growth = GrowthForEpochs(10.0, 500.0, 20);

  double AlphaAt(int epochs_annealed) const;
  void Validate() const;
};

// Replaces bit-identical duplicate centroids by jittered copies until all
// rows are distinct.
void JitterDuplicateCentroids(std::span<double> centroids, int dim, Rng& rng);

}  // namespace sanac

#endif  // SANAC_QUANTIZER_H_
