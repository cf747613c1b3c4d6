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

#include "sanac/quantizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sanac {

CodebookView::CodebookView(std::span<const double> centroids, int dim)
    : centroids_(centroids), dim_(dim) {
  if (dim <= 0 || centroids.size() % size_t(dim) != 0) {
    throw std::invalid_argument("CodebookView: size not a multiple of dim");
  }
  size_ = static_cast<int>(centroids.size() / dim);
  if (size_ < 2) throw std::invalid_argument("CodebookView: need M >= 2");
}

namespace {

double Distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

void CheckVector(std::span<const double> y, const CodebookView& book) {
  if (y.size() != size_t(book.dim())) {
    throw std::invalid_argument("quantizer: vector dimension mismatch");
  }
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("quantizer: non-finite code vector");
    }
  }
}

}  // namespace

SoftAssignment SoftAssign(std::span<const double> y, const CodebookView& book,
                          double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("SoftAssign: alpha must be positive");
  }
  CheckVector(y, book);
  const int m_count = book.size();
  SoftAssignment out;
  out.distances.resize(m_count);
  out.probabilities.resize(m_count);
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < m_count; ++m) {
    out.distances[m] = Distance(y, book.centroid(m));
    best = std::min(best, out.distances[m]);
  }
  // Subtracting the max logit (-alpha * min d) keeps every exponent <= 0.
  double total = 0.0;
  for (int m = 0; m < m_count; ++m) {
    out.probabilities[m] = std::exp(-alpha * (out.distances[m] - best));
    total += out.probabilities[m];
  }
  for (double& p : out.probabilities) p /= total;
  return out;
}

std::vector<double> SoftQuantize(const SoftAssignment& assignment,
                                 const CodebookView& book) {
  if (assignment.probabilities.size() != size_t(book.size())) {
    throw std::invalid_argument("SoftQuantize: assignment size mismatch");
  }
  std::vector<double> out(book.dim(), 0.0);
  for (int m = 0; m < book.size(); ++m) {
    const double p = assignment.probabilities[m];
    if (p == 0.0) continue;
    const auto mu = book.centroid(m);
    for (int l = 0; l < book.dim(); ++l) out[l] += p * mu[l];
  }
  return out;
}

int NearestCentroid(std::span<const double> y, const CodebookView& book) {
  CheckVector(y, book);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int m = 0; m < book.size(); ++m) {
    double acc = 0.0;
    const auto mu = book.centroid(m);
    for (int l = 0; l < book.dim(); ++l) {
      const double d = y[l] - mu[l];
      acc += d * d;
    }
    if (acc < best_d) {
      best_d = acc;
      best = m;
    }
  }
  return best;
}

HardCode HardQuantize(std::span<const double> y, const CodebookView& book) {
  HardCode out;
  out.index = NearestCentroid(y, book);
  const auto mu = book.centroid(out.index);
  out.value.assign(mu.begin(), mu.end());
  return out;
}

std::vector<double> SoftQuantizeBackward(std::span<const double> y,
                                         const CodebookView& book, double alpha,
                                         const SoftAssignment& assignment,
                                         std::span<const double> grad_value,
                                         std::span<const double> grad_prob,
                                         std::span<double> grad_centroids) {
  const int m_count = book.size();
  const int dim = book.dim();
  const auto& p = assignment.probabilities;
  const auto& d = assignment.distances;

  std::vector<double> grad_p(m_count, 0.0);
  for (int m = 0; m < m_count; ++m) {
    const auto mu = book.centroid(m);
    double acc = grad_prob.empty() ? 0.0 : grad_prob[m];
    for (int l = 0; l < dim; ++l) {
      acc += grad_value[l] * mu[l];
      grad_centroids[size_t(m) * dim + l] += p[m] * grad_value[l];
    }
    grad_p[m] = acc;
  }
  double mean = 0.0;
  for (int m = 0; m < m_count; ++m) mean += p[m] * grad_p[m];

  std::vector<double> grad_y(dim, 0.0);
  for (int m = 0; m < m_count; ++m) {
    // dL/dd_m = -alpha * p_m * (g_m - sum_j p_j g_j)
    const double grad_d = -alpha * p[m] * (grad_p[m] - mean);
    if (grad_d == 0.0 || d[m] == 0.0) continue;
    const auto mu = book.centroid(m);
    const double scale = grad_d / d[m];
    for (int l = 0; l < dim; ++l) {
      const double u = scale * (y[l] - mu[l]);
      grad_y[l] += u;
      grad_centroids[size_t(m) * dim + l] -= u;
    }
  }
  return grad_y;
}

double EstimateEntropy(std::span<const double> q) {
  double h = 0.0;
  for (double v : q) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return std::max(0.0, h);
}

UsageHistogram BatchUsage(std::span<const SoftAssignment> assignments) {
  if (assignments.empty()) {
    throw std::invalid_argument("BatchUsage: no assignments");
  }
  UsageHistogram out;
  out.q.assign(assignments[0].probabilities.size(), 0.0);
  for (const auto& a : assignments) {
    for (size_t m = 0; m < out.q.size(); ++m) out.q[m] += a.probabilities[m];
  }
  for (double& v : out.q) v /= static_cast<double>(assignments.size());
  return out;
}

UsageHistogram CountUsage(std::span<const int> indices, int num_centroids) {
  if (indices.empty()) throw std::invalid_argument("CountUsage: no indices");
  UsageHistogram out;
  out.q.assign(num_centroids, 0.0);
  for (int i : indices) {
    if (i < 0 || i >= num_centroids) {
      throw std::invalid_argument("CountUsage: index out of range");
    }
    out.q[i] += 1.0;
  }
  for (double& v : out.q) v /= static_cast<double>(indices.size());
  return out;
}

double GrowthForEpochs(double alpha_start, double alpha_max, int epochs) {
  return std::pow(alpha_max / alpha_start, 1.0 / epochs);
}

double AlphaSchedule::AlphaAt(int epochs_annealed) const {
  return std::min(alpha_max,
                  alpha_start * std::pow(growth, std::max(0, epochs_annealed)));
}

void AlphaSchedule::Validate() const {
  if (!(alpha_start > 0.0) || !(alpha_max >= alpha_start) ||
      !(growth > 1.0)) {
    throw std::invalid_argument(
        "AlphaSchedule: need 0 < alpha_start <= alpha_max and growth > 1");
  }
}

void JitterDuplicateCentroids(std::span<double> centroids, int dim, Rng& rng) {
  const size_t count = centroids.size() / dim;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t a = 0; a < count; ++a) {
      for (size_t b = a + 1; b < count; ++b) {
        if (!std::equal(centroids.begin() + b * dim,
                        centroids.begin() + (b + 1) * dim,
                        centroids.begin() + a * dim)) {
          continue;
        }
        for (int l = 0; l < dim; ++l) {
          double& v = centroids[b * dim + l];
          v += rng.Uniform(-1e-6, 1e-6) * (1.0 + std::abs(v));
        }
        changed = true;
      }
    }
  }
}

}  // namespace sanac
