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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "test_util.h"

namespace sanac {
namespace {

std::vector<double> RandomBook(int m, int dim, Rng& rng, double scale = 1.0) {
  std::vector<double> b(size_t(m) * dim);
  for (double& v : b) v = rng.Uniform(-scale, scale);
  return b;
}

double Distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

TEST(SoftAssignTest, ExactCentroidWins) {
  Rng rng(1);
  const auto data = RandomBook(8, 3, rng);
  const CodebookView book(data, 3);
  const auto y = book.centroid(5);
  const SoftAssignment a = SoftAssign(std::vector<double>(y.begin(), y.end()), book, 10.0);
  EXPECT_EQ(std::max_element(a.probabilities.begin(), a.probabilities.end()) -
                a.probabilities.begin(),
            5);
  EXPECT_EQ(a.distances[5], 0.0);
  EXPECT_NEAR(std::accumulate(a.probabilities.begin(), a.probabilities.end(), 0.0),
              1.0, 1e-12);
}

TEST(SoftAssignTest, EquidistantCentroidsSplitEvenly) {
  const std::vector<double> data = {-1.0, 1.0};
  const SoftAssignment a = SoftAssign(std::vector<double>{0.0}, CodebookView(data, 1), 7.0);
  EXPECT_DOUBLE_EQ(a.probabilities[0], 0.5);
  EXPECT_DOUBLE_EQ(a.probabilities[1], 0.5);
}

TEST(SoftAssignTest, ClosedFormTwoCentroids) {
  const std::vector<double> data = {0.0, 1.0};
  const SoftAssignment a = SoftAssign(std::vector<double>{0.0}, CodebookView(data, 1), 10.0);
  const double e = std::exp(-10.0);
  EXPECT_NEAR(a.probabilities[0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(a.probabilities[1], e / (1.0 + e), 1e-15);
  EXPECT_EQ(a.distances, (std::vector<double>{0.0, 1.0}));
}

TEST(SoftAssignTest, StableForHugeScale) {
  Rng rng(2);
  const auto data = RandomBook(16, 4, rng, 100.0);
  const std::vector<double> y = {1.0, -3.0, 50.0, 2.0};
  const SoftAssignment a = SoftAssign(y, CodebookView(data, 4), 1e6);
  double sum = 0.0;
  for (double p : a.probabilities) {
    ASSERT_TRUE(std::isfinite(p));
    ASSERT_GE(p, 0.0);
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(SoftAssignTest, RejectsBadInput) {
  const std::vector<double> data = {0.0, 1.0};
  const CodebookView book(data, 1);
  EXPECT_THROW(SoftAssign(std::vector<double>{0.0}, book, 0.0), std::invalid_argument);
  EXPECT_THROW(SoftAssign(std::vector<double>{NAN}, book, 1.0), std::invalid_argument);
  EXPECT_THROW(CodebookView(std::vector<double>{1.0}, 1), std::invalid_argument);
}

TEST(SoftQuantizeTest, OneHotAndUniform) {
  const std::vector<double> data = {0.0, 2.0};
  const CodebookView book(data, 1);
  SoftAssignment a;
  a.probabilities = {0.5, 0.5};
  EXPECT_EQ(SoftQuantize(a, book), (std::vector<double>{1.0}));
  a.probabilities = {0.0, 1.0};
  EXPECT_EQ(SoftQuantize(a, book), (std::vector<double>{2.0}));
}

TEST(SoftQuantizeTest, StaysInsideBoundingBox) {
  Rng rng(3);
  const auto data = RandomBook(10, 3, rng);
  const CodebookView book(data, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto y = testing::RandomSignal(3, rng, 2.0);
    const auto v = SoftQuantize(SoftAssign(y, book, rng.Uniform(0.1, 50.0)), book);
    for (int l = 0; l < 3; ++l) {
      double lo = 1e9, hi = -1e9;
      for (int m = 0; m < 10; ++m) {
        lo = std::min(lo, book.centroid(m)[l]);
        hi = std::max(hi, book.centroid(m)[l]);
      }
      ASSERT_GE(v[l], lo - 1e-12);
      ASSERT_LE(v[l], hi + 1e-12);
    }
  }
}

TEST(HardQuantizeTest, NearestAndTies) {
  Rng rng(4);
  const auto data = RandomBook(8, 2, rng);
  const CodebookView book(data, 2);
  const auto mu3 = book.centroid(3);
  const HardCode h = HardQuantize(std::vector<double>(mu3.begin(), mu3.end()), book);
  EXPECT_EQ(h.index, 3);
  EXPECT_TRUE(std::equal(h.value.begin(), h.value.end(), mu3.begin()));

  // Indices 2 and 5 equidistant from the origin; the rest far away.
  std::vector<double> tie(6 * 2, 10.0);
  tie[2 * 2] = 1.0;
  tie[2 * 2 + 1] = 0.0;
  tie[5 * 2] = 0.0;
  tie[5 * 2 + 1] = -1.0;
  EXPECT_EQ(NearestCentroid(std::vector<double>{0.0, 0.0}, CodebookView(tie, 2)), 2);
}

TEST(AnnealingTest, SoftApproachesHardAtMaximumAlpha) {
  Rng rng(5);
  int checked = 0;
  for (int trial = 0; trial < 2000 && checked < 200; ++trial) {
    const auto data = RandomBook(128, 6, rng);
    const CodebookView book(data, 6);
    const auto y = testing::RandomSignal(6, rng, 1.0);
    std::vector<double> d(128);
    for (int m = 0; m < 128; ++m) d[m] = Distance(y, book.centroid(m));
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[1] - sorted[0] < 0.1) continue;
    ++checked;
    const auto soft = SoftQuantize(SoftAssign(y, book, 500.0), book);
    const HardCode hard = HardQuantize(y, book);
    // Bound: every loser weighs at most exp(-alpha * margin).
    double max_norm = 0.0;
    for (int m = 0; m < 128; ++m) {
      max_norm = std::max(max_norm, Distance(book.centroid(m), std::vector<double>(6, 0.0)));
    }
    const double bound = 2.0 * 128 * std::exp(-500.0 * (sorted[1] - sorted[0])) * max_norm;
    const double diff = MaxAbsDiff(soft, hard.value);
    EXPECT_LT(diff, 1e-3);
    EXPECT_LE(diff, bound + 1e-15);
  }
  EXPECT_EQ(checked, 200);
}

TEST(AnnealingTest, NearestCellGainsMassWithAlpha) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto data = RandomBook(16, 3, rng);
    const CodebookView book(data, 3);
    const auto y = testing::RandomSignal(3, rng, 1.0);
    const HardCode hard = HardQuantize(y, book);
    double previous = 0.0;
    for (double alpha = 1.0; alpha <= 1000.0; alpha *= 1.5) {
      const double p = SoftAssign(y, book, alpha).probabilities[hard.index];
      ASSERT_GE(p, previous - 1e-15) << "alpha " << alpha;
      previous = p;
    }
    const auto soft = SoftQuantize(SoftAssign(y, book, 1e5), book);
    EXPECT_LT(Distance(soft, hard.value), 1e-6);
  }
}

TEST(AnnealingTest, TwoCentroidDistanceShrinksWithAlpha) {
  // With two centroids the soft value slides along the segment between them.
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto data = RandomBook(2, 3, rng);
    const CodebookView book(data, 3);
    const auto y = testing::RandomSignal(3, rng, 1.0);
    const HardCode hard = HardQuantize(y, book);
    double previous = 1e300;
    for (double alpha = 0.5; alpha <= 1000.0; alpha *= 1.5) {
      const double gap =
          Distance(SoftQuantize(SoftAssign(y, book, alpha), book), hard.value);
      ASSERT_LE(gap, previous + 1e-12) << "alpha " << alpha;
      previous = gap;
    }
  }
}

TEST(SoftQuantizeBackwardTest, MatchesFiniteDifferences) {
  Rng rng(7);
  const int m = 5, dim = 3;
  for (double alpha : {1.0, 10.0, 50.0}) {
    auto data = RandomBook(m, dim, rng);
    // Near the boundary of two cells, where the softmax is not saturated.
    auto y = testing::RandomSignal(dim, rng, 0.02);
    for (int l = 0; l < dim; ++l) y[l] += 0.5 * (data[l] + data[dim + l]);
    const auto w = testing::RandomSignal(dim, rng, 1.0);    // dL/dy_bar
    const auto wp = testing::RandomSignal(m, rng, 1.0);     // dL/dp
    auto loss = [&](const std::vector<double>& yy, const std::vector<double>& bb) {
      const CodebookView book(bb, dim);
      const SoftAssignment a = SoftAssign(yy, book, alpha);
      const auto v = SoftQuantize(a, book);
      double l = 0.0;
      for (int i = 0; i < dim; ++i) l += w[i] * v[i];
      for (int i = 0; i < m; ++i) l += wp[i] * a.probabilities[i];
      return l;
    };
    const CodebookView book(data, dim);
    const SoftAssignment a = SoftAssign(y, book, alpha);
    std::vector<double> grad_book(data.size(), 0.0);
    const auto grad_y = SoftQuantizeBackward(y, book, alpha, a, w, wp, grad_book);

    const double eps = 1e-6;
    std::vector<double> fd_y(dim), fd_book(data.size());
    for (int i = 0; i < dim; ++i) {
      auto up = y, down = y;
      up[i] += eps;
      down[i] -= eps;
      fd_y[i] = (loss(up, data) - loss(down, data)) / (2 * eps);
    }
    for (size_t i = 0; i < data.size(); ++i) {
      auto up = data, down = data;
      up[i] += eps;
      down[i] -= eps;
      fd_book[i] = (loss(y, up) - loss(y, down)) / (2 * eps);
    }
    auto rel = [](const std::vector<double>& a, const std::vector<double>& b) {
      double d = 0.0, n = 0.0;
      for (size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
        n = std::max(n, std::max(std::abs(a[i]), std::abs(b[i])));
      }
      return std::sqrt(d) / std::max(n, 1e-8);
    };
    EXPECT_LE(rel(grad_y, fd_y), 1e-4) << "alpha " << alpha;
    EXPECT_LE(rel(grad_book, fd_book), 1e-4) << "alpha " << alpha;
  }
}

TEST(EntropyTest, ReferenceValues) {
  EXPECT_EQ(EstimateEntropy(std::vector<double>(128, 1.0 / 128)), 7.0);
  std::vector<double> one_hot(128, 0.0);
  one_hot[17] = 1.0;
  EXPECT_EQ(EstimateEntropy(one_hot), 0.0);
  std::vector<double> dyadic(128, 0.0);
  dyadic[0] = 0.5;
  dyadic[1] = 0.25;
  dyadic[2] = 0.25;
  EXPECT_DOUBLE_EQ(EstimateEntropy(dyadic), 1.5);
}

TEST(EntropyTest, BoundsOnRandomHistograms) {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> q(128);
    for (double& v : q) v = rng.Uniform() < 0.3 ? 0.0 : rng.Uniform();
    q[rng.Index(128)] += 0.1;
    const double s = std::accumulate(q.begin(), q.end(), 0.0);
    for (double& v : q) v /= s;
    const double h = EstimateEntropy(q);
    ASSERT_GE(h, 0.0);
    ASSERT_LE(h, 7.0 + 1e-12);
  }
}

TEST(EntropyTest, JointEntropyAtMostSumOfMarginals) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int a = 2 + rng.Index(8), b = 2 + rng.Index(8);
    std::vector<double> joint(size_t(a) * b);
    for (double& v : joint) v = rng.Uniform() < 0.2 ? 0.0 : rng.Uniform();
    joint[0] += 0.01;
    const double s = std::accumulate(joint.begin(), joint.end(), 0.0);
    std::vector<double> ma(a, 0.0), mb(b, 0.0);
    for (int i = 0; i < a; ++i) {
      for (int j = 0; j < b; ++j) {
        joint[i * b + j] /= s;
        ma[i] += joint[i * b + j];
        mb[j] += joint[i * b + j];
      }
    }
    ASSERT_LE(EstimateEntropy(joint), EstimateEntropy(ma) + EstimateEntropy(mb) + 1e-12);
  }
}

TEST(UsageTest, SoftAndHardHistograms) {
  SoftAssignment x, y;
  x.probabilities = {1.0, 0.0};
  y.probabilities = {0.0, 1.0};
  std::vector<SoftAssignment> both = {x, y};
  EXPECT_EQ(BatchUsage(both).q, (std::vector<double>{0.5, 0.5}));
  std::vector<SoftAssignment> same = {x, x, x};
  EXPECT_EQ(BatchUsage(same).q, (std::vector<double>{1.0, 0.0}));

  const std::vector<int> idx = {0, 3, 3, 1, 3, 0, 3, 3};
  EXPECT_EQ(CountUsage(idx, 4).q,
            (std::vector<double>{2.0 / 8, 1.0 / 8, 0.0, 5.0 / 8}));
  std::vector<int> uniform(128 * 3);
  for (size_t i = 0; i < uniform.size(); ++i) uniform[i] = static_cast<int>(i % 128);
  EXPECT_EQ(EstimateEntropy(CountUsage(uniform, 128)), 7.0);
  EXPECT_THROW(CountUsage(std::vector<int>{}, 4), std::invalid_argument);
}

TEST(AlphaScheduleTest, ExponentialGrowthClampedAtMaximum) {
  AlphaSchedule s;
  EXPECT_NO_THROW(s.Validate());
  EXPECT_NEAR(s.growth, std::pow(50.0, 1.0 / 20.0), 1e-15);
  EXPECT_EQ(s.AlphaAt(0), 10.0);
  EXPECT_NEAR(s.AlphaAt(20), 500.0, 1e-9);
  EXPECT_EQ(s.AlphaAt(21), 500.0);
  EXPECT_EQ(s.AlphaAt(100), 500.0);
  for (int e = 0; e < 30; ++e) ASSERT_LE(s.AlphaAt(e), s.AlphaAt(e + 1));
  AlphaSchedule bad;
  bad.growth = 1.0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(JitterTest, DuplicatesBecomeDistinct) {
  std::vector<double> book = {1.0, 2.0, 1.0, 2.0, 3.0, 4.0, 1.0, 2.0};
  const std::vector<double> before = book;
  Rng rng(10);
  JitterDuplicateCentroids(book, 2, rng);
  EXPECT_EQ(book[0], 1.0);
  EXPECT_EQ(book[1], 2.0);
  EXPECT_EQ(book[4], 3.0);
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      EXPECT_FALSE(book[2 * a] == book[2 * b] && book[2 * a + 1] == book[2 * b + 1]);
    }
  }
  for (size_t i = 0; i < book.size(); ++i) EXPECT_NEAR(book[i], before[i], 1e-3);
}

}  // namespace
}  // namespace sanac
