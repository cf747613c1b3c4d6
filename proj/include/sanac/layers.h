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

// Building blocks of the codec network: channel-major feature maps, a flat
// parameter layout, 1-d convolutions and residual bottleneck blocks. Every
// layer has a forward pass and a hand-written backward pass that accumulates
// parameter gradients into a buffer shaped like the parameter vector.

#ifndef SANAC_LAYERS_H_
#define SANAC_LAYERS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sanac/random.h"

namespace sanac {

// Row-major (channels x length) matrix.
struct FeatureMap {
  int channels = 0;
  int length = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int c, int t) : channels(c), length(t), data(size_t(c) * t) {}

  double& at(int c, int t) { return data[size_t(c) * length + t]; }
  double at(int c, int t) const { return data[size_t(c) * length + t]; }
  std::span<double> row(int c) {
    return {data.data() + size_t(c) * length, size_t(length)};
  }
  std::span<const double> row(int c) const {
    return {data.data() + size_t(c) * length, size_t(length)};
  }
  bool SameShape(const FeatureMap& o) const {
    return channels == o.channels && length == o.length;
  }
};

// Stacks maps along the channel axis. All inputs must share one length.
FeatureMap ConcatChannels(std::span<const FeatureMap> maps);
// Inverse of ConcatChannels for equal-sized groups.
std::vector<FeatureMap> SplitChannels(const FeatureMap& map, int groups);

struct ParamSlice {
  size_t offset = 0;
  size_t size = 0;
};

struct ParamGroup {
  std::string name;
  size_t offset = 0;
  size_t size = 0;
};

// Assigns named, contiguous ranges of a flat parameter vector.
class ParameterLayout {
 public:
  ParamSlice Add(const std::string& name, size_t size);
  size_t total() const { return total_; }
  const std::vector<ParamGroup>& groups() const { return groups_; }
  const ParamGroup* Find(const std::string& name) const;

 private:
  std::vector<ParamGroup> groups_;
  size_t total_ = 0;
};

constexpr double kLeakySlope = 0.01;

inline double LeakyRelu(double x) { return x > 0.0 ? x : kLeakySlope * x; }
inline double LeakyReluGrad(double x) { return x > 0.0 ? 1.0 : kLeakySlope; }

FeatureMap LeakyRelu(const FeatureMap& x);
// Multiplies `grad` in place by the activation slope at `pre`.
void LeakyReluBackward(const FeatureMap& pre, FeatureMap& grad);

// 1-d convolution with "same" zero padding; output length is
// ceil(length / stride).
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParameterLayout& layout, const std::string& name, int in_channels,
         int out_channels, int kernel, int stride = 1);

  FeatureMap Forward(std::span<const double> params,
                     const FeatureMap& x) const;
  // Accumulates weight and bias gradients into `grads` and returns the
  // gradient with respect to `x`.
  FeatureMap Backward(std::span<const double> params, const FeatureMap& x,
                      const FeatureMap& grad_out,
                      std::span<double> grads) const;
  // He-uniform weights (fan-in, leaky slope), zero bias.
  void Initialize(std::span<double> params, Rng& rng) const;

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return kernel_; }
  int stride() const { return stride_; }
  int OutputLength(int length) const {
    return (length + stride_ - 1) / stride_;
  }

 private:
  int in_ = 0;
  int out_ = 0;
  int kernel_ = 1;
  int stride_ = 1;
  ParamSlice weight_;
  ParamSlice bias_;
};

// Residual bottleneck: 1x1 reduce, k-wide conv, 1x1 expand, each followed by
// a leaky rectifier, plus an identity shortcut around the three convs.
class BottleneckBlock {
 public:
  struct Cache {
    FeatureMap input;
    FeatureMap pre_reduce, reduced;
    FeatureMap pre_spread, spread;
    FeatureMap pre_expand;
  };

  BottleneckBlock() = default;
  BottleneckBlock(ParameterLayout& layout, const std::string& name,
                  int channels, int reduced_channels, int kernel);

  // `cache` may be null for inference.
  FeatureMap Forward(std::span<const double> params, const FeatureMap& x,
                     Cache* cache) const;
  FeatureMap Backward(std::span<const double> params, const Cache& cache,
                      const FeatureMap& grad_out,
                      std::span<double> grads) const;
  void Initialize(std::span<double> params, Rng& rng) const;

  int channels() const { return reduce_.in_channels(); }

 private:
  Conv1d reduce_;
  Conv1d spread_;
  Conv1d expand_;
};

// Interlaces channel pairs: out[c, 2t] = in[2c, t], out[c, 2t + 1] =
// in[2c + 1, t]. Throws std::invalid_argument for an odd channel count.
FeatureMap SubpixelUpsample(const FeatureMap& map);
// Adjoint (and inverse) of SubpixelUpsample.
FeatureMap SubpixelDownsample(const FeatureMap& map);

}  // namespace sanac

#endif  // SANAC_LAYERS_H_
