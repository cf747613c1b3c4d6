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

#include "sanac/layers.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sanac {

FeatureMap ConcatChannels(std::span<const FeatureMap> maps) {
  if (maps.empty()) return {};
  int channels = 0;
  for (const auto& m : maps) {
    if (m.length != maps[0].length) {
      throw std::invalid_argument("ConcatChannels: length mismatch");
    }
    channels += m.channels;
  }
  FeatureMap out(channels, maps[0].length);
  auto it = out.data.begin();
  for (const auto& m : maps) it = std::copy(m.data.begin(), m.data.end(), it);
  return out;
}

std::vector<FeatureMap> SplitChannels(const FeatureMap& map, int groups) {
  if (groups <= 0 || map.channels % groups != 0) {
    throw std::invalid_argument("SplitChannels: channels not divisible");
  }
  const int per = map.channels / groups;
  std::vector<FeatureMap> out;
  out.reserve(groups);
  const size_t block = size_t(per) * map.length;
  for (int g = 0; g < groups; ++g) {
    FeatureMap part(per, map.length);
    std::copy_n(map.data.begin() + g * block, block, part.data.begin());
    out.push_back(std::move(part));
  }
  return out;
}

ParamSlice ParameterLayout::Add(const std::string& name, size_t size) {
  if (Find(name) != nullptr) {
    throw std::logic_error("duplicate parameter group " + name);
  }
  groups_.push_back({name, total_, size});
  ParamSlice slice{total_, size};
  total_ += size;
  return slice;
}

const ParamGroup* ParameterLayout::Find(const std::string& name) const {
  for (const auto& g : groups_) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

FeatureMap LeakyRelu(const FeatureMap& x) {
  FeatureMap y = x;
  for (double& v : y.data) v = LeakyRelu(v);
  return y;
}

void LeakyReluBackward(const FeatureMap& pre, FeatureMap& grad) {
  for (size_t i = 0; i < grad.data.size(); ++i) {
    grad.data[i] *= LeakyReluGrad(pre.data[i]);
  }
}

Conv1d::Conv1d(ParameterLayout& layout, const std::string& name,
               int in_channels, int out_channels, int kernel, int stride)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride) {
  if (in_ <= 0 || out_ <= 0 || kernel_ <= 0 || kernel_ % 2 == 0 ||
      stride_ <= 0) {
    throw std::invalid_argument(name + ": invalid conv geometry");
  }
  weight_ = layout.Add(name + ".weight", size_t(out_) * in_ * kernel_);
  bias_ = layout.Add(name + ".bias", size_t(out_));
}

namespace {

// Range of output positions t for which t * stride + offset lies in
// [0, length).
struct TapRange {
  int begin;
  int end;
};

TapRange ValidTaps(int offset, int stride, int length, int out_length) {
  int begin = 0;
  if (offset < 0) begin = (-offset + stride - 1) / stride;
  int end = 0;
  if (length - 1 - offset >= 0) end = (length - 1 - offset) / stride + 1;
  end = std::min(end, out_length);
  return {begin, std::max(begin, end)};
}

}  // namespace

FeatureMap Conv1d::Forward(std::span<const double> params,
                           const FeatureMap& x) const {
  if (x.channels != in_) {
    throw std::invalid_argument("Conv1d: input channel mismatch");
  }
  const int out_len = OutputLength(x.length);
  const int pad = (kernel_ - 1) / 2;
  const double* w = params.data() + weight_.offset;
  const double* b = params.data() + bias_.offset;
  FeatureMap y(out_, out_len);
  for (int o = 0; o < out_; ++o) {
    double* yo = y.data.data() + size_t(o) * out_len;
    std::fill_n(yo, out_len, b[o]);
    for (int i = 0; i < in_; ++i) {
      const double* xi = x.data.data() + size_t(i) * x.length;
      const double* wk = w + (size_t(o) * in_ + i) * kernel_;
      for (int j = 0; j < kernel_; ++j) {
        const int offset = j - pad;
        const TapRange r = ValidTaps(offset, stride_, x.length, out_len);
        const double wj = wk[j];
        if (stride_ == 1) {
          for (int t = r.begin; t < r.end; ++t) yo[t] += wj * xi[t + offset];
        } else {
          for (int t = r.begin; t < r.end; ++t) {
            yo[t] += wj * xi[t * stride_ + offset];
          }
        }
      }
    }
  }
  return y;
}

FeatureMap Conv1d::Backward(std::span<const double> params,
                            const FeatureMap& x, const FeatureMap& grad_out,
                            std::span<double> grads) const {
  const int out_len = OutputLength(x.length);
  if (grad_out.channels != out_ || grad_out.length != out_len) {
    throw std::invalid_argument("Conv1d: gradient shape mismatch");
  }
  const int pad = (kernel_ - 1) / 2;
  const double* w = params.data() + weight_.offset;
  double* gw = grads.data() + weight_.offset;
  double* gb = grads.data() + bias_.offset;
  FeatureMap dx(in_, x.length);
  for (int o = 0; o < out_; ++o) {
    const double* dyo = grad_out.data.data() + size_t(o) * out_len;
    double bias_acc = 0.0;
    for (int t = 0; t < out_len; ++t) bias_acc += dyo[t];
    gb[o] += bias_acc;
    for (int i = 0; i < in_; ++i) {
      const double* xi = x.data.data() + size_t(i) * x.length;
      double* dxi = dx.data.data() + size_t(i) * x.length;
      const size_t wbase = (size_t(o) * in_ + i) * kernel_;
      for (int j = 0; j < kernel_; ++j) {
        const int offset = j - pad;
        const TapRange r = ValidTaps(offset, stride_, x.length, out_len);
        const double wj = w[wbase + j];
        double acc = 0.0;
        if (stride_ == 1) {
          for (int t = r.begin; t < r.end; ++t) {
            acc += dyo[t] * xi[t + offset];
            dxi[t + offset] += wj * dyo[t];
          }
        } else {
          for (int t = r.begin; t < r.end; ++t) {
            const int s = t * stride_ + offset;
            acc += dyo[t] * xi[s];
            dxi[s] += wj * dyo[t];
          }
        }
        gw[wbase + j] += acc;
      }
    }
  }
  return dx;
}

void Conv1d::Initialize(std::span<double> params, Rng& rng) const {
  const double fan_in = double(in_) * kernel_;
  const double bound =
      std::sqrt(6.0 / ((1.0 + kLeakySlope * kLeakySlope) * fan_in));
  for (size_t i = 0; i < weight_.size; ++i) {
    params[weight_.offset + i] = rng.Uniform(-bound, bound);
  }
  std::fill_n(params.begin() + bias_.offset, bias_.size, 0.0);
}

BottleneckBlock::BottleneckBlock(ParameterLayout& layout,
                                 const std::string& name, int channels,
                                 int reduced_channels, int kernel)
    : reduce_(layout, name + ".reduce", channels, reduced_channels, 1),
      spread_(layout, name + ".spread", reduced_channels, reduced_channels,
              kernel),
      expand_(layout, name + ".expand", reduced_channels, channels, 1) {}

FeatureMap BottleneckBlock::Forward(std::span<const double> params,
                                    const FeatureMap& x, Cache* cache) const {
  FeatureMap pre_reduce = reduce_.Forward(params, x);
  FeatureMap reduced = LeakyRelu(pre_reduce);
  FeatureMap pre_spread = spread_.Forward(params, reduced);
  FeatureMap spread = LeakyRelu(pre_spread);
  FeatureMap pre_expand = expand_.Forward(params, spread);
  FeatureMap y = x;
  for (size_t i = 0; i < y.data.size(); ++i) {
    y.data[i] += LeakyRelu(pre_expand.data[i]);
  }
  if (cache != nullptr) {
    cache->input = x;
    cache->pre_reduce = std::move(pre_reduce);
    cache->reduced = std::move(reduced);
    cache->pre_spread = std::move(pre_spread);
    cache->spread = std::move(spread);
    cache->pre_expand = std::move(pre_expand);
  }
  return y;
}

FeatureMap BottleneckBlock::Backward(std::span<const double> params,
                                     const Cache& cache,
                                     const FeatureMap& grad_out,
                                     std::span<double> grads) const {
  FeatureMap g = grad_out;
  LeakyReluBackward(cache.pre_expand, g);
  g = expand_.Backward(params, cache.spread, g, grads);
  LeakyReluBackward(cache.pre_spread, g);
  g = spread_.Backward(params, cache.reduced, g, grads);
  LeakyReluBackward(cache.pre_reduce, g);
  g = reduce_.Backward(params, cache.input, g, grads);
  for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += grad_out.data[i];
  return g;
}

void BottleneckBlock::Initialize(std::span<double> params, Rng& rng) const {
  reduce_.Initialize(params, rng);
  spread_.Initialize(params, rng);
  expand_.Initialize(params, rng);
}

FeatureMap SubpixelUpsample(const FeatureMap& map) {
  if (map.channels % 2 != 0) {
    throw std::invalid_argument("SubpixelUpsample: odd channel count");
  }
  FeatureMap out(map.channels / 2, map.length * 2);
  for (int c = 0; c < out.channels; ++c) {
    for (int t = 0; t < map.length; ++t) {
      out.at(c, 2 * t) = map.at(2 * c, t);
      out.at(c, 2 * t + 1) = map.at(2 * c + 1, t);
    }
  }
  return out;
}

FeatureMap SubpixelDownsample(const FeatureMap& map) {
  if (map.length % 2 != 0) {
    throw std::invalid_argument("SubpixelDownsample: odd length");
  }
  FeatureMap out(map.channels * 2, map.length / 2);
  for (int c = 0; c < map.channels; ++c) {
    for (int t = 0; t < out.length; ++t) {
      out.at(2 * c, t) = map.at(c, 2 * t);
      out.at(2 * c + 1, t) = map.at(c, 2 * t + 1);
    }
  }
  return out;
}

}  // namespace sanac
