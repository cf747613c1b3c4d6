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

#include "sanac/config.h"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "json.hpp"

namespace sanac {

namespace {

using nlohmann::json;

struct Key {
  std::string name;
  std::string help;
  std::function<json(RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T Convert(const std::string& name, const json& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw std::invalid_argument(name + ": expected a string");
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw std::invalid_argument(name + ": expected a number");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      throw std::invalid_argument(name + ": expected a non-negative integer");
    }
  } else {
    if (!v.is_number_integer()) {
      throw std::invalid_argument(name + ": expected an integer");
    }
  }
  return v.get<T>();
}

template <typename T, typename Ref>
Key Field(std::string name, std::string help, Ref ref) {
  Key k{name, std::move(help), nullptr, nullptr};
  k.get = [ref](RunConfig& c) { return json(ref(c)); };
  k.set = [ref, name](RunConfig& c, const json& v) {
    ref(c) = Convert<T>(name, v);
  };
  return k;
}

Key KindKey() {
  Key k{"training.kind", "codec: \"sanac\" or \"baseline\"", nullptr, nullptr};
  k.get = [](RunConfig& c) { return json(CodecKindName(c.training.kind)); };
  k.set = [](RunConfig& c, const json& v) {
    c.training.kind = ParseCodecKind(Convert<std::string>("training.kind", v));
  };
  return k;
}

#define SANAC_FIELD(T, name, help, expr) \
  Field<T>(name, help, [](RunConfig& c) -> T& { return c.expr; })

const std::vector<Key>& Registry() {
  static const std::vector<Key> keys = [] {
    return std::vector<Key>{
        SANAC_FIELD(int, "model.frame_size", "samples per frame (N)",
                    training.model.frame_size),
        SANAC_FIELD(int, "model.code_length", "code vectors per source (P)",
                    training.model.code_length),
        SANAC_FIELD(int, "model.vq_dim", "code vector dimension (L)",
                    training.model.vq_dim),
        SANAC_FIELD(int, "model.num_sources",
                    "code blocks of the source-aware codec (K)",
                    training.model.num_sources),
        SANAC_FIELD(int, "model.trunk_channels", "residual trunk width",
                    training.model.trunk_channels),
        SANAC_FIELD(int, "model.bottleneck_channels",
                    "reduced width inside bottleneck blocks",
                    training.model.bottleneck_channels),
        SANAC_FIELD(int, "model.transform_channels",
                    "width of the joint transformation blocks",
                    training.model.transform_channels),
        SANAC_FIELD(int, "model.conv_kernel", "convolution kernel size",
                    training.model.conv_kernel),
        SANAC_FIELD(int, "model.num_centroids", "codebook size (M)",
                    training.model.num_centroids),
        SANAC_FIELD(int, "model.encoder_blocks",
                    "bottleneck blocks before downsampling",
                    training.model.encoder_blocks),
        SANAC_FIELD(int, "model.post_blocks",
                    "bottleneck blocks after downsampling",
                    training.model.post_blocks),
        SANAC_FIELD(int, "model.transform_blocks",
                    "joint transformation blocks in the decoder",
                    training.model.transform_blocks),
        SANAC_FIELD(int, "model.decoder_blocks",
                    "per-source decoder bottleneck blocks",
                    training.model.decoder_blocks),
        SANAC_FIELD(double, "loss.lambda_mse", "weight of the MSE terms",
                    training.loss.mse_weight),
        SANAC_FIELD(double, "loss.lambda_ent_tot",
                    "weight of the total-entropy term",
                    training.loss.total_entropy_weight),
        SANAC_FIELD(double, "loss.lambda_ratio",
                    "weight of the entropy-ratio term",
                    training.loss.ratio_weight),
        SANAC_FIELD(double, "loss.xi", "target total entropy, bits per position",
                    training.loss.target_entropy),
        SANAC_FIELD(double, "loss.psi", "target speech/noise entropy ratio",
                    training.loss.target_ratio),
        SANAC_FIELD(double, "loss.ratio_floor",
                    "lower bound on the ratio denominator, bits",
                    training.loss.ratio_floor),
        SANAC_FIELD(double, "alpha.start", "softmax scale at stage-2 entry",
                    training.alpha.alpha_start),
        SANAC_FIELD(double, "alpha.max", "softmax scale ceiling",
                    training.alpha.alpha_max),
        SANAC_FIELD(double, "alpha.growth", "per-epoch multiplicative growth",
                    training.alpha.growth),
        SANAC_FIELD(int, "early_stop.stage_patience",
                    "non-improving epochs that end stages 1 and 2",
                    training.early_stop.stage_patience),
        SANAC_FIELD(int, "early_stop.stop_patience",
                    "non-improving epochs that end stage 3",
                    training.early_stop.stop_patience),
        SANAC_FIELD(int, "early_stop.min_stage1_epochs",
                    "minimum epochs in stage 1",
                    training.early_stop.min_stage1_epochs),
        SANAC_FIELD(int, "early_stop.max_stage_epochs",
                    "forced end of stages 1 and 2 (0 = off)",
                    training.early_stop.max_stage_epochs),
        SANAC_FIELD(int, "early_stop.max_epochs", "overall epoch cap (0 = off)",
                    training.early_stop.max_epochs),
        SANAC_FIELD(double, "early_stop.min_improvement",
                    "relative validation decrease that counts as improvement",
                    training.early_stop.min_improvement),
        KindKey(),
        SANAC_FIELD(double, "training.learning_rate", "Adam learning rate",
                    training.adam.learning_rate),
        SANAC_FIELD(int, "training.batch_size", "frames per batch",
                    training.batch_size),
        SANAC_FIELD(int, "training.kmeans_iterations",
                    "Lloyd iterations of the centroid initialization",
                    training.kmeans_iterations),
        SANAC_FIELD(int, "training.kmeans_max_vectors",
                    "code vectors sampled for the centroid initialization",
                    training.kmeans_max_vectors),
        SANAC_FIELD(uint64_t, "training.seed", "random seed", training.seed),
        SANAC_FIELD(int, "frames.crossfade_len",
                    "overlap between frames, samples",
                    training.frames.crossfade_len),
        SANAC_FIELD(int, "frames.sample_rate", "sample rate, Hz",
                    training.sample_rate),
        SANAC_FIELD(std::string, "paths.manifest", "dataset manifest", manifest),
        SANAC_FIELD(std::string, "paths.checkpoint", "checkpoint to write",
                    checkpoint),
        SANAC_FIELD(std::string, "paths.log", "JSON-lines training log", log),
    };
  }();
  return keys;
}

#undef SANAC_FIELD

const Key& Find(const std::string& name) {
  for (const auto& k : Registry()) {
    if (k.name == name) return k;
  }
  throw std::invalid_argument("unknown config key '" + name + "'");
}

void Flatten(const json& j, const std::string& prefix,
             std::vector<std::pair<std::string, json>>& out) {
  if (!j.is_object()) {
    out.emplace_back(prefix, j);
    return;
  }
  if (!prefix.empty() && j.empty()) {
    throw std::invalid_argument("empty config section '" + prefix + "'");
  }
  for (const auto& [k, v] : j.items()) {
    Flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  }
}

}  // namespace

std::vector<ConfigKeyInfo> ConfigKeys() {
  RunConfig defaults;
  std::vector<ConfigKeyInfo> out;
  for (const auto& k : Registry()) {
    out.push_back({k.name, k.help, k.get(defaults).dump()});
  }
  return out;
}

void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value) {
  const Key& k = Find(key);
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = value;
  try {
    k.set(config, v);
  } catch (const json::exception& e) {
    throw std::invalid_argument(key + ": " + e.what());
  }
}

void ApplyOverride(RunConfig& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override must look like key=value: '" +
                                assignment + "'");
  }
  SetConfigValue(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

RunConfig ParseRunConfig(const std::string& json_text) {
  const json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::invalid_argument("config is not a JSON object");
  }
  std::vector<std::pair<std::string, json>> leaves;
  Flatten(j, "", leaves);
  RunConfig c;
  for (const auto& [name, value] : leaves) Find(name).set(c, value);
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ParseRunConfig(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string RunConfigToJson(const RunConfig& config) {
  RunConfig copy = config;
  json j = json::object();
  for (const auto& k : Registry()) {
    j[json::json_pointer("/" + [&] {
      std::string p = k.name;
      for (char& ch : p) {
        if (ch == '.') ch = '/';
      }
      return p;
    }())] = k.get(copy);
  }
  return j.dump(2);
}

void FinalizeRunConfig(RunConfig& config) {
  config.training.frames.frame_size = config.training.model.frame_size;
  if (config.training.sample_rate <= 0) {
    throw std::invalid_argument("frames.sample_rate must be positive");
  }
  config.training.Validate();
}

}  // namespace sanac
