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

// Run configuration. A config file is a JSON object of sections:
//
//   {"model": {"code_length": 256}, "loss": {"xi": 2}, "paths": {...}}
//
// Every leaf is addressed by a dotted key ("loss.xi"), which is also the
// syntax of command-line overrides. Unknown keys are errors.

#ifndef SANAC_CONFIG_H_
#define SANAC_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include "sanac/training.h"

namespace sanac {

struct RunConfig {
  TrainingConfig training;
  std::string manifest;    // dataset manifest
  std::string checkpoint;  // output of `train`
  std::string log;         // JSON-lines training log; empty = none
};

struct ConfigKeyInfo {
  std::string name;
  std::string help;
  std::string default_value;  // JSON text
};

// All keys with their defaults, in documentation order.
std::vector<ConfigKeyInfo> ConfigKeys();

// Sets one key from JSON text, or from a bare string for string-valued keys.
// Throws std::invalid_argument for unknown keys and ill-typed values.
void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value);

// Parses "key=value".
void ApplyOverride(RunConfig& config, const std::string& assignment);

RunConfig ParseRunConfig(const std::string& json_text);
RunConfig LoadRunConfig(const std::filesystem::path& path);
std::string RunConfigToJson(const RunConfig& config);

// Copies shared fields (frame size) and validates the training settings.
void FinalizeRunConfig(RunConfig& config);

}  // namespace sanac

#endif  // SANAC_CONFIG_H_
