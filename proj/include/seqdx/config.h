/*
 * Copyright 2026 The seqdx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEQDX_CONFIG_H_
#define SEQDX_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seqdx/classifier.h"
#include "seqdx/phantom.h"
#include "seqdx/policy.h"

namespace seqdx {

struct EvalConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::optional<double> tau;  // confidence stop; none by default
  InferenceMode mode = InferenceMode::kArgmax;
};

// INI document with sections [data], [classifier], [policy], [eval] and
// [output]. See README.md for the key list. Every key is optional.
struct ExperimentConfig {
  GeneratorConfig data;
  ClassifierConfig classifier;
  PolicyTrainConfig policy;
  EvalConfig eval;
  std::filesystem::path out_dir = ".";
};

inline constexpr const char* kOutDirEnv = "SEQDX_OUT_DIR";

// Throws std::invalid_argument on unknown keys or bad values, IoError if the
// file cannot be read.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical INI text for `cfg`; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const ExperimentConfig& cfg);

std::string to_string(GatingMode m);
std::string to_string(RewardMode m);
std::string to_string(CandidateMode m);
std::string to_string(InferenceMode m);
std::string to_string(OptimizerKind k);

}  // namespace seqdx

#endif  // SEQDX_CONFIG_H_
