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

#ifndef SEQDX_CHECKPOINT_H_
#define SEQDX_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "seqdx/mlp.h"
#include "seqdx/policy.h"
#include "seqdx/variants.h"

namespace seqdx {

// MODL checkpoint layout (all integers little-endian):
//   "MODL"  u8 version (1)  u32 metadata length  metadata (UTF-8)
//   u64 parameter count  float64 parameters
// Metadata is "key=value" lines. Every checkpoint carries kind, d_in, hidden,
// d_out and seed; the rest echoes the training configuration. Parameters are
// in MlpParams canonical order: W1 row-major, b1, W2 row-major, b2.
inline constexpr std::uint8_t kCheckpointVersion = 1;

using Metadata = std::map<std::string, std::string>;

struct Checkpoint {
  Metadata meta;
  std::vector<double> params;

  const std::string& get(const std::string& key) const;  // FormatError if absent
  std::size_t get_size(const std::string& key) const;
};

std::vector<char> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::vector<char> bytes, const std::string& what);

void write_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// kind is "classifier-disease" or "classifier-severity".
void save_classifier(const MlpParams& params, const std::string& kind, const Metadata& extra,
                     const std::filesystem::path& path);
// Throws IncompatibleError if the file holds a different kind.
MlpParams load_classifier(const std::filesystem::path& path, const std::string& kind);

// Single policies (including the uniform sentinel) are one MODL file of kind
// "policy". A dual policy is a text manifest
//   seqdx-dual-policy 1
//   disease=<file>
//   severity=<file>
// naming two sibling policy checkpoints.
void save_policy_bundle(const PolicyBundle& bundle, const Metadata& extra,
                        const std::filesystem::path& path);
PolicyBundle load_policy_bundle(const std::filesystem::path& path);

// Throws IncompatibleError unless the classifiers agree with each other and
// with the policy's observation width and line count.
void check_compatible(const PolicyBundle& bundle, const MlpParams& f_d, const MlpParams& f_s,
                      std::size_t rows, std::size_t cols, std::size_t pool);

}  // namespace seqdx

#endif  // SEQDX_CHECKPOINT_H_
