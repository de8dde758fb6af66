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

#ifndef SEQDX_PHANTOM_H_
#define SEQDX_PHANTOM_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seqdx/kspace.h"

namespace seqdx {

// Three-way trajectory outcome used by the sequential metrics and F1 reward.
enum OutcomeClass : int { kNoFinding = 0, kDiseasedLow = 1, kDiseasedHigh = 2 };

// One labelled slice. `severity` is set iff `disease == 1`
// (0 = low grade, 1 = high grade).
struct Subject {
  std::string id;
  ComplexMatrix image;
  ComplexMatrix kspace;
  int disease = 0;
  std::optional<int> severity;

  int outcome() const { return disease == 0 ? kNoFinding : 1 + *severity; }
};

// Throws std::invalid_argument if labels or shapes are inconsistent.
void validate(const Subject& s);

struct GeneratorConfig {
  std::size_t rows = 32;
  std::size_t cols = 32;
  std::size_t n_train = 500;
  std::size_t n_val = 100;
  std::size_t n_test = 100;
  double p_diseased = 0.5;
  double p_high_given_diseased = 0.5;
  double noise_std = 0.15;
  std::uint64_t seed = 7;

  void validate() const;
};

// Renders subject `index` of `split` for `cfg`. Each subject has its own RNG
// stream, so the result does not depend on generation order.
Subject generate_subject(const GeneratorConfig& cfg, const std::string& split, std::size_t index);

enum class Split { kTrain, kVal, kTest };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ManifestEntry {
  Split split;
  std::string path;  // relative to the manifest's directory
};

struct DatasetManifest {
  std::filesystem::path root;  // directory holding the manifest file
  GeneratorConfig config;
  std::vector<ManifestEntry> entries;
};

// Writes `<out_dir>/manifest.tsv` and one subject file per entry under
// `<out_dir>/subjects/`. Throws IoError if anything cannot be written.
DatasetManifest generate_dataset(const GeneratorConfig& cfg, const std::filesystem::path& out_dir);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Subject file, little-endian:
//   "KSPC" 0x01 | u32 rows | u32 cols | u8 g_d | u8 g_s (255 = N/A)
//   | rows*cols x (f64 re, f64 im) image | same for k-space
void write_subject(const Subject& s, const std::filesystem::path& path);
Subject read_subject(const std::filesystem::path& path);

std::vector<Subject> load_split(const DatasetManifest& manifest, Split split);

}  // namespace seqdx

#endif  // SEQDX_PHANTOM_H_
