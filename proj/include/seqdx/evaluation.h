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

#ifndef SEQDX_EVALUATION_H_
#define SEQDX_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqdx/metrics.h"
#include "seqdx/policy.h"

namespace seqdx {

struct EvalProtocol {
  std::size_t initial_lines = 3;
  std::size_t budget = 7;
  InferenceMode mode = InferenceMode::kArgmax;
  std::optional<double> tau;
  std::size_t workers = 1;
};

// Inference episodes for every subject; subject i uses the stream
// derive_seed(seed, {i}) so results do not depend on the worker count.
std::vector<InferenceResult> run_episodes(const PolicyView& policy, std::span<const Subject> subjects,
                                          const ClassifierPair& pair, const EvalProtocol& protocol,
                                          std::uint64_t seed);

struct CurveRow {
  std::size_t step = 0;
  std::size_t lines_acquired = 0;
  double disease_bacc = 0.0;
  double severity_bacc = 0.0;  // diseased subjects only
  double sequential_bacc = 0.0;
  double disease_auc = 0.0;
  double severity_auc = 0.0;  // diseased subjects only; NaN if one severity is absent
  double sequential_auc = 0.0;
  std::optional<std::uint64_t> seed;  // empty on the across-seed mean rows
};

// Metrics after each of steps 0..budget for one set of records.
std::vector<CurveRow> curve_rows(std::span<const EvalRecord> records, std::size_t initial_lines,
                                 std::size_t budget, std::uint64_t seed);

struct Curves {
  std::vector<std::vector<CurveRow>> per_seed;  // one table per seed, in seed order
  std::vector<CurveRow> mean;                   // elementwise mean over seeds
};

Curves per_step_curves(const PolicyView& policy, std::span<const Subject> subjects,
                       const ClassifierPair& pair, const EvalProtocol& protocol,
                       std::span<const std::uint64_t> seeds);

struct SummaryStat {
  std::string metric;
  double mean;
  double std;  // population standard deviation over seeds
};

// Final-step metrics, mean and std over the per-seed tables.
std::vector<SummaryStat> summarize(const Curves& curves);

// First step whose sequential balanced accuracy reaches `fraction` of the
// final step's value.
std::size_t steps_to_fraction(std::span<const CurveRow> rows, double fraction);

// Heatmap: row t is the mean over subjects of the policy distribution used
// at step t (t = 0..budget-1).
using Heatmap = std::vector<std::vector<double>>;
Heatmap trajectory_heatmap(const PolicyView& policy, std::span<const Subject> subjects,
                           const ClassifierPair& pair, const EvalProtocol& protocol, std::uint64_t seed);

// Pearson correlation of row t of `a` with row t of `b` for every t present
// in both. Throws IncompatibleError if row widths differ.
std::vector<double> correlate(const Heatmap& a, const Heatmap& b);

// CSV text. Reals use 6 significant digits.
std::string format_real(double v);
std::string curves_csv(const Curves& curves);
std::string summary_text(const std::vector<SummaryStat>& stats, std::size_t n_seeds);
std::string heatmap_csv(const Heatmap& h);
Heatmap parse_heatmap_csv(const std::string& text, const std::string& what);
std::string correlation_csv(std::span<const double> r);

}  // namespace seqdx

#endif  // SEQDX_EVALUATION_H_
