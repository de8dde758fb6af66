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

#ifndef SEQDX_METRICS_H_
#define SEQDX_METRICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqdx/kspace.h"

namespace seqdx {

// Mean recall over the classes present in `labels`.
double balanced_accuracy(std::span<const int> labels, std::span<const int> predictions);

// P(score of a random positive > score of a random negative), ties count 1/2.
// Needs both classes.
double roc_auc(std::span<const int> labels, std::span<const double> scores);

// Unweighted mean of per-class F1 over 0..n_classes-1; a class that never
// occurs in labels or predictions contributes 0.
double macro_f1(std::span<const int> labels, std::span<const int> predictions,
                std::size_t n_classes);

// Pearson product-moment correlation. Throws on constant input.
double pearson_corr(std::span<const double> a, std::span<const double> b);

// 0 = no finding if the disease argmax is negative, else 1 + severity argmax.
int outcome_prediction(std::span<const double> disease_probs,
                       std::span<const double> severity_probs);

struct StepSnapshot {
  std::array<double, 2> disease_probs{};
  std::array<double, 2> severity_probs{};
  CartesianMask mask;

  int outcome() const { return outcome_prediction(disease_probs, severity_probs); }
};

// One evaluated trajectory: the initial state plus one snapshot per
// acquisition step.
struct EvalRecord {
  std::string subject_id;
  int disease = 0;
  std::optional<int> severity;
  std::vector<StepSnapshot> snapshots;

  int true_outcome() const { return disease == 0 ? 0 : 1 + *severity; }
  // Snapshot after `step` acquisitions; an episode that stopped early keeps
  // its last state.
  const StepSnapshot& at(std::size_t step) const;
  const StepSnapshot& final_snapshot() const { return snapshots.back(); }
  // Correct iff the disease call is right and, for diseased subjects, the
  // severity call is right too.
  bool sequential_correct(std::size_t step) const;
};

// Three-class balanced accuracy over trajectory outcomes at `step`
// (default: each record's final state).
double sequential_accuracy(std::span<const EvalRecord> records,
                           std::optional<std::size_t> step = std::nullopt);

// Macro one-vs-rest AUC over the three outcomes using scores
// (p_no_finding, p_diseased * p_low, p_diseased * p_high); classes absent
// from the labels are skipped. NaN when no class can be scored.
double sequential_auc(std::span<const EvalRecord> records, std::size_t step);

}  // namespace seqdx

#endif  // SEQDX_METRICS_H_
