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

#include "seqdx/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace seqdx {

double balanced_accuracy(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.empty()) throw std::invalid_argument("balanced_accuracy: empty input");
  if (labels.size() != predictions.size()) throw std::invalid_argument("balanced_accuracy: length mismatch");
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // label -> (hits, total)
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& [hits, total] = per_class[labels[i]];
    ++total;
    if (predictions[i] == labels[i]) ++hits;
  }
  double sum = 0.0;
  for (const auto& [label, counts] : per_class) {
    sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return sum / static_cast<double>(per_class.size());
}

double roc_auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw std::invalid_argument("roc_auc: length mismatch");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk groups of tied scores; each positive beats every negative below its
  // group and half-beats the negatives inside it. Counted in halves to stay exact.
  std::uint64_t positives = 0, negatives = 0, negatives_below = 0, wins2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos_in = 0, neg_in = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) {
        ++pos_in;
      } else if (labels[order[j]] == 0) {
        ++neg_in;
      } else {
        throw std::invalid_argument("roc_auc: labels must be 0 or 1");
      }
      ++j;
    }
    wins2 += pos_in * (2 * negatives_below + neg_in);
    negatives_below += neg_in;
    positives += pos_in;
    negatives += neg_in;
    i = j;
  }
  if (positives == 0 || negatives == 0) throw std::invalid_argument("roc_auc: needs both classes");
  return (static_cast<double>(wins2) / 2.0) /
         (static_cast<double>(positives) * static_cast<double>(negatives));
}

double macro_f1(std::span<const int> labels, std::span<const int> predictions, std::size_t n_classes) {
  if (labels.empty()) throw std::invalid_argument("macro_f1: empty input");
  if (labels.size() != predictions.size()) throw std::invalid_argument("macro_f1: length mismatch");
  std::vector<std::size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i], p = predictions[i];
    if (l < 0 || p < 0 || static_cast<std::size_t>(l) >= n_classes ||
        static_cast<std::size_t>(p) >= n_classes) {
      throw std::invalid_argument("macro_f1: class index out of range");
    }
    if (l == p) {
      ++tp[l];
    } else {
      ++fp[p];
      ++fn[l];
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    const std::size_t denom = 2 * tp[k] + fp[k] + fn[k];
    if (denom > 0) sum += 2.0 * static_cast<double>(tp[k]) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(n_classes);
}

double pearson_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_corr: need two equal-length vectors of length >= 2");
  }
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("pearson_corr: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

int outcome_prediction(std::span<const double> disease_probs, std::span<const double> severity_probs) {
  if (disease_probs[1] <= disease_probs[0]) return 0;
  return severity_probs[1] > severity_probs[0] ? 2 : 1;
}

const StepSnapshot& EvalRecord::at(std::size_t step) const {
  if (snapshots.empty()) throw std::logic_error("evaluation record has no snapshots");
  return snapshots[std::min(step, snapshots.size() - 1)];
}

bool EvalRecord::sequential_correct(std::size_t step) const {
  return at(step).outcome() == true_outcome();
}

double sequential_accuracy(std::span<const EvalRecord> records, std::optional<std::size_t> step) {
  if (records.empty()) throw std::invalid_argument("sequential_accuracy: empty input");
  std::vector<int> labels, preds;
  for (const EvalRecord& r : records) {
    labels.push_back(r.true_outcome());
    preds.push_back(step ? r.at(*step).outcome() : r.final_snapshot().outcome());
  }
  return balanced_accuracy(labels, preds);
}

double sequential_auc(std::span<const EvalRecord> records, std::size_t step) {
  double sum = 0.0;
  int scored = 0;
  for (int k = 0; k < 3; ++k) {
    std::vector<int> labels;
    std::vector<double> scores;
    for (const EvalRecord& r : records) {
      const StepSnapshot& s = r.at(step);
      labels.push_back(r.true_outcome() == k ? 1 : 0);
      scores.push_back(k == 0 ? s.disease_probs[0] : s.disease_probs[1] * s.severity_probs[k - 1]);
    }
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == static_cast<long>(labels.size())) continue;
    sum += roc_auc(labels, scores);
    ++scored;
  }
  return scored ? sum / scored : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace seqdx
