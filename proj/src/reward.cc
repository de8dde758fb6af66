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

#include "seqdx/reward.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "seqdx/metrics.h"

namespace seqdx {

void RewardSchedule::validate(std::size_t cols) const {
  if (steps == 0) throw std::invalid_argument("reward schedule needs T >= 1");
  if (initial_lines >= cols) {
    throw std::invalid_argument("initial line count " + std::to_string(initial_lines) +
                                " must be below " + std::to_string(cols));
  }
  if (initial_lines + steps > cols) throw std::invalid_argument("budget exceeds the number of lines");
  if (disease_weights.size() != kNumClasses || severity_weights.size() != kNumClasses) {
    throw std::invalid_argument("reward class weights must have one entry per class");
  }
}

double ce_improvement(const Prediction& prev, const Prediction& next, int label,
                      std::span<const double> class_weights) {
  return weighted_ce(prev.probs, label, class_weights) - weighted_ce(next.probs, label, class_weights);
}

StepWeights cosine_weights(std::size_t t, const RewardSchedule& sched) {
  if (t >= sched.steps) {
    throw std::out_of_range("step " + std::to_string(t) + " outside [0, " +
                            std::to_string(sched.steps) + ")");
  }
  const double phase = std::numbers::pi * static_cast<double>(t + 1) / static_cast<double>(sched.steps) +
                       std::numbers::pi * sched.beta;
  const double ws = 0.5 * (1.0 - std::cos(phase));
  return {1.0 - ws, ws};
}

StepReward combined_step_reward(double r_d, double r_s, int disease_gate, std::size_t t,
                                const RewardSchedule& sched) {
  const StepWeights w = cosine_weights(t, sched);
  StepReward out;
  out.r_d = r_d;
  out.r_s = disease_gate == 1 ? r_s : 0.0;
  out.r = w.disease * out.r_d + w.severity * out.r_s;
  return out;
}

double three_class_f1_reward(std::span<const int> prev_predictions,
                             std::span<const int> next_predictions, std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("three_class_f1_reward: empty batch");
  return macro_f1(labels, next_predictions, 3) - macro_f1(labels, prev_predictions, 3);
}

double ssim(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("ssim: shape mismatch");
  if (a.rows() < kSsimWindow || a.cols() < kSsimWindow) {
    throw std::invalid_argument("ssim: image smaller than the 7x7 window");
  }
  const auto [amin, amax] = std::minmax_element(a.values().begin(), a.values().end());
  const auto [bmin, bmax] = std::minmax_element(b.values().begin(), b.values().end());
  const double range = std::max(std::max(*amax, *bmax) - std::min(*amin, *bmin), 1e-8);
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  constexpr double kN = kSsimWindow * kSsimWindow;
  const double cov_norm = kN / (kN - 1.0);
  const std::size_t wr = a.rows() - kSsimWindow + 1, wc = a.cols() - kSsimWindow + 1;
  double total = 0.0;
  for (std::size_t r0 = 0; r0 < wr; ++r0) {
    for (std::size_t c0 = 0; c0 < wc; ++c0) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t r = r0; r < r0 + kSsimWindow; ++r) {
        for (std::size_t c = c0; c < c0 + kSsimWindow; ++c) {
          const double x = a(r, c), y = b(r, c);
          sa += x;
          sb += y;
          saa += x * x;
          sbb += y * y;
          sab += x * y;
        }
      }
      const double ma = sa / kN, mb = sb / kN;
      const double va = cov_norm * (saa / kN - ma * ma);
      const double vb = cov_norm * (sbb / kN - mb * mb);
      const double vab = cov_norm * (sab / kN - ma * mb);
      total += ((2 * ma * mb + c1) * (2 * vab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return total / static_cast<double>(wr * wc);
}

}  // namespace seqdx
