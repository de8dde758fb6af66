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

#ifndef SEQDX_REWARD_H_
#define SEQDX_REWARD_H_

#include <cstddef>
#include <span>
#include <vector>

#include "seqdx/classifier.h"
#include "seqdx/kspace.h"

namespace seqdx {

// Acquisition budget and the weighting of the two objectives over it.
struct RewardSchedule {
  std::size_t steps = 7;          // T: acquisition steps after the initial mask
  std::size_t initial_lines = 3;  // L
  double beta = 0.0;              // shifts the equal-weighting point
  std::vector<double> disease_weights{1.0, 1.0};   // class weights inside the CE criterion
  std::vector<double> severity_weights{1.0, 1.0};

  void validate(std::size_t cols) const;
};

struct StepWeights {
  double disease;
  double severity;
};

struct StepReward {
  double r_d = 0.0;
  double r_s = 0.0;  // 0 when gated
  double r = 0.0;
};

// CE(prev) - CE(next): positive when the new line improved the prediction.
double ce_improvement(const Prediction& prev, const Prediction& next, int label,
                      std::span<const double> class_weights);

// w_severity(t) = (1 - cos(pi (t + 1) / T + pi beta)) / 2, w_disease = 1 - w_severity.
StepWeights cosine_weights(std::size_t t, const RewardSchedule& sched);

// r = w_d r_d + w_s r_s, with r_s forced to 0 unless `disease_gate` is 1.
StepReward combined_step_reward(double r_d, double r_s, int disease_gate, std::size_t t,
                                const RewardSchedule& sched);

// macro-F1(next) - macro-F1(prev) over three-class outcome predictions
// (0 no finding, 1 diseased-low, 2 diseased-high). Absent classes score 0.
double three_class_f1_reward(std::span<const int> prev_predictions,
                             std::span<const int> next_predictions, std::span<const int> labels);

// Mean SSIM over all 7x7 windows lying fully inside the image, uniform
// weights, sample (co)variances, C1 = (0.01 R)^2, C2 = (0.03 R)^2 with R the
// joint dynamic range of both images (floored at 1e-8).
double ssim(const RealMatrix& a, const RealMatrix& b);

inline constexpr std::size_t kSsimWindow = 7;

}  // namespace seqdx

#endif  // SEQDX_REWARD_H_
