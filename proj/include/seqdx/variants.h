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

#ifndef SEQDX_VARIANTS_H_
#define SEQDX_VARIANTS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "seqdx/policy.h"

namespace seqdx {

// Varying-parameter benchmark: one policy trained on the disease reward, one
// on the gated severity reward, acting through the mean of their outputs.
struct DualPolicyParams {
  PolicyParams disease_policy;
  PolicyParams severity_policy;

  // Throws IncompatibleError unless both nets share input/output shapes.
  void check() const;
};

std::vector<double> varying_parameter_forward(const DualPolicyParams& dual,
                                              std::span<const double> observation,
                                              const CartesianMask& mask);

PolicyView view_of(const DualPolicyParams& dual);

// Uniform over unsampled lines. Throws std::invalid_argument on a full mask.
std::size_t random_policy_step(const CartesianMask& mask, Rng& rng);

struct DualEpisode {
  EpisodeTrace trace;
  MlpParams disease_gradient;
  MlpParams severity_gradient;  // exactly zero unless the subject is diseased
};

DualEpisode run_varying_episode(const Subject& subject, const DualPolicyParams& dual,
                                const ClassifierPair& pair, const RewardSchedule& sched,
                                const EpisodeOptions& opts, Rng& rng);

struct TrainedDualPolicy {
  DualPolicyParams params;
  std::vector<PolicyEpochLog> log;
  double best_val_metric = 0.0;
  std::size_t best_epoch = 0;
};

// cfg.variant is ignored. Both sub-policies step jointly after every batch.
TrainedDualPolicy train_varying_parameter(std::span<const Subject> train, std::span<const Subject> val,
                                          const ClassifierPair& pair, const PolicyTrainConfig& cfg);

// Whatever a policy checkpoint can hold.
struct PolicyBundle {
  enum class Kind { kSingle, kDual, kRandom };
  Kind kind = Kind::kRandom;
  PolicyParams single;  // also the random sentinel (uniform = true)
  DualPolicyParams dual;

  std::size_t cols() const;
  // Observation width the bundle expects (0 for the random sentinel).
  std::size_t obs_dim() const;
  PolicyInput input() const;
  // The view borrows *this.
  PolicyView view() const;
};

}  // namespace seqdx

#endif  // SEQDX_VARIANTS_H_
