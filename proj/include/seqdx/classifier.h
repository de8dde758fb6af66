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

#ifndef SEQDX_CLASSIFIER_H_
#define SEQDX_CLASSIFIER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seqdx/kspace.h"
#include "seqdx/mlp.h"
#include "seqdx/phantom.h"

namespace seqdx {

inline constexpr std::size_t kNumClasses = 2;
inline constexpr double kProbFloor = 1e-12;

struct Prediction {
  std::vector<double> probs;   // softmax output, length K
  std::vector<double> hidden;  // penultimate activations, length H

  // Lowest index wins ties.
  int argmax() const;
};

// Disease-hidden followed by severity-hidden; the policy's observation.
struct FeatureVector {
  std::vector<double> values;
};

// Average-pools a magnitude image by `pool` x `pool` blocks, flattens it
// row-major, then standardises to zero mean / unit variance (variance floored
// at 1e-8).
std::vector<double> pooled_input(const RealMatrix& magnitude, std::size_t pool);

// pooled_input(zero_fill_magnitude(state), pool).
std::vector<double> extract_input(const UndersampledKSpace& state, std::size_t pool);

// Validates shapes and parameters, then evaluates the network.
Prediction mlp_forward(const MlpParams& params, std::span<const double> input);

// Same without validation, for inner loops on already-checked parameters.
Prediction mlp_forward_unchecked(const MlpParams& params, std::span<const double> input);

// class_weights[label] * -log(max(probs[label], 1e-12)).
double weighted_ce(std::span<const double> probs, int label, std::span<const double> class_weights);

// Exact gradient of weighted_ce(mlp_forward(params, input), label) w.r.t. params.
MlpParams mlp_backward(const MlpParams& params, std::span<const double> input, int label,
                       std::span<const double> class_weights);

// N / (K * N_k) from label counts. Throws if a class is missing.
std::vector<double> inverse_frequency_weights(std::span<const int> labels, std::size_t n_classes);

struct ClassifierConfig {
  std::size_t hidden = 32;
  std::size_t pool = 2;
  std::size_t epochs = 50;
  std::size_t batch = 32;
  double lr = 3e-3;
  // Fraction of epochs after which lr is multiplied by lr_gamma.
  double lr_decay_at = 2.0 / 3.0;
  double lr_gamma = 0.1;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  // Per-epoch mask augmentation ranges.
  double min_rate = 0.05;
  double max_rate = 0.30;
  double max_center_fraction = 0.05;
  std::uint64_t seed = 1;
};

struct EpochLog {
  std::size_t epoch;
  double train_loss;
  double val_bacc;
};

struct TrainedClassifier {
  MlpParams params;
  std::vector<EpochLog> log;
  double best_val_bacc = 0.0;
  std::size_t best_epoch = 0;  // 0 means the initialisation was kept
};

// Random undersampling mask with `rate` of the columns, a centre block of
// floor(center_fraction * cols) lines and the rest uniformly placed.
CartesianMask augmentation_mask(std::size_t cols, double rate, double center_fraction,
                                std::uint64_t seed);

// Pre-trains the disease classifier on freshly undersampled inputs every
// epoch and keeps the epoch with the best validation balanced accuracy.
TrainedClassifier train_disease(std::span<const Subject> train, std::span<const Subject> val,
                                const ClassifierConfig& cfg);

// Fine-tunes a copy of `disease_params` on severity labels. Every subject
// must be diseased.
TrainedClassifier finetune_severity(const MlpParams& disease_params,
                                    std::span<const Subject> train, std::span<const Subject> val,
                                    const ClassifierConfig& cfg);

// Balanced accuracy of `params` on `subjects` at a fixed sampling rate.
double evaluate_classifier(const MlpParams& params, std::span<const Subject> subjects,
                           bool severity_task, double rate, std::size_t pool, std::uint64_t seed);

FeatureVector feature_map(const MlpParams& f_d, const MlpParams& f_s,
                          const UndersampledKSpace& state, std::size_t pool);

// Both classifiers on one input vector; what the episode loops use.
struct ClassifierPair {
  const MlpParams* disease;
  const MlpParams* severity;
  std::size_t pool;

  // Throws IncompatibleError if the two networks disagree on d_in or H.
  void check() const;
};

struct PairOutput {
  Prediction disease;
  Prediction severity;
  FeatureVector features() const;
};

PairOutput classify(const ClassifierPair& pair, std::span<const double> input);

}  // namespace seqdx

#endif  // SEQDX_CLASSIFIER_H_
