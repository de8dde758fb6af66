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

#include "seqdx/classifier.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "seqdx/error.h"
#include "seqdx/metrics.h"
#include "seqdx/random.h"

namespace seqdx {

int Prediction::argmax() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

std::vector<double> pooled_input(const RealMatrix& magnitude, std::size_t pool) {
  if (pool == 0 || magnitude.rows() % pool != 0 || magnitude.cols() % pool != 0) {
    throw std::invalid_argument("image " + std::to_string(magnitude.rows()) + "x" +
                                std::to_string(magnitude.cols()) + " is not divisible by pool " +
                                std::to_string(pool));
  }
  const std::size_t pr = magnitude.rows() / pool, pc = magnitude.cols() / pool;
  std::vector<double> out(pr * pc, 0.0);
  const double inv = 1.0 / static_cast<double>(pool * pool);
  for (std::size_t r = 0; r < magnitude.rows(); ++r) {
    const auto row = magnitude.row(r);
    double* dst = out.data() + (r / pool) * pc;
    for (std::size_t c = 0; c < magnitude.cols(); ++c) dst[c / pool] += row[c];
  }
  double mean = 0.0;
  for (double& v : out) {
    v *= inv;
    mean += v;
  }
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  var /= static_cast<double>(out.size());
  const double inv_sd = 1.0 / std::sqrt(std::max(var, 1e-8));
  for (double& v : out) v = (v - mean) * inv_sd;
  return out;
}

std::vector<double> extract_input(const UndersampledKSpace& state, std::size_t pool) {
  return pooled_input(zero_fill_magnitude(state), pool);
}

Prediction mlp_forward_unchecked(const MlpParams& params, std::span<const double> input) {
  MlpActivations act;
  mlp_activations(params, input, act);
  Prediction p;
  p.probs.resize(params.d_out());
  softmax(act.logits, p.probs);
  p.hidden = std::move(act.hidden);
  return p;
}

Prediction mlp_forward(const MlpParams& params, std::span<const double> input) {
  if (input.size() != params.d_in()) {
    throw std::invalid_argument("input has " + std::to_string(input.size()) +
                                " entries, network expects " + std::to_string(params.d_in()));
  }
  params.check_finite();
  return mlp_forward_unchecked(params, input);
}

double weighted_ce(std::span<const double> probs, int label, std::span<const double> class_weights) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size() ||
      static_cast<std::size_t>(label) >= class_weights.size()) {
    throw std::invalid_argument("label " + std::to_string(label) + " out of range");
  }
  return class_weights[label] * -std::log(std::max(probs[label], kProbFloor));
}

MlpParams mlp_backward(const MlpParams& params, std::span<const double> input, int label,
                       std::span<const double> class_weights) {
  if (input.size() != params.d_in()) throw std::invalid_argument("input dimension mismatch");
  params.check_finite();
  if (label < 0 || static_cast<std::size_t>(label) >= params.d_out() ||
      class_weights.size() < params.d_out()) {
    throw std::invalid_argument("label " + std::to_string(label) + " out of range");
  }
  MlpActivations act;
  mlp_activations(params, input, act);
  std::vector<double> probs(params.d_out());
  softmax(act.logits, probs);
  MlpParams grad(params.d_in(), params.hidden(), params.d_out());
  // Past the floor the loss is constant in the logits.
  if (probs[label] < kProbFloor) return grad;
  std::vector<double> dlogits(probs);
  dlogits[label] -= 1.0;
  mlp_backprop(params, input, act, dlogits, class_weights[label], grad);
  return grad;
}

std::vector<double> inverse_frequency_weights(std::span<const int> labels, std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= n_classes) throw std::invalid_argument("label out of range");
    ++counts[l];
  }
  std::vector<double> w(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    if (counts[k] == 0) {
      throw std::invalid_argument("class " + std::to_string(k) + " has no training examples");
    }
    w[k] = static_cast<double>(labels.size()) / static_cast<double>(n_classes * counts[k]);
  }
  return w;
}

CartesianMask augmentation_mask(std::size_t cols, double rate, double center_fraction,
                                std::uint64_t seed) {
  const auto total = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(rate * static_cast<double>(cols))));
  const auto n_center =
      static_cast<std::size_t>(std::floor(center_fraction * static_cast<double>(cols)));
  const std::size_t n_random = total > n_center ? total - n_center : 0;
  return init_random_mask(cols, std::min(n_random, cols - n_center), center_fraction, seed);
}

namespace {

enum class Task { kDisease, kSeverity };

int task_label(const Subject& s, Task task) {
  return task == Task::kDisease ? s.disease : *s.severity;
}

std::vector<double> masked_input(const Subject& s, const CartesianMask& mask, std::size_t pool) {
  return extract_input(apply_mask(s.kspace, mask), pool);
}

double balanced_accuracy_on(const MlpParams& params, std::span<const std::vector<double>> inputs,
                            std::span<const int> labels) {
  std::vector<int> preds(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    preds[i] = mlp_forward_unchecked(params, inputs[i]).argmax();
  }
  return balanced_accuracy(labels, preds);
}

TrainedClassifier train_task(MlpParams init, std::span<const Subject> train,
                             std::span<const Subject> val, const ClassifierConfig& cfg, Task task) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  if (cfg.batch == 0) throw std::invalid_argument("batch size must be positive");
  const std::size_t cols = train.front().kspace.cols();

  std::vector<int> train_labels;
  for (const Subject& s : train) train_labels.push_back(task_label(s, task));
  const std::vector<double> weights = inverse_frequency_weights(train_labels, kNumClasses);

  // Validation inputs are drawn once so epochs are compared on equal terms.
  std::vector<std::vector<double>> val_inputs;
  std::vector<int> val_labels;
  for (std::size_t i = 0; i < val.size(); ++i) {
    Rng rng(derive_seed(cfg.seed, {0x7661u, i}));
    const double rate = rng.uniform(cfg.min_rate, cfg.max_rate);
    const double cf = rng.uniform(0.0, cfg.max_center_fraction);
    val_inputs.push_back(masked_input(val[i], augmentation_mask(cols, rate, cf, rng.next()), cfg.pool));
    val_labels.push_back(task_label(val[i], task));
  }

  TrainedClassifier out;
  out.params = init;
  out.best_val_bacc = val.empty() ? 0.0 : balanced_accuracy_on(init, val_inputs, val_labels);

  MlpParams params = std::move(init);
  Optimizer opt(cfg.optimizer, params);
  MlpParams grad(params.d_in(), params.hidden(), params.d_out());
  std::vector<std::size_t> order(train.size());
  const auto decay_epoch = static_cast<std::size_t>(std::ceil(cfg.lr_decay_at * static_cast<double>(cfg.epochs)));

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, {0x7472u, epoch}));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    const double lr = epoch > decay_epoch ? cfg.lr * cfg.lr_gamma : cfg.lr;

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      grad.set_zero();
      for (std::size_t b = start; b < end; ++b) {
        const Subject& s = train[order[b]];
        const double rate = rng.uniform(cfg.min_rate, cfg.max_rate);
        const double cf = rng.uniform(0.0, cfg.max_center_fraction);
        const std::vector<double> x =
            masked_input(s, augmentation_mask(cols, rate, cf, rng.next()), cfg.pool);
        const int label = task_label(s, task);
        MlpActivations act;
        mlp_activations(params, x, act);
        std::vector<double> probs(kNumClasses);
        softmax(act.logits, probs);
        loss_sum += weighted_ce(probs, label, weights);
        if (probs[label] < kProbFloor) continue;
        probs[label] -= 1.0;
        mlp_backprop(params, x, act, probs, weights[label] / static_cast<double>(end - start), grad);
      }
      opt.step(params, grad, lr);
    }
    params.check_finite();

    const double bacc = val.empty() ? 0.0 : balanced_accuracy_on(params, val_inputs, val_labels);
    out.log.push_back({epoch, loss_sum / static_cast<double>(train.size()), bacc});
    if (bacc > out.best_val_bacc || (val.empty() && epoch == cfg.epochs)) {
      out.best_val_bacc = bacc;
      out.best_epoch = epoch;
      out.params = params;
    }
  }
  return out;
}

}  // namespace

TrainedClassifier train_disease(std::span<const Subject> train, std::span<const Subject> val,
                                const ClassifierConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  const std::size_t rows = train.front().kspace.rows(), cols = train.front().kspace.cols();
  if (cfg.pool == 0 || rows % cfg.pool || cols % cfg.pool) {
    throw std::invalid_argument("image size is not divisible by pool");
  }
  const std::size_t d_in = (rows / cfg.pool) * (cols / cfg.pool);
  return train_task(MlpParams::glorot(d_in, cfg.hidden, kNumClasses, derive_seed(cfg.seed, {0x696eu})),
                    train, val, cfg, Task::kDisease);
}

TrainedClassifier finetune_severity(const MlpParams& disease_params,
                                    std::span<const Subject> train, std::span<const Subject> val,
                                    const ClassifierConfig& cfg) {
  for (std::span<const Subject> set : {train, val}) {
    for (const Subject& s : set) {
      if (s.disease != 1) {
        throw std::invalid_argument("severity fine-tuning got non-diseased subject " + s.id);
      }
    }
  }
  disease_params.check_finite();
  return train_task(disease_params, train, val, cfg, Task::kSeverity);
}

double evaluate_classifier(const MlpParams& params, std::span<const Subject> subjects,
                           bool severity_task, double rate, std::size_t pool, std::uint64_t seed) {
  std::vector<int> labels, preds;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const Subject& s = subjects[i];
    if (severity_task && s.disease != 1) continue;
    const CartesianMask mask =
        augmentation_mask(s.kspace.cols(), rate, 0.0, derive_seed(seed, {0x6576u, i}));
    preds.push_back(mlp_forward(params, masked_input(s, mask, pool)).argmax());
    labels.push_back(severity_task ? *s.severity : s.disease);
  }
  return balanced_accuracy(labels, preds);
}

void ClassifierPair::check() const {
  if (disease->d_in() != severity->d_in() || disease->hidden() != severity->hidden() ||
      disease->d_out() != kNumClasses || severity->d_out() != kNumClasses) {
    throw IncompatibleError("disease and severity classifiers have different shapes");
  }
  disease->check_finite();
  severity->check_finite();
}

FeatureVector PairOutput::features() const {
  FeatureVector f;
  f.values.reserve(disease.hidden.size() + severity.hidden.size());
  f.values.insert(f.values.end(), disease.hidden.begin(), disease.hidden.end());
  f.values.insert(f.values.end(), severity.hidden.begin(), severity.hidden.end());
  return f;
}

PairOutput classify(const ClassifierPair& pair, std::span<const double> input) {
  return {mlp_forward_unchecked(*pair.disease, input), mlp_forward_unchecked(*pair.severity, input)};
}

FeatureVector feature_map(const MlpParams& f_d, const MlpParams& f_s,
                          const UndersampledKSpace& state, std::size_t pool) {
  const ClassifierPair pair{&f_d, &f_s, pool};
  pair.check();
  const std::vector<double> x = extract_input(state, pool);
  if (x.size() != f_d.d_in()) throw IncompatibleError("classifier input size does not match the image");
  return classify(pair, x).features();
}

}  // namespace seqdx
