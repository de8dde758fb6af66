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

#ifndef SEQDX_MLP_H_
#define SEQDX_MLP_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace seqdx {

// One-hidden-layer tanh network, shared by the classifiers (d_out = 2) and the
// sampling policy (d_out = number of k-space lines).
//
// Parameters live in one flat vector in canonical order
//   W1 (hidden x d_in, row-major), b1 (hidden), W2 (d_out x hidden, row-major), b2 (d_out)
// which is also the checkpoint order. Gradients use the same type.
class MlpParams {
 public:
  MlpParams() = default;
  MlpParams(std::size_t d_in, std::size_t hidden, std::size_t d_out);
  MlpParams(std::size_t d_in, std::size_t hidden, std::size_t d_out, std::vector<double> flat);

  // Uniform Glorot initialisation for both layers, zero biases.
  static MlpParams glorot(std::size_t d_in, std::size_t hidden, std::size_t d_out,
                          std::uint64_t seed);

  std::size_t d_in() const { return d_in_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t d_out() const { return d_out_; }
  std::size_t parameter_count() const { return theta_.size(); }

  std::span<double> flat() { return theta_; }
  std::span<const double> flat() const { return theta_; }

  std::span<double> w1() { return {theta_.data(), hidden_ * d_in_}; }
  std::span<double> b1() { return {theta_.data() + hidden_ * d_in_, hidden_}; }
  std::span<double> w2() { return {theta_.data() + hidden_ * (d_in_ + 1), d_out_ * hidden_}; }
  std::span<double> b2() { return {theta_.data() + hidden_ * (d_in_ + 1 + d_out_), d_out_}; }
  std::span<const double> w1() const { return {theta_.data(), hidden_ * d_in_}; }
  std::span<const double> b1() const { return {theta_.data() + hidden_ * d_in_, hidden_}; }
  std::span<const double> w2() const {
    return {theta_.data() + hidden_ * (d_in_ + 1), d_out_ * hidden_};
  }
  std::span<const double> b2() const {
    return {theta_.data() + hidden_ * (d_in_ + 1 + d_out_), d_out_};
  }

  bool same_shape(const MlpParams& o) const {
    return d_in_ == o.d_in_ && hidden_ == o.hidden_ && d_out_ == o.d_out_;
  }

  // Throws std::invalid_argument on a non-finite parameter.
  void check_finite() const;

  void set_zero();
  void scale(double c);
  // this += alpha * other
  void add_scaled(double alpha, const MlpParams& other);

  bool operator==(const MlpParams&) const = default;

 private:
  std::size_t d_in_ = 0;
  std::size_t hidden_ = 0;
  std::size_t d_out_ = 0;
  std::vector<double> theta_;
};

struct MlpActivations {
  std::vector<double> hidden;  // tanh(W1 x + b1)
  std::vector<double> logits;  // W2 hidden + b2
};

// No validation; callers check shapes once.
void mlp_activations(const MlpParams& p, std::span<const double> input, MlpActivations& out);

// grad += scale * d(objective)/d(theta) given d(objective)/d(logits).
void mlp_backprop(const MlpParams& p, std::span<const double> input, const MlpActivations& act,
                  std::span<const double> dlogits, double scale, MlpParams& grad);

// Numerically stable softmax over all entries.
void softmax(std::span<const double> logits, std::span<double> out);

enum class OptimizerKind { kSgd, kAdam };

// Minimises: params -= lr * update(grad).
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const MlpParams& shape);
  void step(MlpParams& params, const MlpParams& grad, double lr);
  std::size_t steps() const { return t_; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

 private:
  OptimizerKind kind_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace seqdx

#endif  // SEQDX_MLP_H_
