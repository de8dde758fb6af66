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

#include "seqdx/mlp.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "seqdx/kernels.h"
#include "seqdx/random.h"

namespace seqdx {

MlpParams::MlpParams(std::size_t d_in, std::size_t hidden, std::size_t d_out)
    : d_in_(d_in), hidden_(hidden), d_out_(d_out),
      theta_(d_in * hidden + hidden + hidden * d_out + d_out, 0.0) {
  if (d_in == 0 || hidden == 0 || d_out == 0) {
    throw std::invalid_argument("MLP dimensions must be positive");
  }
}

MlpParams::MlpParams(std::size_t d_in, std::size_t hidden, std::size_t d_out,
                     std::vector<double> flat)
    : MlpParams(d_in, hidden, d_out) {
  if (flat.size() != theta_.size()) {
    throw std::invalid_argument("expected " + std::to_string(theta_.size()) +
                                " parameters, got " + std::to_string(flat.size()));
  }
  theta_ = std::move(flat);
}

MlpParams MlpParams::glorot(std::size_t d_in, std::size_t hidden, std::size_t d_out,
                            std::uint64_t seed) {
  MlpParams p(d_in, hidden, d_out);
  Rng rng(seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(d_in + hidden));
  for (double& w : p.w1()) w = rng.uniform(-a1, a1);
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + d_out));
  for (double& w : p.w2()) w = rng.uniform(-a2, a2);
  return p;
}

void MlpParams::check_finite() const {
  for (double v : theta_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite MLP parameter");
  }
}

void MlpParams::set_zero() { std::fill(theta_.begin(), theta_.end(), 0.0); }

void MlpParams::scale(double c) {
  for (double& v : theta_) v *= c;
}

void MlpParams::add_scaled(double alpha, const MlpParams& other) {
  if (!same_shape(other)) throw std::invalid_argument("MLP shape mismatch");
  kernels::axpy(alpha, other.theta_, theta_);
}

void mlp_activations(const MlpParams& p, std::span<const double> input, MlpActivations& out) {
  const auto& k = kernels::active();
  out.hidden.resize(p.hidden());
  out.logits.resize(p.d_out());
  k.gemv(p.w1().data(), p.hidden(), p.d_in(), input.data(), p.b1().data(), out.hidden.data());
  for (double& h : out.hidden) h = std::tanh(h);
  k.gemv(p.w2().data(), p.d_out(), p.hidden(), out.hidden.data(), p.b2().data(),
         out.logits.data());
}

void mlp_backprop(const MlpParams& p, std::span<const double> input, const MlpActivations& act,
                  std::span<const double> dlogits, double scale, MlpParams& grad) {
  const auto& k = kernels::active();
  const std::size_t H = p.hidden();
  // Output layer.
  k.ger(scale, dlogits.data(), p.d_out(), act.hidden.data(), H, grad.w2().data());
  k.axpy(scale, dlogits.data(), grad.b2().data(), p.d_out());
  // Through tanh.
  std::vector<double> dh(H, 0.0);
  k.gemv_t_acc(p.w2().data(), p.d_out(), H, dlogits.data(), dh.data());
  for (std::size_t j = 0; j < H; ++j) dh[j] *= 1.0 - act.hidden[j] * act.hidden[j];
  k.ger(scale, dh.data(), H, input.data(), p.d_in(), grad.w1().data());
  k.axpy(scale, dh.data(), grad.b1().data(), H);
}

void softmax(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
}

Optimizer::Optimizer(OptimizerKind kind, const MlpParams& shape) : kind_(kind) {
  if (kind_ == OptimizerKind::kAdam) {
    m_.assign(shape.parameter_count(), 0.0);
    v_.assign(shape.parameter_count(), 0.0);
  }
}

void Optimizer::step(MlpParams& params, const MlpParams& grad, double lr) {
  if (!params.same_shape(grad)) throw std::invalid_argument("gradient shape mismatch");
  ++t_;
  std::span<double> theta = params.flat();
  std::span<const double> g = grad.flat();
  if (kind_ == OptimizerKind::kSgd) {
    kernels::axpy(-lr, g, theta);
    return;
  }
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g[i] * g[i];
    theta[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEpsilon);
  }
}

}  // namespace seqdx
