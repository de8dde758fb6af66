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

#include "seqdx/variants.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "seqdx/error.h"

namespace seqdx {

void DualPolicyParams::check() const {
  if (disease_policy.uniform || severity_policy.uniform) {
    throw IncompatibleError("dual policy members must be trainable networks");
  }
  if (!disease_policy.net.same_shape(severity_policy.net) || disease_policy.cols != severity_policy.cols ||
      disease_policy.input != severity_policy.input) {
    throw IncompatibleError("dual policy members disagree on shape");
  }
}

std::vector<double> varying_parameter_forward(const DualPolicyParams& dual,
                                              std::span<const double> observation,
                                              const CartesianMask& mask) {
  std::vector<double> a = policy_forward(dual.disease_policy, observation, mask);
  const std::vector<double> b = policy_forward(dual.severity_policy, observation, mask);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 0.5 * (a[i] + b[i]);
    sum += a[i];
  }
  for (double& v : a) v /= sum;
  return a;
}

PolicyView view_of(const DualPolicyParams& dual) {
  PolicyView v;
  v.input = dual.disease_policy.input;
  v.distribution = [&dual](std::span<const double> obs, const CartesianMask& mask) {
    return varying_parameter_forward(dual, obs, mask);
  };
  return v;
}

std::size_t random_policy_step(const CartesianMask& mask, Rng& rng) {
  if (mask.is_full()) throw std::invalid_argument("every line is already sampled");
  const std::vector<std::size_t> open = mask.unsampled_lines();
  return open[rng.index(open.size())];
}

DualEpisode run_varying_episode(const Subject& subject, const DualPolicyParams& dual,
                                const ClassifierPair& pair, const RewardSchedule& sched,
                                const EpisodeOptions& opts, Rng& rng) {
  dual.check();
  const MlpParams& shape = dual.disease_policy.net;
  DualEpisode out{{}, MlpParams(shape.d_in(), shape.hidden(), shape.d_out()),
                  MlpParams(shape.d_in(), shape.hidden(), shape.d_out())};
  out.trace.subject_id = subject.id;
  if (sched.steps == 0) return out;
  sched.validate(subject.kspace.cols());
  if (opts.q < 2) throw std::invalid_argument("training needs q >= 2 candidates");
  if (dual.disease_policy.cols != subject.kspace.cols()) {
    throw IncompatibleError("policy width differs from the data");
  }
  EpisodeOptions eval_opts = opts;
  eval_opts.variant = Variant::kVarying;

  const CartesianMask initial =
      init_random_mask(subject.kspace.cols(), sched.initial_lines, 0.0, rng.next());
  Acquisition acq(subject, &pair, pair.pool, initial);
  out.trace.initial_mask = initial;
  out.trace.initial_predictions = acq.state().predictions;

  for (std::size_t t = 0; t < sched.steps; ++t) {
    TraceStep step;
    step.t = t;
    step.mask_before = acq.mask();
    step.observation = acq.observation(dual.disease_policy.input);
    step.distribution = varying_parameter_forward(dual, step.observation, acq.mask());
    step.candidates = opts.candidates == CandidateMode::kTopQ
                          ? greedy_topq(step.distribution, acq.mask(), opts.q)
                          : sample_without_replacement(step.distribution, acq.mask(), opts.q, rng);
    CandidateEvaluation ev = evaluate_candidates(acq, step.candidates, sched, eval_opts);
    const int gate = severity_gate(subject, acq.state(), opts.gating);

    std::vector<double> r_d, r_s;
    for (StepReward& r : ev.rewards) {
      r_d.push_back(r.r_d);
      r_s.push_back(r.r_s);
      r.r = r.r_d + r.r_s;
      step.scalar_rewards.push_back(r.r);
    }
    const double inv = 1.0 / static_cast<double>(opts.q - 1);
    const std::vector<double> a_d = advantages(r_d);
    if (std::any_of(a_d.begin(), a_d.end(), [](double a) { return a != 0.0; })) {
      accumulate_log_prob_gradient(dual.disease_policy, step.observation, step.mask_before,
                                   step.candidates, a_d, inv, out.disease_gradient);
    }
    if (gate == 1) {
      const std::vector<double> a_s = advantages(r_s);
      if (std::any_of(a_s.begin(), a_s.end(), [](double a) { return a != 0.0; })) {
        accumulate_log_prob_gradient(dual.severity_policy, step.observation, step.mask_before,
                                     step.candidates, a_s, inv, out.severity_gradient);
      }
    }

    step.line = choose_committed(step.candidates, rng);
    const std::size_t k = static_cast<std::size_t>(
        std::find(step.candidates.begin(), step.candidates.end(), step.line) - step.candidates.begin());
    step.reward = ev.rewards[k];
    for (std::size_t r = 0; r < subject.kspace.rows(); ++r) step.observed.push_back(subject.kspace(r, step.line));
    acq.commit(std::move(ev.hypotheses[k]));
    step.predictions = acq.state().predictions;
    step.candidate_rewards = std::move(ev.rewards);
    out.trace.steps.push_back(std::move(step));
  }
  return out;
}

TrainedDualPolicy train_varying_parameter(std::span<const Subject> train, std::span<const Subject> val,
                                          const ClassifierPair& pair, const PolicyTrainConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  if (cfg.batch == 0) throw std::invalid_argument("batch size must be positive");
  pair.check();
  const std::size_t cols = train.front().kspace.cols();
  cfg.schedule.validate(cols);
  const std::size_t obs_dim = pair.disease->hidden() + pair.severity->hidden();

  DualPolicyParams dual{
      PolicyParams::init(obs_dim, cfg.hidden, cols, PolicyInput::kFeatures, derive_seed(cfg.seed, {0x706fu, 1})),
      PolicyParams::init(obs_dim, cfg.hidden, cols, PolicyInput::kFeatures, derive_seed(cfg.seed, {0x706fu, 2}))};

  auto validate_now = [&](const DualPolicyParams& d) {
    return val.empty() ? 0.0 : validation_metric(view_of(d), val, pair, cfg.schedule, cfg.seed, cfg.workers);
  };

  TrainedDualPolicy out;
  out.params = dual;
  out.best_val_metric = cfg.select_on_validation ? validate_now(dual) : 0.0;

  Optimizer opt_d(cfg.optimizer, dual.disease_policy.net);
  Optimizer opt_s(cfg.optimizer, dual.severity_policy.net);
  std::vector<std::size_t> order(train.size());
  const auto decay_epoch =
      static_cast<std::size_t>(std::ceil(cfg.lr_decay_at * static_cast<double>(cfg.epochs)));

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle(derive_seed(cfg.seed, {0x7368u, epoch}));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.index(i)]);
    const double lr = epoch > decay_epoch ? cfg.lr * cfg.lr_gamma : cfg.lr;
    double reward_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t n = std::min(order.size(), start + cfg.batch) - start;
      std::vector<DualEpisode> episodes(n);
      parallel_for(n, cfg.workers, [&](std::size_t b) {
        Rng rng(derive_seed(cfg.seed, {0x6570u, epoch, order[start + b]}));
        episodes[b] = run_varying_episode(train[order[start + b]], dual, pair, cfg.schedule, cfg.episode, rng);
      });
      const MlpParams& shape = dual.disease_policy.net;
      MlpParams g_d(shape.d_in(), shape.hidden(), shape.d_out());
      MlpParams g_s(shape.d_in(), shape.hidden(), shape.d_out());
      for (const DualEpisode& e : episodes) {
        g_d.add_scaled(1.0, e.disease_gradient);
        g_s.add_scaled(1.0, e.severity_gradient);
        for (const TraceStep& s : e.trace.steps) reward_sum += s.reward.r;
      }
      g_d.scale(-1.0 / static_cast<double>(n));
      g_s.scale(-1.0 / static_cast<double>(n));
      opt_d.step(dual.disease_policy.net, g_d, lr);
      // Batches without a diseased subject leave the severity policy alone.
      if (std::any_of(g_s.flat().begin(), g_s.flat().end(), [](double v) { return v != 0.0; })) {
        opt_s.step(dual.severity_policy.net, g_s, lr);
      }
    }
    dual.disease_policy.net.check_finite();
    dual.severity_policy.net.check_finite();

    const double metric = cfg.select_on_validation ? validate_now(dual) : 0.0;
    out.log.push_back({epoch, reward_sum / static_cast<double>(train.size()), metric});
    if (!cfg.select_on_validation || metric > out.best_val_metric) {
      out.best_val_metric = metric;
      out.best_epoch = epoch;
      out.params = dual;
    }
  }
  return out;
}

std::size_t PolicyBundle::cols() const {
  return kind == Kind::kDual ? dual.disease_policy.cols : single.cols;
}

std::size_t PolicyBundle::obs_dim() const {
  switch (kind) {
    case Kind::kSingle: return single.obs_dim();
    case Kind::kDual: return dual.disease_policy.obs_dim();
    case Kind::kRandom: return 0;
  }
  return 0;
}

PolicyInput PolicyBundle::input() const {
  return kind == Kind::kDual ? dual.disease_policy.input : single.input;
}

PolicyView PolicyBundle::view() const {
  switch (kind) {
    case Kind::kDual: return view_of(dual);
    case Kind::kSingle:
    case Kind::kRandom: return view_of(single);
  }
  return view_of(single);
}

}  // namespace seqdx
