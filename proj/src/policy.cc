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

#include "seqdx/policy.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "seqdx/error.h"
#include "seqdx/variants.h"

namespace seqdx {

std::string to_string(PolicyInput p) { return p == PolicyInput::kFeatures ? "features" : "image"; }

PolicyInput parse_policy_input(const std::string& s) {
  if (s == "features") return PolicyInput::kFeatures;
  if (s == "image") return PolicyInput::kImage;
  throw std::invalid_argument("unknown policy input '" + s + "'");
}

PolicyParams PolicyParams::uniform_policy(std::size_t cols) {
  PolicyParams p;
  p.cols = cols;
  p.uniform = true;
  return p;
}

PolicyParams PolicyParams::init(std::size_t obs_dim, std::size_t hidden, std::size_t cols,
                                PolicyInput input, std::uint64_t seed, double output_scale) {
  PolicyParams p;
  p.net = MlpParams::glorot(obs_dim, hidden, cols, seed);
  for (double& w : p.net.w2()) w *= output_scale;
  p.input = input;
  p.cols = cols;
  return p;
}

namespace {

void masked_softmax(std::span<const double> logits, const CartesianMask& mask, std::span<double> out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask.is_selected(i)) mx = std::max(mx, logits[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = mask.is_selected(i) ? 0.0 : std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

void check_policy_shapes(const PolicyParams& params, std::span<const double> observation,
                         const CartesianMask& mask) {
  if (mask.cols() != params.cols) {
    throw std::invalid_argument("mask has " + std::to_string(mask.cols()) + " lines, policy expects " +
                                std::to_string(params.cols));
  }
  if (mask.is_full()) throw std::invalid_argument("every line is already sampled");
  if (params.uniform) return;
  if (observation.size() != params.net.d_in()) {
    throw std::invalid_argument("policy observation has " + std::to_string(observation.size()) +
                                " entries, network expects " + std::to_string(params.net.d_in()));
  }
  if (params.net.d_out() != params.cols) throw std::invalid_argument("policy output width mismatch");
}

}  // namespace

std::vector<double> policy_forward(const PolicyParams& params, std::span<const double> observation,
                                   const CartesianMask& mask) {
  check_policy_shapes(params, observation, mask);
  std::vector<double> dist(params.cols, 0.0);
  if (params.uniform) {
    const double p = 1.0 / static_cast<double>(mask.unsampled_count());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = mask.is_selected(i) ? 0.0 : p;
    return dist;
  }
  MlpActivations act;
  mlp_activations(params.net, observation, act);
  masked_softmax(act.logits, mask, dist);
  return dist;
}

std::vector<std::size_t> greedy_topq(std::span<const double> dist, const CartesianMask& mask,
                                     std::size_t q) {
  if (dist.size() != mask.cols()) throw std::invalid_argument("distribution/mask width mismatch");
  std::vector<std::size_t> lines = mask.unsampled_lines();
  if (q > lines.size()) {
    throw std::invalid_argument("q = " + std::to_string(q) + " exceeds the " +
                                std::to_string(lines.size()) + " unsampled lines");
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
  lines.resize(q);
  return lines;
}

std::vector<std::size_t> sample_without_replacement(std::span<const double> dist,
                                                    const CartesianMask& mask, std::size_t q,
                                                    Rng& rng) {
  std::vector<std::size_t> pool = mask.unsampled_lines();
  if (q > pool.size()) throw std::invalid_argument("q exceeds the unsampled lines");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < q; ++k) {
    double total = 0.0;
    for (std::size_t line : pool) total += dist[line];
    std::size_t pick = pool.size() - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        u -= dist[pool[j]];
        if (u < 0.0) {
          pick = j;
          break;
        }
      }
    } else {
      pick = rng.index(pool.size());
    }
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

void accumulate_log_prob_gradient(const PolicyParams& params, std::span<const double> observation,
                                  const CartesianMask& mask, std::span<const std::size_t> lines,
                                  std::span<const double> coeffs, double scale, MlpParams& grad) {
  if (params.uniform) throw std::invalid_argument("the uniform policy has no parameters");
  check_policy_shapes(params, observation, mask);
  MlpActivations act;
  mlp_activations(params.net, observation, act);
  std::vector<double> dist(params.cols);
  masked_softmax(act.logits, mask, dist);
  // d log pi(a) / d logits = e_a - pi on the unsampled support (pi is 0 elsewhere).
  std::vector<double> dlogits(params.cols, 0.0);
  double coeff_sum = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (mask.is_selected(lines[i])) throw std::invalid_argument("gradient requested for a sampled line");
    dlogits[lines[i]] += coeffs[i];
    coeff_sum += coeffs[i];
  }
  for (std::size_t j = 0; j < params.cols; ++j) dlogits[j] -= coeff_sum * dist[j];
  mlp_backprop(params.net, observation, act, dlogits, scale, grad);
}

std::vector<double> advantages(std::span<const double> rewards) {
  // Deviations from the first reward, so equal rewards give exact zeros.
  std::vector<double> a(rewards.size());
  if (rewards.empty()) return a;
  double shift = 0.0;
  for (double r : rewards) shift += r - rewards[0];
  shift /= static_cast<double>(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) a[i] = (rewards[i] - rewards[0]) - shift;
  return a;
}

std::size_t choose_committed(std::span<const std::size_t> candidates, Rng& rng) {
  return candidates[rng.index(candidates.size())];
}

GradStep reinforce_grad_step(const PolicyParams& params, std::span<const double> observation,
                             const CartesianMask& mask, std::span<const double> rewards,
                             std::span<const std::size_t> candidates, Rng& rng) {
  if (candidates.size() < 2) throw std::invalid_argument("the mean baseline needs q >= 2 candidates");
  if (rewards.size() != candidates.size()) throw std::invalid_argument("one reward per candidate expected");
  GradStep out{MlpParams(params.net.d_in(), params.net.hidden(), params.net.d_out()), 0};
  const std::vector<double> adv = advantages(rewards);
  // Identical rewards: leave the gradient exactly zero.
  if (std::any_of(adv.begin(), adv.end(), [](double a) { return a != 0.0; })) {
    accumulate_log_prob_gradient(params, observation, mask, candidates, adv,
                                 1.0 / static_cast<double>(candidates.size() - 1), out.gradient);
  }
  out.committed = choose_committed(candidates, rng);
  return out;
}

Acquisition::Acquisition(const Subject& subject, const ClassifierPair* pair, std::size_t pool,
                         CartesianMask initial)
    : subject_(&subject), pair_(pair), pool_(pair ? pair->pool : pool), recon_(subject.kspace) {
  state_.undersampled = apply_mask(subject.kspace, initial);
  state_.image = recon_.image_for(initial);
  refresh(state_);
}

void Acquisition::refresh(AcquisitionState& s) const {
  ZeroFilledRecon::magnitude(s.image, s.magnitude);
  s.input = pooled_input(s.magnitude, pool_);
  if (pair_ != nullptr) {
    if (s.input.size() != pair_->disease->d_in()) {
      throw IncompatibleError("classifier expects " + std::to_string(pair_->disease->d_in()) +
                              " inputs, image gives " + std::to_string(s.input.size()));
    }
    s.predictions = classify(*pair_, s.input);
  }
}

std::vector<double> Acquisition::observation(PolicyInput kind) const {
  if (kind == PolicyInput::kImage) return state_.input;
  if (!state_.predictions) throw std::logic_error("feature observation needs classifiers");
  return state_.predictions->features().values;
}

Hypothesis Acquisition::peek(std::size_t line) const {
  if (line >= mask().cols()) throw std::out_of_range("line index out of range");
  if (mask().is_selected(line)) throw std::logic_error("line " + std::to_string(line) + " is already sampled");
  AcquisitionState s;
  s.image = state_.image;
  recon_.add_column(s.image, line);
  refresh(s);
  return {line, std::move(s.magnitude), std::move(s.input), std::move(s.predictions)};
}

void Acquisition::commit(std::size_t line) {
  state_.undersampled = add_line(state_.undersampled, subject_->kspace, line);
  recon_.add_column(state_.image, line);
  refresh(state_);
  ++state_.t;
}

void Acquisition::commit(Hypothesis&& h) {
  state_.undersampled = add_line(state_.undersampled, subject_->kspace, h.line);
  recon_.add_column(state_.image, h.line);
  state_.magnitude = std::move(h.magnitude);
  state_.input = std::move(h.input);
  state_.predictions = std::move(h.predictions);
  ++state_.t;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kWeighted: return "weighted";
    case Variant::kDisease: return "disease";
    case Variant::kSeverity: return "severity";
    case Variant::kSimulated: return "simulated";
    case Variant::kVarying: return "varying";
    case Variant::kRecon: return "recon";
    case Variant::kRandom: return "random";
  }
  return "?";
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names{"weighted", "simulated", "varying", "recon",
                                              "random",   "disease",   "severity"};
  return names;
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::kWeighted, Variant::kDisease, Variant::kSeverity, Variant::kSimulated,
                    Variant::kVarying, Variant::kRecon, Variant::kRandom}) {
    if (to_string(v) == s) return v;
  }
  std::string valid;
  for (const std::string& n : variant_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown variant '" + s + "' (valid: " + valid + ")");
}

int severity_gate(const Subject& subject, const AcquisitionState& state, GatingMode mode) {
  if (subject.disease != 1) return 0;
  if (mode == GatingMode::kGroundTruth) return 1;
  if (!state.predictions) throw std::logic_error("prediction gating needs classifiers");
  return state.predictions->disease.argmax() == 1 ? 1 : 0;
}

CandidateEvaluation evaluate_candidates(const Acquisition& acq, std::span<const std::size_t> candidates,
                                        const RewardSchedule& sched, const EpisodeOptions& opts) {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (acq.mask().is_selected(candidates[i])) {
      throw std::invalid_argument("candidate " + std::to_string(candidates[i]) + " is already sampled");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (candidates[i] == candidates[j]) throw std::invalid_argument("duplicate candidate line");
    }
  }
  if (opts.variant == Variant::kRandom) throw std::invalid_argument("the random policy has no reward");
  const AcquisitionState& now = acq.state();
  const Subject& subject = acq.subject();
  const bool needs_predictions = opts.variant != Variant::kRecon;
  if (needs_predictions && !now.predictions) throw std::logic_error("rewards need classifiers");

  CandidateEvaluation out;
  RealMatrix truth;
  double ssim_now = 0.0;
  if (opts.variant == Variant::kRecon) {
    truth = RealMatrix(subject.image.rows(), subject.image.cols());
    ZeroFilledRecon::magnitude(subject.image, truth);
    ssim_now = ssim(now.magnitude, truth);
  }
  const int gate = needs_predictions ? severity_gate(subject, now, opts.gating) : 0;

  for (std::size_t line : candidates) {
    Hypothesis h = acq.peek(line);
    StepReward r;
    if (opts.variant == Variant::kRecon) {
      r.r = ssim(h.magnitude, truth) - ssim_now;
    } else {
      const PairOutput& prev = *now.predictions;
      const PairOutput& next = *h.predictions;
      const double r_d = ce_improvement(prev.disease, next.disease, subject.disease, sched.disease_weights);
      const double r_s = gate == 1 ? ce_improvement(prev.severity, next.severity, *subject.severity,
                                                    sched.severity_weights)
                                   : 0.0;
      switch (opts.variant) {
        case Variant::kWeighted:
          r = combined_step_reward(r_d, r_s, gate, now.t, sched);
          break;
        case Variant::kDisease:
          r = {r_d, 0.0, r_d};
          break;
        case Variant::kSeverity:
          r = {0.0, r_s, r_s};
          break;
        default:
          // Batch- or dual-level rewards are combined by the caller.
          r = {r_d, r_s, 0.0};
          break;
      }
    }
    out.rewards.push_back(r);
    out.hypotheses.push_back(std::move(h));
  }
  return out;
}

double surrogate_objective(const PolicyParams& params, const EpisodeTrace& trace) {
  double total = 0.0;
  for (const TraceStep& s : trace.steps) {
    const std::vector<double> dist = policy_forward(params, s.observation, s.mask_before);
    const std::vector<double> adv = advantages(s.scalar_rewards);
    const double inv = 1.0 / static_cast<double>(s.candidates.size() - 1);
    for (std::size_t i = 0; i < s.candidates.size(); ++i) {
      total += inv * adv[i] * std::log(dist[s.candidates[i]]);
    }
  }
  return total;
}

void surrogate_gradient(const PolicyParams& params, const EpisodeTrace& trace, double scale,
                        MlpParams& grad) {
  for (const TraceStep& s : trace.steps) {
    const std::vector<double> adv = advantages(s.scalar_rewards);
    if (std::all_of(adv.begin(), adv.end(), [](double a) { return a == 0.0; })) continue;
    accumulate_log_prob_gradient(params, s.observation, s.mask_before, s.candidates, adv,
                                 scale / static_cast<double>(s.candidates.size() - 1), grad);
  }
}

void finalize_rewards(EpisodeTrace& trace, RewardMode mode) {
  if (mode == RewardMode::kImmediate) return;
  double future = 0.0;
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    for (double& r : it->scalar_rewards) r += future;
    future += it->reward.r;
  }
}

namespace {

std::vector<std::size_t> pick_candidates(std::span<const double> dist, const CartesianMask& mask,
                                         const EpisodeOptions& opts, Rng& rng) {
  return opts.candidates == CandidateMode::kTopQ ? greedy_topq(dist, mask, opts.q)
                                                 : sample_without_replacement(dist, mask, opts.q, rng);
}

void check_training_setup(const Subject& subject, const PolicyParams& params, const ClassifierPair* pair,
                          const RewardSchedule& sched, const EpisodeOptions& opts) {
  sched.validate(subject.kspace.cols());
  if (opts.q < 2) throw std::invalid_argument("training needs q >= 2 candidates");
  if (sched.initial_lines + sched.steps - 1 + opts.q > subject.kspace.cols()) {
    throw std::invalid_argument("q exceeds the lines left at the last step");
  }
  if (params.uniform) throw std::invalid_argument("the uniform policy is not trainable");
  if (params.cols != subject.kspace.cols()) throw IncompatibleError("policy width differs from the data");
  if (opts.variant != Variant::kRecon && pair == nullptr) {
    throw std::invalid_argument("variant " + to_string(opts.variant) + " needs classifiers");
  }
  if (params.input == PolicyInput::kFeatures && pair == nullptr) {
    throw std::invalid_argument("feature observations need classifiers");
  }
}

struct StepWork {
  std::vector<double> observation;
  std::vector<double> distribution;
  std::vector<std::size_t> candidates;
  CandidateEvaluation evaluation;
};

StepWork prepare_step(const Acquisition& acq, const PolicyParams& params, const RewardSchedule& sched,
                      const EpisodeOptions& opts, Rng& rng) {
  StepWork w;
  w.observation = acq.observation(params.input);
  w.distribution = policy_forward(params, w.observation, acq.mask());
  w.candidates = pick_candidates(w.distribution, acq.mask(), opts, rng);
  w.evaluation = evaluate_candidates(acq, w.candidates, sched, opts);
  return w;
}

// Records the step in `trace` and commits a uniformly chosen candidate.
void commit_step(Acquisition& acq, StepWork&& w, std::vector<double> scalar_rewards,
                 EpisodeTrace& trace, Rng& rng) {
  TraceStep step;
  step.t = acq.state().t;
  step.mask_before = acq.mask();
  step.line = choose_committed(w.candidates, rng);
  const std::size_t k = static_cast<std::size_t>(
      std::find(w.candidates.begin(), w.candidates.end(), step.line) - w.candidates.begin());
  step.reward = w.evaluation.rewards[k];
  step.reward.r = scalar_rewards[k];
  step.observed.reserve(acq.subject().kspace.rows());
  for (std::size_t r = 0; r < acq.subject().kspace.rows(); ++r) {
    step.observed.push_back(acq.subject().kspace(r, step.line));
  }
  acq.commit(std::move(w.evaluation.hypotheses[k]));
  step.predictions = acq.state().predictions;
  step.observation = std::move(w.observation);
  step.distribution = std::move(w.distribution);
  step.candidates = std::move(w.candidates);
  step.candidate_rewards = std::move(w.evaluation.rewards);
  step.scalar_rewards = std::move(scalar_rewards);
  trace.steps.push_back(std::move(step));
}

std::vector<double> scalar_of(const std::vector<StepReward>& rewards) {
  std::vector<double> out;
  for (const StepReward& r : rewards) out.push_back(r.r);
  return out;
}

}  // namespace

TrainingEpisode run_training_episode(const Subject& subject, const PolicyParams& params,
                                     const ClassifierPair* pair, const RewardSchedule& sched,
                                     const EpisodeOptions& opts, Rng& rng) {
  TrainingEpisode out;
  out.gradient = MlpParams(params.net.d_in(), params.net.hidden(), params.net.d_out());
  out.trace.subject_id = subject.id;
  if (sched.steps == 0) return out;
  check_training_setup(subject, params, pair, sched, opts);
  if (opts.variant == Variant::kSimulated || opts.variant == Variant::kVarying ||
      opts.variant == Variant::kRandom) {
    throw std::invalid_argument("variant " + to_string(opts.variant) +
                                " is not a per-subject episode reward");
  }
  const CartesianMask initial =
      init_random_mask(subject.kspace.cols(), sched.initial_lines, 0.0, rng.next());
  Acquisition acq(subject, pair, pair ? pair->pool : 2, initial);
  out.trace.initial_mask = initial;
  out.trace.initial_predictions = acq.state().predictions;

  for (std::size_t t = 0; t < sched.steps; ++t) {
    StepWork w = prepare_step(acq, params, sched, opts, rng);
    std::vector<double> rewards = scalar_of(w.evaluation.rewards);
    commit_step(acq, std::move(w), std::move(rewards), out.trace, rng);
  }
  finalize_rewards(out.trace, opts.reward_mode);
  surrogate_gradient(params, out.trace, 1.0, out.gradient);
  return out;
}

namespace {

// Lockstep episodes for the batch-level three-class F1 reward: every subject
// takes step t before any takes step t+1, and candidate rank i of every
// subject shares the reward F1(batch with rank-i lines) - F1(batch now).
std::vector<TrainingEpisode> run_simulated_batch(std::span<const Subject* const> subjects,
                                                 const PolicyParams& params, const ClassifierPair* pair,
                                                 const RewardSchedule& sched, const EpisodeOptions& opts,
                                                 std::span<Rng> rngs, std::size_t workers) {
  const std::size_t n = subjects.size();
  std::vector<TrainingEpisode> out(n);
  std::vector<Acquisition> acqs;
  acqs.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    check_training_setup(*subjects[b], params, pair, sched, opts);
    const CartesianMask initial =
        init_random_mask(subjects[b]->kspace.cols(), sched.initial_lines, 0.0, rngs[b].next());
    acqs.emplace_back(*subjects[b], pair, pair ? pair->pool : 2, initial);
    out[b].gradient = MlpParams(params.net.d_in(), params.net.hidden(), params.net.d_out());
    out[b].trace.subject_id = subjects[b]->id;
    out[b].trace.initial_mask = initial;
    out[b].trace.initial_predictions = acqs[b].state().predictions;
  }
  std::vector<int> labels(n);
  for (std::size_t b = 0; b < n; ++b) labels[b] = subjects[b]->outcome();

  for (std::size_t t = 0; t < sched.steps; ++t) {
    std::vector<StepWork> work(n);
    parallel_for(n, workers, [&](std::size_t b) {
      work[b] = prepare_step(acqs[b], params, sched, opts, rngs[b]);
    });
    std::vector<int> prev(n);
    for (std::size_t b = 0; b < n; ++b) {
      const PairOutput& p = *acqs[b].state().predictions;
      prev[b] = outcome_prediction(p.disease.probs, p.severity.probs);
    }
    std::vector<double> rank_reward(opts.q);
    for (std::size_t i = 0; i < opts.q; ++i) {
      std::vector<int> next(n);
      for (std::size_t b = 0; b < n; ++b) {
        const PairOutput& p = *work[b].evaluation.hypotheses[i].predictions;
        next[b] = outcome_prediction(p.disease.probs, p.severity.probs);
      }
      rank_reward[i] = three_class_f1_reward(prev, next, labels);
    }
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t i = 0; i < opts.q; ++i) work[b].evaluation.rewards[i].r = rank_reward[i];
      commit_step(acqs[b], std::move(work[b]), rank_reward, out[b].trace, rngs[b]);
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    finalize_rewards(out[b].trace, opts.reward_mode);
    surrogate_gradient(params, out[b].trace, 1.0, out[b].gradient);
  }
  return out;
}

std::array<double, 2> probs2(const Prediction& p) { return {p.probs[0], p.probs[1]}; }

StepSnapshot snapshot_of(const Acquisition& acq) {
  StepSnapshot s;
  s.disease_probs = probs2(acq.state().predictions->disease);
  s.severity_probs = probs2(acq.state().predictions->severity);
  s.mask = acq.mask();
  return s;
}

bool confident(const PairOutput& p, double tau) {
  const double d = *std::max_element(p.disease.probs.begin(), p.disease.probs.end());
  if (d < tau) return false;
  if (p.disease.argmax() == 0) return true;
  return *std::max_element(p.severity.probs.begin(), p.severity.probs.end()) >= tau;
}

std::size_t sample_line(std::span<const double> dist, const CartesianMask& mask, Rng& rng) {
  double u = rng.uniform();
  std::size_t last = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (mask.is_selected(i)) continue;
    last = i;
    u -= dist[i];
    if (u < 0.0) return i;
  }
  return last;
}

std::size_t argmax_line(std::span<const double> dist, const CartesianMask& mask) {
  std::size_t best = dist.size();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (mask.is_selected(i)) continue;
    if (best == dist.size() || dist[i] > dist[best]) best = i;
  }
  return best;
}

}  // namespace

PolicyView view_of(const PolicyParams& params) {
  PolicyView v;
  v.input = params.input;
  v.uniform = params.uniform;
  v.distribution = [&params](std::span<const double> obs, const CartesianMask& mask) {
    return policy_forward(params, obs, mask);
  };
  return v;
}

InferenceResult run_inference_episode(const Subject& subject, const PolicyView& policy,
                                      const ClassifierPair& pair, std::size_t initial_lines,
                                      std::size_t budget, InferenceMode mode,
                                      std::optional<double> tau, Rng& rng) {
  const std::size_t cols = subject.kspace.cols();
  if (initial_lines + budget > cols) throw std::invalid_argument("budget exceeds the number of lines");
  const CartesianMask initial = init_random_mask(cols, initial_lines, 0.0, rng.next());
  Acquisition acq(subject, &pair, pair.pool, initial);

  InferenceResult out;
  out.trace.subject_id = subject.id;
  out.trace.initial_mask = initial;
  out.trace.initial_predictions = acq.state().predictions;
  out.record.subject_id = subject.id;
  out.record.disease = subject.disease;
  out.record.severity = subject.severity;
  out.record.snapshots.push_back(snapshot_of(acq));

  for (std::size_t t = 0; t < budget; ++t) {
    if (tau && confident(*acq.state().predictions, *tau)) break;
    TraceStep step;
    step.t = t;
    step.mask_before = acq.mask();
    if (!policy.uniform) step.observation = acq.observation(policy.input);
    step.distribution = policy.distribution(step.observation, acq.mask());
    if (policy.uniform) {
      step.line = random_policy_step(acq.mask(), rng);
    } else if (mode == InferenceMode::kArgmax) {
      step.line = argmax_line(step.distribution, acq.mask());
    } else {
      step.line = sample_line(step.distribution, acq.mask(), rng);
    }
    for (std::size_t r = 0; r < subject.kspace.rows(); ++r) step.observed.push_back(subject.kspace(r, step.line));
    acq.commit(step.line);
    step.predictions = acq.state().predictions;
    out.trace.steps.push_back(std::move(step));
    out.record.snapshots.push_back(snapshot_of(acq));
  }
  return out;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  const std::size_t count = std::min(workers, n);
  for (std::size_t w = 0; w < count; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double validation_metric(const PolicyView& policy, std::span<const Subject> val,
                         const ClassifierPair& pair, const RewardSchedule& sched,
                         std::uint64_t seed, std::size_t workers) {
  std::vector<EvalRecord> records(val.size());
  parallel_for(val.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {0x76616cu, i}));
    records[i] = run_inference_episode(val[i], policy, pair, sched.initial_lines, sched.steps,
                                       InferenceMode::kArgmax, std::nullopt, rng)
                     .record;
  });
  return sequential_accuracy(records);
}

namespace {

// Mean final SSIM of argmax episodes; model selection for the
// reconstruction benchmark when no classifiers are supplied.
double recon_validation_metric(const PolicyParams& params, std::span<const Subject> val,
                               const RewardSchedule& sched, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t i = 0; i < val.size(); ++i) {
    Rng rng(derive_seed(seed, {0x76616cu, i}));
    const CartesianMask initial =
        init_random_mask(val[i].kspace.cols(), sched.initial_lines, 0.0, rng.next());
    Acquisition acq(val[i], nullptr, 2, initial);
    for (std::size_t t = 0; t < sched.steps; ++t) {
      const std::vector<double> dist = policy_forward(params, acq.observation(params.input), acq.mask());
      acq.commit(argmax_line(dist, acq.mask()));
    }
    RealMatrix truth;
    ZeroFilledRecon::magnitude(val[i].image, truth);
    total += ssim(acq.state().magnitude, truth);
  }
  return total / static_cast<double>(val.size());
}

}  // namespace

TrainedPolicy train_policy(std::span<const Subject> train, std::span<const Subject> val,
                           const ClassifierPair* pair, const PolicyTrainConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  const std::size_t rows = train.front().kspace.rows(), cols = train.front().kspace.cols();
  TrainedPolicy out;
  if (cfg.variant == Variant::kRandom) {
    out.params = PolicyParams::uniform_policy(cols);
    return out;
  }
  if (cfg.variant == Variant::kVarying) {
    throw std::invalid_argument("the varying-parameter benchmark trains two policies; use train_varying_parameter");
  }
  if (cfg.batch == 0) throw std::invalid_argument("batch size must be positive");
  if (pair) pair->check();
  cfg.schedule.validate(cols);
  EpisodeOptions opts = cfg.episode;
  opts.variant = cfg.variant;

  const PolicyInput input = cfg.variant == Variant::kRecon ? PolicyInput::kImage : PolicyInput::kFeatures;
  const std::size_t pool = pair ? pair->pool : 2;
  const std::size_t obs_dim = input == PolicyInput::kImage
                                  ? (rows / pool) * (cols / pool)
                                  : pair->disease->hidden() + pair->severity->hidden();
  PolicyParams params = PolicyParams::init(obs_dim, cfg.hidden, cols, input, derive_seed(cfg.seed, {0x706fu}));

  auto validate_now = [&](const PolicyParams& p) {
    if (val.empty()) return 0.0;
    if (pair) return validation_metric(view_of(p), val, *pair, cfg.schedule, cfg.seed, cfg.workers);
    return recon_validation_metric(p, val, cfg.schedule, cfg.seed);
  };

  out.params = params;
  out.best_val_metric = cfg.select_on_validation ? validate_now(params) : 0.0;

  Optimizer opt(cfg.optimizer, params.net);
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
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      const std::size_t n = end - start;
      std::vector<Rng> rngs;
      std::vector<const Subject*> batch;
      for (std::size_t b = start; b < end; ++b) {
        rngs.emplace_back(derive_seed(cfg.seed, {0x6570u, epoch, order[b]}));
        batch.push_back(&train[order[b]]);
      }
      std::vector<TrainingEpisode> episodes;
      if (cfg.variant == Variant::kSimulated) {
        episodes = run_simulated_batch(batch, params, pair, cfg.schedule, opts, rngs, cfg.workers);
      } else {
        episodes.resize(n);
        parallel_for(n, cfg.workers, [&](std::size_t b) {
          episodes[b] = run_training_episode(*batch[b], params, pair, cfg.schedule, opts, rngs[b]);
        });
      }
      // Fixed-order reduction keeps results independent of the worker count.
      MlpParams grad(params.net.d_in(), params.net.hidden(), params.net.d_out());
      for (const TrainingEpisode& e : episodes) {
        grad.add_scaled(1.0, e.gradient);
        for (const TraceStep& s : e.trace.steps) reward_sum += s.reward.r;
      }
      grad.scale(-1.0 / static_cast<double>(n));  // ascent through a minimiser
      opt.step(params.net, grad, lr);
    }
    params.net.check_finite();

    const double metric = cfg.select_on_validation ? validate_now(params) : 0.0;
    out.log.push_back({epoch, reward_sum / static_cast<double>(train.size()), metric});
    if (!cfg.select_on_validation || metric > out.best_val_metric) {
      out.best_val_metric = metric;
      out.best_epoch = epoch;
      out.params = params;
    }
  }
  return out;
}

}  // namespace seqdx
