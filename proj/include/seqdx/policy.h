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

#ifndef SEQDX_POLICY_H_
#define SEQDX_POLICY_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqdx/classifier.h"
#include "seqdx/kspace.h"
#include "seqdx/metrics.h"
#include "seqdx/mlp.h"
#include "seqdx/phantom.h"
#include "seqdx/random.h"
#include "seqdx/reward.h"

namespace seqdx {

// What the policy network observes at each step.
enum class PolicyInput {
  kFeatures,  // classifier hidden features m_t (length 2H)
  kImage,     // pooled zero-filled magnitude (reconstruction-driven benchmark)
};

std::string to_string(PolicyInput p);
PolicyInput parse_policy_input(const std::string& s);

// Softmax policy over k-space lines. `uniform` marks the untrained random
// baseline, which has no network.
struct PolicyParams {
  MlpParams net;
  PolicyInput input = PolicyInput::kFeatures;
  std::size_t cols = 0;
  bool uniform = false;

  static PolicyParams uniform_policy(std::size_t cols);
  // Glorot hidden layer, output layer scaled by `output_scale`, zero biases.
  static PolicyParams init(std::size_t obs_dim, std::size_t hidden, std::size_t cols,
                           PolicyInput input, std::uint64_t seed, double output_scale = 0.1);

  std::size_t obs_dim() const { return uniform ? 0 : net.d_in(); }
};

// Softmax over the logits of unsampled lines; sampled lines get exactly 0.
// Throws std::invalid_argument when every line is sampled.
std::vector<double> policy_forward(const PolicyParams& params, std::span<const double> observation,
                                   const CartesianMask& mask);

// The q most probable unsampled lines, highest first, ties to the lower index.
std::vector<std::size_t> greedy_topq(std::span<const double> dist, const CartesianMask& mask,
                                     std::size_t q);

// q distinct unsampled lines drawn sequentially without replacement.
std::vector<std::size_t> sample_without_replacement(std::span<const double> dist,
                                                    const CartesianMask& mask, std::size_t q,
                                                    Rng& rng);

// grad += scale * sum_i coeffs[i] * d log pi(lines[i] | obs, mask) / d theta.
void accumulate_log_prob_gradient(const PolicyParams& params, std::span<const double> observation,
                                  const CartesianMask& mask, std::span<const std::size_t> lines,
                                  std::span<const double> coeffs, double scale, MlpParams& grad);

// Mean-baseline advantages r_i - mean(r).
std::vector<double> advantages(std::span<const double> rewards);

struct GradStep {
  MlpParams gradient;
  std::size_t committed;
};

// One-step estimator: 1/(q-1) sum_i grad log pi(c_i) (r_i - mean r), and a
// committed line chosen uniformly among the candidates. Needs q >= 2.
GradStep reinforce_grad_step(const PolicyParams& params, std::span<const double> observation,
                             const CartesianMask& mask, std::span<const double> rewards,
                             std::span<const std::size_t> candidates, Rng& rng);

// Uniform pick among candidates; the draw reinforce_grad_step makes.
std::size_t choose_committed(std::span<const std::size_t> candidates, Rng& rng);

// Observable state of one acquisition: undersampled k-space plus the
// classifier outputs on its zero-filled reconstruction.
struct AcquisitionState {
  UndersampledKSpace undersampled;
  ComplexMatrix image;          // running zero-filled reconstruction
  RealMatrix magnitude;         // |image|
  std::vector<double> input;    // pooled classifier input
  std::size_t t = 0;
  // Empty when the episode runs without classifiers.
  std::optional<PairOutput> predictions;
};

// What acquiring one more line would yield.
struct Hypothesis {
  std::size_t line;
  RealMatrix magnitude;
  std::vector<double> input;
  std::optional<PairOutput> predictions;
};

// A subject under acquisition. Owns the incremental reconstruction.
class Acquisition {
 public:
  // `pair` may be null when only image-domain quantities are needed.
  Acquisition(const Subject& subject, const ClassifierPair* pair, std::size_t pool,
              CartesianMask initial);

  const Subject& subject() const { return *subject_; }
  const AcquisitionState& state() const { return state_; }
  const CartesianMask& mask() const { return state_.undersampled.mask; }
  std::size_t pool() const { return pool_; }

  // Policy observation for the given input kind.
  std::vector<double> observation(PolicyInput kind) const;

  // Leaves the state untouched.
  Hypothesis peek(std::size_t line) const;

  // Acquires `line`; throws if it is already sampled.
  void commit(std::size_t line);
  // Same, reusing a peek() of that line.
  void commit(Hypothesis&& h);

 private:
  void refresh(AcquisitionState& s) const;

  const Subject* subject_;
  const ClassifierPair* pair_;
  std::size_t pool_;
  ZeroFilledRecon recon_;
  AcquisitionState state_;
};

// Reward driving the policy during training.
enum class Variant {
  kWeighted,   // cosine-weighted lexicographic reward (default)
  kDisease,    // disease reward only (single-task classifier policy)
  kSeverity,   // severity reward only, diseased subjects
  kSimulated,  // batch three-class macro-F1 improvement
  kVarying,    // two policies, averaged (see variants.h)
  kRecon,      // SSIM improvement of the zero-filled reconstruction
  kRandom,     // no training, uniform sentinel
};

std::string to_string(Variant v);
// Throws std::invalid_argument listing the valid names.
Variant parse_variant(const std::string& s);
const std::vector<std::string>& variant_names();

enum class GatingMode { kGroundTruth, kPrediction };
enum class RewardMode { kImmediate, kRewardToGo };
enum class CandidateMode { kTopQ, kSampleWithoutReplacement };

struct EpisodeOptions {
  Variant variant = Variant::kWeighted;
  std::size_t q = 4;
  GatingMode gating = GatingMode::kGroundTruth;
  RewardMode reward_mode = RewardMode::kImmediate;
  CandidateMode candidates = CandidateMode::kTopQ;
};

// Severity-reward gate for one step: 1 when the severity reward counts.
int severity_gate(const Subject& subject, const AcquisitionState& state, GatingMode mode);

// Per-candidate rewards against the pre-step predictions; the acquisition
// itself is not modified. Candidates must be distinct and unsampled.
struct CandidateEvaluation {
  std::vector<StepReward> rewards;
  std::vector<Hypothesis> hypotheses;
};
CandidateEvaluation evaluate_candidates(const Acquisition& acq, std::span<const std::size_t> candidates,
                                        const RewardSchedule& sched, const EpisodeOptions& opts);

struct TraceStep {
  std::size_t t = 0;
  CartesianMask mask_before;
  std::vector<double> observation;   // policy input (m_t or image vector)
  std::vector<double> distribution;  // policy distribution at this step
  std::vector<std::size_t> candidates;
  std::vector<StepReward> candidate_rewards;
  std::vector<double> scalar_rewards;  // r_{i,t} actually fed to the estimator
  std::size_t line = 0;                // committed a_t
  std::vector<cplx> observed;          // o_t: the acquired k-space column
  StepReward reward;                   // reward of the committed line
  std::optional<PairOutput> predictions;  // after acquiring `line`
};

struct EpisodeTrace {
  std::string subject_id;
  CartesianMask initial_mask;
  std::optional<PairOutput> initial_predictions;
  std::vector<TraceStep> steps;
};

// sum_t 1/(q-1) sum_i A_{i,t} log pi(c_{i,t} | obs_t, mask_t), advantages
// taken from the trace's scalar rewards. Its gradient is what
// run_training_episode returns.
double surrogate_objective(const PolicyParams& params, const EpisodeTrace& trace);

// Gradient of surrogate_objective, accumulated into `grad` with `scale`.
void surrogate_gradient(const PolicyParams& params, const EpisodeTrace& trace, double scale,
                        MlpParams& grad);

// Applies reward-to-go if requested: each step's candidate rewards gain the
// committed rewards of all later steps.
void finalize_rewards(EpisodeTrace& trace, RewardMode mode);

struct TrainingEpisode {
  EpisodeTrace trace;
  MlpParams gradient;  // ascent direction for the expected return
};

// One training episode: random initial mask with L lines, then T steps of
// forward -> candidates -> rewards -> commit. For every variant except
// kSimulated and kVarying.
TrainingEpisode run_training_episode(const Subject& subject, const PolicyParams& params,
                                     const ClassifierPair* pair, const RewardSchedule& sched,
                                     const EpisodeOptions& opts, Rng& rng);

enum class InferenceMode { kSample, kArgmax };

// Distribution provider for inference; lets single, dual and uniform policies
// share one episode loop.
struct PolicyView {
  PolicyInput input = PolicyInput::kFeatures;
  bool uniform = false;
  std::function<std::vector<double>(std::span<const double>, const CartesianMask&)> distribution;
};

PolicyView view_of(const PolicyParams& params);

struct InferenceResult {
  EpisodeTrace trace;
  EvalRecord record;
};

// One line per step from the policy (sampled or argmax, ties to the lower
// index); a uniform policy always samples. Stops after `budget` steps or,
// with `tau`, once the disease confidence and (if predicted diseased) the
// severity confidence reach tau. The initial mask has `initial_lines` random
// lines drawn from `rng`.
InferenceResult run_inference_episode(const Subject& subject, const PolicyView& policy,
                                      const ClassifierPair& pair, std::size_t initial_lines,
                                      std::size_t budget, InferenceMode mode,
                                      std::optional<double> tau, Rng& rng);

struct PolicyTrainConfig {
  Variant variant = Variant::kWeighted;
  std::size_t hidden = 64;
  std::size_t epochs = 30;
  std::size_t batch = 16;
  double lr = 1e-2;
  double lr_decay_at = 2.0 / 3.0;
  double lr_gamma = 0.1;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  EpisodeOptions episode;
  RewardSchedule schedule;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  // Validation selection runs argmax episodes at full budget.
  bool select_on_validation = true;
};

struct PolicyEpochLog {
  std::size_t epoch;
  double mean_reward;
  double val_metric;
};

struct TrainedPolicy {
  PolicyParams params;
  std::vector<PolicyEpochLog> log;
  double best_val_metric = 0.0;
  std::size_t best_epoch = 0;
};

// Mini-batch gradient ascent on the expected return for single-network
// variants (weighted, disease, severity, simulated, recon); kRandom returns
// the uniform sentinel. kVarying lives in variants.h.
TrainedPolicy train_policy(std::span<const Subject> train, std::span<const Subject> val,
                           const ClassifierPair* pair, const PolicyTrainConfig& cfg);

// Mean sequential balanced accuracy of argmax episodes at full budget.
double validation_metric(const PolicyView& policy, std::span<const Subject> val,
                         const ClassifierPair& pair, const RewardSchedule& sched,
                         std::uint64_t seed, std::size_t workers);

// Fixed-order parallel loop: fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace seqdx

#endif  // SEQDX_POLICY_H_
