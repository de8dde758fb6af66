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

// seqdx: command-line driver. One subcommand per pipeline stage.
//
// Exit codes: 0 ok, 2 usage or configuration, 3 I/O, 4 incompatible or
// malformed artifact.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqdx/checkpoint.h"
#include "seqdx/classifier.h"
#include "seqdx/config.h"
#include "seqdx/error.h"
#include "seqdx/evaluation.h"
#include "seqdx/phantom.h"
#include "seqdx/policy.h"
#include "seqdx/variants.h"

namespace fs = std::filesystem;
using namespace seqdx;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitArtifact = 4;

struct Common {
  std::string config;
  std::string out_dir;
  std::size_t workers = 1;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  cfg.policy.workers = c.workers;
  return cfg;
}

// Relative output paths land under the configured output directory.
fs::path output_path(const ExperimentConfig& cfg, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : cfg.out_dir / path;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Metadata config_echo(const ExperimentConfig& cfg, const std::string& section) {
  Metadata m;
  std::istringstream in(to_ini(cfg));
  std::string line, current;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      current = line.substr(1, line.size() - 2);
      continue;
    }
    if (current != section) continue;
    const auto eq = line.find(" = ");
    m["config." + current + "." + line.substr(0, eq)] = line.substr(eq + 3);
  }
  return m;
}

// Pool factor p with (rows/p) * (cols/p) == d_in.
std::size_t infer_pool(const MlpParams& f, std::size_t rows, std::size_t cols) {
  for (std::size_t p = 1; p <= rows; ++p) {
    if (rows % p == 0 && cols % p == 0 && (rows / p) * (cols / p) == f.d_in()) return p;
  }
  throw IncompatibleError("classifier input width " + std::to_string(f.d_in()) + " does not fit " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " images");
}

void set_reward_class_weights(RewardSchedule& sched, const std::vector<Subject>& train) {
  std::vector<int> d, s;
  for (const Subject& x : train) {
    d.push_back(x.disease);
    if (x.disease == 1) s.push_back(*x.severity);
  }
  sched.disease_weights = inverse_frequency_weights(d, 2);
  sched.severity_weights = inverse_frequency_weights(s, 2);
}

std::vector<Subject> diseased(const std::vector<Subject>& all) {
  std::vector<Subject> out;
  for (const Subject& s : all) {
    if (s.disease == 1) out.push_back(s);
  }
  return out;
}

struct Loaded {
  MlpParams f_d, f_s;
  ClassifierPair pair;
};

std::unique_ptr<Loaded> load_pair(const std::string& cls_d, const std::string& cls_s, std::size_t rows,
                                  std::size_t cols) {
  auto l = std::make_unique<Loaded>();
  l->f_d = load_classifier(cls_d, "classifier-disease");
  l->f_s = load_classifier(cls_s, "classifier-severity");
  l->pair = {&l->f_d, &l->f_s, infer_pool(l->f_d, rows, cols)};
  l->pair.check();
  return l;
}

void print_label_table(const DatasetManifest& m) {
  std::cout << "split   no_finding  diseased_low  diseased_high  total\n";
  for (Split sp : {Split::kTrain, Split::kVal, Split::kTest}) {
    std::size_t counts[3] = {0, 0, 0};
    for (const Subject& s : load_split(m, sp)) ++counts[s.outcome()];
    std::printf("%-7s %10zu  %12zu  %13zu  %5zu\n", to_string(sp).c_str(), counts[0], counts[1], counts[2],
                counts[0] + counts[1] + counts[2]);
  }
}

int cmd_gen_data(const Common& common, const std::string& out, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load(common);
  if (seed) cfg.data.seed = *seed;
  const fs::path dir = output_path(cfg, out);
  const DatasetManifest m = generate_dataset(cfg.data, dir);
  std::cout << "wrote " << m.entries.size() << " subjects and " << (dir / "manifest.tsv").string() << "\n";
  print_label_table(m);
  return 0;
}

int cmd_train_cls(const Common& common, const std::string& manifest_path, const std::string& task,
                  const std::string& init, const std::string& out, std::optional<std::size_t> epochs,
                  std::optional<std::uint64_t> seed) {
  if (task != "disease" && task != "severity") throw std::invalid_argument("--task must be disease or severity");
  if (task == "severity" && init.empty()) throw std::invalid_argument("--task severity requires --init <disease checkpoint>");
  ExperimentConfig cfg = load(common);
  if (epochs) cfg.classifier.epochs = *epochs;
  if (seed) cfg.classifier.seed = *seed;
  const DatasetManifest m = read_manifest(manifest_path);
  const std::vector<Subject> train = load_split(m, Split::kTrain), val = load_split(m, Split::kVal);

  TrainedClassifier result;
  std::string kind;
  if (task == "disease") {
    kind = "classifier-disease";
    result = train_disease(train, val, cfg.classifier);
  } else {
    kind = "classifier-severity";
    const MlpParams init_params = load_classifier(init, "classifier-disease");
    if (init_params.hidden() != cfg.classifier.hidden) cfg.classifier.hidden = init_params.hidden();
    cfg.classifier.pool = infer_pool(init_params, m.config.rows, m.config.cols);
    const std::vector<Subject> d_train = diseased(train), d_val = diseased(val);
    if (d_train.empty() || d_val.empty()) throw IncompatibleError("no diseased subjects to fine-tune on");
    result = finetune_severity(init_params, d_train, d_val, cfg.classifier);
  }

  Metadata meta = config_echo(cfg, "classifier");
  meta["seed"] = std::to_string(cfg.classifier.seed);
  meta["pool"] = std::to_string(cfg.classifier.pool);
  meta["best_epoch"] = std::to_string(result.best_epoch);
  meta["best_val_bacc"] = format_real(result.best_val_bacc);
  const fs::path ckpt = output_path(cfg, out);
  save_classifier(result.params, kind, meta, ckpt);

  std::string log = "epoch,train_loss,val_bacc\n";
  for (const EpochLog& e : result.log) {
    log += std::to_string(e.epoch) + "," + format_real(e.train_loss) + "," + format_real(e.val_bacc) + "\n";
  }
  write_text(ckpt.string() + ".log.csv", log);
  std::cout << task << " classifier: best val balanced accuracy " << format_real(result.best_val_bacc)
            << " at epoch " << result.best_epoch << " -> " << ckpt.string() << "\n";
  return 0;
}

int cmd_train_policy(const Common& common, const std::string& manifest_path, std::string variant_name,
                     const std::string& cls_d, const std::string& cls_s, const std::string& out,
                     std::optional<std::size_t> epochs, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load(common);
  if (!variant_name.empty()) cfg.policy.variant = parse_variant(variant_name);
  if (epochs) cfg.policy.epochs = *epochs;
  if (seed) cfg.policy.seed = *seed;
  const Variant variant = cfg.policy.variant;

  Metadata meta = config_echo(cfg, "policy");
  meta["seed"] = std::to_string(cfg.policy.seed);
  meta["variant"] = to_string(variant);
  const fs::path ckpt = output_path(cfg, out);

  const DatasetManifest m = read_manifest(manifest_path);
  if (variant == Variant::kRandom) {
    PolicyBundle b;
    b.kind = PolicyBundle::Kind::kRandom;
    b.single = PolicyParams::uniform_policy(m.config.cols);
    save_policy_bundle(b, meta, ckpt);
    std::cout << "random policy sentinel -> " << ckpt.string() << "\n";
    return 0;
  }

  const bool need_cls = variant != Variant::kRecon || !cls_d.empty() || !cls_s.empty();
  if (need_cls && (cls_d.empty() || cls_s.empty())) {
    throw std::invalid_argument("variant " + to_string(variant) + " needs --cls-d and --cls-s");
  }
  for (const std::string& p : {cls_d, cls_s}) {
    if (!p.empty() && !fs::exists(p)) throw IncompatibleError("missing checkpoint " + p);
  }
  const std::vector<Subject> train = load_split(m, Split::kTrain), val = load_split(m, Split::kVal);
  std::unique_ptr<Loaded> cls;
  if (need_cls) cls = load_pair(cls_d, cls_s, m.config.rows, m.config.cols);
  set_reward_class_weights(cfg.policy.schedule, train);

  const auto t0 = std::chrono::steady_clock::now();
  PolicyBundle bundle;
  std::vector<PolicyEpochLog> log;
  double best = 0.0;
  std::size_t best_epoch = 0;
  if (variant == Variant::kVarying) {
    TrainedDualPolicy r = train_varying_parameter(train, val, cls->pair, cfg.policy);
    bundle.kind = PolicyBundle::Kind::kDual;
    bundle.dual = std::move(r.params);
    log = std::move(r.log);
    best = r.best_val_metric;
    best_epoch = r.best_epoch;
  } else {
    TrainedPolicy r = train_policy(train, val, cls ? &cls->pair : nullptr, cfg.policy);
    bundle.kind = PolicyBundle::Kind::kSingle;
    bundle.single = std::move(r.params);
    log = std::move(r.log);
    best = r.best_val_metric;
    best_epoch = r.best_epoch;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  meta["best_epoch"] = std::to_string(best_epoch);
  meta["best_val_metric"] = format_real(best);
  save_policy_bundle(bundle, meta, ckpt);

  std::string text = "epoch,mean_reward,val_metric\n";
  for (const PolicyEpochLog& e : log) {
    text += std::to_string(e.epoch) + "," + format_real(e.mean_reward) + "," + format_real(e.val_metric) + "\n";
  }
  write_text(ckpt.string() + ".log.csv", text);
  std::cout << to_string(variant) << " policy: best validation metric " << format_real(best) << " at epoch "
            << best_epoch << " (" << format_real(secs) << " s) -> " << ckpt.string() << "\n";
  return 0;
}

struct EvalInputs {
  ExperimentConfig cfg;
  PolicyBundle bundle;
  std::unique_ptr<Loaded> cls;
  std::vector<Subject> subjects;
  EvalProtocol protocol;
};

EvalInputs prepare_eval(const Common& common, const std::string& policy, const std::string& cls_d,
                        const std::string& cls_s, const std::string& manifest_path, const std::string& split) {
  EvalInputs in;
  in.cfg = load(common);
  const DatasetManifest m = read_manifest(manifest_path);
  in.subjects = load_split(m, parse_split(split));
  if (in.subjects.empty()) throw std::invalid_argument("split " + split + " is empty");
  for (const std::string& p : {policy, cls_d, cls_s}) {
    if (!fs::exists(p)) throw IncompatibleError("missing checkpoint " + p);
  }
  in.bundle = load_policy_bundle(policy);
  in.cls = load_pair(cls_d, cls_s, m.config.rows, m.config.cols);
  check_compatible(in.bundle, in.cls->f_d, in.cls->f_s, m.config.rows, m.config.cols, in.cls->pair.pool);
  in.protocol.initial_lines = in.cfg.policy.schedule.initial_lines;
  in.protocol.budget = in.cfg.policy.schedule.steps;
  in.protocol.mode = in.cfg.eval.mode;
  in.protocol.tau = in.cfg.eval.tau;
  in.protocol.workers = common.workers;
  return in;
}

int cmd_eval(const Common& common, const std::string& policy, const std::string& cls_d, const std::string& cls_s,
             const std::string& manifest, const std::string& split, std::optional<std::size_t> n_seeds,
             std::optional<std::size_t> budget, const std::string& out) {
  EvalInputs in = prepare_eval(common, policy, cls_d, cls_s, manifest, split);
  if (budget) in.protocol.budget = *budget;
  std::vector<std::uint64_t> seeds = in.cfg.eval.seeds;
  if (n_seeds) {
    if (*n_seeds == 0) throw std::invalid_argument("--seeds must be positive");
    seeds.clear();
    for (std::size_t s = 1; s <= *n_seeds; ++s) seeds.push_back(s);
  }
  const PolicyView view = in.bundle.view();
  const Curves curves = per_step_curves(view, in.subjects, in.cls->pair, in.protocol, seeds);
  const fs::path csv = output_path(in.cfg, out);
  write_text(csv, curves_csv(curves));
  const std::string summary = summary_text(summarize(curves), seeds.size());
  write_text(csv.string() + ".summary.txt", summary);
  std::cout << summary << "curves -> " << csv.string() << "\n";
  return 0;
}

int cmd_trajectory(const Common& common, const std::string& policy, const std::string& cls_d,
                   const std::string& cls_s, const std::string& manifest, const std::string& split,
                   std::uint64_t seed, const std::string& out) {
  EvalInputs in = prepare_eval(common, policy, cls_d, cls_s, manifest, split);
  const Heatmap h = trajectory_heatmap(in.bundle.view(), in.subjects, in.cls->pair, in.protocol, seed);
  const fs::path path = output_path(in.cfg, out);
  write_text(path, heatmap_csv(h));
  std::cout << "heatmap (" << h.size() << " steps) -> " << path.string() << "\n";
  return 0;
}

int cmd_correlate(const Common& common, const std::string& a, const std::string& b, const std::string& out) {
  const ExperimentConfig cfg = load(common);
  const Heatmap ha = parse_heatmap_csv(read_text(a), a), hb = parse_heatmap_csv(read_text(b), b);
  const std::vector<double> r = correlate(ha, hb);
  const std::string csv = correlation_csv(r);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text(output_path(cfg, out), csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqdx: active k-space sampling for sequential diagnosis"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "INI experiment config");
  app.add_option("--out-dir", common.out_dir, "Base directory for relative output paths");
  app.add_option("--workers", common.workers, "Worker threads (never changes results)")->check(CLI::PositiveNumber);

  std::string out, manifest, task, init, variant, cls_d, cls_s, policy, split = "test", traj_a, traj_b;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, n_seeds, budget;

  auto* gen = app.add_subcommand("gen-data", "Generate the phantom dataset");
  gen->add_option("--out", out, "Dataset directory")->required();
  gen->add_option("--seed", seed, "Override data.seed");

  auto* tcls = app.add_subcommand("train-cls", "Train the disease classifier or fine-tune the severity one");
  tcls->add_option("--manifest", manifest)->required();
  tcls->add_option("--task", task, "disease | severity")->required();
  tcls->add_option("--init", init, "Disease checkpoint to fine-tune (severity task)");
  tcls->add_option("--out", out, "Checkpoint path")->required();
  tcls->add_option("--epochs", epochs);
  tcls->add_option("--seed", seed);

  auto* tpol = app.add_subcommand("train-policy", "Train a sampling policy");
  tpol->add_option("--manifest", manifest)->required();
  tpol->add_option("--variant", variant, "weighted | simulated | varying | recon | random | disease | severity");
  tpol->add_option("--cls-d", cls_d);
  tpol->add_option("--cls-s", cls_s);
  tpol->add_option("--out", out, "Checkpoint path")->required();
  tpol->add_option("--epochs", epochs);
  tpol->add_option("--seed", seed);

  auto* eval = app.add_subcommand("eval", "Per-step curves and summary over seeds");
  for (CLI::App* sub : {eval, app.add_subcommand("trajectory", "Average sampling-probability heatmap")}) {
    sub->add_option("--policy", policy)->required();
    sub->add_option("--cls-d", cls_d)->required();
    sub->add_option("--cls-s", cls_s)->required();
    sub->add_option("--manifest", manifest)->required();
    sub->add_option("--split", split, "train | val | test")->capture_default_str();
    sub->add_option("--out", out, "CSV path")->required();
  }
  auto* traj = app.get_subcommand("trajectory");
  eval->add_option("--seeds", n_seeds, "Evaluate seeds 1..k (default: eval.seeds)");
  eval->add_option("--budget", budget, "Acquisition steps (default: policy.steps)");
  traj->add_option("--seed", seed, "Episode seed (default 1)");

  auto* corr = app.add_subcommand("correlate", "Per-step Pearson correlation of two heatmaps");
  corr->add_option("--traj-a", traj_a)->required();
  corr->add_option("--traj-b", traj_b)->required();
  corr->add_option("--out", out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(common, out, seed);
    if (*tcls) return cmd_train_cls(common, manifest, task, init, out, epochs, seed);
    if (*tpol) return cmd_train_policy(common, manifest, variant, cls_d, cls_s, out, epochs, seed);
    if (*eval) return cmd_eval(common, policy, cls_d, cls_s, manifest, split, n_seeds, budget, out);
    if (*traj) return cmd_trajectory(common, policy, cls_d, cls_s, manifest, split, seed.value_or(1), out);
    if (*corr) return cmd_correlate(common, traj_a, traj_b, out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArtifact;
  } catch (const IncompatibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArtifact;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
