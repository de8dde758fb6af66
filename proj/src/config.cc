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

#include "seqdx/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "binary_io.h"
#include "seqdx/evaluation.h"

namespace seqdx {

namespace pt = boost::property_tree;

std::string to_string(GatingMode m) { return m == GatingMode::kGroundTruth ? "truth" : "prediction"; }
std::string to_string(RewardMode m) { return m == RewardMode::kImmediate ? "immediate" : "to-go"; }
std::string to_string(CandidateMode m) { return m == CandidateMode::kTopQ ? "topq" : "sample"; }
std::string to_string(InferenceMode m) { return m == InferenceMode::kArgmax ? "argmax" : "sample"; }
std::string to_string(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd"; }

namespace {

template <typename E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<E> options) {
  std::string valid;
  for (E e : options) {
    if (to_string(e) == v) return e;
    valid += (valid.empty() ? "" : ", ") + to_string(e);
  }
  throw std::invalid_argument(key + ": '" + v + "' is not one of " + valid);
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    if (!v.empty() && v[0] != '-') n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw std::invalid_argument(key + ": '" + v + "' is not a count");
  return static_cast<std::size_t>(n);
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size() || !std::isfinite(d)) {
    throw std::invalid_argument(key + ": '" + v + "' is not a finite number");
  }
  return d;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument(key + ": '" + v + "' is not a boolean");
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::uint64_t x : seeds) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

#define SEQDX_COUNT(expr)                                                                                   \
  Field {                                                                                                  \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.expr = parse_count(k, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.expr); }                                  \
  }
#define SEQDX_REAL(expr)                                                                                   \
  Field {                                                                                                 \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.expr = parse_real(k, v); }, \
        [](const ExperimentConfig& c) { return format_real_exact(c.expr); }                              \
  }

std::string format_real_exact(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"data.rows", SEQDX_COUNT(data.rows)},
      {"data.cols", SEQDX_COUNT(data.cols)},
      {"data.n_train", SEQDX_COUNT(data.n_train)},
      {"data.n_val", SEQDX_COUNT(data.n_val)},
      {"data.n_test", SEQDX_COUNT(data.n_test)},
      {"data.p_diseased", SEQDX_REAL(data.p_diseased)},
      {"data.p_high", SEQDX_REAL(data.p_high_given_diseased)},
      {"data.noise_std", SEQDX_REAL(data.noise_std)},
      {"data.seed", SEQDX_COUNT(data.seed)},

      {"classifier.hidden", SEQDX_COUNT(classifier.hidden)},
      {"classifier.pool", SEQDX_COUNT(classifier.pool)},
      {"classifier.epochs", SEQDX_COUNT(classifier.epochs)},
      {"classifier.batch", SEQDX_COUNT(classifier.batch)},
      {"classifier.lr", SEQDX_REAL(classifier.lr)},
      {"classifier.lr_decay_at", SEQDX_REAL(classifier.lr_decay_at)},
      {"classifier.lr_gamma", SEQDX_REAL(classifier.lr_gamma)},
      {"classifier.optimizer",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.classifier.optimizer = parse_enum(k, v, {OptimizerKind::kAdam, OptimizerKind::kSgd});
        },
        [](const ExperimentConfig& c) { return to_string(c.classifier.optimizer); }}},
      {"classifier.min_rate", SEQDX_REAL(classifier.min_rate)},
      {"classifier.max_rate", SEQDX_REAL(classifier.max_rate)},
      {"classifier.max_center_fraction", SEQDX_REAL(classifier.max_center_fraction)},
      {"classifier.seed", SEQDX_COUNT(classifier.seed)},

      {"policy.variant",
       {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.policy.variant = parse_variant(v); },
        [](const ExperimentConfig& c) { return to_string(c.policy.variant); }}},
      {"policy.hidden", SEQDX_COUNT(policy.hidden)},
      {"policy.epochs", SEQDX_COUNT(policy.epochs)},
      {"policy.batch", SEQDX_COUNT(policy.batch)},
      {"policy.lr", SEQDX_REAL(policy.lr)},
      {"policy.lr_decay_at", SEQDX_REAL(policy.lr_decay_at)},
      {"policy.lr_gamma", SEQDX_REAL(policy.lr_gamma)},
      {"policy.optimizer",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.policy.optimizer = parse_enum(k, v, {OptimizerKind::kAdam, OptimizerKind::kSgd});
        },
        [](const ExperimentConfig& c) { return to_string(c.policy.optimizer); }}},
      {"policy.q", SEQDX_COUNT(policy.episode.q)},
      {"policy.initial_lines", SEQDX_COUNT(policy.schedule.initial_lines)},
      {"policy.steps", SEQDX_COUNT(policy.schedule.steps)},
      {"policy.beta", SEQDX_REAL(policy.schedule.beta)},
      {"policy.gating",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.policy.episode.gating = parse_enum(k, v, {GatingMode::kGroundTruth, GatingMode::kPrediction});
        },
        [](const ExperimentConfig& c) { return to_string(c.policy.episode.gating); }}},
      {"policy.reward_mode",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.policy.episode.reward_mode = parse_enum(k, v, {RewardMode::kImmediate, RewardMode::kRewardToGo});
        },
        [](const ExperimentConfig& c) { return to_string(c.policy.episode.reward_mode); }}},
      {"policy.candidates",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.policy.episode.candidates =
              parse_enum(k, v, {CandidateMode::kTopQ, CandidateMode::kSampleWithoutReplacement});
        },
        [](const ExperimentConfig& c) { return to_string(c.policy.episode.candidates); }}},
      {"policy.seed", SEQDX_COUNT(policy.seed)},
      {"policy.select_on_validation",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.policy.select_on_validation = parse_bool(k, v);
        },
        [](const ExperimentConfig& c) { return std::string(c.policy.select_on_validation ? "true" : "false"); }}},

      {"eval.seeds",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.eval.seeds.clear();
          std::istringstream in(v);
          std::string item;
          while (std::getline(in, item, ',')) c.eval.seeds.push_back(parse_count(k, item));
          if (c.eval.seeds.empty()) throw std::invalid_argument(k + ": at least one seed is required");
        },
        [](const ExperimentConfig& c) { return join_seeds(c.eval.seeds); }}},
      {"eval.tau",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          if (v == "none") {
            c.eval.tau.reset();
            return;
          }
          const double tau = parse_real(k, v);
          if (tau < 0.0 || tau > 1.0) throw std::invalid_argument(k + ": must lie in [0, 1]");
          c.eval.tau = tau;
        },
        [](const ExperimentConfig& c) { return c.eval.tau ? format_real_exact(*c.eval.tau) : std::string("none"); }}},
      {"eval.mode",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.eval.mode = parse_enum(k, v, {InferenceMode::kArgmax, InferenceMode::kSample});
        },
        [](const ExperimentConfig& c) { return to_string(c.eval.mode); }}},

      {"output.dir",
       {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
        [](const ExperimentConfig& c) { return c.out_dir.string(); }}},
  };
  return table;
}

#undef SEQDX_COUNT
#undef SEQDX_REAL

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument("config: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw std::invalid_argument("config: key '" + section + "' must sit inside a section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      auto it = fields().find(full);
      if (it == fields().end()) throw std::invalid_argument("config: unknown key '" + full + "'");
      it->second.set(cfg, full, value.data());
    }
  }
  cfg.data.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::vector<char> bytes = io::read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::string out, section;
  for (const auto& [key, field] : fields()) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      out += (section.empty() ? "" : "\n") + ("[" + s + "]\n");
      section = s;
    }
    out += key.substr(dot + 1) + " = " + field.get(cfg) + "\n";
  }
  return out;
}

}  // namespace seqdx
