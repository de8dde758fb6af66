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

#include <gtest/gtest.h>

#include <fstream>

#include "seqdx/error.h"
#include "test_util.h"

namespace seqdx {
namespace {

TEST(Config, EmptyDocumentGivesDefaults) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(c.data.rows, 32u);
  EXPECT_EQ(c.classifier.hidden, 32u);
  EXPECT_EQ(c.policy.variant, Variant::kWeighted);
  EXPECT_EQ(c.eval.seeds, (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_FALSE(c.eval.tau.has_value());
  EXPECT_EQ(c.out_dir, std::filesystem::path("."));
}

TEST(Config, ParsesEverySection) {
  const ExperimentConfig c = parse_config(
      "[data]\nrows = 16\ncols = 24\nnoise_std = 0.2\nseed = 99\n"
      "[classifier]\nhidden = 16\noptimizer = sgd\nmax_rate = 0.4\n"
      "[policy]\nvariant = simulated\nq = 5\nbeta = 0.1\ngating = prediction\nreward_mode = to-go\n"
      "candidates = sample\nselect_on_validation = false\n"
      "[eval]\nseeds = 3,4\ntau = 0.9\nmode = sample\n"
      "[output]\ndir = /tmp/x\n");
  EXPECT_EQ(c.data.rows, 16u);
  EXPECT_EQ(c.data.cols, 24u);
  EXPECT_DOUBLE_EQ(c.data.noise_std, 0.2);
  EXPECT_EQ(c.data.seed, 99u);
  EXPECT_EQ(c.classifier.hidden, 16u);
  EXPECT_EQ(c.classifier.optimizer, OptimizerKind::kSgd);
  EXPECT_DOUBLE_EQ(c.classifier.max_rate, 0.4);
  EXPECT_EQ(c.policy.variant, Variant::kSimulated);
  EXPECT_EQ(c.policy.episode.q, 5u);
  EXPECT_DOUBLE_EQ(c.policy.schedule.beta, 0.1);
  EXPECT_EQ(c.policy.episode.gating, GatingMode::kPrediction);
  EXPECT_EQ(c.policy.episode.reward_mode, RewardMode::kRewardToGo);
  EXPECT_EQ(c.policy.episode.candidates, CandidateMode::kSampleWithoutReplacement);
  EXPECT_FALSE(c.policy.select_on_validation);
  EXPECT_EQ(c.eval.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_DOUBLE_EQ(*c.eval.tau, 0.9);
  EXPECT_EQ(c.eval.mode, InferenceMode::kSample);
  EXPECT_EQ(c.out_dir, std::filesystem::path("/tmp/x"));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("[data]\nrowz = 3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[nope]\nx = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[data]\nrows = -3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[data]\nrows = 3x\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[policy]\nvariant = bogus\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[eval]\nseeds =\n"), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/dir/cfg.ini"), IoError);
}

TEST(Config, IniRoundTrip) {
  ExperimentConfig c = parse_config("[policy]\nvariant = varying\nlr = 0.003\n[eval]\ntau = 0.75\n");
  c.data.p_diseased = 0.3;
  c.classifier.lr = 1.0 / 3.0;
  const std::string text = to_ini(c);
  const ExperimentConfig d = parse_config(text);
  EXPECT_EQ(to_ini(d), text);
  EXPECT_EQ(d.policy.variant, Variant::kVarying);
  EXPECT_EQ(d.classifier.lr, c.classifier.lr);
  EXPECT_EQ(*d.eval.tau, 0.75);

  testing::TempDir dir("config");
  {
    std::ofstream out(dir / "c.ini");
    out << text;
  }
  EXPECT_EQ(to_ini(load_config(dir / "c.ini")), text);
}

}  // namespace
}  // namespace seqdx
