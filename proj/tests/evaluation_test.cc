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

#include "seqdx/evaluation.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "seqdx/error.h"
#include "test_util.h"

namespace seqdx {
namespace {

using testing::random_mlp;

class EvalFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    gen_.rows = 16;
    gen_.cols = 16;
    gen_.seed = 11;
    subjects_ = testing::make_subjects(gen_, "test", 24);
    Rng rng(100);
    f_d_ = random_mlp(64, 8, 2, rng);
    f_s_ = random_mlp(64, 8, 2, rng);
    pair_ = ClassifierPair{&f_d_, &f_s_, 2};
    policy_ = PolicyParams::init(16, 10, 16, PolicyInput::kFeatures, 101, 1.0);
    protocol_.budget = 5;
  }

  GeneratorConfig gen_;
  std::vector<Subject> subjects_;
  MlpParams f_d_, f_s_;
  ClassifierPair pair_{};
  PolicyParams policy_;
  EvalProtocol protocol_;
};

TEST_F(EvalFixture, CurveHasOneRowPerStep) {
  const std::vector<std::uint64_t> seeds{1, 2};
  const Curves c = per_step_curves(view_of(policy_), subjects_, pair_, protocol_, seeds);
  ASSERT_EQ(c.per_seed.size(), 2u);
  ASSERT_EQ(c.mean.size(), protocol_.budget + 1);
  for (std::size_t t = 0; t <= protocol_.budget; ++t) {
    EXPECT_EQ(c.per_seed[0][t].step, t);
    EXPECT_EQ(c.per_seed[0][t].lines_acquired, protocol_.initial_lines + t);
    EXPECT_EQ(*c.per_seed[1][t].seed, 2u);
    EXPECT_FALSE(c.mean[t].seed.has_value());
    EXPECT_NEAR(c.mean[t].sequential_bacc,
                0.5 * (c.per_seed[0][t].sequential_bacc + c.per_seed[1][t].sequential_bacc), 1e-15);
  }
  EvalProtocol zero = protocol_;
  zero.budget = 0;
  const Curves z = per_step_curves(view_of(policy_), subjects_, pair_, zero, seeds);
  ASSERT_EQ(z.mean.size(), 1u);
  EXPECT_EQ(z.mean[0].lines_acquired, 3u);
}

TEST_F(EvalFixture, FinalRowMatchesStandaloneRecompute) {
  const std::vector<std::uint64_t> seeds{7};
  const Curves c = per_step_curves(view_of(policy_), subjects_, pair_, protocol_, seeds);
  const std::vector<InferenceResult> runs = run_episodes(view_of(policy_), subjects_, pair_, protocol_, 7);
  std::vector<EvalRecord> records;
  std::vector<int> yd, pd;
  std::vector<double> sd;
  for (const InferenceResult& r : runs) {
    records.push_back(r.record);
    yd.push_back(r.record.disease);
    pd.push_back(r.record.final_snapshot().disease_probs[1] > r.record.final_snapshot().disease_probs[0]);
    sd.push_back(r.record.final_snapshot().disease_probs[1]);
    EXPECT_EQ(r.record.final_snapshot().mask.line_count(), protocol_.initial_lines + protocol_.budget);
  }
  const CurveRow& last = c.per_seed[0].back();
  EXPECT_EQ(last.sequential_bacc, sequential_accuracy(records));
  EXPECT_EQ(last.sequential_auc, sequential_auc(records, protocol_.budget));
  EXPECT_EQ(last.disease_bacc, balanced_accuracy(yd, pd));
  EXPECT_EQ(last.disease_auc, roc_auc(yd, sd));

  EvalProtocol threaded = protocol_;
  threaded.workers = 4;
  const Curves c4 = per_step_curves(view_of(policy_), subjects_, pair_, threaded, seeds);
  EXPECT_EQ(c4.per_seed[0].back().sequential_bacc, last.sequential_bacc);
  EXPECT_EQ(c4.per_seed[0].back().severity_auc, last.severity_auc);
}

TEST_F(EvalFixture, SummaryUsesFinalRows) {
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const Curves c = per_step_curves(view_of(policy_), subjects_, pair_, protocol_, seeds);
  const std::vector<SummaryStat> s = summarize(c);
  const auto find = [&](const std::string& m) {
    return *std::find_if(s.begin(), s.end(), [&](const SummaryStat& x) { return x.metric == m; });
  };
  const SummaryStat seq = find("sequential_bacc");
  double mean = 0.0, var = 0.0;
  for (const auto& rows : c.per_seed) mean += rows.back().sequential_bacc / 3.0;
  for (const auto& rows : c.per_seed) var += std::pow(rows.back().sequential_bacc - mean, 2) / 3.0;
  EXPECT_NEAR(seq.mean, mean, 1e-15);
  EXPECT_NEAR(seq.std, std::sqrt(var), 1e-15);

  const std::vector<std::uint64_t> one{4};
  for (const SummaryStat& x : summarize(per_step_curves(view_of(policy_), subjects_, pair_, protocol_, one))) {
    if (!std::isnan(x.mean)) {
      EXPECT_EQ(x.std, 0.0) << x.metric;
    }
  }
  const std::string text = summary_text(s, 3);
  EXPECT_NE(text.find("sequential_bacc"), std::string::npos);
}

TEST(StepsToFraction, FirstStepReachingTheFraction) {
  std::vector<CurveRow> rows(5);
  const double v[] = {0.5, 0.7, 0.9, 0.85, 0.94};
  for (std::size_t i = 0; i < 5; ++i) {
    rows[i].step = i;
    rows[i].sequential_bacc = v[i];
  }
  EXPECT_EQ(steps_to_fraction(rows, 0.95), 2u);
  EXPECT_EQ(steps_to_fraction(rows, 1.0), 4u);
  EXPECT_EQ(steps_to_fraction(rows, 0.5), 0u);
}

TEST_F(EvalFixture, HeatmapRowsAreDistributions) {
  const Heatmap h = trajectory_heatmap(view_of(policy_), subjects_, pair_, protocol_, 3);
  ASSERT_EQ(h.size(), protocol_.budget);
  for (const auto& row : h) {
    ASSERT_EQ(row.size(), 16u);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  }
  const std::vector<Subject> single(subjects_.begin(), subjects_.begin() + 1);
  const Heatmap h1 = trajectory_heatmap(view_of(policy_), single, pair_, protocol_, 3);
  EXPECT_EQ(h1.size(), protocol_.budget);
  for (const auto& row : h1) EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
}

TEST_F(EvalFixture, RandomPolicyHeatmapIsFlat) {
  GeneratorConfig g = gen_;
  const std::vector<Subject> many = testing::make_subjects(g, "val", 400);
  const Heatmap h = trajectory_heatmap(view_of(PolicyParams::uniform_policy(16)), many, pair_, protocol_, 5);
  for (const auto& row : h) {
    for (double v : row) EXPECT_NEAR(v, 1.0 / 16, 0.02);
  }
}

TEST(Correlate, SelfCorrelationAndShapes) {
  const Heatmap a{{0.1, 0.2, 0.7}, {0.5, 0.3, 0.2}};
  const std::vector<double> r = correlate(a, a);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[1], 1.0);
  const Heatmap b{{0.7, 0.2, 0.1}};
  EXPECT_EQ(correlate(a, b).size(), 1u);
  EXPECT_THROW(correlate(a, Heatmap{{0.5, 0.5}}), IncompatibleError);
}

TEST(Formatting, CsvAndReals) {
  EXPECT_EQ(format_real(0.123456789), "0.123457");
  EXPECT_EQ(format_real(std::nan("")), "nan");
  EXPECT_EQ(format_real(1.0), "1");

  const Heatmap h{{0.25, 0.75}, {1.0 / 3.0, 2.0 / 3.0}};
  const std::string text = heatmap_csv(h);
  EXPECT_EQ(text.substr(0, text.find('\n')), "0,1");
  const Heatmap back = parse_heatmap_csv(text, "mem");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_NEAR(back[1][0], 1.0 / 3.0, 1e-6);
  EXPECT_THROW(parse_heatmap_csv("0,1\n0.5\n", "mem"), FormatError);
  EXPECT_THROW(parse_heatmap_csv("0,1\n0.5,abc\n", "mem"), FormatError);

  EXPECT_EQ(correlation_csv(std::vector<double>{1.0, 0.5}), "step,pearson_r\n0,1\n1,0.5\n");

  Curves c;
  CurveRow row;
  row.seed = 1;
  row.severity_auc = std::nan("");
  c.per_seed = {{row}};
  c.mean = {row};
  c.mean[0].seed.reset();
  const std::string csv = curves_csv(c);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "step,lines_acquired,disease_bacc,severity_bacc,sequential_bacc,disease_auc,severity_auc,seed");
  EXPECT_NE(csv.find(",mean\n"), std::string::npos);
  EXPECT_NE(csv.find("nan"), std::string::npos);
}

}  // namespace
}  // namespace seqdx
