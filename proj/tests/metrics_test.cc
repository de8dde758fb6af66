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

#include "seqdx/metrics.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"

namespace seqdx {
namespace {

double auc_oracle(const std::vector<int>& labels, const std::vector<double>& scores) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[i] != 1 || labels[j] != 0) continue;
      pairs += 1.0;
      wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

std::vector<std::vector<double>> confusion(const std::vector<int>& y, const std::vector<int>& p, int k) {
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < y.size(); ++i) m[y[i]][p[i]] += 1.0;
  return m;
}

double f1_oracle(const std::vector<int>& y, const std::vector<int>& p, int k) {
  const auto m = confusion(y, p, k);
  double sum = 0.0;
  for (int c = 0; c < k; ++c) {
    double tp = m[c][c], fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += m[o][c];
      fn += m[c][o];
    }
    sum += tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
  }
  return sum / k;
}

double bacc_oracle(const std::vector<int>& y, const std::vector<int>& p, int k) {
  const auto m = confusion(y, p, k);
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < k; ++c) {
    double row = 0.0;
    for (int o = 0; o < k; ++o) row += m[c][o];
    if (row == 0) continue;
    sum += m[c][c] / row;
    ++present;
  }
  return sum / present;
}

TEST(BalancedAccuracy, Examples) {
  EXPECT_EQ(balanced_accuracy(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 1}), 1.0);
  // TPR 0.8, TNR 0.6.
  std::vector<int> y, p;
  for (int i = 0; i < 5; ++i) {
    y.push_back(1);
    p.push_back(i < 4);
    y.push_back(0);
    p.push_back(i < 2);
  }
  EXPECT_NEAR(balanced_accuracy(y, p), 0.7, 1e-15);
  EXPECT_EQ(balanced_accuracy(std::vector<int>{0, 0, 1, 1}, std::vector<int>{1, 1, 1, 1}), 0.5);
  EXPECT_THROW(balanced_accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST(BalancedAccuracy, MatchesConfusionOracleAndIgnoresDuplication) {
  Rng rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.index(3));
    std::vector<int> y, p;
    for (std::size_t i = 0, n = 1 + rng.index(30); i < n; ++i) {
      y.push_back(static_cast<int>(rng.index(k)));
      p.push_back(static_cast<int>(rng.index(k)));
    }
    EXPECT_EQ(balanced_accuracy(y, p), bacc_oracle(y, p, k));
    std::vector<int> y2 = y, p2 = p;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == y[0]) {
        y2.push_back(y[i]);
        p2.push_back(p[i]);
      }
    }
    EXPECT_NEAR(balanced_accuracy(y2, p2), balanced_accuracy(y, p), 1e-15);
  }
}

TEST(RocAuc, Examples) {
  EXPECT_EQ(roc_auc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.8, 0.9}), 1.0);
  EXPECT_EQ(roc_auc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.4, 0.35, 0.8}), 0.75);
  EXPECT_EQ(roc_auc(std::vector<int>{0, 1, 0, 1}, std::vector<double>{0.3, 0.3, 0.3, 0.3}), 0.5);
  EXPECT_THROW(roc_auc(std::vector<int>{1, 1}, std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

TEST(RocAuc, MatchesPairwiseOracleExactly) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(19);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.index(2));
      s[i] = static_cast<double>(rng.index(6)) / 5.0;  // coarse grid forces ties
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_EQ(roc_auc(y, s), auc_oracle(y, s)) << "trial " << trial;
  }
}

TEST(RocAuc, NegatedScoresComplement) {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4 + rng.index(20);
    std::vector<int> y(n);
    std::vector<double> s(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      s[i] = rng.uniform();
      neg[i] = -s[i];
    }
    EXPECT_NEAR(roc_auc(y, s) + roc_auc(y, neg), 1.0, 1e-15);
  }
}

TEST(MacroF1, ExamplesAndOracle) {
  EXPECT_EQ(macro_f1(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 2}, 3), 1.0);
  EXPECT_NEAR(macro_f1(std::vector<int>{0, 1, 2}, std::vector<int>{0, 2, 1}, 3), 1.0 / 3.0, 1e-15);
  const std::vector<int> uniform{0, 1, 2, 0, 1, 2}, constant(6, 1);
  EXPECT_EQ(macro_f1(uniform, constant, 3), f1_oracle(uniform, constant, 3));
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> y, p;
    for (std::size_t i = 0, n = 1 + rng.index(25); i < n; ++i) {
      y.push_back(static_cast<int>(rng.index(3)));
      p.push_back(static_cast<int>(rng.index(3)));
    }
    EXPECT_EQ(macro_f1(y, p, 3), f1_oracle(y, p, 3));
  }
  EXPECT_THROW(macro_f1(std::vector<int>{}, std::vector<int>{}, 3), std::invalid_argument);
}

TEST(Pearson, ExamplesAndOracle) {
  const std::vector<double> a{1, 2, 3}, b{3, 2, 1}, c{1, 2, 4};
  EXPECT_EQ(pearson_corr(a, a), 1.0);
  EXPECT_NEAR(pearson_corr(a, b), -1.0, 1e-15);
  EXPECT_NEAR(pearson_corr(a, c), 0.981981, 1e-6);
  EXPECT_THROW(pearson_corr(a, std::vector<double>{2, 2, 2}), std::invalid_argument);
  EXPECT_THROW(pearson_corr(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);

  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-3, 3);
      y[i] = 0.5 * x[i] + rng.uniform(-1, 1);
    }
    // Raw-moment formula, algebraically equal to the centred one.
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      syy += y[i] * y[i];
      sxy += x[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double want = (dn * sxy - sx * sy) / std::sqrt((dn * sxx - sx * sx) * (dn * syy - sy * sy));
    EXPECT_NEAR(pearson_corr(x, y), want, 1e-12);
    EXPECT_EQ(pearson_corr(x, x), 1.0);
  }
}

EvalRecord record(int disease, std::optional<int> severity, double pd, double ps) {
  EvalRecord r;
  r.disease = disease;
  r.severity = severity;
  StepSnapshot s;
  s.disease_probs = {1 - pd, pd};
  s.severity_probs = {1 - ps, ps};
  r.snapshots.push_back(s);
  return r;
}

TEST(Sequential, OutcomeRules) {
  EXPECT_TRUE(record(1, 1, 0.9, 0.8).sequential_correct(0));
  EXPECT_FALSE(record(0, std::nullopt, 0.9, 0.8).sequential_correct(0));
  EXPECT_FALSE(record(1, 0, 0.9, 0.8).sequential_correct(0));
  EXPECT_TRUE(record(0, std::nullopt, 0.1, 0.8).sequential_correct(0));
}

TEST(Sequential, AccuracyIsThreeClassBalancedAccuracy) {
  Rng rng(45);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EvalRecord> rs;
    std::vector<int> y, p;
    for (int i = 0; i < 20; ++i) {
      const int d = static_cast<int>(rng.index(2));
      const std::optional<int> s = d ? std::optional<int>(static_cast<int>(rng.index(2))) : std::nullopt;
      rs.push_back(record(d, s, rng.uniform(), rng.uniform()));
      y.push_back(rs.back().true_outcome());
      p.push_back(rs.back().final_snapshot().outcome());
      // Correct trajectories always have the disease call right.
      if (rs.back().sequential_correct(0)) {
        EXPECT_EQ(p.back() > 0, d == 1);
      }
    }
    EXPECT_EQ(sequential_accuracy(rs), bacc_oracle(y, p, 3));
  }
  EXPECT_THROW(sequential_accuracy(std::vector<EvalRecord>{}), std::invalid_argument);
}

TEST(Sequential, AucUsesProductScores) {
  std::vector<EvalRecord> rs{record(0, std::nullopt, 0.1, 0.5), record(1, 0, 0.9, 0.2), record(1, 1, 0.8, 0.9)};
  EXPECT_EQ(sequential_auc(rs, 0), 1.0);
  rs.push_back(record(0, std::nullopt, 0.95, 0.9));
  const double a = sequential_auc(rs, 0);
  EXPECT_GT(a, 0.0);
  EXPECT_LT(a, 1.0);
}

TEST(Sequential, RecordStepLookupClampsToLastSnapshot) {
  EvalRecord r = record(1, 1, 0.9, 0.9);
  r.snapshots.push_back(r.snapshots.front());
  r.snapshots.back().disease_probs = {0.8, 0.2};
  EXPECT_TRUE(r.sequential_correct(0));
  EXPECT_FALSE(r.sequential_correct(1));
  EXPECT_FALSE(r.sequential_correct(7));
}

}  // namespace
}  // namespace seqdx
