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

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "seqdx/error.h"

namespace seqdx {

std::vector<InferenceResult> run_episodes(const PolicyView& policy, std::span<const Subject> subjects,
                                          const ClassifierPair& pair, const EvalProtocol& protocol,
                                          std::uint64_t seed) {
  std::vector<InferenceResult> out(subjects.size());
  parallel_for(subjects.size(), protocol.workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {i}));
    out[i] = run_inference_episode(subjects[i], policy, pair, protocol.initial_lines, protocol.budget,
                                   protocol.mode, protocol.tau, rng);
  });
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int argmax2(const std::array<double, 2>& p) { return p[1] > p[0] ? 1 : 0; }

bool has_both(const std::vector<int>& labels) {
  bool zero = false, one = false;
  for (int l : labels) (l == 0 ? zero : one) = true;
  return zero && one;
}

}  // namespace

std::vector<CurveRow> curve_rows(std::span<const EvalRecord> records, std::size_t initial_lines,
                                 std::size_t budget, std::uint64_t seed) {
  if (records.empty()) throw std::invalid_argument("no records to evaluate");
  std::vector<CurveRow> rows;
  for (std::size_t t = 0; t <= budget; ++t) {
    CurveRow row;
    row.step = t;
    row.lines_acquired = initial_lines + t;
    row.seed = seed;
    std::vector<int> d_labels, d_preds, s_labels, s_preds;
    std::vector<double> d_scores, s_scores;
    for (const EvalRecord& r : records) {
      const StepSnapshot& s = r.at(t);
      d_labels.push_back(r.disease);
      d_preds.push_back(argmax2(s.disease_probs));
      d_scores.push_back(s.disease_probs[1]);
      if (r.disease == 1) {
        s_labels.push_back(*r.severity);
        s_preds.push_back(argmax2(s.severity_probs));
        s_scores.push_back(s.severity_probs[1]);
      }
    }
    row.disease_bacc = balanced_accuracy(d_labels, d_preds);
    row.disease_auc = has_both(d_labels) ? roc_auc(d_labels, d_scores) : kNaN;
    row.severity_bacc = s_labels.empty() ? kNaN : balanced_accuracy(s_labels, s_preds);
    row.severity_auc = has_both(s_labels) ? roc_auc(s_labels, s_scores) : kNaN;
    row.sequential_bacc = sequential_accuracy(records, t);
    row.sequential_auc = sequential_auc(records, t);
    rows.push_back(row);
  }
  return rows;
}

Curves per_step_curves(const PolicyView& policy, std::span<const Subject> subjects,
                       const ClassifierPair& pair, const EvalProtocol& protocol,
                       std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  Curves c;
  for (std::uint64_t seed : seeds) {
    std::vector<EvalRecord> records;
    for (InferenceResult& r : run_episodes(policy, subjects, pair, protocol, seed)) {
      records.push_back(std::move(r.record));
    }
    c.per_seed.push_back(curve_rows(records, protocol.initial_lines, protocol.budget, seed));
  }
  const double n = static_cast<double>(seeds.size());
  for (std::size_t t = 0; t <= protocol.budget; ++t) {
    CurveRow m = c.per_seed.front()[t];
    m.seed.reset();
    m.disease_bacc = m.severity_bacc = m.sequential_bacc = 0.0;
    m.disease_auc = m.severity_auc = m.sequential_auc = 0.0;
    for (const auto& table : c.per_seed) {
      m.disease_bacc += table[t].disease_bacc / n;
      m.severity_bacc += table[t].severity_bacc / n;
      m.sequential_bacc += table[t].sequential_bacc / n;
      m.disease_auc += table[t].disease_auc / n;
      m.severity_auc += table[t].severity_auc / n;
      m.sequential_auc += table[t].sequential_auc / n;
    }
    c.mean.push_back(m);
  }
  return c;
}

std::vector<SummaryStat> summarize(const Curves& curves) {
  if (curves.per_seed.empty()) throw std::invalid_argument("no curves to summarize");
  struct Field {
    const char* name;
    double CurveRow::*member;
  };
  static constexpr Field kFields[] = {
      {"disease_bacc", &CurveRow::disease_bacc},       {"severity_bacc", &CurveRow::severity_bacc},
      {"sequential_bacc", &CurveRow::sequential_bacc}, {"disease_auc", &CurveRow::disease_auc},
      {"severity_auc", &CurveRow::severity_auc},       {"sequential_auc", &CurveRow::sequential_auc},
  };
  std::vector<SummaryStat> out;
  const double n = static_cast<double>(curves.per_seed.size());
  for (const Field& f : kFields) {
    double mean = 0.0;
    for (const auto& table : curves.per_seed) mean += table.back().*f.member / n;
    double var = 0.0;
    for (const auto& table : curves.per_seed) {
      const double d = table.back().*f.member - mean;
      var += d * d / n;
    }
    out.push_back({f.name, mean, std::sqrt(var)});
  }
  return out;
}

std::size_t steps_to_fraction(std::span<const CurveRow> rows, double fraction) {
  if (rows.empty()) throw std::invalid_argument("empty curve");
  const double target = fraction * rows.back().sequential_bacc;
  for (const CurveRow& r : rows) {
    if (r.sequential_bacc >= target) return r.step;
  }
  return rows.back().step;
}

Heatmap trajectory_heatmap(const PolicyView& policy, std::span<const Subject> subjects,
                           const ClassifierPair& pair, const EvalProtocol& protocol, std::uint64_t seed) {
  if (subjects.empty()) throw std::invalid_argument("no subjects for the heatmap");
  EvalProtocol p = protocol;
  p.tau.reset();
  const std::vector<InferenceResult> runs = run_episodes(policy, subjects, pair, p, seed);
  const std::size_t cols = subjects.front().kspace.cols();
  Heatmap h(p.budget, std::vector<double>(cols, 0.0));
  const double n = static_cast<double>(subjects.size());
  for (const InferenceResult& r : runs) {
    for (std::size_t t = 0; t < p.budget; ++t) {
      const std::vector<double>& d = r.trace.steps[t].distribution;
      for (std::size_t j = 0; j < cols; ++j) h[t][j] += d[j] / n;
    }
  }
  return h;
}

std::vector<double> correlate(const Heatmap& a, const Heatmap& b) {
  std::vector<double> r;
  const std::size_t steps = std::min(a.size(), b.size());
  for (std::size_t t = 0; t < steps; ++t) {
    if (a[t].size() != b[t].size()) {
      throw IncompatibleError("trajectory rows differ in width (" + std::to_string(a[t].size()) + " vs " +
                              std::to_string(b[t].size()) + ")");
    }
    r.push_back(pearson_corr(a[t], b[t]));
  }
  return r;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string curves_csv(const Curves& curves) {
  std::ostringstream out;
  out << "step,lines_acquired,disease_bacc,severity_bacc,sequential_bacc,disease_auc,severity_auc,seed\n";
  auto emit = [&](const CurveRow& r) {
    out << r.step << ',' << r.lines_acquired << ',' << format_real(r.disease_bacc) << ','
        << format_real(r.severity_bacc) << ',' << format_real(r.sequential_bacc) << ','
        << format_real(r.disease_auc) << ',' << format_real(r.severity_auc) << ','
        << (r.seed ? std::to_string(*r.seed) : std::string("mean")) << '\n';
  };
  for (const auto& table : curves.per_seed) {
    for (const CurveRow& r : table) emit(r);
  }
  for (const CurveRow& r : curves.mean) emit(r);
  return out.str();
}

std::string summary_text(const std::vector<SummaryStat>& stats, std::size_t n_seeds) {
  std::ostringstream out;
  out << "final-step metrics over " << n_seeds << " seed(s): mean +- std\n";
  for (const SummaryStat& s : stats) {
    out << "  " << s.metric << std::string(16 - std::min<std::size_t>(15, s.metric.size()), ' ')
        << format_real(s.mean) << " +- " << format_real(s.std) << '\n';
  }
  return out.str();
}

std::string heatmap_csv(const Heatmap& h) {
  std::ostringstream out;
  const std::size_t cols = h.empty() ? 0 : h.front().size();
  for (std::size_t j = 0; j < cols; ++j) out << (j ? "," : "") << j;
  out << '\n';
  for (const auto& row : h) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_real(row[j]);
    out << '\n';
  }
  return out.str();
}

Heatmap parse_heatmap_csv(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(what + ": empty heatmap");
  std::size_t cols = 0;
  {
    std::istringstream hdr(line);
    std::string cell;
    while (std::getline(hdr, cell, ',')) {
      if (cell != std::to_string(cols)) throw FormatError(what + ": header must list line indices 0..cols-1");
      ++cols;
    }
  }
  Heatmap h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != cell.size()) throw FormatError(what + ": bad value '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != cols) {
      throw FormatError(what + ": row " + std::to_string(h.size() + 1) + " has " + std::to_string(row.size()) +
                        " values, header has " + std::to_string(cols));
    }
    h.push_back(std::move(row));
  }
  return h;
}

std::string correlation_csv(std::span<const double> r) {
  std::ostringstream out;
  out << "step,pearson_r\n";
  for (std::size_t t = 0; t < r.size(); ++t) out << t << ',' << format_real(r[t]) << '\n';
  return out.str();
}

}  // namespace seqdx
