// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "clinlogic/eval.hpp"
#include "clinlogic/rng.hpp"
#include "fixtures.hpp"

namespace clinlogic {
namespace {

using namespace clinlogic::testing;

AnomalyReport report(std::uint32_t v, double score, bool flagged) {
  AnomalyReport r;
  r.node = NodeId{v};
  r.score = CodeLength(score);
  r.flagged = flagged;
  return r;
}

GroundTruth truth(std::initializer_list<std::uint32_t> violations, std::initializer_list<std::uint32_t> extremes = {}) {
  GroundTruth t;
  for (auto v : violations) t.violations[NodeId{v}] = ViolationLabel{};
  for (auto v : extremes) t.extremes.insert(NodeId{v});
  return t;
}

// Concordant-pair fraction over every (positive, negative) pair.
double pair_auc(const std::vector<double>& s, const std::vector<bool>& pos) {
  double hits = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!pos[i] || pos[j]) continue;
      pairs += 1.0;
      hits += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return pairs == 0.0 ? 0.5 : hits / pairs;
}

TEST(Metrics, PerfectDetection) {
  const std::vector<AnomalyReport> r{report(0, 9, true), report(1, 8, true), report(2, 1, false), report(3, 0, false)};
  const DetectionMetrics m = detection_metrics(r, truth({0, 1}, {3}));
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.auc, 1.0);
  EXPECT_EQ(m.tn, 2u);
  EXPECT_EQ(m.extremes, 1u);
  EXPECT_EQ(m.extreme_fp_rate, 0.0);
}

TEST(Metrics, NothingFlaggedIsAllZero) {
  const std::vector<AnomalyReport> r{report(0, 1, false), report(1, 0, false)};
  const DetectionMetrics m = detection_metrics(r, truth({0}));
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_EQ(m.fn, 1u);
}

TEST(Metrics, FlaggedExtremeIsAFalsePositive) {
  const std::vector<AnomalyReport> r{report(0, 5, true), report(1, 4, true), report(2, 0, false)};
  const DetectionMetrics m = detection_metrics(r, truth({0}, {1, 2}));
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.extremes_flagged, 1u);
  EXPECT_EQ(m.extreme_fp_rate, 0.5);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.f1, 2 * 0.5 * 1.0 / 1.5);
}

TEST(Metrics, ThreeNodeAuc) {
  const std::vector<double> s{3, 2, 1};
  const std::vector<bool> pos{true, false, true};
  EXPECT_EQ(pair_auc(s, pos), 0.5);
  EXPECT_EQ(rank_auc(s, pos), 0.5);
  const std::vector<AnomalyReport> r{report(0, 3, true), report(1, 2, false), report(2, 1, false)};
  EXPECT_EQ(detection_metrics(r, truth({0, 2})).auc, 0.5);
}

TEST(Metrics, AucMatchesPairCountingWithTies) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> s(n);
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(6));  // plenty of ties
      pos[i] = rng.below(3) == 0;
    }
    EXPECT_NEAR(rank_auc(s, pos), pair_auc(s, pos), 1e-12);
  }
}

TEST(Metrics, InvariantUnderReordering) {
  std::vector<AnomalyReport> r;
  Rng rng(3);
  for (std::uint32_t i = 0; i < 50; ++i) r.push_back(report(i, rng.uniform(0, 5), rng.below(4) == 0));
  const GroundTruth t = truth({1, 4, 9, 16, 25}, {2, 3});
  const DetectionMetrics a = detection_metrics(r, t);
  std::reverse(r.begin(), r.end());
  const DetectionMetrics b = detection_metrics(r, t);
  EXPECT_EQ(a.tp, b.tp);
  EXPECT_EQ(a.fp, b.fp);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_EQ(a.auc, b.auc);
}

TEST(Metrics, MissingLabelIsReported) {
  const std::vector<AnomalyReport> r{report(0, 3, true)};
  try {
    detection_metrics(r, truth({0, 7}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_label);
  }
}

AblationConfig quick_ablation() {
  AblationConfig c;
  c.train.encoder.hidden = 6;
  c.train.encoder.latent = 3;
  c.train.encoder.layers = 1;
  c.train.epochs = 2;
  c.train.reinduce_every = 5;
  return c;
}

const Corpus& small_corpus() {
  static const Corpus corpus = generate(small_config(0.02, 1000));
  return corpus;
}

TEST(Ablation, NoHealingLeavesTheCellEmpty) {
  const AblationRow full = ablation_run(small_corpus(), {}, quick_ablation());
  EXPECT_EQ(full.toggles.name(), "full");
  EXPECT_TRUE(full.repair_accuracy.has_value());
  AblationToggles t;
  t.no_healing = true;
  const AblationRow row = ablation_run(small_corpus(), t, quick_ablation());
  EXPECT_FALSE(row.repair_accuracy.has_value());
  EXPECT_EQ(row.metrics.f1, full.metrics.f1);
  std::vector<AblationRow> rows{full, row};
  std::ostringstream csv;
  write_metrics_csv(csv, rows);
  EXPECT_NE(csv.str().find("no_healing"), std::string::npos);
}

TEST(Ablation, AllSixteenCombinationsRun) {
  std::vector<AblationToggles> all;
  for (int mask = 0; mask < 16; ++mask) {
    all.push_back({(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0, (mask & 8) != 0});
  }
  const auto rows = ablation_table(small_corpus(), all, quick_ablation());
  ASSERT_EQ(rows.size(), 16u);
  for (const auto& r : rows) {
    EXPECT_GE(r.metrics.f1, 0.0);
    EXPECT_LE(r.metrics.f1, 1.0);
    EXPECT_EQ(r.metrics.tp + r.metrics.fp + r.metrics.fn + r.metrics.tn, small_corpus().graph.node_count());
  }
  EXPECT_EQ(all[5].name(), "no_symbolic+no_temporal");
  std::ostringstream table;
  write_metrics_table(table, rows);
  EXPECT_FALSE(table.str().empty());
}

TEST(Scaling, SingleSizeSingleRow) {
  const std::vector<std::size_t> one{500};
  const ScalingReport r = scaling_run(one, small_config(0.02, 1000), 1);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].target_edges, 500u);
  EXPECT_GT(r.rows[0].edges, 0u);
  EXPECT_GT(r.rows[0].memory_bytes, 0u);
}

TEST(Scaling, RowsSortedAndSizesMustIncrease) {
  const std::vector<std::size_t> sizes{300, 600, 1200};
  const ScalingReport r = scaling_run(sizes, small_config(0.02, 1000), 1);
  ASSERT_EQ(r.rows.size(), 3u);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_LT(r.rows[i - 1].target_edges, r.rows[i].target_edges);
    EXPECT_LT(r.rows[i - 1].edges, r.rows[i].edges);
  }
  const std::vector<std::size_t> bad{600, 300};
  EXPECT_THROW(scaling_run(bad, small_config(), 1), Error);
  std::ostringstream csv;
  write_scaling_csv(csv, r);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

}  // namespace
}  // namespace clinlogic
