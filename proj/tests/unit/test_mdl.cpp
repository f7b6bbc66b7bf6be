// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "clinlogic/error.hpp"
#include "clinlogic/mdl.hpp"
#include "clinlogic/rng.hpp"
#include "fixtures.hpp"

namespace clinlogic {
namespace {

using namespace clinlogic::testing;

TEST(UniversalInt, EliasGammaLengths) {
  EXPECT_EQ(universal_int(0).bits(), 1.0);
  EXPECT_EQ(universal_int(1).bits(), 3.0);
  EXPECT_EQ(universal_int(2).bits(), 3.0);
  EXPECT_EQ(universal_int(3).bits(), 5.0);
  EXPECT_EQ(universal_int(100).bits(), 13.0);
  for (std::uint64_t n = 0; n < 5000; ++n) {
    const auto expected = 2.0 * std::floor(std::log2(static_cast<double>(n + 1))) + 1.0;
    ASSERT_EQ(universal_int(n).bits(), expected) << n;
  }
}

TEST(ClauseCost, GoldenPregnancyClause) {
  // 4 kinds and 6 distinct attributes: gamma(1) + (2 + log2 6 + log2 3) + (2 + log2 6 + log2 2).
  const Schema& s = *clinic_schema();
  ASSERT_EQ(s.kinds().size(), 4u);
  ASSERT_EQ(s.attribute_names().size(), 6u);
  const Clause c = parse_clause(kPregnancyClause, s);
  EXPECT_NEAR(clause_cost(c, s).bits(), 14.754887502163468, 1e-12);
  EXPECT_EQ(clause_cost(c, s), clause_cost(parse_clause(kPregnancyClause, s), s));
}

TEST(ClauseCost, ComparisonAtomsCarryOperatorAndConstant) {
  // gamma(1) + (2 + log2 6 + log2 3) + (2 + log2 6 + log2 5 + 32).
  const Schema& s = *clinic_schema();
  const double expected = 3.0 + (2.0 + std::log2(6.0) + std::log2(3.0)) + (2.0 + std::log2(6.0) + std::log2(5.0) + 32.0);
  EXPECT_NEAR(clause_cost(parse_clause(kPediatricClause, s), s).bits(), expected, 1e-12);
  for (const char* text : {kPregnancyClause, kPediatricClause, kMaternityClause}) {
    EXPECT_GT(clause_cost(parse_clause(text, s), s).bits(), 0.0);
  }
}

TEST(GrammarCost, EmptyOneClauseAndPermutations) {
  const Schema& s = *clinic_schema();
  EXPECT_EQ(grammar_cost(Grammar{}, s).bits(), 1.0);
  Grammar one;
  one.add(parse_clause(kPregnancyClause, s), {100, 100});
  const double cc = clause_cost(one.clauses[0], s).bits();
  EXPECT_NEAR(grammar_cost(one, s).bits(), cc + 3.0 + 3.321928094887362, 1e-12);

  Grammar ab, ba;
  ab.add(parse_clause(kPregnancyClause, s), {10, 9});
  ab.add(parse_clause(kPediatricClause, s), {40, 40});
  ba.add(ab.clauses[1], ab.stats[1]);
  ba.add(ab.clauses[0], ab.stats[0]);
  EXPECT_NEAR(grammar_cost(ab, s).bits(), grammar_cost(ba, s).bits(), 1e-12);
}

TEST(DataCost, BernoulliGoldenValues) {
  ClinicalGraph g(clinic_schema());
  std::vector<NodeId> patients;
  for (int i = 0; i < 100; ++i) {
    patients.push_back(add_patient(g, "female", 30, "general"));
    add_diagnosis(g, patients.back(), "pregnancy");
  }
  Grammar grammar;
  grammar.add(parse_clause(kPregnancyClause, g.schema()));
  EXPECT_NEAR(data_cost(g, grammar).bits(), 100.0 * -std::log2(101.0 / 102.0), 1e-9);
  EXPECT_NEAR(data_cost(g, grammar).bits(), 1.4205, 1e-3);

  g.set_attribute(patients[0], 0, g.resolve(0, 0, std::string("male")));
  const double expected = 99.0 * -std::log2(100.0 / 102.0) - std::log2(2.0 / 102.0);
  EXPECT_NEAR(data_cost(g, grammar).bits(), expected, 1e-9);
  EXPECT_NEAR(data_cost(g, grammar).bits(), 8.5009, 1e-3);
  EXPECT_EQ(data_cost(g, Grammar{}).bits(), 0.0);
}

TEST(TotalMdl, AccountingIdentity) {
  ClinicalGraph empty(clinic_schema());
  const MdlBreakdown zero = total_mdl(empty, Grammar{});
  EXPECT_EQ(zero.total_bits, 1.0);

  ClinicalGraph g(clinic_schema());
  pregnancy_clinic(g, 50);
  const Grammar grammar = grammar_of({kPregnancyClause, kMaternityClause, kPediatricClause}, g);
  const MdlBreakdown b = total_mdl(g, grammar);
  EXPECT_EQ(b.total_bits, b.grammar_bits + b.data_bits);
  EXPECT_EQ(b.clauses.size(), 3u);
  double data = 0.0;
  for (const auto& c : b.clauses) {
    EXPECT_GE(c.param_bits, 0.0);
    EXPECT_GE(c.exception_bits, 0.0);
    data += c.exception_bits;
  }
  EXPECT_NEAR(data, b.data_bits, 1e-9);
}

// Three clauses applicable to a pregnant pediatric patient, each at p̂ = 100/102.
struct ThreeClauses {
  ClinicalGraph g{clinic_schema()};
  Grammar grammar;
  NodeId clean{}, male{}, nothing{};

  ThreeClauses() {
    clean = add_patient(g, "female", 10, "pediatric");
    add_diagnosis(g, clean, "pregnancy");
    male = add_patient(g, "male", 10, "pediatric");
    add_diagnosis(g, male, "pregnancy");
    nothing = g.add_node("physician", {});
    for (const char* text : {kPregnancyClause, kPediatricClause, "cmp(x, age, <, 18) -> attr_eq(x, ward, pediatric)"}) {
      grammar.add(parse_clause(text, g.schema()), {100, 99});
    }
  }
};

TEST(AnomalyScore, FormulaValues) {
  ThreeClauses f;
  EXPECT_EQ(anomaly_score(f.nothing, f.g, f.grammar).bits(), 0.0);
  const double sat = -std::log2(100.0 / 102.0);
  EXPECT_NEAR(anomaly_score(f.clean, f.g, f.grammar).bits(), 3.0 * sat, 1e-12);
  EXPECT_NEAR(anomaly_score(f.clean, f.g, f.grammar).bits(), 0.0857, 1e-4);
  EXPECT_NEAR(anomaly_score(f.male, f.g, f.grammar).bits(), -std::log2(2.0 / 102.0) + 2.0 * sat, 1e-12);
  EXPECT_NEAR(anomaly_score(f.male, f.g, f.grammar).bits(), 5.7296, 1e-3);
  EXPECT_THROW(anomaly_score(NodeId{99}, f.g, f.grammar), Error);
}

TEST(AnomalyScore, ContributionsSumAndSortDescending) {
  ThreeClauses f;
  const Scorer scorer(f.g, f.grammar);
  for (const auto& r : scorer.score_all(CodeLength(1.0))) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.contributions.size(); ++i) {
      sum += r.contributions[i].bits;
      if (i > 0) EXPECT_GE(r.contributions[i - 1].bits, r.contributions[i].bits);
    }
    EXPECT_NEAR(sum, r.score.bits(), 1e-9);
    EXPECT_EQ(r.flagged, r.score.bits() > 1.0);
  }
  const AnomalyReport m = scorer.report(f.male, CodeLength(1.0));
  EXPECT_EQ(m.contributions.front().clause, 0u);
  EXPECT_EQ(m.contributions.front().outcome, Outcome::violated);
}

TEST(AnomalyScore, IncrementalEqualsFrozenRecompute) {
  ClinicalGraph g(clinic_schema());
  Rng rng(21);
  const char* sexes[] = {"female", "male"};
  const char* wards[] = {"general", "pediatric", "maternity"};
  const char* codes[] = {"pregnancy", "diabetes", "influenza"};
  while (g.node_count() < 500) {
    const NodeId p = add_patient(g, sexes[rng.below(2)], static_cast<double>(rng.below(90)), wards[rng.below(3)]);
    if (g.node_count() < 500) add_diagnosis(g, p, codes[rng.below(3)]);
  }
  const Grammar grammar = grammar_of({kPregnancyClause, kPediatricClause, kMaternityClause}, g);
  const double full = data_cost_frozen(g, grammar).bits();
  for (int i = 0; i < 100; ++i) {
    const auto v = static_cast<NodeId>(rng.below(g.node_count()));
    EXPECT_NEAR(anomaly_score(v, g, grammar).bits(), full - data_cost_frozen(g, grammar, v).bits(), 1e-9);
  }
}

TEST(AnomalyScore, OneMoreViolationRaisesScoreByTheCodewordGap) {
  ClinicalGraph g(clinic_schema());
  const NodeId p = add_patient(g, "female", 30, "maternity");
  add_diagnosis(g, p, "pregnancy");
  Grammar grammar;
  grammar.add(parse_clause(kPregnancyClause, g.schema()), {50, 48});
  grammar.add(parse_clause(kMaternityClause, g.schema()), {80, 79});
  const double before = anomaly_score(p, g, grammar).bits();
  g.set_attribute(p, 0, g.resolve(0, 0, std::string("male")));
  const double after = anomaly_score(p, g, grammar).bits();
  const double p1 = 49.0 / 52.0, p2 = 80.0 / 82.0;
  EXPECT_NEAR(after - before, std::log2(p1 / (1 - p1)) + std::log2(p2 / (1 - p2)), 1e-12);
  EXPECT_GT(after, before);
}

TEST(AnomalyScore, RareButConsistentValuesDoNotMoveTheScore) {
  const Corpus corpus = generate(small_config(0.0, 1000));
  ClinicalGraph g = corpus.graph;
  const Grammar& grammar = corpus.planted;
  const auto patient = *g.schema().kind_id("patient");
  const std::size_t age = *g.schema().kind(patient).slot("age");
  const std::size_t ward = *g.schema().kind(patient).slot("ward");
  std::size_t tried = 0;
  for (std::size_t i = 0; i < g.node_count() && tried < 20; ++i) {
    const auto v = static_cast<NodeId>(i);
    if (g.node(v).kind != patient) continue;
    if (std::get<std::string>(g.render(patient, ward, *g.node(v).attrs[ward])) != "general") continue;
    const double before = anomaly_score(v, g, grammar).bits();
    g.set_attribute(v, age, 119.0);  // far past the 99.9th percentile of the age distribution
    EXPECT_EQ(anomaly_score(v, g, grammar).bits(), before);
    ++tried;
  }
  EXPECT_EQ(tried, 20u);
}

TEST(Calibrate, QuantileAndSigma) {
  const std::vector<double> ones(200, 1.0);
  EXPECT_EQ(calibrate_threshold(ones, ThresholdMethod::quantile(0.995)).bits(), 1.0);
  std::vector<double> grid(1000);
  std::iota(grid.begin(), grid.end(), 0.0);
  EXPECT_DOUBLE_EQ(calibrate_threshold(grid, ThresholdMethod::quantile(0.5)).bits(), 499.5);
  const std::vector<double> four{0, 0, 0, 10};
  EXPECT_NEAR(calibrate_threshold(four, ThresholdMethod::sigma(3)).bits(), 2.5 + 3.0 * std::sqrt(18.75), 1e-12);
  EXPECT_EQ(calibrate_threshold(four, ThresholdMethod::absolute(4.5)).bits(), 4.5);
  try {
    calibrate_threshold(std::vector<double>{}, ThresholdMethod::quantile(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_input);
  }
}

TEST(Calibrate, ParsesMethodSpellings) {
  EXPECT_EQ(parse_threshold_method("quantile:0.9").parameter, 0.9);
  EXPECT_EQ(parse_threshold_method("sigma:2").kind, ThresholdMethod::Kind::sigma);
  EXPECT_EQ(parse_threshold_method("abs:3").kind, ThresholdMethod::Kind::absolute);
  EXPECT_THROW(parse_threshold_method("median"), Error);
  EXPECT_THROW(parse_threshold_method("quantile:1.5"), Error);
}

TEST(ScoreAll, SortedDescendingTiesByNodeId) {
  ThreeClauses f;
  const auto reports = score_all(f.g, f.grammar, CodeLength(1.0));
  ASSERT_EQ(reports.size(), f.g.node_count());
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& a = reports[i - 1];
    const auto& b = reports[i];
    EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.node < b.node));
  }
}

TEST(Corpus, CleanCorpusFlagsAtMostHalfAPercent) {
  const Corpus corpus = generate(small_config(0.0, 3000));
  const Scorer scorer(corpus.graph, corpus.planted);
  const auto scores = scorer.scores();
  const CodeLength tau = calibrate_threshold(scores, ThresholdMethod::quantile(0.995));
  std::size_t flagged = 0;
  for (const auto& r : scorer.score_all(tau)) flagged += r.flagged ? 1 : 0;
  EXPECT_LE(static_cast<double>(flagged), 0.005 * static_cast<double>(scores.size()));
}

TEST(Corpus, PlantedViolationsOutrankCleanNodes) {
  const Corpus corpus = generate(standard_config());
  ASSERT_EQ(corpus.truth.violations.size(), 100u);
  const auto scores = Scorer(corpus.graph, corpus.planted).scores();
  std::vector<double> clean;
  for (std::size_t v = 0; v < scores.size(); ++v) {
    if (!corpus.truth.is_violation(static_cast<NodeId>(v))) clean.push_back(scores[v]);
  }
  const double p99 = calibrate_threshold(clean, ThresholdMethod::quantile(0.99)).bits();
  for (const auto& [v, label] : corpus.truth.violations) EXPECT_GT(scores[index(v)], p99) << index(v);
}

// With no clauses there are no outcomes to code, so the empty grammar's total
// is 1 bit by definition. The comparable reference codes the same head facts
// at their population base rates.
TEST(Corpus, PlantedGrammarCompressesTheCorpus) {
  const Corpus corpus = generate(standard_config());
  const MdlBreakdown planted = total_mdl(corpus.graph, corpus.planted);
  double reference = grammar_cost(Grammar{}, corpus.graph.schema()).bits();
  for (const auto& c : compile(corpus.planted, corpus.graph.schema())) {
    reference += head_base_cost(corpus.graph, c).bits();
  }
  EXPECT_LT(planted.total_bits, reference);
  EXPECT_EQ(total_mdl(corpus.graph, Grammar{}).total_bits, 1.0);
}

}  // namespace
}  // namespace clinlogic
