// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "clinlogic/mdl.hpp"
#include "clinlogic/trainer.hpp"
#include "fixtures.hpp"

namespace clinlogic {
namespace {

using namespace clinlogic::testing;

TrainConfig quick_config(std::size_t epochs = 4) {
  TrainConfig c;
  c.encoder.hidden = 6;
  c.encoder.latent = 3;
  c.encoder.layers = 1;
  c.epochs = epochs;
  c.reinduce_every = 2;
  c.induction.min_support = 10;
  return c;
}

const Corpus& small_corpus() {
  static const Corpus corpus = generate(small_config(0.02, 1000));
  return corpus;
}

ClinicalGraph eight_nodes() {
  ClinicalGraph g(clinic_schema());
  const NodeId a = add_patient(g, "female", 30, "maternity");
  const NodeId b = add_patient(g, "male", 45, "pediatric");
  const NodeId c = add_patient(g, "female", 8, "pediatric");
  const NodeId doc = g.add_node("physician", {{"specialty", "obstetrics"}});
  add_diagnosis(g, a, "pregnancy", 100000);
  add_diagnosis(g, b, "pregnancy", 300000);
  g.add_edge(a, doc, "consultation", 200000);
  g.add_edge(c, doc, "consultation", 500000);
  g.add_edge(c, g.add_node("admission", {{"ward", "pediatric"}}), "admission", 400000);
  g.add_edge(b, g.add_node("physician", {{"specialty", "general_practice"}}), "consultation", 450000);
  return g;
}

TEST(Loss, WeightCollapseLeavesReconstruction) {
  const ClinicalGraph g = eight_nodes();
  TrainConfig config = quick_config();
  config.weights = {0.0, 0.0, 0.0};
  const EncoderParams params = EncoderParams::init(g.schema(), config.encoder, 3);
  const Grammar grammar = grammar_of({kPregnancyClause, kPediatricClause}, g);
  const LossComponents l = loss(g, params, grammar, config);
  EXPECT_EQ(l.total, l.recon);
}

TEST(Loss, EmptyGrammarCostsOneBit) {
  const ClinicalGraph g = eight_nodes();
  TrainConfig config = quick_config();
  config.weights = {1.0, 0.0, 0.0};
  const EncoderParams params = EncoderParams::init(g.schema(), config.encoder, 3);
  const LossComponents l = loss(g, params, Grammar{}, config);
  EXPECT_EQ(l.grammar_bits, 1.0);
  EXPECT_NEAR(l.total, l.recon + 1.0, 1e-12);
}

TEST(Loss, TotalIsTheWeightedSum) {
  const ClinicalGraph g = eight_nodes();
  TrainConfig config = quick_config();
  config.weights = {0.01, 0.001, 0.1};
  const EncoderParams params = EncoderParams::init(g.schema(), config.encoder, 3);
  const Grammar grammar = grammar_of({kPregnancyClause, kPediatricClause}, g);
  const LossComponents l = loss(g, params, grammar, config);
  const auto& w = config.weights;
  EXPECT_NEAR(l.total, l.recon + w.alpha * l.grammar_bits + w.beta * l.kl + w.gamma * l.soft_violation, 1e-9);
  EXPECT_NEAR(l.grammar_bits, grammar_cost(grammar, g.schema()).bits(), 1e-12);
  EXPECT_GT(l.soft_violation, 0.0);  // the pregnant male
}

TEST(Train, ZeroLearningRateFreezesParameters) {
  TrainConfig config = quick_config(3);
  config.learning_rate = 0.0;
  const TrainResult r = train(small_corpus().graph, config);
  EXPECT_EQ(r.params.flatten(), EncoderParams::init(small_corpus().graph.schema(), config.encoder, config.seed).flatten());
  ASSERT_EQ(r.history.size(), 3u);
  for (const auto& e : r.history) EXPECT_EQ(e.recon, r.history[0].recon);
}

TEST(Train, SameSeedSameHistory) {
  const TrainConfig config = quick_config(3);
  const TrainResult a = train(small_corpus().graph, config);
  const TrainResult b = train(small_corpus().graph, config);
  std::ostringstream ha, hb;
  write_history_csv(ha, a.history);
  write_history_csv(hb, b.history);
  EXPECT_EQ(ha.str(), hb.str());
  EXPECT_EQ(a.params.flatten(), b.params.flatten());
  ASSERT_FALSE(a.grammar.empty());
  ASSERT_EQ(a.grammar.size(), b.grammar.size());
  for (std::size_t i = 0; i < a.grammar.size(); ++i) {
    EXPECT_EQ(to_string(a.grammar.clauses[i]), to_string(b.grammar.clauses[i]));
  }
}

TEST(Train, LossNeverRisesWithinAPhase) {
  const TrainConfig config = quick_config(6);
  const TrainResult r = train(small_corpus().graph, config);
  ASSERT_EQ(r.history.size(), 6u);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_EQ(r.history[i].epoch, i + 1);
    if (!r.history[i - 1].reinduced) {
      EXPECT_LE(r.history[i].differentiable, r.history[i - 1].differentiable + 1e-6) << i;
    }
    EXPECT_TRUE(std::isfinite(r.history[i].total));
  }
  EXPECT_TRUE(r.history[1].reinduced);
  EXPECT_FALSE(r.history.back().reinduced);
  EXPECT_LT(r.history.back().recon, r.history.front().recon);
}

TEST(Train, RefreshNeverRaisesTheTwoPartCode) {
  const TrainConfig config = quick_config(4);
  const ClinicalGraph& g = small_corpus().graph;
  const TrainResult r = train(g, config);
  const Grammar first = induce(g, config.induction_for(g.schema())).grammar;
  EXPECT_LE(total_mdl(g, r.grammar).total_bits, total_mdl(g, first).total_bits + 1e-9);
}

TEST(GradCheck, EightNodeFixture) {
  const ClinicalGraph g = eight_nodes();
  ASSERT_EQ(g.node_count(), 8u);
  const Grammar grammar = grammar_of({kPregnancyClause, kPediatricClause, kMaternityClause}, g);
  for (double gamma : {0.0, 0.5}) {
    TrainConfig config = quick_config();
    config.encoder.layers = 2;
    config.weights = {0.01, 0.1, gamma};
    const EncoderParams params = EncoderParams::init(g.schema(), config.encoder, 11);
    EXPECT_LE(grad_check(g, params, grammar, config), 1e-4) << "gamma " << gamma;
  }
}

TEST(Config, InvalidSettingsAreRejected) {
  TrainConfig c = quick_config();
  c.encoder.hidden = 0;
  EXPECT_THROW(c.validate(), Error);
  c = quick_config();
  c.epochs = 0;
  EXPECT_THROW(c.validate(), Error);
  c = quick_config();
  c.weights.alpha = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = quick_config();
  c.learning_rate = std::nan("");
  EXPECT_THROW(c.validate(), Error);
  const TrainConfig back = TrainConfig::from_json(quick_config().to_json());
  EXPECT_EQ(back.to_json(), quick_config().to_json());
  EXPECT_THROW(TrainConfig::from_json(nlohmann::json{{"epoks", 3}}), Error);
}

TEST(History, CsvHasOneRowPerEpoch) {
  TrainHistory h(3);
  for (std::size_t i = 0; i < h.size(); ++i) h[i].epoch = i + 1;
  std::ostringstream out;
  write_history_csv(out, h);
  std::istringstream in(out.str());
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 4u);
  EXPECT_EQ(out.str().find("wall"), std::string::npos);
}

}  // namespace
}  // namespace clinlogic
