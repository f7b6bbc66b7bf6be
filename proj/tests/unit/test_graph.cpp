// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <tuple>

#include "clinlogic/error.hpp"
#include "clinlogic/records.hpp"
#include "clinlogic/rng.hpp"
#include "fixtures.hpp"

namespace clinlogic {
namespace {

using testing::add_patient;
using testing::clinic_schema;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::invalid_argument;
}

TEST(Graph, FirstNodeGetsIdZero) {
  ClinicalGraph g(clinic_schema());
  EXPECT_EQ(g.add_node("patient", {{"sex", "male"}, {"age", 45.0}}), NodeId{0});
  EXPECT_EQ(g.node_count(), 1u);
  EXPECT_FALSE(g.attribute(NodeId{0}, "ward").has_value());
}

TEST(Graph, RejectsValuesOutsideTheVocabulary) {
  ClinicalGraph g(clinic_schema());
  EXPECT_EQ(code_of([&] { g.add_node("patient", {{"sex", "unicorn"}}); }), ErrorCode::illegal_attribute);
  EXPECT_EQ(code_of([&] { g.add_node("patient", {{"height", 1.8}}); }), ErrorCode::illegal_attribute);
  EXPECT_EQ(code_of([&] { g.add_node("nurse", {}); }), ErrorCode::unknown_kind);
  EXPECT_EQ(g.node_count(), 0u);
}

TEST(Graph, SequentialIdsAndCounts) {
  ClinicalGraph g(clinic_schema());
  for (std::uint32_t i = 0; i < 1000; ++i) {
    ASSERT_EQ(index(g.add_node(i % 2 ? "physician" : "patient", {})), i);
  }
  const GraphStats s = g.stats();
  EXPECT_EQ(s.node_count, 1000u);
  EXPECT_EQ(s.per_kind.at("patient") + s.per_kind.at("physician"), 1000u);
}

TEST(Graph, EdgesAreTypedAndOrderedByTime) {
  ClinicalGraph g(clinic_schema());
  const NodeId p = add_patient(g, "female", 30, "general");
  const NodeId q = add_patient(g, "male", 31, "general");
  const NodeId doc = g.add_node("physician", {});
  EXPECT_EQ(g.add_edge(p, doc, "consultation", 200), EdgeId{0});
  EXPECT_EQ(g.add_edge(p, doc, "consultation", 100), EdgeId{1});
  EXPECT_EQ(code_of([&] { g.add_edge(p, q, "diagnosis", 5); }), ErrorCode::illegal_relation);
  EXPECT_EQ(code_of([&] { g.add_edge(p, NodeId{99}, "consultation", 5); }), ErrorCode::missing_node);

  const auto hood = g.temporal_neighborhood(p, 300, 1000);
  ASSERT_EQ(hood.size(), 3u);
  // Δt ascending: t=200 (Δt 100) before t=100 (Δt 200); self first.
  EXPECT_EQ(hood[0].neighbor, p);
  EXPECT_EQ(*hood[1].edge, EdgeId{0});
  EXPECT_EQ(*hood[2].edge, EdgeId{1});
  const auto inc = g.incident(p);
  ASSERT_EQ(inc.size(), 2u);
  EXPECT_EQ(g.edge(inc[0]).t, 100);
}

TEST(Graph, IsolatedNodeHasOnlyItself) {
  ClinicalGraph g(clinic_schema());
  const NodeId p = add_patient(g, "female", 30, "general");
  const auto hood = g.temporal_neighborhood(p, 100, 10);
  ASSERT_EQ(hood.size(), 1u);
  EXPECT_EQ(hood[0].neighbor, p);
  EXPECT_EQ(hood[0].relation, g.self_relation());
  EXPECT_EQ(hood[0].delta, 0);
  EXPECT_FALSE(hood[0].edge.has_value());
}

TEST(Graph, WindowIsInclusiveAndCutsOlderEdges) {
  ClinicalGraph g(clinic_schema());
  const NodeId p = add_patient(g, "female", 30, "general");
  const NodeId doc = g.add_node("physician", {});
  g.add_edge(p, doc, "consultation", 90);
  g.add_edge(p, doc, "consultation", 95);
  auto hood = g.temporal_neighborhood(p, 100, 8);
  ASSERT_EQ(hood.size(), 2u);
  EXPECT_EQ(hood[1].delta, 5);
  hood = g.temporal_neighborhood(p, 100, 10);
  EXPECT_EQ(hood.size(), 3u);  // t = 90 sits exactly on the boundary
}

// Exhaustive scan over every edge, sorted as the contract states.
std::vector<std::tuple<Duration, std::uint32_t, std::int64_t>> brute_force(const ClinicalGraph& g, NodeId v,
                                                                           Timestamp now, Duration w) {
  std::vector<std::tuple<Duration, std::uint32_t, std::int64_t>> out{{0, index(v), -1}};
  for (std::size_t e = 0; e < g.edge_slots(); ++e) {
    const Edge& edge = g.edge(static_cast<EdgeId>(e));
    if (!edge.live || (edge.src != v && edge.dst != v)) continue;
    if (edge.t > now || edge.t < now - w) continue;
    out.emplace_back(now - edge.t, index(edge.src == v ? edge.dst : edge.src), static_cast<std::int64_t>(e));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Graph, NeighborhoodMatchesBruteForce) {
  ClinicalGraph g(clinic_schema());
  Rng rng(5);
  std::vector<NodeId> patients, doctors;
  for (int i = 0; i < 200; ++i) patients.push_back(add_patient(g, "female", 30, "general"));
  for (int i = 0; i < 30; ++i) doctors.push_back(g.add_node("physician", {}));
  for (int i = 0; i < 10000; ++i) {
    g.add_edge(patients[rng.below(patients.size())], doctors[rng.below(doctors.size())], "consultation",
               static_cast<Timestamp>(rng.below(1000)));
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = static_cast<NodeId>(rng.below(g.node_count()));
    const auto now = static_cast<Timestamp>(rng.below(1200));
    const auto w = static_cast<Duration>(1 + rng.below(600));
    const auto expected = brute_force(g, v, now, w);
    const auto got = g.temporal_neighborhood(v, now, w);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].delta, std::get<0>(expected[i]));
      EXPECT_EQ(index(got[i].neighbor), std::get<1>(expected[i]));
      EXPECT_EQ(got[i].edge ? static_cast<std::int64_t>(index(*got[i].edge)) : -1, std::get<2>(expected[i]));
    }
  }
}

TEST(Graph, MutationsBumpTheVersion) {
  ClinicalGraph g(clinic_schema());
  const NodeId p = add_patient(g, "female", 30, "general");
  const NodeId doc = g.add_node("physician", {});
  const EdgeId e = g.add_edge(p, doc, "consultation", 10);
  auto v0 = g.version();
  g.set_attribute(p, 0, g.resolve(0, 0, std::string("male")));
  EXPECT_GT(g.version(), v0);
  v0 = g.version();
  g.remove_edge(e);
  EXPECT_EQ(g.live_edge_count(), 0u);
  EXPECT_TRUE(g.incident(p).empty());
  g.restore_edge(e);
  EXPECT_EQ(g.incident(p).size(), 1u);
  g.set_edge_time(e, 20);
  EXPECT_EQ(g.edge(e).t, 20);
  EXPECT_EQ(g.version(), v0 + 3);
}

TEST(Graph, CountsSumToTotals) {
  ClinicalGraph g(clinic_schema());
  const NodeId male = testing::pregnancy_clinic(g, 20);
  g.add_edge(male, g.add_node("physician", {}), "consultation", 3);
  const GraphStats s = g.stats();
  std::size_t kinds = 0, rels = 0;
  for (const auto& [k, n] : s.per_kind) kinds += n;
  for (const auto& [r, n] : s.per_relation) rels += n;
  EXPECT_EQ(kinds, s.node_count);
  EXPECT_EQ(rels, s.edge_count);
  EXPECT_EQ(*s.min_t, 3);
  EXPECT_EQ(*s.max_t, 5000);
}

TEST(Ingest, EmptyInputGivesZeroStats) {
  ClinicalGraph g(clinic_schema());
  std::istringstream in("");
  const GraphStats s = ingest(g, in);
  EXPECT_EQ(s.node_count, 0u);
  EXPECT_EQ(s.edge_count, 0u);
  for (const auto& [kind, n] : s.per_kind) EXPECT_EQ(n, 0u) << kind;
  for (const auto& [rel, n] : s.per_relation) EXPECT_EQ(n, 0u) << rel;
  EXPECT_FALSE(s.min_t.has_value());
}

TEST(Ingest, ThreeLineFixture) {
  const std::string text =
      "{\"op\":\"node\",\"kind\":\"patient\",\"attrs\":{\"sex\":\"female\",\"age\":30}}\n"
      "{\"op\":\"node\",\"kind\":\"physician\",\"attrs\":{}}\n"
      "{\"op\":\"edge\",\"src\":0,\"dst\":1,\"rel\":\"consultation\",\"t\":100}\n";
  ClinicalGraph a(clinic_schema()), b(clinic_schema());
  std::istringstream in1(text), in2(text);
  const GraphStats sa = ingest(a, in1);
  EXPECT_EQ(sa.node_count, 2u);
  EXPECT_EQ(sa.edge_count, 1u);
  EXPECT_EQ(ingest(b, in2), sa);
}

TEST(Ingest, ReportsTheFailingLine) {
  ClinicalGraph g(clinic_schema());
  std::istringstream in("{\"op\":\"node\",\"kind\":\"patient\",\"attrs\":{}}\n{oops\n");
  try {
    ingest(g, in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream bad_edge("{\"op\":\"edge\",\"src\":0,\"dst\":0,\"rel\":\"consultation\",\"t\":1}\n");
  ClinicalGraph h(clinic_schema());
  h.add_node("patient", {});
  EXPECT_EQ(code_of([&] { ingest(h, bad_edge); }), ErrorCode::schema_violation);
}

TEST(Ingest, ExportRoundTripIsByteStable) {
  ClinicalGraph g(clinic_schema());
  testing::pregnancy_clinic(g, 30);
  std::ostringstream first;
  export_records(g, first);
  ClinicalGraph h(clinic_schema());
  std::istringstream in(first.str());
  EXPECT_EQ(ingest(h, in), g.stats());
  std::ostringstream second;
  export_records(h, second);
  EXPECT_EQ(first.str(), second.str());
}

}  // namespace
}  // namespace clinlogic
