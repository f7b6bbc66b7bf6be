// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

// Shared test fixtures: a small clinical schema and helpers to build graphs.

#pragma once

#include <cmath>
#include <memory>
#include <string>

#include <json.hpp>

#include "clinlogic/clause.hpp"
#include "clinlogic/grammar.hpp"
#include "clinlogic/graph.hpp"
#include "clinlogic/synth.hpp"

#ifndef CLINLOGIC_SOURCE_DIR
#define CLINLOGIC_SOURCE_DIR "."
#endif

namespace clinlogic::testing {

// Four kinds, six distinct attribute names.
inline std::shared_ptr<const Schema> clinic_schema() {
  static const auto schema = std::make_shared<const Schema>(Schema::from_json(nlohmann::json::parse(R"({
    "kinds": [
      {"name": "patient", "attributes": [
        {"name": "sex", "type": "categorical", "vocabulary": ["female", "male"]},
        {"name": "age", "type": "numeric", "min": 0, "max": 120, "unit": "years", "landmarks": [18, 65]},
        {"name": "ward", "type": "categorical", "vocabulary": ["general", "pediatric", "maternity"]}]},
      {"name": "physician", "attributes": [
        {"name": "specialty", "type": "categorical", "vocabulary": ["general_practice", "obstetrics"]}]},
      {"name": "diagnosis", "attributes": [
        {"name": "code", "type": "categorical", "vocabulary": ["pregnancy", "diabetes", "influenza"]},
        {"name": "chronic", "type": "boolean"}]},
      {"name": "admission", "attributes": [
        {"name": "ward", "type": "categorical", "vocabulary": ["general", "pediatric", "maternity"]}]}
    ],
    "relations": [
      {"src": "patient", "relation": "consultation", "dst": "physician"},
      {"src": "patient", "relation": "diagnosis", "dst": "diagnosis"},
      {"src": "patient", "relation": "admission", "dst": "admission"}
    ]
  })")));
  return schema;
}

inline constexpr const char* kPregnancyClause = "diagnosis_attr(x, code, pregnancy) -> attr_eq(x, sex, female)";
inline constexpr const char* kPediatricClause = "attr_eq(x, ward, pediatric) -> cmp(x, age, <, 18)";
inline constexpr const char* kMaternityClause = "attr_eq(x, ward, maternity) -> attr_eq(x, sex, female)";

inline NodeId add_patient(ClinicalGraph& g, const std::string& sex, double age, const std::string& ward) {
  return g.add_node("patient", {{"sex", sex}, {"age", age}, {"ward", ward}});
}

inline NodeId add_diagnosis(ClinicalGraph& g, NodeId patient, const std::string& code, Timestamp t = 1000) {
  const NodeId d = g.add_node("diagnosis", {{"code", code}, {"chronic", false}});
  g.add_edge(patient, d, "diagnosis", t);
  return d;
}

inline Grammar grammar_of(std::initializer_list<const char*> clauses, const ClinicalGraph& g) {
  Grammar grammar;
  for (const char* c : clauses) grammar.add(parse_clause(c, g.schema()));
  refresh_stats(grammar, g);
  return grammar;
}

/// `n_female` pregnant female patients (general ward, age 30) plus one male
/// patient with a pregnancy diagnosis. Returns the male patient's id.
inline NodeId pregnancy_clinic(ClinicalGraph& g, std::size_t n_female = 100) {
  for (std::size_t i = 0; i < n_female; ++i) {
    const NodeId p = add_patient(g, "female", 30, "general");
    add_diagnosis(g, p, "pregnancy", 1000 + static_cast<Timestamp>(i));
  }
  const NodeId male = add_patient(g, "male", 40, "general");
  add_diagnosis(g, male, "pregnancy", 5000);
  return male;
}

inline CorpusConfig standard_config() {
  return CorpusConfig::load(std::string(CLINLOGIC_SOURCE_DIR) + "/configs/standard_corpus.json");
}

// A smaller corpus with the standard schema and planted grammar.
inline CorpusConfig small_config(double violation_rate = 0.02, std::size_t events = 1000) {
  CorpusConfig c = standard_config();
  c.n_patients = events * 3 / 10;
  c.n_physicians = 12;
  c.n_events = events;
  c.violation_rate = violation_rate;
  return c;
}

inline double log2d(double x) { return std::log2(x); }

}  // namespace clinlogic::testing
