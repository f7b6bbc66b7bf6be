// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinlogic/grammar.hpp"

namespace clinlogic {

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
};

/// Generating distribution of one attribute. Exactly one of weights
/// (categorical), p (boolean) or normal (numeric) is meaningful, matching
/// the attribute's schema type. A numeric attribute may switch parameters on
/// the value of an earlier categorical attribute of the same node.
struct AttributeDistribution {
  std::string attribute;
  std::vector<std::pair<std::string, double>> weights;
  double p = 0.5;
  Normal normal;
  std::string given;
  std::map<std::string, Normal> by;
  int decimals = 0;

  const Normal& params(const std::string& given_value) const;
};

struct CorpusConfig {
  std::uint64_t seed = 42;
  std::size_t n_patients = 1500;
  std::size_t n_physicians = 60;
  std::size_t n_events = 5000;
  double violation_rate = 0.02;
  double extreme_rate = 0.02;
  std::string patient_kind = "patient";
  std::string provider_kind = "physician";
  std::vector<std::pair<std::string, double>> event_mix;  // event kind -> share
  Timestamp t0 = 1600000000;
  std::int64_t span_days = 365;
  std::vector<std::string> planted_grammar;
  Schema schema;
  std::map<std::string, std::vector<AttributeDistribution>> distributions;  // by kind

  static CorpusConfig from_json(const nlohmann::json& doc);
  static CorpusConfig load(const std::string& path);
  nlohmann::json to_json() const;
  // Throws InfeasibleConfig / InvalidArgument on inconsistent settings.
  void validate() const;
};

struct ViolationLabel {
  std::size_t clause = 0;
  std::string field;
  std::optional<RawValue> original;
};

struct GroundTruth {
  std::map<NodeId, ViolationLabel> violations;
  std::set<NodeId> extremes;

  bool is_violation(NodeId v) const { return violations.count(v) > 0; }
  bool is_extreme(NodeId v) const { return extremes.count(v) > 0; }
};

struct Corpus {
  ClinicalGraph graph;
  GroundTruth truth;
  Grammar planted;  // statistics refreshed on the generated graph
};

/// Draws a corpus whose clean records satisfy every planted clause, then
/// corrupts floor(violation_rate * n_events) nodes with one attribute flip
/// each (clauses taken round-robin) and pushes floor(extreme_rate * n_events)
/// numeric values into the upper tail (z in [2.576, 3.5]) without breaking
/// any planted clause. Throws InfeasibleConfig when the planted grammar
/// cannot be honored.
Corpus generate(const CorpusConfig& config);

// Writes schema.json, records.jsonl, labels.jsonl and planted.txt into dir.
void export_corpus(const Corpus& corpus, const std::string& dir);
void write_labels(const GroundTruth& truth, const std::string& path);
GroundTruth load_labels(const std::string& path);

}  // namespace clinlogic
