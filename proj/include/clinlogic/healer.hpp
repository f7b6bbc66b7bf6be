// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinlogic/mdl.hpp"

namespace clinlogic {

struct ViolatedClause {
  std::size_t clause = 0;
  double bits = 0.0;
  Grounding witness;
};

// Clauses crisply violated at v, largest contribution first, ties by index.
std::vector<ViolatedClause> violated_clauses(NodeId v, const Scorer& scorer);
std::vector<ViolatedClause> violated_clauses(NodeId v, const Grammar& grammar, const ClinicalGraph& graph);

struct SoftScore {
  double value = 0.0;  // bits
  SoftGradient gradient;
};

/// Relaxed anomaly score sum_C [-s_C log2 p_C - (1 - s_C) log2(1 - p_C)],
/// s_C = soft_sat of clause C at v, over the clauses that may apply to v's
/// kind, with its gradient in the relaxed coordinates. Simplexes must be
/// non-negative and sum to 1 within 1e-9.
SoftScore soft_score_gradient(NodeId v, const Grammar& grammar, const ClinicalGraph& graph,
                              const Relaxation& relaxed, double temperature);

struct RepairEdit {
  enum class Kind { set_attribute, remove_edge, shift_timestamp };
  Kind kind = Kind::set_attribute;
  std::size_t slot = 0;
  std::optional<AttrValue> old_value;
  std::optional<AttrValue> new_value;
  EdgeId edge{};
  Timestamp old_t = 0;
  Timestamp new_t = 0;

  // Distinct per attribute slot or edge; used to keep one repair per target.
  std::string target() const;
};

struct RepairCandidate {
  NodeId node{};
  std::vector<RepairEdit> edits;
  CodeLength score_before;
  CodeLength predicted_score_after;
  double edit_cost = 0.0;
  std::size_t rank = 0;           // 1-based
  std::uint64_t graph_version = 0;  // version the repair was proposed against
  std::string description;
};

struct RepairConfig {
  std::size_t max_edits = 1;
  std::size_t beam = 8;
  std::size_t top_k = 3;
};

// Edit costs: categorical flip 1, numeric |delta| / range, edge removal 2,
// timestamp shift 1.5.
double edit_cost(const RepairEdit& edit, const ClinicalGraph& graph, NodeId node);
std::string describe(const RepairEdit& edit, const ClinicalGraph& graph, NodeId node);

/// Candidate edits: every other value of each categorical or boolean
/// attribute a clause can read at v, integer boundary snaps of numeric
/// attributes against each comparison constant (the nearest integer that
/// flips the comparison, clamped to the schema range), and removal of each
/// live incident edge. Every candidate is scored on a patched copy of the
/// graph at the grammar's frozen statistics; only strict improvements are
/// kept. The best repair per edit target is ranked by (score after, edit
/// cost, description) and the first top_k are returned. With max_edits > 1 a
/// beam search combines edits on distinct targets.
/// Throws NoRepairFound when no edit lowers the score.
std::vector<RepairCandidate> repair_candidates(NodeId v, const Grammar& grammar, const ClinicalGraph& graph,
                                               const RepairConfig& config = {});

struct AppliedRepair {
  AnomalyReport report;
  std::uint64_t version_before = 0;
  std::uint64_t version_after = 0;
  std::vector<RepairEdit> edits;
};

/// Applies every edit or none. Throws StaleCandidate when the graph version
/// differs from the one the candidate was proposed against and IllegalEdit
/// when an edit does not fit the schema or the current graph.
AppliedRepair apply_repair(ClinicalGraph& graph, const RepairCandidate& candidate, const Grammar& grammar,
                           CodeLength threshold);
// Undoes an applied repair; the graph must not have changed since.
void revert_repair(ClinicalGraph& graph, const AppliedRepair& applied);

nlohmann::json to_json(const RepairCandidate& candidate, const ClinicalGraph& graph);
nlohmann::json to_json(const std::vector<RepairCandidate>& candidates, const ClinicalGraph& graph);

}  // namespace clinlogic
