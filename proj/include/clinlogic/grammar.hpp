// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "clinlogic/clause.hpp"
#include "clinlogic/evaluate.hpp"
#include "clinlogic/graph.hpp"

namespace clinlogic {

struct ClauseStats {
  std::size_t n_applicable = 0;
  std::size_t n_satisfied = 0;

  // Laplace-smoothed satisfaction rate, always strictly inside (0, 1).
  double confidence() const noexcept {
    return (static_cast<double>(n_satisfied) + 1.0) / (static_cast<double>(n_applicable) + 2.0);
  }
  friend bool operator==(const ClauseStats&, const ClauseStats&) = default;
};

struct Grammar {
  std::vector<Clause> clauses;
  std::vector<ClauseStats> stats;  // parallel to clauses

  std::size_t size() const noexcept { return clauses.size(); }
  bool empty() const noexcept { return clauses.empty(); }
  void add(Clause clause, ClauseStats stats = {});
};

std::vector<BoundClause> compile(const Grammar& grammar, const Schema& schema);

// outcomes[c][v] for every clause c and node v.
using OutcomeMatrix = std::vector<std::vector<Outcome>>;
OutcomeMatrix evaluate_all(const ClinicalGraph& graph, const std::vector<BoundClause>& clauses);

ClauseStats count_outcomes(const std::vector<Outcome>& outcomes);
// Recomputes every clause's (n_applicable, n_satisfied) on the graph.
void refresh_stats(Grammar& grammar, const ClinicalGraph& graph);

/// Grammar file: one clause per line. Statistics live in the sidecar
/// `<path>.stats.json`; a missing sidecar yields zero counts.
Grammar load_grammar(const std::string& path, const Schema& schema);
void save_grammar(const Grammar& grammar, const std::string& path);
std::string stats_path(const std::string& grammar_path);

/// H(v) = -sum over clauses of (1 - S), S = soft_sat under the point-mass
/// relaxation. Temperature 0 evaluates comparisons crisply.
double consistency_score(NodeId v, const std::vector<BoundClause>& clauses, const ClinicalGraph& graph,
                         double temperature = 0.0);
// V(v) = -H(v), the violation mass.
inline double violation_mass(NodeId v, const std::vector<BoundClause>& clauses, const ClinicalGraph& graph,
                             double temperature = 0.0) {
  return -consistency_score(v, clauses, graph, temperature);
}

}  // namespace clinlogic
