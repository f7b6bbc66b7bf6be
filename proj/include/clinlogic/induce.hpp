// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstddef>
#include <vector>

#include "clinlogic/grammar.hpp"

namespace clinlogic {

struct InductionConfig {
  std::size_t budget = 32;          // maximum grammar size
  std::size_t min_support = 30;     // applicable nodes
  double min_confidence = 0.9;      // raw n_satisfied / n_applicable
  bool neighbor_atoms = true;       // allow <kind>_attr(x, a, v) body atoms
  bool pair_bodies = true;          // allow two-atom bodies
  // Drop two-atom bodies whose co-occurrence lift is below this value.
  // Zero disables the filter.
  double min_pair_lift = 0.0;
  std::vector<Clause> seeds;        // start from these clauses
};

struct InducedClause {
  Clause clause;
  ClauseStats stats;
  double gain_bits = 0.0;  // 0 for seeds
};

struct InductionResult {
  Grammar grammar;
  std::vector<InducedClause> trace;  // selection order, seeds first
  std::size_t candidates = 0;        // candidates scored in the first round
};

/// Greedy compression-driven clause selection. Each round adds the
/// candidate with the largest positive gain
///
///   gain = base - data - (universal_int(k+1) - universal_int(k)) - clause_cost - param_cost
///
/// where `base` codes the head's truth at the clause's applicable nodes with
/// the head's population base rate and `data` codes it with the clause's own
/// smoothed confidence. Nodes already covered by a selected clause whose
/// head implies the candidate's head are left out of both sums.
/// Ties go to fewer atoms, then to the lexicographically smaller print.
InductionResult induce(const ClinicalGraph& graph, const InductionConfig& config = {});

}  // namespace clinlogic
