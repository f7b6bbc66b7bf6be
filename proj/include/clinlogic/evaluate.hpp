// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "clinlogic/clause.hpp"
#include "clinlogic/graph.hpp"

namespace clinlogic {

enum class Outcome : std::uint8_t { not_applicable, satisfied, violated };

std::string_view to_string(Outcome outcome) noexcept;

struct Grounding {
  NodeId x{};
  std::optional<NodeId> y;
};

struct SatResult {
  Outcome outcome = Outcome::not_applicable;
  std::optional<Grounding> witness;  // set when violated
};

/// A clause with every symbol resolved against the schema, per kind.
///
/// Atom index i < body.size() addresses body atoms; index body.size() is the
/// head. Focus-attribute atoms (attr_eq/cmp on x) are the ones a relaxation
/// can override.
class BoundClause {
 public:
  BoundClause(Clause clause, const Schema& schema);

  const Clause& clause() const noexcept { return clause_; }
  std::size_t atom_count() const noexcept { return atoms_.size(); }
  const Atom& atom(std::size_t i) const { return i < clause_.body.size() ? clause_.body[i] : clause_.head; }

  // Slot of the atom's attribute in `kind`, or -1 when the kind lacks it.
  int slot(std::size_t atom, KindId kind) const { return atoms_[atom].slot_by_kind[kind]; }
  // True when some node of `kind` could make the body hold.
  bool may_apply_to(KindId kind) const { return may_apply_[kind]; }

  /// Crisp evaluation. `forced` optionally fixes the truth of focus-attribute
  /// atoms (-1 = read the graph, 0 = false, 1 = true).
  SatResult evaluate(const ClinicalGraph& graph, NodeId v, std::span<const signed char> forced = {}) const;

  // Truth of one atom under a grounding, reading the graph.
  bool atom_holds(std::size_t i, const ClinicalGraph& graph, NodeId x, std::optional<NodeId> y) const;

 private:
  struct Resolved {
    std::vector<int> slot_by_kind;
    std::vector<std::int64_t> symbol_by_kind;  // -1 when not in vocabulary
    KindId kind = 0;                           // kind / neighbor_attr
    RelationId relation = 0;
  };

  bool grounding_holds(std::size_t i, const ClinicalGraph& graph, NodeId x, std::optional<NodeId> y,
                       std::span<const signed char> forced) const;

  Clause clause_;
  std::vector<Resolved> atoms_;
  std::vector<bool> may_apply_;
  bool uses_y_ = false;
};

SatResult crisp_sat(const BoundClause& clause, NodeId v, const ClinicalGraph& graph);

/// Independent relaxation of a focus node's attributes: a probability simplex
/// per categorical/boolean slot (boolean order is {false, true}) and a real
/// value per numeric/timestamp slot.
struct Relaxation {
  std::map<std::size_t, std::vector<double>> simplex;
  std::map<std::size_t, double> numeric;
};

// Observed values as point masses; unrecorded attributes are left out.
Relaxation point_mass(const ClinicalGraph& graph, NodeId v);

struct SoftGradient {
  std::map<std::size_t, std::vector<double>> simplex;
  std::map<std::size_t, double> numeric;
};

// Probability that a relaxed comparison holds and its derivative in the value.
// Temperature 0 is the crisp limit.
double soft_compare(CmpOp op, double value, double constant, double temperature);
double soft_compare_derivative(CmpOp op, double value, double constant, double temperature);

/// Expected crisp satisfaction (not_applicable counts as satisfied) when the
/// focus node's attributes are drawn independently from `relaxation`.
/// Each comparison atom on the focus node is an independent event with
/// probability soft_compare(...). Neighbor attributes stay observed.
/// Throws Error(uncovered_attribute) when a touched, recorded attribute has
/// no relaxation entry.
double soft_sat(const BoundClause& clause, NodeId v, const ClinicalGraph& graph, const Relaxation& relaxation,
                double temperature, SoftGradient* gradient = nullptr);

}  // namespace clinlogic
