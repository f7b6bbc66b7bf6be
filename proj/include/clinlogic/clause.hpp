// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clinlogic/schema.hpp"

namespace clinlogic {

enum class AtomForm {
  kind,           // patient(x)
  attr_eq,        // attr_eq(x, sex, female)
  rel,            // rel(x, y, consultation)
  cmp,            // cmp(x, age, <, 18)
  neighbor_attr,  // diagnosis_attr(x, code, pregnancy): some 1-hop neighbor of
                  // kind `diagnosis` has code = pregnancy
};

enum class CmpOp { lt, le, gt, ge, eq };

enum class Var { x, y };

std::string_view to_string(CmpOp op) noexcept;
bool holds(CmpOp op, double value, double constant) noexcept;

struct Atom {
  AtomForm form = AtomForm::attr_eq;
  Var subject = Var::x;
  Var object = Var::y;        // rel only
  std::string name;           // kind, attribute or relation name
  std::string neighbor_kind;  // neighbor_attr only
  std::string value;          // attr_eq / neighbor_attr symbol
  CmpOp op = CmpOp::lt;
  double constant = 0.0;

  bool mentions(Var v) const noexcept { return subject == v || (form == AtomForm::rel && object == v); }
  // True for atoms whose truth depends only on the focus node's own attributes.
  bool is_focus_attribute() const noexcept {
    return subject == Var::x && (form == AtomForm::attr_eq || form == AtomForm::cmp);
  }

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Clause {
  std::vector<Atom> body;
  Atom head;

  bool uses_y() const noexcept;
  std::size_t length() const noexcept { return body.size() + 1; }
  friend bool operator==(const Clause&, const Clause&) = default;
};

std::string to_string(const Atom& atom);
std::string to_string(const Clause& clause);
// Shortest decimal that round-trips; integers print without a fraction.
std::string format_number(double value);

inline constexpr std::size_t kMaxBodyAtoms = 2;

/// Parses one clause of the DSL
///
///   clause    := atom_list "->" atom
///   atom_list := atom ("," atom)*
///   atom      := ident "(" args ")"
///
/// and checks every symbol against the schema. Throws Error(syntax_error)
/// with the byte offset and the expected tokens, or Error(unknown_symbol).
Clause parse_clause(std::string_view text, const Schema& schema);

// One clause per line; '#' starts a comment; blank lines are skipped.
std::vector<Clause> parse_clauses(std::string_view text, const Schema& schema);

}  // namespace clinlogic
