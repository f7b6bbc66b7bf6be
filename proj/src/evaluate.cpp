// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "clinlogic/error.hpp"

namespace clinlogic {

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::not_applicable: return "not_applicable";
    case Outcome::satisfied: return "satisfied";
    case Outcome::violated: return "violated";
  }
  return "not_applicable";
}

namespace {

std::optional<double> numeric_value(const std::optional<AttrValue>& v) {
  if (!v) return std::nullopt;
  if (const auto* d = std::get_if<double>(&*v)) return *d;
  if (const auto* t = std::get_if<Instant>(&*v)) return static_cast<double>(t->seconds);
  return std::nullopt;
}

std::optional<std::uint32_t> symbol_value(const std::optional<AttrValue>& v) {
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<Symbol>(&*v)) return s->index;
  if (const auto* b = std::get_if<bool>(&*v)) return *b ? 1u : 0u;
  return std::nullopt;
}

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

BoundClause::BoundClause(Clause clause, const Schema& schema) : clause_(std::move(clause)) {
  const std::size_t n_kinds = schema.kinds().size();
  uses_y_ = clause_.uses_y();
  for (std::size_t i = 0; i < clause_.body.size() + 1; ++i) {
    const Atom& a = atom(i);
    Resolved r;
    r.slot_by_kind.assign(n_kinds, -1);
    r.symbol_by_kind.assign(n_kinds, -1);
    switch (a.form) {
      case AtomForm::kind:
        r.kind = schema.kind_id(a.name).value();
        break;
      case AtomForm::rel:
        r.relation = schema.relation_id(a.name).value();
        break;
      case AtomForm::neighbor_attr:
        r.kind = schema.kind_id(a.neighbor_kind).value();
        [[fallthrough]];
      case AtomForm::attr_eq:
      case AtomForm::cmp:
        for (std::size_t k = 0; k < n_kinds; ++k) {
          const KindSpec& spec = schema.kind(static_cast<KindId>(k));
          auto slot = spec.slot(a.name);
          if (!slot) continue;
          const AttributeSpec& attr = spec.attributes[*slot];
          if (a.form == AtomForm::cmp) {
            if (attr.type == AttrType::numeric || attr.type == AttrType::timestamp) {
              r.slot_by_kind[k] = static_cast<int>(*slot);
            }
          } else if (attr.type == AttrType::categorical || attr.type == AttrType::boolean) {
            r.slot_by_kind[k] = static_cast<int>(*slot);
            if (auto sym = attr.symbol(a.value)) r.symbol_by_kind[k] = *sym;
          }
        }
        break;
    }
    atoms_.push_back(std::move(r));
  }

  may_apply_.assign(n_kinds, true);
  for (std::size_t k = 0; k < n_kinds; ++k) {
    for (std::size_t i = 0; i < clause_.body.size(); ++i) {
      const Atom& a = clause_.body[i];
      if (a.subject != Var::x) continue;
      bool possible = true;
      if (a.form == AtomForm::kind) possible = atoms_[i].kind == k;
      if (a.form == AtomForm::attr_eq) possible = atoms_[i].slot_by_kind[k] >= 0 && atoms_[i].symbol_by_kind[k] >= 0;
      if (a.form == AtomForm::cmp) possible = atoms_[i].slot_by_kind[k] >= 0;
      if (!possible) may_apply_[k] = false;
    }
  }
}

bool BoundClause::atom_holds(std::size_t i, const ClinicalGraph& graph, NodeId x, std::optional<NodeId> y) const {
  const Atom& a = atom(i);
  const Resolved& r = atoms_[i];
  const NodeId subject = a.subject == Var::x ? x : y.value();
  const Node& n = graph.node(subject);
  switch (a.form) {
    case AtomForm::kind:
      return n.kind == r.kind;
    case AtomForm::attr_eq: {
      const int slot = r.slot_by_kind[n.kind];
      if (slot < 0 || r.symbol_by_kind[n.kind] < 0) return false;
      auto sym = symbol_value(n.attrs[slot]);
      return sym && *sym == r.symbol_by_kind[n.kind];
    }
    case AtomForm::cmp: {
      const int slot = r.slot_by_kind[n.kind];
      if (slot < 0) return false;
      auto value = numeric_value(n.attrs[slot]);
      return value && holds(a.op, *value, a.constant);
    }
    case AtomForm::rel: {
      const NodeId object = a.object == Var::x ? x : y.value();
      for (EdgeId e : graph.incident(subject)) {
        const Edge& edge = graph.edge(e);
        if (edge.relation == r.relation && graph.other_end(edge, subject) == object) return true;
      }
      return false;
    }
    case AtomForm::neighbor_attr: {
      const int slot = r.slot_by_kind[r.kind];
      const auto want = r.symbol_by_kind[r.kind];
      if (slot < 0 || want < 0) return false;
      for (EdgeId e : graph.incident(subject)) {
        const NodeId u = graph.other_end(graph.edge(e), subject);
        if (u == subject) continue;
        const Node& un = graph.node(u);
        if (un.kind != r.kind) continue;
        auto sym = symbol_value(un.attrs[slot]);
        if (sym && *sym == want) return true;
      }
      return false;
    }
  }
  return false;
}

bool BoundClause::grounding_holds(std::size_t i, const ClinicalGraph& graph, NodeId x, std::optional<NodeId> y,
                                  std::span<const signed char> forced) const {
  if (!forced.empty() && forced[i] >= 0 && atom(i).is_focus_attribute()) return forced[i] != 0;
  return atom_holds(i, graph, x, y);
}

SatResult BoundClause::evaluate(const ClinicalGraph& graph, NodeId v, std::span<const signed char> forced) const {
  const Node& n = graph.node(v);
  // Forcing only reaches atoms the kind declares, so it cannot rescue a body.
  if (!may_apply_[n.kind]) return {Outcome::not_applicable, std::nullopt};
  const std::size_t head = clause_.body.size();

  // Atoms that only involve x are grounding-independent; check them first.
  for (std::size_t i = 0; i < head; ++i) {
    if (!atom(i).mentions(Var::y) && !grounding_holds(i, graph, v, std::nullopt, forced)) {
      return {Outcome::not_applicable, std::nullopt};
    }
  }

  if (!uses_y_) {
    if (grounding_holds(head, graph, v, std::nullopt, forced)) return {Outcome::satisfied, std::nullopt};
    return {Outcome::violated, Grounding{v, std::nullopt}};
  }

  std::vector<NodeId> neighbors;
  for (EdgeId e : graph.incident(v)) {
    const NodeId u = graph.other_end(graph.edge(e), v);
    if (u != v) neighbors.push_back(u);
  }
  std::sort(neighbors.begin(), neighbors.end(), [](NodeId a, NodeId b) { return index(a) < index(b); });
  neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());

  bool applicable = false;
  for (NodeId u : neighbors) {
    bool body = true;
    for (std::size_t i = 0; i < head && body; ++i) {
      if (atom(i).mentions(Var::y)) body = grounding_holds(i, graph, v, u, forced);
    }
    if (!body) continue;
    applicable = true;
    if (!grounding_holds(head, graph, v, u, forced)) return {Outcome::violated, Grounding{v, u}};
  }
  return {applicable ? Outcome::satisfied : Outcome::not_applicable, std::nullopt};
}

SatResult crisp_sat(const BoundClause& clause, NodeId v, const ClinicalGraph& graph) {
  return clause.evaluate(graph, v);
}

Relaxation point_mass(const ClinicalGraph& graph, NodeId v) {
  const Node& n = graph.node(v);
  const KindSpec& kind = graph.schema().kind(n.kind);
  Relaxation r;
  for (std::size_t s = 0; s < kind.attributes.size(); ++s) {
    const auto& value = n.attrs[s];
    if (!value) continue;
    const AttributeSpec& spec = kind.attributes[s];
    if (spec.type == AttrType::categorical || spec.type == AttrType::boolean) {
      std::vector<double> p(spec.arity(), 0.0);
      p[*symbol_value(value)] = 1.0;
      r.simplex[s] = std::move(p);
    } else {
      r.numeric[s] = *numeric_value(value);
    }
  }
  return r;
}

double soft_compare(CmpOp op, double value, double constant, double temperature) {
  if (temperature == 0.0) return holds(op, value, constant) ? 1.0 : 0.0;
  switch (op) {
    case CmpOp::lt:
    case CmpOp::le: return logistic((constant - value) / temperature);
    case CmpOp::gt:
    case CmpOp::ge: return logistic((value - constant) / temperature);
    case CmpOp::eq: {
      const double z = (value - constant) / temperature;
      return std::exp(-z * z);
    }
  }
  return 0.0;
}

double soft_compare_derivative(CmpOp op, double value, double constant, double temperature) {
  if (temperature == 0.0) return 0.0;
  const double p = soft_compare(op, value, constant, temperature);
  switch (op) {
    case CmpOp::lt:
    case CmpOp::le: return -p * (1.0 - p) / temperature;
    case CmpOp::gt:
    case CmpOp::ge: return p * (1.0 - p) / temperature;
    case CmpOp::eq: return -2.0 * p * (value - constant) / (temperature * temperature);
  }
  return 0.0;
}

double soft_sat(const BoundClause& clause, NodeId v, const ClinicalGraph& graph, const Relaxation& relaxation,
                double temperature, SoftGradient* gradient) {
  if (!(temperature >= 0)) throw Error(ErrorCode::invalid_argument, "temperature must be non-negative");
  const Node& n = graph.node(v);
  const KindId kind = n.kind;
  const KindSpec& kspec = graph.schema().kind(kind);
  if (!clause.may_apply_to(kind)) return 1.0;

  // Factors of the joint distribution: one per relaxed categorical slot, one
  // Bernoulli per relaxed comparison atom.
  struct CategoricalFactor {
    std::size_t slot;
    const std::vector<double>* p;
  };
  struct ComparisonFactor {
    std::size_t atom;
    std::size_t slot;
    double p;
  };
  std::vector<CategoricalFactor> cats;
  std::vector<ComparisonFactor> cmps;
  std::vector<int> cat_of_atom(clause.atom_count(), -1);
  std::vector<int> cmp_of_atom(clause.atom_count(), -1);

  auto uncovered = [&](std::size_t slot) {
    return Error(ErrorCode::uncovered_attribute, kspec.attributes[slot].name + " of node " + std::to_string(index(v)));
  };

  for (std::size_t i = 0; i < clause.atom_count(); ++i) {
    const Atom& a = clause.atom(i);
    if (!a.is_focus_attribute()) continue;
    const int slot = clause.slot(i, kind);
    if (slot < 0) continue;
    const auto s = static_cast<std::size_t>(slot);
    if (a.form == AtomForm::attr_eq) {
      auto it = relaxation.simplex.find(s);
      if (it == relaxation.simplex.end()) {
        if (n.attrs[s]) throw uncovered(s);
        continue;
      }
      if (it->second.size() != kspec.attributes[s].arity()) {
        throw Error(ErrorCode::invalid_argument, "simplex size mismatch for " + kspec.attributes[s].name);
      }
      auto found = std::find_if(cats.begin(), cats.end(), [&](const CategoricalFactor& f) { return f.slot == s; });
      if (found == cats.end()) {
        cats.push_back({s, &it->second});
        found = cats.end() - 1;
      }
      cat_of_atom[i] = static_cast<int>(found - cats.begin());
    } else {
      auto it = relaxation.numeric.find(s);
      if (it == relaxation.numeric.end()) {
        if (n.attrs[s]) throw uncovered(s);
        continue;
      }
      cmp_of_atom[i] = static_cast<int>(cmps.size());
      cmps.push_back({i, s, soft_compare(a.op, it->second, a.constant, temperature)});
    }
  }

  if (gradient) {
    for (const auto& f : cats) gradient->simplex.try_emplace(f.slot, f.p->size(), 0.0);
    for (const auto& f : cmps) gradient->numeric.try_emplace(f.slot, 0.0);
  }

  const std::size_t n_factors = cats.size() + cmps.size();
  std::vector<std::size_t> radix(n_factors);
  for (std::size_t f = 0; f < cats.size(); ++f) radix[f] = cats[f].p->size();
  for (std::size_t f = 0; f < cmps.size(); ++f) radix[cats.size() + f] = 2;

  std::vector<std::size_t> digit(n_factors, 0);
  std::vector<double> prob(n_factors);
  std::vector<signed char> forced(clause.atom_count(), -1);
  std::vector<double> cmp_grad(cmps.size(), 0.0);
  double expectation = 0.0;

  while (true) {
    for (std::size_t f = 0; f < cats.size(); ++f) prob[f] = (*cats[f].p)[digit[f]];
    for (std::size_t f = 0; f < cmps.size(); ++f) {
      prob[cats.size() + f] = digit[cats.size() + f] ? cmps[f].p : 1.0 - cmps[f].p;
    }
    for (std::size_t i = 0; i < clause.atom_count(); ++i) {
      if (cat_of_atom[i] >= 0) {
        const auto sym = digit[static_cast<std::size_t>(cat_of_atom[i])];
        const std::int64_t want = [&] {
          // symbol wanted by atom i for this kind
          const Atom& a = clause.atom(i);
          return static_cast<std::int64_t>(kspec.attributes[static_cast<std::size_t>(clause.slot(i, kind))]
                                               .symbol(a.value)
                                               .value_or(UINT32_MAX));
        }();
        forced[i] = static_cast<std::int64_t>(sym) == want ? 1 : 0;
      } else if (cmp_of_atom[i] >= 0) {
        forced[i] = static_cast<signed char>(digit[cats.size() + static_cast<std::size_t>(cmp_of_atom[i])]);
      }
    }
    const double sat = clause.evaluate(graph, v, forced).outcome == Outcome::violated ? 0.0 : 1.0;

    double weight = 1.0;
    for (double p : prob) weight *= p;
    expectation += weight * sat;

    if (gradient && sat != 0.0) {
      for (std::size_t f = 0; f < n_factors; ++f) {
        double others = 1.0;
        for (std::size_t g = 0; g < n_factors; ++g) {
          if (g != f) others *= prob[g];
        }
        if (f < cats.size()) {
          gradient->simplex[cats[f].slot][digit[f]] += others;
        } else {
          const std::size_t c = f - cats.size();
          cmp_grad[c] += digit[f] ? others : -others;
        }
      }
    }

    std::size_t f = 0;
    while (f < n_factors && ++digit[f] == radix[f]) digit[f++] = 0;
    if (f == n_factors) break;
  }

  if (gradient) {
    for (std::size_t c = 0; c < cmps.size(); ++c) {
      const Atom& a = clause.atom(cmps[c].atom);
      const double value = relaxation.numeric.at(cmps[c].slot);
      gradient->numeric[cmps[c].slot] += cmp_grad[c] * soft_compare_derivative(a.op, value, a.constant, temperature);
    }
  }
  return expectation;
}

}  // namespace clinlogic
