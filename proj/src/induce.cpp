// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/induce.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "clinlogic/mdl.hpp"

namespace clinlogic {

namespace {

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : words_((n + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  Bits operator&(const Bits& o) const {
    Bits r = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
    return r;
  }
  Bits& operator|=(const Bits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  // |this & a & ~b|
  std::size_t count_and_not(const Bits& a, const Bits& b) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      c += static_cast<std::size_t>(std::popcount(words_[i] & a.words_[i] & ~b.words_[i]));
    }
    return c;
  }
  std::size_t count_not(const Bits& b) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) c += static_cast<std::size_t>(std::popcount(words_[i] & ~b.words_[i]));
    return c;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct CatalogAtom {
  Atom atom;
  std::string text;
  std::string key;  // attribute identity; two body atoms may not share it
  Bits truth;
  Bits population;  // nodes whose kind declares the attribute (focus atoms)
  std::size_t support = 0;
};

struct Candidate {
  std::vector<std::size_t> body;  // catalog indices, sorted by text
  std::size_t head = 0;
  Bits applicable;
  std::size_t n_applicable = 0;
  std::size_t n_satisfied = 0;
  double fixed_cost = 0.0;  // clause cost + parameter cost
  std::string text;
  double gain = 0.0;  // excluding the grammar-size term
  bool taken = false;
};

double bernoulli_bits(std::size_t positives, std::size_t negatives, double p) {
  return (positives ? static_cast<double>(positives) * -std::log2(p) : 0.0) +
         (negatives ? static_cast<double>(negatives) * -std::log2(1.0 - p) : 0.0);
}

bool is_upper(CmpOp op) { return op == CmpOp::lt || op == CmpOp::le; }

// True when every node satisfying `a` also satisfies `b`.
bool implies(const Atom& a, const Atom& b) {
  if (a == b) return true;
  if (a.form != AtomForm::cmp || b.form != AtomForm::cmp || a.name != b.name || a.subject != b.subject) return false;
  if (a.op == CmpOp::eq) return holds(b.op, a.constant, b.constant);
  if (b.op == CmpOp::eq) return false;
  if (is_upper(a.op) != is_upper(b.op)) return false;
  if (a.constant == b.constant) return a.op == b.op || a.op == CmpOp::lt || a.op == CmpOp::gt;
  return is_upper(a.op) ? a.constant < b.constant : a.constant > b.constant;
}

Bits truth_of(const ClinicalGraph& graph, const Atom& atom) {
  const BoundClause probe(Clause{{atom}, atom}, graph.schema());
  Bits bits(graph.node_count());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    if (probe.atom_holds(0, graph, static_cast<NodeId>(v), std::nullopt)) bits.set(v);
  }
  return bits;
}

std::vector<CatalogAtom> build_catalog(const ClinicalGraph& graph, const InductionConfig& config) {
  const Schema& schema = graph.schema();
  std::map<std::string, Atom> atoms;  // ordered by print for determinism
  std::map<std::string, std::string> keys;

  auto add = [&](Atom a, std::string key) {
    std::string text = to_string(a);
    keys.emplace(text, std::move(key));
    atoms.emplace(std::move(text), std::move(a));
  };

  auto categorical_atoms = [&](const AttributeSpec& attr, auto&& make) {
    if (attr.type == AttrType::boolean) {
      make(std::string("false"));
      make(std::string("true"));
    } else if (attr.type == AttrType::categorical) {
      for (const auto& v : attr.vocabulary) make(v);
    }
  };

  for (const KindSpec& kind : schema.kinds()) {
    for (const AttributeSpec& attr : kind.attributes) {
      categorical_atoms(attr, [&](const std::string& value) {
        Atom a;
        a.form = AtomForm::attr_eq;
        a.name = attr.name;
        a.value = value;
        add(a, "x." + attr.name);
      });
      if (attr.type == AttrType::numeric) {
        for (double c : attr.landmarks) {
          for (CmpOp op : {CmpOp::lt, CmpOp::ge}) {
            Atom a;
            a.form = AtomForm::cmp;
            a.name = attr.name;
            a.op = op;
            a.constant = c;
            add(a, "x." + attr.name);
          }
        }
      }
    }
  }

  if (config.neighbor_atoms) {
    std::set<std::string> neighbor_kinds;
    for (const auto& t : schema.relation_triples()) {
      neighbor_kinds.insert(t.src);
      neighbor_kinds.insert(t.dst);
    }
    for (const std::string& nk : neighbor_kinds) {
      const KindSpec& kind = schema.kind(*schema.kind_id(nk));
      for (const AttributeSpec& attr : kind.attributes) {
        categorical_atoms(attr, [&](const std::string& value) {
          Atom a;
          a.form = AtomForm::neighbor_attr;
          a.neighbor_kind = nk;
          a.name = attr.name;
          a.value = value;
          add(a, nk + "." + attr.name);
        });
      }
    }
  }

  std::vector<CatalogAtom> out;
  for (auto& [text, atom] : atoms) {
    CatalogAtom c;
    c.truth = truth_of(graph, atom);
    c.support = c.truth.count();
    if (c.support == 0) continue;
    c.population = Bits(graph.node_count());
    if (atom.is_focus_attribute()) {
      const auto owners = schema.kinds_with_attribute(atom.name);
      for (std::size_t v = 0; v < graph.node_count(); ++v) {
        const KindId k = graph.node(static_cast<NodeId>(v)).kind;
        if (std::find(owners.begin(), owners.end(), k) != owners.end()) c.population.set(v);
      }
    }
    c.atom = atom;
    c.text = text;
    c.key = keys.at(text);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

InductionResult induce(const ClinicalGraph& graph, const InductionConfig& config) {
  InductionResult result;
  const Schema& schema = graph.schema();
  const auto catalog = build_catalog(graph, config);
  const double node_count = static_cast<double>(graph.node_count());

  std::vector<std::size_t> heads;
  std::vector<double> head_rate(catalog.size(), 0.5);
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!catalog[i].atom.is_focus_attribute()) continue;
    heads.push_back(i);
    const ClauseStats base{catalog[i].population.count(), (catalog[i].truth & catalog[i].population).count()};
    head_rate[i] = base.confidence();
  }

  // Bodies: single atoms and pairs with enough joint support.
  std::vector<std::pair<std::vector<std::size_t>, Bits>> bodies;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (catalog[i].support >= config.min_support) bodies.push_back({{i}, catalog[i].truth});
  }
  if (config.pair_bodies) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (catalog[i].support < config.min_support) continue;
      for (std::size_t j = i + 1; j < catalog.size(); ++j) {
        if (catalog[j].support < config.min_support || catalog[i].key == catalog[j].key) continue;
        Bits joint = catalog[i].truth & catalog[j].truth;
        const std::size_t support = joint.count();
        if (support < config.min_support) continue;
        if (config.min_pair_lift > 0) {
          const double lift = static_cast<double>(support) * node_count /
                              (static_cast<double>(catalog[i].support) * static_cast<double>(catalog[j].support));
          if (lift < config.min_pair_lift) continue;
        }
        bodies.push_back({{i, j}, std::move(joint)});
      }
    }
  }

  std::vector<Candidate> candidates;
  for (auto& [body, applicable] : bodies) {
    const std::size_t a = applicable.count();
    for (std::size_t h : heads) {
      const CatalogAtom& head = catalog[h];
      bool clash = false;
      for (std::size_t b : body) clash = clash || catalog[b].key == head.key;
      if (clash) continue;
      if (applicable.count_not(head.population) != 0) continue;
      const std::size_t s = (applicable & head.truth).count();
      if (static_cast<double>(s) < config.min_confidence * static_cast<double>(a)) continue;
      Candidate c;
      c.body = body;
      c.head = h;
      c.applicable = applicable;
      c.n_applicable = a;
      c.n_satisfied = s;
      Clause clause;
      for (std::size_t b : body) clause.body.push_back(catalog[b].atom);
      clause.head = head.atom;
      c.text = to_string(clause);
      c.fixed_cost = clause_cost(clause, schema).bits() + parameter_cost({a, s}).bits();
      candidates.push_back(std::move(c));
    }
  }
  result.candidates = candidates.size();

  // Coverage per head: nodes whose head truth is already implied by a
  // selected clause.
  std::vector<Bits> covered(catalog.size(), Bits(graph.node_count()));
  std::set<std::string> in_grammar;
  auto cover = [&](const Atom& head, const Bits& applicable) {
    for (std::size_t h : heads) {
      if (implies(head, catalog[h].atom)) covered[h] |= applicable;
    }
  };

  for (const Clause& seed : config.seeds) {
    result.trace.push_back({seed, {}, 0.0});
    in_grammar.insert(to_string(seed));
    if (!seed.head.is_focus_attribute()) continue;
    const BoundClause bound(seed, schema);
    Bits applicable(graph.node_count());
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
      if (bound.evaluate(graph, static_cast<NodeId>(v)).outcome != Outcome::not_applicable) applicable.set(v);
    }
    cover(seed.head, applicable);
  }

  auto rescore = [&](Candidate& c) {
    const CatalogAtom& head = catalog[c.head];
    const std::size_t a = c.applicable.count_not(covered[c.head]);
    const std::size_t s = c.applicable.count_and_not(head.truth, covered[c.head]);
    const double p = ClauseStats{c.n_applicable, c.n_satisfied}.confidence();
    c.gain = bernoulli_bits(s, a - s, head_rate[c.head]) - bernoulli_bits(s, a - s, p) - c.fixed_cost;
  };
  for (auto& c : candidates) {
    c.taken = in_grammar.count(c.text) > 0;
    if (!c.taken) rescore(c);
  }

  std::size_t k = config.seeds.size();
  while (k < config.budget) {
    const double size_bits = universal_int(k + 1).bits() - universal_int(k).bits();
    Candidate* best = nullptr;
    for (auto& c : candidates) {
      if (c.taken || c.gain - size_bits <= 0) continue;
      if (!best || c.gain > best->gain ||
          (c.gain == best->gain &&
           (c.body.size() < best->body.size() || (c.body.size() == best->body.size() && c.text < best->text)))) {
        best = &c;
      }
    }
    if (!best) break;
    best->taken = true;
    Clause clause;
    for (std::size_t b : best->body) clause.body.push_back(catalog[b].atom);
    clause.head = catalog[best->head].atom;
    result.trace.push_back({clause, {best->n_applicable, best->n_satisfied}, best->gain - size_bits});
    cover(clause.head, best->applicable);
    for (auto& c : candidates) {
      if (!c.taken && implies(clause.head, catalog[c.head].atom)) rescore(c);
    }
    ++k;
  }

  for (const auto& t : result.trace) result.grammar.add(t.clause);
  refresh_stats(result.grammar, graph);
  for (std::size_t i = 0; i < result.trace.size(); ++i) result.trace[i].stats = result.grammar.stats[i];
  return result;
}

}  // namespace clinlogic
