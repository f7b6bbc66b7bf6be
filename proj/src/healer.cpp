// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/healer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "clinlogic/error.hpp"

namespace clinlogic {

using nlohmann::json;

std::vector<ViolatedClause> violated_clauses(NodeId v, const Scorer& scorer) {
  const auto& clauses = scorer.clauses();
  const ClinicalGraph& graph = scorer.graph();
  if (!graph.contains(v)) throw Error(ErrorCode::missing_node, "node " + std::to_string(index(v)));
  std::vector<ViolatedClause> out;
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    const SatResult r = clauses[c].evaluate(graph, v);
    if (r.outcome != Outcome::violated) continue;
    out.push_back({c, outcome_bits(Outcome::violated, scorer.grammar().stats[c].confidence()), *r.witness});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ViolatedClause& a, const ViolatedClause& b) { return a.bits > b.bits; });
  return out;
}

std::vector<ViolatedClause> violated_clauses(NodeId v, const Grammar& grammar, const ClinicalGraph& graph) {
  return violated_clauses(v, Scorer(graph, grammar));
}

SoftScore soft_score_gradient(NodeId v, const Grammar& grammar, const ClinicalGraph& graph,
                              const Relaxation& relaxed, double temperature) {
  if (!graph.contains(v)) throw Error(ErrorCode::missing_node, "node " + std::to_string(index(v)));
  if (grammar.stats.size() != grammar.size()) throw Error(ErrorCode::invalid_argument, "grammar statistics missing");
  for (const auto& [slot, pi] : relaxed.simplex) {
    double sum = 0.0;
    for (double p : pi) {
      if (!(p >= 0.0)) throw Error(ErrorCode::invalid_argument, "negative simplex entry");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "simplex does not sum to 1");
  }
  const auto bound = compile(grammar, graph.schema());
  const KindId kind = graph.node(v).kind;
  SoftScore out;
  for (std::size_t c = 0; c < bound.size(); ++c) {
    if (!bound[c].may_apply_to(kind)) continue;
    const double p = grammar.stats[c].confidence();
    const double sat_bits = -std::log2(p);
    const double viol_bits = -std::log2(1.0 - p);
    SoftGradient g;
    const double s = soft_sat(bound[c], v, graph, relaxed, temperature, &g);
    out.value += s * sat_bits + (1.0 - s) * viol_bits;
    const double ds = sat_bits - viol_bits;
    for (const auto& [slot, d] : g.simplex) {
      auto& acc = out.gradient.simplex[slot];
      acc.resize(d.size(), 0.0);
      for (std::size_t j = 0; j < d.size(); ++j) acc[j] += ds * d[j];
    }
    for (const auto& [slot, d] : g.numeric) out.gradient.numeric[slot] += ds * d;
  }
  return out;
}

std::string RepairEdit::target() const {
  switch (kind) {
    case Kind::set_attribute: return "attr:" + std::to_string(slot);
    case Kind::remove_edge:
    case Kind::shift_timestamp: return "edge:" + std::to_string(index(edge));
  }
  return {};
}

double edit_cost(const RepairEdit& edit, const ClinicalGraph& graph, NodeId node) {
  switch (edit.kind) {
    case RepairEdit::Kind::remove_edge: return 2.0;
    case RepairEdit::Kind::shift_timestamp: return 1.5;
    case RepairEdit::Kind::set_attribute: break;
  }
  const AttributeSpec& a = graph.kind_of(node).attributes.at(edit.slot);
  if (a.type == AttrType::numeric && edit.old_value && edit.new_value) {
    return std::fabs(std::get<double>(*edit.new_value) - std::get<double>(*edit.old_value)) / (a.max - a.min);
  }
  return 1.0;
}

std::string describe(const RepairEdit& edit, const ClinicalGraph& graph, NodeId node) {
  std::ostringstream os;
  switch (edit.kind) {
    case RepairEdit::Kind::set_attribute: {
      const KindId kind = graph.node(node).kind;
      os << "set " << graph.kind_of(node).attributes.at(edit.slot).name << ": "
         << graph.describe(kind, edit.slot, edit.old_value) << " -> " << graph.describe(kind, edit.slot, edit.new_value);
      break;
    }
    case RepairEdit::Kind::remove_edge: {
      const Edge& e = graph.edge(edit.edge);
      os << "remove edge " << index(edit.edge) << " (" << graph.schema().relation_name(e.relation) << ' '
         << index(e.src) << " -> " << index(e.dst) << ')';
      break;
    }
    case RepairEdit::Kind::shift_timestamp:
      os << "shift edge " << index(edit.edge) << ": t " << edit.old_t << " -> " << edit.new_t;
      break;
  }
  return os.str();
}

namespace {

void patch(ClinicalGraph& g, NodeId v, const RepairEdit& e, bool forward) {
  switch (e.kind) {
    case RepairEdit::Kind::set_attribute: g.set_attribute(v, e.slot, forward ? e.new_value : e.old_value); break;
    case RepairEdit::Kind::remove_edge:
      if (forward) {
        g.remove_edge(e.edge);
      } else {
        g.restore_edge(e.edge);
      }
      break;
    case RepairEdit::Kind::shift_timestamp: g.set_edge_time(e.edge, forward ? e.new_t : e.old_t); break;
  }
}

// Nearest integer to `from` on the requested side of `op constant`.
std::optional<double> snap(CmpOp op, double constant, bool satisfy, double from) {
  const double lt = std::floor(constant) == constant ? constant - 1.0 : std::floor(constant);
  const double le = std::floor(constant);
  const double gt = std::ceil(constant) == constant ? constant + 1.0 : std::ceil(constant);
  const double ge = std::ceil(constant);
  switch (op) {
    case CmpOp::lt: return satisfy ? lt : ge;
    case CmpOp::le: return satisfy ? le : gt;
    case CmpOp::gt: return satisfy ? gt : le;
    case CmpOp::ge: return satisfy ? ge : lt;
    case CmpOp::eq:
      if (satisfy) return constant;
      return from < constant ? lt : gt;
  }
  return std::nullopt;
}

struct Single {
  RepairEdit edit;
  double cost = 0.0;
  std::string description;
  double guide = 0.0;  // soft-score gradient component; lower first
};

std::vector<Single> single_edits(NodeId v, const std::vector<BoundClause>& bound, const ClinicalGraph& graph,
                                 const SoftGradient& gradient) {
  const Node& node = graph.node(v);
  const KindId kind = node.kind;
  const KindSpec& spec = graph.kind_of(v);
  std::set<std::size_t> categorical;
  std::map<std::size_t, std::vector<const Atom*>> comparisons;
  for (const BoundClause& c : bound) {
    for (std::size_t i = 0; i < c.atom_count(); ++i) {
      const Atom& a = c.atom(i);
      if (!a.is_focus_attribute()) continue;
      const int slot = c.slot(i, kind);
      if (slot < 0) continue;
      const auto s = static_cast<std::size_t>(slot);
      if (a.form == AtomForm::cmp) {
        if (spec.attributes[s].type == AttrType::numeric) comparisons[s].push_back(&a);
      } else {
        categorical.insert(s);
      }
    }
  }

  std::vector<Single> out;
  auto add = [&](RepairEdit e, double guide) {
    Single s{std::move(e), 0.0, {}, guide};
    s.cost = edit_cost(s.edit, graph, v);
    s.description = describe(s.edit, graph, v);
    out.push_back(std::move(s));
  };

  for (std::size_t slot : categorical) {
    const AttributeSpec& a = spec.attributes[slot];
    const auto grad = gradient.simplex.find(slot);
    for (std::uint32_t sym = 0; sym < a.arity(); ++sym) {
      const AttrValue value = a.type == AttrType::boolean ? AttrValue{sym == 1} : AttrValue{Symbol{sym}};
      if (node.attrs[slot] && *node.attrs[slot] == value) continue;
      RepairEdit e;
      e.slot = slot;
      e.old_value = node.attrs[slot];
      e.new_value = value;
      add(std::move(e), grad != gradient.simplex.end() && sym < grad->second.size() ? grad->second[sym] : 0.0);
    }
  }

  for (const auto& [slot, atoms] : comparisons) {
    const AttributeSpec& a = spec.attributes[slot];
    const auto& current = node.attrs[slot];
    const double from = current ? std::get<double>(*current) : (a.min + a.max) / 2.0;
    std::set<double> seen;
    for (const Atom* atom : atoms) {
      const bool holds_now = current && holds(atom->op, from, atom->constant);
      auto target = snap(atom->op, atom->constant, !holds_now, from);
      if (!target) continue;
      const double x = std::clamp(*target, a.min, a.max);
      if (holds(atom->op, x, atom->constant) == holds_now) continue;
      if (current && x == from) continue;
      if (!seen.insert(x).second) continue;
      RepairEdit e;
      e.slot = slot;
      e.old_value = current;
      e.new_value = x;
      add(std::move(e), 0.0);
    }
  }

  for (EdgeId id : graph.incident(v)) {
    RepairEdit e;
    e.kind = RepairEdit::Kind::remove_edge;
    e.edge = id;
    add(std::move(e), 0.0);
  }
  // Incident lists can mention an edge twice only for self loops.
  std::sort(out.begin(), out.end(), [](const Single& a, const Single& b) {
    if (a.guide != b.guide) return a.guide < b.guide;
    return a.description < b.description;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Single& a, const Single& b) { return a.description == b.description; }),
            out.end());
  return out;
}

bool ranks_before(const RepairCandidate& a, const RepairCandidate& b) {
  if (a.predicted_score_after != b.predicted_score_after) return a.predicted_score_after < b.predicted_score_after;
  if (a.edit_cost != b.edit_cost) return a.edit_cost < b.edit_cost;
  return a.description < b.description;
}

std::string target_key(const std::vector<std::size_t>& picks, const std::vector<Single>& singles) {
  std::vector<std::string> targets;
  for (std::size_t i : picks) targets.push_back(singles[i].edit.target());
  std::sort(targets.begin(), targets.end());
  std::string key;
  for (const auto& t : targets) key += t + ';';
  return key;
}

}  // namespace

std::vector<RepairCandidate> repair_candidates(NodeId v, const Grammar& grammar, const ClinicalGraph& graph,
                                               const RepairConfig& config) {
  if (!graph.contains(v)) throw Error(ErrorCode::missing_node, "node " + std::to_string(index(v)));
  if (config.max_edits == 0 || config.top_k == 0 || config.beam == 0) {
    throw Error(ErrorCode::invalid_argument, "max_edits, beam and top_k must be positive");
  }
  ClinicalGraph work = graph;
  const Scorer scorer(work, grammar);
  const CodeLength before = scorer.anomaly_score(v);
  const SoftScore guide = soft_score_gradient(v, grammar, graph, point_mass(graph, v), 0.0);
  const std::vector<Single> singles = single_edits(v, scorer.clauses(), graph, guide.gradient);

  auto evaluate = [&](const std::vector<std::size_t>& picks) {
    RepairCandidate c;
    c.node = v;
    c.score_before = before;
    c.graph_version = graph.version();
    std::vector<std::size_t> ordered = picks;
    std::sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
      return singles[a].edit.target() < singles[b].edit.target();
    });
    for (std::size_t i : ordered) {
      c.edits.push_back(singles[i].edit);
      c.edit_cost += singles[i].cost;
      if (!c.description.empty()) c.description += "; ";
      c.description += singles[i].description;
    }
    for (const auto& e : c.edits) patch(work, v, e, true);
    c.predicted_score_after = scorer.anomaly_score(v);
    for (auto e = c.edits.rbegin(); e != c.edits.rend(); ++e) patch(work, v, *e, false);
    return c;
  };

  std::map<std::string, RepairCandidate> best;  // per target set
  auto offer = [&](const std::vector<std::size_t>& picks, RepairCandidate c) {
    if (!(c.predicted_score_after < before)) return;
    const std::string key = target_key(picks, singles);
    auto it = best.find(key);
    if (it == best.end() || ranks_before(c, it->second)) best[key] = std::move(c);
  };

  std::vector<std::pair<std::vector<std::size_t>, RepairCandidate>> frontier;
  for (std::size_t i = 0; i < singles.size(); ++i) {
    RepairCandidate c = evaluate({i});
    offer({i}, c);
    frontier.push_back({{i}, std::move(c)});
  }
  std::set<std::vector<std::size_t>> visited;
  for (std::size_t depth = 2; depth <= config.max_edits; ++depth) {
    std::stable_sort(frontier.begin(), frontier.end(),
                     [](const auto& a, const auto& b) { return ranks_before(a.second, b.second); });
    if (frontier.size() > config.beam) frontier.resize(config.beam);
    std::vector<std::pair<std::vector<std::size_t>, RepairCandidate>> next;
    for (const auto& [picks, parent] : frontier) {
      std::set<std::string> used;
      for (std::size_t i : picks) used.insert(singles[i].edit.target());
      for (std::size_t i = 0; i < singles.size(); ++i) {
        if (used.count(singles[i].edit.target())) continue;
        std::vector<std::size_t> grown = picks;
        grown.push_back(i);
        std::sort(grown.begin(), grown.end());
        if (!visited.insert(grown).second) continue;
        RepairCandidate c = evaluate(grown);
        offer(grown, c);
        next.push_back({std::move(grown), std::move(c)});
      }
    }
    frontier = std::move(next);
  }

  std::vector<RepairCandidate> out;
  for (auto& [key, c] : best) out.push_back(std::move(c));
  if (out.empty()) {
    throw Error(ErrorCode::no_repair_found, "no edit lowers the score of node " + std::to_string(index(v)));
  }
  std::sort(out.begin(), out.end(), ranks_before);
  if (out.size() > config.top_k) out.resize(config.top_k);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

namespace {

void check_edit(const ClinicalGraph& graph, NodeId v, const RepairEdit& e) {
  auto illegal = [](const std::string& what) { return Error(ErrorCode::illegal_edit, what); };
  switch (e.kind) {
    case RepairEdit::Kind::set_attribute: {
      const KindSpec& spec = graph.kind_of(v);
      if (e.slot >= spec.attributes.size()) throw illegal("attribute slot out of range");
      if (graph.node(v).attrs[e.slot] != e.old_value) throw illegal("attribute no longer holds the old value");
      if (e.new_value) {
        try {
          graph.resolve(graph.node(v).kind, e.slot, graph.render(graph.node(v).kind, e.slot, *e.new_value));
        } catch (const Error& err) {
          throw illegal(err.what());
        } catch (const std::bad_variant_access&) {
          throw illegal("value type does not match the attribute");
        }
      }
      break;
    }
    case RepairEdit::Kind::remove_edge:
    case RepairEdit::Kind::shift_timestamp: {
      if (index(e.edge) >= graph.edge_slots()) throw illegal("no such edge");
      const Edge& edge = graph.edge(e.edge);
      if (!edge.live) throw illegal("edge already removed");
      if (edge.src != v && edge.dst != v) throw illegal("edge not incident to the node");
      if (e.kind == RepairEdit::Kind::shift_timestamp && (e.new_t < 0 || edge.t != e.old_t)) {
        throw illegal("timestamp edit does not fit the edge");
      }
      break;
    }
  }
}

}  // namespace

AppliedRepair apply_repair(ClinicalGraph& graph, const RepairCandidate& candidate, const Grammar& grammar,
                           CodeLength threshold) {
  if (!graph.contains(candidate.node)) throw Error(ErrorCode::missing_node, "repair target missing");
  if (graph.version() != candidate.graph_version) {
    throw Error(ErrorCode::stale_candidate, "graph changed since the repair was proposed (version " +
                                                std::to_string(candidate.graph_version) + ", now " +
                                                std::to_string(graph.version()) + ")");
  }
  std::set<std::string> targets;
  for (const auto& e : candidate.edits) {
    check_edit(graph, candidate.node, e);
    if (!targets.insert(e.target()).second) throw Error(ErrorCode::illegal_edit, "two edits on one target");
  }
  AppliedRepair applied;
  applied.version_before = graph.version();
  applied.edits = candidate.edits;
  for (const auto& e : candidate.edits) patch(graph, candidate.node, e, true);
  applied.version_after = graph.version();
  applied.report = Scorer(graph, grammar).report(candidate.node, threshold);
  return applied;
}

void revert_repair(ClinicalGraph& graph, const AppliedRepair& applied) {
  if (graph.version() != applied.version_after) {
    throw Error(ErrorCode::stale_candidate, "graph changed since the repair was applied");
  }
  for (auto e = applied.edits.rbegin(); e != applied.edits.rend(); ++e) patch(graph, applied.report.node, *e, false);
}

namespace {

json raw_json(const ClinicalGraph& graph, NodeId v, std::size_t slot, const std::optional<AttrValue>& value) {
  if (!value) return nullptr;
  const RawValue raw = graph.render(graph.node(v).kind, slot, *value);
  return std::visit([](const auto& x) { return json(x); }, raw);
}

}  // namespace

json to_json(const RepairCandidate& c, const ClinicalGraph& graph) {
  json edits = json::array();
  for (const auto& e : c.edits) {
    switch (e.kind) {
      case RepairEdit::Kind::set_attribute:
        edits.push_back({{"op", "set_attribute"},
                         {"attribute", graph.kind_of(c.node).attributes.at(e.slot).name},
                         {"old", raw_json(graph, c.node, e.slot, e.old_value)},
                         {"new", raw_json(graph, c.node, e.slot, e.new_value)}});
        break;
      case RepairEdit::Kind::remove_edge:
        edits.push_back({{"op", "remove_edge"}, {"edge", index(e.edge)}});
        break;
      case RepairEdit::Kind::shift_timestamp:
        edits.push_back({{"op", "shift_timestamp"}, {"edge", index(e.edge)}, {"old_t", e.old_t}, {"new_t", e.new_t}});
        break;
    }
  }
  return {{"node", index(c.node)},
          {"rank", c.rank},
          {"edits", std::move(edits)},
          {"description", c.description},
          {"score_before", c.score_before.bits()},
          {"predicted_score_after", c.predicted_score_after.bits()},
          {"edit_cost", c.edit_cost},
          {"graph_version", c.graph_version}};
}

json to_json(const std::vector<RepairCandidate>& candidates, const ClinicalGraph& graph) {
  json out = json::array();
  for (const auto& c : candidates) out.push_back(to_json(c, graph));
  return out;
}

}  // namespace clinlogic
