// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clinlogic/error.hpp"

namespace clinlogic {

ClinicalGraph::ClinicalGraph(std::shared_ptr<const Schema> schema) : schema_(std::move(schema)) {
  if (!schema_) throw Error(ErrorCode::invalid_argument, "graph requires a schema");
}

AttrValue ClinicalGraph::resolve(KindId kind, std::size_t slot, const RawValue& raw) const {
  const AttributeSpec& spec = schema_->kind(kind).attributes.at(slot);
  auto illegal = [&](const std::string& why) {
    return Error(ErrorCode::illegal_attribute, spec.name + ": " + why);
  };
  switch (spec.type) {
    case AttrType::categorical: {
      const auto* text = std::get_if<std::string>(&raw);
      if (!text) throw illegal("expected a vocabulary symbol");
      auto sym = spec.symbol(*text);
      if (!sym) throw illegal("'" + *text + "' is not in the vocabulary");
      return Symbol{*sym};
    }
    case AttrType::boolean: {
      const auto* flag = std::get_if<bool>(&raw);
      if (!flag) throw illegal("expected a boolean");
      return *flag;
    }
    case AttrType::numeric: {
      const auto* x = std::get_if<double>(&raw);
      if (!x) throw illegal("expected a number");
      if (!std::isfinite(*x)) throw illegal("value is not finite");
      if (*x < spec.min || *x > spec.max) throw illegal("value outside the declared range");
      return *x;
    }
    case AttrType::timestamp: {
      const auto* x = std::get_if<double>(&raw);
      if (!x || !std::isfinite(*x) || *x < 0 || std::floor(*x) != *x) {
        throw illegal("expected a non-negative integer timestamp");
      }
      return Instant{static_cast<Timestamp>(*x)};
    }
  }
  throw illegal("unsupported type");
}

RawValue ClinicalGraph::render(KindId kind, std::size_t slot, const AttrValue& value) const {
  const AttributeSpec& spec = schema_->kind(kind).attributes.at(slot);
  return std::visit(
      [&](const auto& v) -> RawValue {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Symbol>) {
          return spec.vocabulary.at(v.index);
        } else if constexpr (std::is_same_v<T, Instant>) {
          return static_cast<double>(v.seconds);
        } else {
          return v;
        }
      },
      value);
}

std::string ClinicalGraph::describe(KindId kind, std::size_t slot,
                                    const std::optional<AttrValue>& value) const {
  if (!value) return "null";
  RawValue raw = render(kind, slot, *value);
  if (const auto* s = std::get_if<std::string>(&raw)) return *s;
  if (const auto* b = std::get_if<bool>(&raw)) return *b ? "true" : "false";
  std::ostringstream os;
  os << std::get<double>(raw);
  return os.str();
}

NodeId ClinicalGraph::add_node(std::string_view kind, const RawAttributes& attrs) {
  auto kid = schema_->kind_id(kind);
  if (!kid) throw Error(ErrorCode::unknown_kind, std::string(kind));
  const KindSpec& spec = schema_->kind(*kid);
  Node node{*kid, std::vector<std::optional<AttrValue>>(spec.attributes.size())};
  for (const auto& [name, raw] : attrs) {
    auto slot = spec.slot(name);
    if (!slot) throw Error(ErrorCode::illegal_attribute, name + ": not declared for kind " + spec.name);
    node.attrs[*slot] = resolve(*kid, *slot, raw);
  }
  nodes_.push_back(std::move(node));
  adjacency_.emplace_back();
  ++version_;
  return static_cast<NodeId>(nodes_.size() - 1);
}

EdgeId ClinicalGraph::add_edge(NodeId src, NodeId dst, std::string_view relation, Timestamp t) {
  if (!contains(src)) throw Error(ErrorCode::missing_node, "edge source " + std::to_string(index(src)));
  if (!contains(dst)) throw Error(ErrorCode::missing_node, "edge target " + std::to_string(index(dst)));
  if (t < 0) throw Error(ErrorCode::schema_violation, "negative timestamp");
  auto rel = schema_->relation_id(relation);
  if (!rel || !schema_->relation_legal(nodes_[index(src)].kind, *rel, nodes_[index(dst)].kind)) {
    throw Error(ErrorCode::illegal_relation,
                std::string(relation) + " from " + kind_of(src).name + " to " + kind_of(dst).name);
  }
  const auto id = static_cast<EdgeId>(edges_.size());
  edges_.push_back(Edge{id, src, dst, *rel, t, true});
  ++live_edges_;
  link(id);
  ++version_;
  return id;
}

void ClinicalGraph::link(EdgeId e) {
  const Edge& edge = edges_[index(e)];
  auto insert = [&](NodeId v) {
    auto& adj = adjacency_[index(v)];
    auto pos = std::upper_bound(adj.begin(), adj.end(), e, [&](EdgeId a, EdgeId b) {
      const Edge& ea = edges_[index(a)];
      const Edge& eb = edges_[index(b)];
      return ea.t != eb.t ? ea.t < eb.t : index(a) < index(b);
    });
    adj.insert(pos, e);
  };
  insert(edge.src);
  if (edge.dst != edge.src) insert(edge.dst);
}

void ClinicalGraph::unlink(EdgeId e) {
  const Edge& edge = edges_[index(e)];
  for (NodeId v : {edge.src, edge.dst}) {
    auto& adj = adjacency_[index(v)];
    adj.erase(std::remove(adj.begin(), adj.end(), e), adj.end());
  }
}

void ClinicalGraph::check_node(NodeId v) const {
  if (!contains(v)) throw Error(ErrorCode::missing_node, "node " + std::to_string(index(v)));
}

const Node& ClinicalGraph::node(NodeId v) const {
  check_node(v);
  return nodes_[index(v)];
}

const Edge& ClinicalGraph::edge(EdgeId e) const {
  if (index(e) >= edges_.size()) throw Error(ErrorCode::missing_edge, "edge " + std::to_string(index(e)));
  return edges_[index(e)];
}

Edge& ClinicalGraph::mutable_edge(EdgeId e) {
  if (index(e) >= edges_.size()) throw Error(ErrorCode::missing_edge, "edge " + std::to_string(index(e)));
  return edges_[index(e)];
}

std::span<const EdgeId> ClinicalGraph::incident(NodeId v) const {
  check_node(v);
  return adjacency_[index(v)];
}

const std::optional<AttrValue>& ClinicalGraph::attribute(NodeId v, std::size_t slot) const {
  return node(v).attrs.at(slot);
}

std::optional<AttrValue> ClinicalGraph::attribute(NodeId v, std::string_view name) const {
  const Node& n = node(v);
  auto slot = schema_->kind(n.kind).slot(name);
  if (!slot) return std::nullopt;
  return n.attrs[*slot];
}

std::vector<NeighborEntry> ClinicalGraph::temporal_neighborhood(NodeId v, Timestamp t_now,
                                                                Duration window) const {
  check_node(v);
  if (window <= 0) throw Error(ErrorCode::invalid_argument, "window must be positive");
  std::vector<NeighborEntry> out;
  out.push_back({v, self_relation(), 0, std::nullopt});
  for (EdgeId e : adjacency_[index(v)]) {
    const Edge& edge = edges_[index(e)];
    if (edge.t > t_now) break;  // adjacency is time-ordered
    const Duration delta = t_now - edge.t;
    if (delta > window) continue;
    out.push_back({other_end(edge, v), edge.relation, delta, e});
  }
  std::stable_sort(out.begin(), out.end(), [](const NeighborEntry& a, const NeighborEntry& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    if (a.neighbor != b.neighbor) return index(a.neighbor) < index(b.neighbor);
    if (a.edge.has_value() != b.edge.has_value()) return !a.edge.has_value();
    return a.edge && index(*a.edge) < index(*b.edge);
  });
  return out;
}

GraphStats ClinicalGraph::stats() const {
  GraphStats s;
  s.node_count = nodes_.size();
  for (const auto& k : schema_->kinds()) s.per_kind[k.name] = 0;
  for (const auto& r : schema_->relation_names()) s.per_relation[r] = 0;
  for (const auto& n : nodes_) ++s.per_kind[schema_->kind(n.kind).name];
  for (const auto& e : edges_) {
    if (!e.live) continue;
    ++s.edge_count;
    ++s.per_relation[schema_->relation_name(e.relation)];
    s.min_t = s.min_t ? std::min(*s.min_t, e.t) : e.t;
    s.max_t = s.max_t ? std::max(*s.max_t, e.t) : e.t;
  }
  return s;
}

void ClinicalGraph::set_attribute(NodeId v, std::size_t slot, std::optional<AttrValue> value) {
  check_node(v);
  auto& attrs = nodes_[index(v)].attrs;
  if (slot >= attrs.size()) throw Error(ErrorCode::illegal_attribute, "slot out of range");
  if (value) {
    // Round-trip through the raw form so the schema checks apply.
    value = resolve(nodes_[index(v)].kind, slot, render(nodes_[index(v)].kind, slot, *value));
  }
  attrs[slot] = std::move(value);
  ++version_;
}

void ClinicalGraph::remove_edge(EdgeId e) {
  Edge& edge = mutable_edge(e);
  if (!edge.live) throw Error(ErrorCode::missing_edge, "edge " + std::to_string(index(e)) + " already removed");
  unlink(e);
  edge.live = false;
  --live_edges_;
  ++version_;
}

void ClinicalGraph::restore_edge(EdgeId e) {
  Edge& edge = mutable_edge(e);
  if (edge.live) throw Error(ErrorCode::illegal_edit, "edge " + std::to_string(index(e)) + " is live");
  edge.live = true;
  ++live_edges_;
  link(e);
  ++version_;
}

void ClinicalGraph::set_edge_time(EdgeId e, Timestamp t) {
  Edge& edge = mutable_edge(e);
  if (t < 0) throw Error(ErrorCode::schema_violation, "negative timestamp");
  if (edge.live) unlink(e);
  edge.t = t;
  if (edge.live) link(e);
  ++version_;
}

}  // namespace clinlogic
