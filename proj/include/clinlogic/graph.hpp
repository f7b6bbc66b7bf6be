// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clinlogic/ids.hpp"
#include "clinlogic/schema.hpp"

namespace clinlogic {

struct Symbol {
  std::uint32_t index = 0;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

struct Instant {
  Timestamp seconds = 0;
  friend auto operator<=>(const Instant&, const Instant&) = default;
};

// Stored attribute value; categorical symbols are vocabulary indices.
using AttrValue = std::variant<Symbol, double, Instant, bool>;

// Caller-facing attribute value, resolved against the schema on insertion.
using RawValue = std::variant<std::string, double, bool>;
using RawAttributes = std::map<std::string, RawValue, std::less<>>;

struct Node {
  KindId kind = 0;
  // Aligned with the kind's attribute list; nullopt means not recorded.
  std::vector<std::optional<AttrValue>> attrs;
};

struct Edge {
  EdgeId id{};
  NodeId src{};
  NodeId dst{};
  RelationId relation = 0;
  Timestamp t = 0;
  bool live = true;
};

struct NeighborEntry {
  NodeId neighbor{};
  RelationId relation = 0;  // ClinicalGraph::self_relation() for the self entry
  Duration delta = 0;
  std::optional<EdgeId> edge;  // empty for the self entry
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::map<std::string, std::size_t> per_kind;
  std::map<std::string, std::size_t> per_relation;
  std::optional<Timestamp> min_t;
  std::optional<Timestamp> max_t;

  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

/// Typed temporal heterogeneous multigraph.
///
/// Nodes and edges get dense, strictly increasing ids. Each node keeps its
/// incident edges ordered by (timestamp, edge id). Every mutation bumps
/// version(); readers holding a version can detect concurrent writes.
/// The class itself is not synchronized: callers provide the
/// many-readers/one-writer discipline.
class ClinicalGraph {
 public:
  explicit ClinicalGraph(std::shared_ptr<const Schema> schema);

  const Schema& schema() const noexcept { return *schema_; }
  std::shared_ptr<const Schema> schema_ptr() const noexcept { return schema_; }

  NodeId add_node(std::string_view kind, const RawAttributes& attrs);
  EdgeId add_edge(NodeId src, NodeId dst, std::string_view relation, Timestamp t);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  // Includes removed edges; ids are never reused.
  std::size_t edge_slots() const noexcept { return edges_.size(); }
  std::size_t live_edge_count() const noexcept { return live_edges_; }
  bool contains(NodeId v) const noexcept { return index(v) < nodes_.size(); }

  const Node& node(NodeId v) const;
  const Edge& edge(EdgeId e) const;
  const KindSpec& kind_of(NodeId v) const { return schema_->kind(node(v).kind); }
  // Live incident edges of v ordered by (t, edge id).
  std::span<const EdgeId> incident(NodeId v) const;
  NodeId other_end(const Edge& e, NodeId v) const noexcept { return e.src == v ? e.dst : e.src; }

  const std::optional<AttrValue>& attribute(NodeId v, std::size_t slot) const;
  std::optional<AttrValue> attribute(NodeId v, std::string_view name) const;

  /// Edges incident to v with t_now - window <= t <= t_now, plus v itself
  /// with delta 0. Sorted by (delta, neighbor id, edge id); the self entry
  /// sorts before any edge with the same (delta, neighbor).
  std::vector<NeighborEntry> temporal_neighborhood(NodeId v, Timestamp t_now,
                                                   Duration window) const;

  GraphStats stats() const;
  std::uint64_t version() const noexcept { return version_; }
  RelationId self_relation() const noexcept {
    return static_cast<RelationId>(schema_->relation_names().size());
  }

  // Mutations used by the repair workflow.
  void set_attribute(NodeId v, std::size_t slot, std::optional<AttrValue> value);
  void remove_edge(EdgeId e);
  void restore_edge(EdgeId e);
  void set_edge_time(EdgeId e, Timestamp t);

  // Validates a value against the schema for (kind, slot) and resolves it.
  AttrValue resolve(KindId kind, std::size_t slot, const RawValue& raw) const;
  RawValue render(KindId kind, std::size_t slot, const AttrValue& value) const;
  std::string describe(KindId kind, std::size_t slot, const std::optional<AttrValue>& value) const;

 private:
  void link(EdgeId e);
  void unlink(EdgeId e);
  void check_node(NodeId v) const;
  Edge& mutable_edge(EdgeId e);

  std::shared_ptr<const Schema> schema_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> adjacency_;
  std::size_t live_edges_ = 0;
  std::uint64_t version_ = 0;
};

}  // namespace clinlogic
