// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clinlogic/ids.hpp"

namespace clinlogic {

enum class AttrType { categorical, numeric, timestamp, boolean };

std::string_view to_string(AttrType type) noexcept;

struct AttributeSpec {
  std::string name;
  AttrType type = AttrType::categorical;
  std::vector<std::string> vocabulary;  // categorical only
  std::string unit;                     // numeric only
  double min = 0.0;
  double max = 1.0;
  // Thresholds the rule inducer may use in comparison atoms.
  std::vector<double> landmarks;

  std::optional<std::uint32_t> symbol(std::string_view value) const;
  // Number of distinct values an equality atom can test (2 for booleans).
  std::size_t arity() const;
};

struct KindSpec {
  std::string name;
  std::vector<AttributeSpec> attributes;

  std::optional<std::size_t> slot(std::string_view attribute) const;
};

struct RelationSpec {
  std::string src;
  std::string relation;
  std::string dst;
};

/// Declarative description of the record universe: entity kinds with typed
/// attributes and the legal (src kind, relation, dst kind) triples.
///
/// Attribute names may repeat across kinds; each (kind, name) pair carries its
/// own type and vocabulary.
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<KindSpec> kinds, std::vector<RelationSpec> relations);

  const std::vector<KindSpec>& kinds() const noexcept { return kinds_; }
  const std::vector<RelationSpec>& relation_triples() const noexcept { return triples_; }
  // Distinct relation names, in first-declaration order; indexed by RelationId.
  const std::vector<std::string>& relation_names() const noexcept { return relation_names_; }

  std::optional<KindId> kind_id(std::string_view name) const;
  const KindSpec& kind(KindId id) const { return kinds_.at(id); }
  std::optional<RelationId> relation_id(std::string_view name) const;
  const std::string& relation_name(RelationId id) const { return relation_names_.at(id); }
  bool relation_legal(KindId src, RelationId relation, KindId dst) const;

  // Distinct attribute names across all kinds, sorted.
  const std::vector<std::string>& attribute_names() const noexcept { return attribute_names_; }
  // Kinds declaring the named attribute.
  std::vector<KindId> kinds_with_attribute(std::string_view attribute) const;
  // First declaration of the named attribute (any kind).
  const AttributeSpec* find_attribute(std::string_view attribute) const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& doc);
  static Schema load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<KindSpec> kinds_;
  std::vector<RelationSpec> triples_;
  std::vector<std::string> relation_names_;
  std::vector<std::string> attribute_names_;
  struct Triple {
    KindId src;
    RelationId relation;
    KindId dst;
  };
  std::vector<Triple> legal_;
};

}  // namespace clinlogic
