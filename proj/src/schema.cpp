// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "clinlogic/error.hpp"

namespace clinlogic {

std::string_view to_string(AttrType type) noexcept {
  switch (type) {
    case AttrType::categorical: return "categorical";
    case AttrType::numeric: return "numeric";
    case AttrType::timestamp: return "timestamp";
    case AttrType::boolean: return "boolean";
  }
  return "categorical";
}

namespace {

AttrType parse_type(const std::string& text) {
  if (text == "categorical") return AttrType::categorical;
  if (text == "numeric") return AttrType::numeric;
  if (text == "timestamp") return AttrType::timestamp;
  if (text == "boolean") return AttrType::boolean;
  throw Error(ErrorCode::schema_violation, "unknown attribute type '" + text + "'");
}

}  // namespace

std::optional<std::uint32_t> AttributeSpec::symbol(std::string_view value) const {
  if (type == AttrType::boolean) {
    if (value == "false") return 0u;
    if (value == "true") return 1u;
    return std::nullopt;
  }
  auto it = std::find(vocabulary.begin(), vocabulary.end(), value);
  if (it == vocabulary.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - vocabulary.begin());
}

std::size_t AttributeSpec::arity() const {
  return type == AttrType::boolean ? 2 : vocabulary.size();
}

std::optional<std::size_t> KindSpec::slot(std::string_view attribute) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == attribute) return i;
  }
  return std::nullopt;
}

Schema::Schema(std::vector<KindSpec> kinds, std::vector<RelationSpec> relations)
    : kinds_(std::move(kinds)), triples_(std::move(relations)) {
  std::set<std::string> kind_names;
  std::set<std::string> attrs;
  for (const auto& k : kinds_) {
    if (k.name.empty() || !kind_names.insert(k.name).second) {
      throw Error(ErrorCode::schema_violation, "duplicate or empty kind name '" + k.name + "'");
    }
    std::set<std::string> local;
    for (const auto& a : k.attributes) {
      if (a.name.empty() || !local.insert(a.name).second) {
        throw Error(ErrorCode::schema_violation,
                    "duplicate attribute '" + a.name + "' in kind " + k.name);
      }
      if (a.type == AttrType::categorical && a.vocabulary.empty()) {
        throw Error(ErrorCode::schema_violation, "categorical attribute '" + a.name + "' has no vocabulary");
      }
      if (a.type == AttrType::numeric && !(std::isfinite(a.min) && std::isfinite(a.max) && a.min < a.max)) {
        throw Error(ErrorCode::schema_violation, "numeric attribute '" + a.name + "' needs min < max");
      }
      attrs.insert(a.name);
    }
  }
  if (kinds_.size() > 0xFFFF) throw Error(ErrorCode::schema_violation, "too many kinds");
  attribute_names_.assign(attrs.begin(), attrs.end());

  for (const auto& t : triples_) {
    auto src = kind_id(t.src);
    auto dst = kind_id(t.dst);
    if (!src || !dst) {
      throw Error(ErrorCode::schema_violation, "relation " + t.relation + " references an unknown kind");
    }
    auto rel = relation_id(t.relation);
    if (!rel) {
      relation_names_.push_back(t.relation);
      rel = static_cast<RelationId>(relation_names_.size() - 1);
    }
    legal_.push_back({*src, *rel, *dst});
  }
}

std::optional<KindId> Schema::kind_id(std::string_view name) const {
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    if (kinds_[i].name == name) return static_cast<KindId>(i);
  }
  return std::nullopt;
}

std::optional<RelationId> Schema::relation_id(std::string_view name) const {
  for (std::size_t i = 0; i < relation_names_.size(); ++i) {
    if (relation_names_[i] == name) return static_cast<RelationId>(i);
  }
  return std::nullopt;
}

bool Schema::relation_legal(KindId src, RelationId relation, KindId dst) const {
  return std::any_of(legal_.begin(), legal_.end(), [&](const Triple& t) {
    return t.src == src && t.relation == relation && t.dst == dst;
  });
}

std::vector<KindId> Schema::kinds_with_attribute(std::string_view attribute) const {
  std::vector<KindId> out;
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    if (kinds_[i].slot(attribute)) out.push_back(static_cast<KindId>(i));
  }
  return out;
}

const AttributeSpec* Schema::find_attribute(std::string_view attribute) const {
  for (const auto& k : kinds_) {
    if (auto s = k.slot(attribute)) return &k.attributes[*s];
  }
  return nullptr;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& k : kinds_) {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& a : k.attributes) {
      nlohmann::json j{{"name", a.name}, {"type", std::string(to_string(a.type))}};
      if (a.type == AttrType::categorical) j["vocabulary"] = a.vocabulary;
      if (a.type == AttrType::numeric) {
        j["min"] = a.min;
        j["max"] = a.max;
        if (!a.unit.empty()) j["unit"] = a.unit;
        if (!a.landmarks.empty()) j["landmarks"] = a.landmarks;
      }
      attrs.push_back(std::move(j));
    }
    kinds.push_back({{"name", k.name}, {"attributes", std::move(attrs)}});
  }
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& t : triples_) {
    rels.push_back({{"src", t.src}, {"relation", t.relation}, {"dst", t.dst}});
  }
  return {{"kinds", std::move(kinds)}, {"relations", std::move(rels)}};
}

Schema Schema::from_json(const nlohmann::json& doc) {
  try {
    std::vector<KindSpec> kinds;
    for (const auto& jk : doc.at("kinds")) {
      KindSpec k;
      k.name = jk.at("name").get<std::string>();
      for (const auto& ja : jk.value("attributes", nlohmann::json::array())) {
        AttributeSpec a;
        a.name = ja.at("name").get<std::string>();
        a.type = parse_type(ja.at("type").get<std::string>());
        if (a.type == AttrType::categorical) a.vocabulary = ja.at("vocabulary").get<std::vector<std::string>>();
        if (a.type == AttrType::numeric) {
          a.min = ja.at("min").get<double>();
          a.max = ja.at("max").get<double>();
          a.unit = ja.value("unit", std::string{});
          a.landmarks = ja.value("landmarks", std::vector<double>{});
        }
        k.attributes.push_back(std::move(a));
      }
      kinds.push_back(std::move(k));
    }
    std::vector<RelationSpec> rels;
    for (const auto& jr : doc.value("relations", nlohmann::json::array())) {
      rels.push_back({jr.at("src").get<std::string>(), jr.at("relation").get<std::string>(),
                      jr.at("dst").get<std::string>()});
    }
    return Schema(std::move(kinds), std::move(rels));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema_violation, std::string("malformed schema: ") + e.what());
  }
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open schema file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return from_json(doc);
}

void Schema::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write schema file " + path);
  out << to_json().dump(2) << '\n';
}

}  // namespace clinlogic
