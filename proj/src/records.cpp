// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/records.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "clinlogic/error.hpp"

namespace clinlogic {

namespace {

using nlohmann::json;

RawValue raw_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  throw Error(ErrorCode::schema_violation, "unsupported attribute value " + j.dump());
}

json raw_to_json(const RawValue& raw) {
  return std::visit([](const auto& v) { return json(v); }, raw);
}

json timestamp_to_json(double seconds) { return json(static_cast<std::int64_t>(seconds)); }

}  // namespace

GraphStats ingest(ClinicalGraph& graph, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse_error, where + e.what());
    }
    try {
      const auto op = rec.at("op").get<std::string>();
      if (op == "node") {
        RawAttributes attrs;
        if (rec.contains("attrs")) {
          for (const auto& [name, value] : rec.at("attrs").items()) {
            if (value.is_null()) continue;
            attrs.emplace(name, raw_from_json(value));
          }
        }
        graph.add_node(rec.at("kind").get<std::string>(), attrs);
      } else if (op == "edge") {
        const auto src = rec.at("src").get<std::int64_t>();
        const auto dst = rec.at("dst").get<std::int64_t>();
        if (src < 0 || dst < 0) throw Error(ErrorCode::schema_violation, "negative node reference");
        graph.add_edge(static_cast<NodeId>(src), static_cast<NodeId>(dst), rec.at("rel").get<std::string>(),
                       rec.at("t").get<std::int64_t>());
      } else {
        throw Error(ErrorCode::parse_error, "unknown op '" + op + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, where + e.what());
    } catch (const Error& e) {
      const ErrorCode code = e.code() == ErrorCode::parse_error ? ErrorCode::parse_error : ErrorCode::schema_violation;
      throw Error(code, where + e.what());
    }
  }
  return graph.stats();
}

GraphStats ingest(ClinicalGraph& graph, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open records file " + path);
  return ingest(graph, in);
}

void export_records(const ClinicalGraph& graph, std::ostream& out) {
  const Schema& schema = graph.schema();
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto v = static_cast<NodeId>(i);
    const Node& n = graph.node(v);
    const KindSpec& kind = schema.kind(n.kind);
    json attrs = json::object();
    for (std::size_t s = 0; s < n.attrs.size(); ++s) {
      if (!n.attrs[s]) continue;
      RawValue raw = graph.render(n.kind, s, *n.attrs[s]);
      attrs[kind.attributes[s].name] = kind.attributes[s].type == AttrType::timestamp
                                           ? timestamp_to_json(std::get<double>(raw))
                                           : raw_to_json(raw);
    }
    json rec{{"op", "node"}, {"kind", kind.name}, {"attrs", std::move(attrs)}};
    out << rec.dump() << '\n';
  }
  for (std::size_t i = 0; i < graph.edge_slots(); ++i) {
    const Edge& e = graph.edge(static_cast<EdgeId>(i));
    if (!e.live) continue;
    json rec{{"op", "edge"},
             {"src", index(e.src)},
             {"dst", index(e.dst)},
             {"rel", schema.relation_name(e.relation)},
             {"t", e.t}};
    out << rec.dump() << '\n';
  }
}

void export_records(const ClinicalGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write records file " + path);
  export_records(graph, out);
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path);
}

}  // namespace clinlogic
