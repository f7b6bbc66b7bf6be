// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/grammar.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clinlogic/error.hpp"

namespace clinlogic {

void Grammar::add(Clause clause, ClauseStats s) {
  clauses.push_back(std::move(clause));
  stats.push_back(s);
}

std::vector<BoundClause> compile(const Grammar& grammar, const Schema& schema) {
  std::vector<BoundClause> out;
  out.reserve(grammar.size());
  for (const Clause& c : grammar.clauses) out.emplace_back(c, schema);
  return out;
}

OutcomeMatrix evaluate_all(const ClinicalGraph& graph, const std::vector<BoundClause>& clauses) {
  OutcomeMatrix m(clauses.size(), std::vector<Outcome>(graph.node_count(), Outcome::not_applicable));
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
      m[c][v] = clauses[c].evaluate(graph, static_cast<NodeId>(v)).outcome;
    }
  }
  return m;
}

ClauseStats count_outcomes(const std::vector<Outcome>& outcomes) {
  ClauseStats s;
  for (Outcome o : outcomes) {
    if (o == Outcome::not_applicable) continue;
    ++s.n_applicable;
    if (o == Outcome::satisfied) ++s.n_satisfied;
  }
  return s;
}

void refresh_stats(Grammar& grammar, const ClinicalGraph& graph) {
  const auto bound = compile(grammar, graph.schema());
  const auto m = evaluate_all(graph, bound);
  grammar.stats.resize(grammar.size());
  for (std::size_t c = 0; c < grammar.size(); ++c) grammar.stats[c] = count_outcomes(m[c]);
}

std::string stats_path(const std::string& grammar_path) { return grammar_path + ".stats.json"; }

Grammar load_grammar(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open grammar file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Grammar g;
  for (Clause& c : parse_clauses(buf.str(), schema)) g.add(std::move(c));

  std::ifstream sin(stats_path(path));
  if (!sin) return g;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(sin);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, stats_path(path) + ": " + e.what());
  }
  const auto& entries = doc.at("clauses");
  if (entries.size() != g.size()) {
    throw Error(ErrorCode::parse_error, "stats sidecar lists " + std::to_string(entries.size()) +
                                            " clauses, grammar has " + std::to_string(g.size()));
  }
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto& e = entries[c];
    if (e.at("clause").get<std::string>() != to_string(g.clauses[c])) {
      throw Error(ErrorCode::parse_error, "stats sidecar out of sync at clause " + std::to_string(c));
    }
    ClauseStats s{e.at("n_applicable").get<std::size_t>(), e.at("n_satisfied").get<std::size_t>()};
    if (s.n_satisfied > s.n_applicable) throw Error(ErrorCode::parse_error, "n_satisfied exceeds n_applicable");
    g.stats[c] = s;
  }
  return g;
}

void save_grammar(const Grammar& grammar, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write grammar file " + path);
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t c = 0; c < grammar.size(); ++c) {
    const std::string text = to_string(grammar.clauses[c]);
    out << text << '\n';
    const ClauseStats s = c < grammar.stats.size() ? grammar.stats[c] : ClauseStats{};
    entries.push_back({{"clause", text}, {"n_applicable", s.n_applicable}, {"n_satisfied", s.n_satisfied}});
  }
  std::ofstream sout(stats_path(path), std::ios::binary);
  if (!sout) throw Error(ErrorCode::io_error, "cannot write " + stats_path(path));
  sout << nlohmann::json{{"clauses", entries}}.dump(2) << '\n';
}

double consistency_score(NodeId v, const std::vector<BoundClause>& clauses, const ClinicalGraph& graph,
                         double temperature) {
  if (!graph.contains(v)) throw Error(ErrorCode::missing_node, "node " + std::to_string(index(v)));
  const Relaxation relax = point_mass(graph, v);
  double h = 0.0;
  for (const BoundClause& c : clauses) h -= 1.0 - soft_sat(c, v, graph, relax, temperature);
  return h;
}

}  // namespace clinlogic
