// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/mdl.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <numeric>

#include "clinlogic/error.hpp"

namespace clinlogic {

CodeLength::CodeLength(double bits) : bits_(bits) {
  if (!std::isfinite(bits) || bits < 0) {
    throw Error(ErrorCode::invalid_argument, "code length must be finite and non-negative");
  }
}

CodeLength universal_int(std::uint64_t n) {
  // floor(log2(n + 1)) without floating point; n + 1 may overflow only at 2^64 - 1.
  const unsigned width = n == UINT64_MAX ? 64u : static_cast<unsigned>(std::bit_width(n + 1)) - 1u;
  return CodeLength(2.0 * width + 1.0);
}

namespace {

double log2_size(std::size_t n) { return n <= 1 ? 0.0 : std::log2(static_cast<double>(n)); }

constexpr double kFormBits = 2.0;      // four atom forms
constexpr double kConstantBits = 32.0;  // numeric comparison constant
constexpr std::size_t kComparisonOps = 5;

std::size_t vocabulary_size(const Schema& schema, const std::string& attribute) {
  std::size_t arity = 1;
  for (KindId k : schema.kinds_with_attribute(attribute)) {
    arity = std::max(arity, schema.kind(k).attributes[*schema.kind(k).slot(attribute)].arity());
  }
  return arity;
}

double atom_cost(const Atom& a, const Schema& schema) {
  const std::size_t n_attrs = schema.attribute_names().size();
  switch (a.form) {
    case AtomForm::kind:
      return kFormBits + log2_size(schema.kinds().size());
    case AtomForm::rel:
      return kFormBits + log2_size(schema.relation_names().size());
    case AtomForm::attr_eq:
      return kFormBits + log2_size(n_attrs) + log2_size(vocabulary_size(schema, a.name));
    case AtomForm::cmp:
      return kFormBits + log2_size(n_attrs) + log2_size(kComparisonOps) + kConstantBits;
    case AtomForm::neighbor_attr: {
      // The neighbor kind is implied when only one kind declares the attribute.
      const std::size_t owners = schema.kinds_with_attribute(a.name).size();
      return kFormBits + log2_size(n_attrs) + log2_size(vocabulary_size(schema, a.name)) +
             (owners > 1 ? log2_size(owners) : 0.0);
    }
  }
  return 0.0;
}

}  // namespace

CodeLength clause_cost(const Clause& clause, const Schema& schema) {
  double bits = universal_int(clause.body.size()).bits();
  for (const Atom& a : clause.body) bits += atom_cost(a, schema);
  bits += atom_cost(clause.head, schema);
  return CodeLength(bits);
}

CodeLength parameter_cost(const ClauseStats& stats) {
  return CodeLength(0.5 * std::log2(static_cast<double>(std::max<std::size_t>(stats.n_applicable, 1))));
}

CodeLength grammar_cost(const Grammar& grammar, const Schema& schema) {
  CodeLength total = universal_int(grammar.size());
  for (std::size_t c = 0; c < grammar.size(); ++c) {
    total += clause_cost(grammar.clauses[c], schema);
    total += parameter_cost(c < grammar.stats.size() ? grammar.stats[c] : ClauseStats{});
  }
  return total;
}

double outcome_bits(Outcome outcome, double p_hat) {
  switch (outcome) {
    case Outcome::not_applicable: return 0.0;
    case Outcome::satisfied: return -std::log2(p_hat);
    case Outcome::violated: return -std::log2(1.0 - p_hat);
  }
  return 0.0;
}

namespace {

double stats_bits(const ClauseStats& counts, double p_hat) {
  const auto s = static_cast<double>(counts.n_satisfied);
  const auto v = static_cast<double>(counts.n_applicable - counts.n_satisfied);
  return (s > 0 ? s * -std::log2(p_hat) : 0.0) + (v > 0 ? v * -std::log2(1.0 - p_hat) : 0.0);
}

}  // namespace

CodeLength data_cost(const ClinicalGraph& graph, const Grammar& grammar) {
  const auto bound = compile(grammar, graph.schema());
  double bits = 0.0;
  for (const BoundClause& c : bound) {
    ClauseStats counts;
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
      const Outcome o = c.evaluate(graph, static_cast<NodeId>(v)).outcome;
      if (o == Outcome::not_applicable) continue;
      ++counts.n_applicable;
      if (o == Outcome::satisfied) ++counts.n_satisfied;
    }
    bits += stats_bits(counts, counts.confidence());
  }
  return CodeLength(bits);
}

CodeLength data_cost_frozen(const ClinicalGraph& graph, const Grammar& grammar, std::optional<NodeId> excluded) {
  const auto bound = compile(grammar, graph.schema());
  double bits = 0.0;
  for (std::size_t c = 0; c < bound.size(); ++c) {
    const double p = grammar.stats.at(c).confidence();
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
      const auto node = static_cast<NodeId>(v);
      if (excluded && *excluded == node) continue;
      bits += outcome_bits(bound[c].evaluate(graph, node).outcome, p);
    }
  }
  return CodeLength(bits);
}

CodeLength head_base_cost(const ClinicalGraph& graph, const BoundClause& clause) {
  const std::size_t head = clause.clause().body.size();
  const Atom& h = clause.atom(head);
  std::size_t population = 0;
  std::size_t positives = 0;
  ClauseStats applicable;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto v = static_cast<NodeId>(i);
    if (h.is_focus_attribute() && clause.slot(head, graph.node(v).kind) >= 0) {
      ++population;
      if (clause.atom_holds(head, graph, v, std::nullopt)) ++positives;
    }
    const Outcome o = clause.evaluate(graph, v).outcome;
    if (o == Outcome::not_applicable) continue;
    ++applicable.n_applicable;
    if (o == Outcome::satisfied) ++applicable.n_satisfied;
  }
  const ClauseStats base = h.is_focus_attribute() ? ClauseStats{population, positives} : applicable;
  return CodeLength(stats_bits(applicable, base.confidence()));
}

MdlBreakdown total_mdl(const ClinicalGraph& graph, const Grammar& grammar) {
  Grammar fresh = grammar;
  refresh_stats(fresh, graph);
  MdlBreakdown out;
  out.grammar_bits = grammar_cost(fresh, graph.schema()).bits();
  for (std::size_t c = 0; c < fresh.size(); ++c) {
    ClauseBreakdown b;
    b.clause = to_string(fresh.clauses[c]);
    b.stats = fresh.stats[c];
    b.param_bits = parameter_cost(b.stats).bits();
    b.exception_bits = stats_bits(b.stats, b.stats.confidence());
    out.data_bits += b.exception_bits;
    out.clauses.push_back(std::move(b));
  }
  out.total_bits = out.grammar_bits + out.data_bits;
  return out;
}

nlohmann::json to_json(const MdlBreakdown& b) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : b.clauses) {
    clauses.push_back({{"clause", c.clause},
                       {"n_applicable", c.stats.n_applicable},
                       {"n_satisfied", c.stats.n_satisfied},
                       {"param_bits", c.param_bits},
                       {"exception_bits", c.exception_bits}});
  }
  return {{"grammar_bits", b.grammar_bits},
          {"data_bits", b.data_bits},
          {"total_bits", b.total_bits},
          {"clauses", std::move(clauses)}};
}

Scorer::Scorer(const ClinicalGraph& graph, Grammar grammar)
    : graph_(graph), grammar_(std::move(grammar)), bound_(compile(grammar_, graph.schema())) {
  if (grammar_.stats.size() != grammar_.size()) {
    throw Error(ErrorCode::invalid_argument, "grammar statistics missing");
  }
}

CodeLength Scorer::anomaly_score(NodeId v) const { return report(v, CodeLength(0.0)).score; }

AnomalyReport Scorer::report(NodeId v, CodeLength threshold) const {
  if (!graph_.contains(v)) throw Error(ErrorCode::missing_node, "node " + std::to_string(index(v)));
  AnomalyReport r;
  r.node = v;
  double total = 0.0;
  for (std::size_t c = 0; c < bound_.size(); ++c) {
    const Outcome o = bound_[c].evaluate(graph_, v).outcome;
    if (o == Outcome::not_applicable) continue;
    const double bits = outcome_bits(o, grammar_.stats[c].confidence());
    r.contributions.push_back({c, o, bits});
    total += bits;
  }
  std::stable_sort(r.contributions.begin(), r.contributions.end(),
                   [](const ClauseContribution& a, const ClauseContribution& b) { return a.bits > b.bits; });
  r.score = CodeLength(total);
  r.flagged = r.score > threshold;
  return r;
}

std::vector<AnomalyReport> Scorer::score_all(CodeLength threshold) const {
  std::vector<AnomalyReport> out;
  out.reserve(graph_.node_count());
  for (std::size_t v = 0; v < graph_.node_count(); ++v) out.push_back(report(static_cast<NodeId>(v), threshold));
  std::stable_sort(out.begin(), out.end(),
                   [](const AnomalyReport& a, const AnomalyReport& b) { return a.score > b.score; });
  return out;
}

std::vector<double> Scorer::scores() const {
  std::vector<double> out(graph_.node_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = anomaly_score(static_cast<NodeId>(v)).bits();
  return out;
}

CodeLength anomaly_score(NodeId v, const ClinicalGraph& graph, const Grammar& grammar) {
  return Scorer(graph, grammar).anomaly_score(v);
}

std::vector<AnomalyReport> score_all(const ClinicalGraph& graph, const Grammar& grammar, CodeLength threshold) {
  return Scorer(graph, grammar).score_all(threshold);
}

ThresholdMethod parse_threshold_method(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  double parameter = 0.0;
  if (colon != std::string_view::npos) {
    const std::string_view num = text.substr(colon + 1);
    auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), parameter);
    if (ec != std::errc() || end != num.data() + num.size()) {
      throw Error(ErrorCode::invalid_argument, "bad threshold parameter '" + std::string(num) + "'");
    }
  }
  ThresholdMethod m;
  if (name == "quantile") {
    m = ThresholdMethod::quantile(colon == std::string_view::npos ? 0.995 : parameter);
    if (m.parameter < 0 || m.parameter > 1) throw Error(ErrorCode::invalid_argument, "quantile outside [0, 1]");
  } else if (name == "sigma") {
    m = ThresholdMethod::sigma(colon == std::string_view::npos ? 3.0 : parameter);
  } else if ((name == "absolute" || name == "abs") && colon != std::string_view::npos) {
    m = ThresholdMethod::absolute(parameter);
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown threshold method '" + std::string(text) + "'");
  }
  return m;
}

std::string to_string(const ThresholdMethod& m) {
  switch (m.kind) {
    case ThresholdMethod::Kind::quantile: return "quantile:" + format_number(m.parameter);
    case ThresholdMethod::Kind::sigma: return "sigma:" + format_number(m.parameter);
    case ThresholdMethod::Kind::absolute: return "absolute:" + format_number(m.parameter);
  }
  return {};
}

CodeLength calibrate_threshold(std::span<const double> scores, const ThresholdMethod& method) {
  if (method.kind == ThresholdMethod::Kind::absolute) return CodeLength(method.parameter);
  if (scores.empty()) throw Error(ErrorCode::empty_input, "no scores to calibrate on");
  if (method.kind == ThresholdMethod::Kind::quantile) {
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = method.parameter * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return CodeLength(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return CodeLength(std::max(0.0, mean + method.parameter * std::sqrt(ss / n)));
}

void write_scores_csv(std::ostream& out, const std::vector<AnomalyReport>& reports, const Grammar& grammar) {
  out << "node_id,score_bits,flagged,top_clause,top_clause_bits\n";
  char buf[64];
  auto num = [&](double x) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
  };
  for (const auto& r : reports) {
    out << index(r.node) << ',' << num(r.score.bits()) << ',' << (r.flagged ? 1 : 0) << ',';
    if (!r.contributions.empty()) {
      const auto& top = r.contributions.front();
      out << '"' << to_string(grammar.clauses[top.clause]) << "\"," << num(top.bits);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace clinlogic
