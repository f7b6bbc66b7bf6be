// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinlogic/grammar.hpp"

namespace clinlogic {

/// A length in bits. Always finite and non-negative.
class CodeLength {
 public:
  CodeLength() = default;
  explicit CodeLength(double bits);

  double bits() const noexcept { return bits_; }

  CodeLength& operator+=(CodeLength o) noexcept {
    bits_ += o.bits_;
    return *this;
  }
  friend CodeLength operator+(CodeLength a, CodeLength b) noexcept { return a += b; }
  friend auto operator<=>(const CodeLength&, const CodeLength&) = default;

 private:
  double bits_ = 0.0;
};

// Elias-gamma length of n + 1.
CodeLength universal_int(std::uint64_t n);

CodeLength clause_cost(const Clause& clause, const Schema& schema);
// Parameter cost of one clause's confidence, 1/2 log2 max(n_applicable, 1).
CodeLength parameter_cost(const ClauseStats& stats);
CodeLength grammar_cost(const Grammar& grammar, const Schema& schema);

// Codeword for one clause outcome at confidence p; zero when not applicable.
double outcome_bits(Outcome outcome, double p_hat);

// Data cost with statistics recomputed on the graph.
CodeLength data_cost(const ClinicalGraph& graph, const Grammar& grammar);

/// Data cost at the grammar's stored (frozen) statistics. With `excluded`
/// set, that node's own clause outcomes are withheld; all other nodes are
/// still evaluated on the full graph.
CodeLength data_cost_frozen(const ClinicalGraph& graph, const Grammar& grammar,
                            std::optional<NodeId> excluded = std::nullopt);

/// Bits to transmit each applicable node's head truth for `clause` with a
/// base-rate code: the Laplace rate of the head atom over every node whose
/// kind declares the head attribute. The reference a clause must beat.
CodeLength head_base_cost(const ClinicalGraph& graph, const BoundClause& clause);

struct ClauseBreakdown {
  std::string clause;
  ClauseStats stats;
  double param_bits = 0.0;
  double exception_bits = 0.0;
};

struct MdlBreakdown {
  double grammar_bits = 0.0;
  double data_bits = 0.0;
  double total_bits = 0.0;
  std::vector<ClauseBreakdown> clauses;
};

MdlBreakdown total_mdl(const ClinicalGraph& graph, const Grammar& grammar);
nlohmann::json to_json(const MdlBreakdown& breakdown);

struct ClauseContribution {
  std::size_t clause = 0;
  Outcome outcome = Outcome::satisfied;
  double bits = 0.0;
};

struct AnomalyReport {
  NodeId node{};
  CodeLength score;
  bool flagged = false;
  // Every applicable clause, largest contribution first.
  std::vector<ClauseContribution> contributions;
};

/// Scores nodes against a grammar at its frozen statistics. Holds a
/// reference to the graph; the graph must outlive the scorer.
class Scorer {
 public:
  Scorer(const ClinicalGraph& graph, Grammar grammar);

  const ClinicalGraph& graph() const noexcept { return graph_; }
  const Grammar& grammar() const noexcept { return grammar_; }
  const std::vector<BoundClause>& clauses() const noexcept { return bound_; }

  CodeLength anomaly_score(NodeId v) const;
  AnomalyReport report(NodeId v, CodeLength threshold) const;
  // One report per node, highest score first, ties by NodeId.
  std::vector<AnomalyReport> score_all(CodeLength threshold) const;
  std::vector<double> scores() const;

 private:
  const ClinicalGraph& graph_;
  Grammar grammar_;
  std::vector<BoundClause> bound_;
};

CodeLength anomaly_score(NodeId v, const ClinicalGraph& graph, const Grammar& grammar);
std::vector<AnomalyReport> score_all(const ClinicalGraph& graph, const Grammar& grammar, CodeLength threshold);

struct ThresholdMethod {
  enum class Kind { quantile, sigma, absolute };
  Kind kind = Kind::quantile;
  double parameter = 0.995;

  static ThresholdMethod quantile(double q) { return {Kind::quantile, q}; }
  static ThresholdMethod sigma(double m) { return {Kind::sigma, m}; }
  static ThresholdMethod absolute(double bits) { return {Kind::absolute, bits}; }
};

// "quantile:0.995", "sigma:3" or "absolute:4.5".
ThresholdMethod parse_threshold_method(std::string_view text);
std::string to_string(const ThresholdMethod& method);

/// quantile: linear interpolation between order statistics.
/// sigma: mean + m * population standard deviation.
CodeLength calibrate_threshold(std::span<const double> scores, const ThresholdMethod& method);

// CSV: node_id,score_bits,flagged,top_clause,top_clause_bits
void write_scores_csv(std::ostream& out, const std::vector<AnomalyReport>& reports, const Grammar& grammar);

}  // namespace clinlogic
