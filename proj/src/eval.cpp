// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "clinlogic/induce.hpp"

namespace clinlogic {

double rank_auc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw Error(ErrorCode::invalid_argument, "scores and labels differ in size");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  const double p = static_cast<double>(n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

DetectionMetrics detection_metrics(std::span<const AnomalyReport> reports, const GroundTruth& labels) {
  std::vector<bool> seen;
  for (const auto& r : reports) {
    const auto i = index(r.node);
    if (i >= seen.size()) seen.resize(i + 1, false);
    seen[i] = true;
  }
  auto present = [&](NodeId v) { return index(v) < seen.size() && seen[index(v)]; };
  for (const auto& [v, label] : labels.violations) {
    if (!present(v)) throw Error(ErrorCode::missing_label, "labeled node " + std::to_string(index(v)) + " not scored");
  }
  for (NodeId v : labels.extremes) {
    if (!present(v)) throw Error(ErrorCode::missing_label, "labeled node " + std::to_string(index(v)) + " not scored");
  }

  DetectionMetrics m;
  std::vector<double> scores;
  std::vector<bool> positive;
  scores.reserve(reports.size());
  positive.reserve(reports.size());
  for (const auto& r : reports) {
    const bool pos = labels.is_violation(r.node);
    scores.push_back(r.score.bits());
    positive.push_back(pos);
    if (pos) {
      (r.flagged ? m.tp : m.fn) += 1;
    } else {
      (r.flagged ? m.fp : m.tn) += 1;
    }
    if (labels.is_extreme(r.node)) {
      ++m.extremes;
      if (r.flagged) ++m.extremes_flagged;
    }
  }
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.auc = rank_auc(scores, positive);
  m.extreme_fp_rate =
      m.extremes > 0 ? static_cast<double>(m.extremes_flagged) / static_cast<double>(m.extremes) : 0.0;
  return m;
}

std::string AblationToggles::name() const {
  std::string out;
  auto add = [&](bool on, const char* label) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += label;
  };
  add(no_symbolic, "no_symbolic");
  add(no_mdl, "no_mdl");
  add(no_temporal, "no_temporal");
  add(no_healing, "no_healing");
  return out.empty() ? "full" : out;
}

double repair_accuracy(const Corpus& corpus, const Grammar& grammar, std::span<const NodeId> flagged,
                       const RepairConfig& config) {
  std::size_t total = 0;
  std::size_t hits = 0;
  for (NodeId v : flagged) {
    auto label = corpus.truth.violations.find(v);
    if (label == corpus.truth.violations.end()) continue;
    ++total;
    try {
      const auto candidates = repair_candidates(v, grammar, corpus.graph, config);
      const auto& attrs = corpus.graph.kind_of(v).attributes;
      bool hit = false;
      for (const auto& c : candidates) {
        for (const auto& e : c.edits) {
          hit = hit || (e.kind == RepairEdit::Kind::set_attribute && attrs[e.slot].name == label->second.field);
        }
      }
      if (hit) ++hits;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_repair_found) throw;
    }
  }
  return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

AblationRow ablation_run(const Corpus& corpus, const AblationToggles& toggles, const AblationConfig& config) {
  const ClinicalGraph& graph = corpus.graph;
  AblationRow row;
  row.toggles = toggles;
  const Grammar grammar = config.grammar ? *config.grammar : induce(graph, config.induction).grammar;

  std::vector<double> scores;
  if (toggles.no_symbolic) {
    TrainConfig tc = config.train;
    if (toggles.no_temporal) tc.encoder.temporal = false;
    const TrainResult trained = train(graph, tc);
    const Encoder encoder(graph, tc.encoder);
    const Objective objective(encoder, tc.seed, tc.negatives);
    scores = objective.reconstruction_error(trained.params);
  } else if (toggles.no_mdl) {
    const auto bound = compile(grammar, graph.schema());
    scores.resize(graph.node_count(), 0.0);
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
      for (const auto& c : bound) {
        if (c.evaluate(graph, static_cast<NodeId>(v)).outcome == Outcome::violated) scores[v] += 1.0;
      }
    }
  } else {
    scores = Scorer(graph, grammar).scores();
  }

  row.threshold = calibrate_threshold(scores, config.threshold);
  std::vector<AnomalyReport> reports(scores.size());
  std::vector<NodeId> flagged;
  for (std::size_t v = 0; v < scores.size(); ++v) {
    reports[v].node = static_cast<NodeId>(v);
    reports[v].score = CodeLength(scores[v]);
    reports[v].flagged = reports[v].score > row.threshold;
    if (reports[v].flagged) flagged.push_back(reports[v].node);
  }
  row.metrics = detection_metrics(reports, corpus.truth);
  if (!toggles.no_healing) row.repair_accuracy = repair_accuracy(corpus, grammar, flagged, config.repair);
  return row;
}

std::vector<AblationRow> ablation_table(const Corpus& corpus, std::span<const AblationToggles> rows,
                                        const AblationConfig& config) {
  std::vector<AblationRow> out;
  for (const auto& t : rows) out.push_back(ablation_run(corpus, t, config));
  return out;
}

namespace {

std::string fixed(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const AblationRow> rows) {
  out << "configuration,no_symbolic,no_mdl,no_temporal,no_healing,threshold_bits,precision,recall,f1,auc,"
         "extreme_fp_rate,tp,fp,fn,tn,repair_accuracy\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out << r.toggles.name() << ',' << r.toggles.no_symbolic << ',' << r.toggles.no_mdl << ',' << r.toggles.no_temporal
        << ',' << r.toggles.no_healing << ',' << fixed(r.threshold.bits(), 6) << ',' << fixed(m.precision) << ','
        << fixed(m.recall) << ',' << fixed(m.f1) << ',' << fixed(m.auc) << ',' << fixed(m.extreme_fp_rate) << ','
        << m.tp << ',' << m.fp << ',' << m.fn << ',' << m.tn << ','
        << (r.repair_accuracy ? fixed(*r.repair_accuracy) : std::string()) << '\n';
  }
}

void write_metrics_table(std::ostream& out, std::span<const AblationRow> rows) {
  std::size_t width = 13;
  for (const auto& r : rows) width = std::max(width, r.toggles.name().size());
  out << std::left << std::setw(static_cast<int>(width)) << "configuration"
      << "  precision  recall  f1      auc     extreme_fp  repair\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out << std::left << std::setw(static_cast<int>(width)) << r.toggles.name() << "  " << std::setw(9)
        << fixed(m.precision) << "  " << std::setw(6) << fixed(m.recall) << "  " << std::setw(6) << fixed(m.f1)
        << "  " << std::setw(6) << fixed(m.auc) << "  " << std::setw(10) << fixed(m.extreme_fp_rate) << "  "
        << (r.repair_accuracy ? fixed(*r.repair_accuracy) : std::string("-")) << '\n';
  }
}

std::size_t memory_estimate(const ClinicalGraph& graph) {
  std::size_t bytes = 0;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const Node& n = graph.node(static_cast<NodeId>(v));
    bytes += sizeof(Node) + n.attrs.capacity() * sizeof(std::optional<AttrValue>);
    bytes += graph.incident(static_cast<NodeId>(v)).size() * sizeof(EdgeId);
  }
  bytes += graph.edge_slots() * sizeof(Edge);
  return bytes;
}

namespace {

CorpusConfig scaled(const CorpusConfig& base, double factor) {
  CorpusConfig c = base;
  auto scale = [&](std::size_t n, std::size_t floor) {
    return std::max<std::size_t>(floor, static_cast<std::size_t>(std::llround(static_cast<double>(n) * factor)));
  };
  c.n_patients = scale(base.n_patients, 10);
  c.n_physicians = scale(base.n_physicians, 2);
  c.n_events = scale(base.n_events, 20);
  return c;
}

}  // namespace

ScalingReport scaling_run(std::span<const std::size_t> target_edges, const CorpusConfig& base, std::size_t repeats) {
  for (std::size_t i = 1; i < target_edges.size(); ++i) {
    if (target_edges[i] <= target_edges[i - 1]) throw Error(ErrorCode::invalid_argument, "sizes must increase");
  }
  if (repeats == 0) throw Error(ErrorCode::invalid_argument, "repeats must be positive");
  // Edges per unit of scale, measured once on the base configuration.
  const double base_edges = static_cast<double>(generate(scaled(base, 0.1)).graph.live_edge_count()) / 0.1;

  ScalingReport report;
  for (std::size_t target : target_edges) {
    if (target == 0) throw Error(ErrorCode::invalid_argument, "sizes must be positive");
    const Corpus corpus = generate(scaled(base, static_cast<double>(target) / base_edges));
    const Scorer scorer(corpus.graph, corpus.planted);
    ScalingRow row;
    row.target_edges = target;
    row.nodes = corpus.graph.node_count();
    row.edges = corpus.graph.live_edge_count();
    row.memory_bytes = memory_estimate(corpus.graph);
    row.score_seconds = INFINITY;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      const auto reports = scorer.score_all(CodeLength(0.0));
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (reports.size() != row.nodes) throw Error(ErrorCode::invalid_argument, "score_all lost nodes");
      row.score_seconds = std::min(row.score_seconds, s);
    }
    report.rows.push_back(row);
  }
  return report;
}

void write_scaling_csv(std::ostream& out, const ScalingReport& report) {
  out << "target_edges,nodes,edges,score_seconds,memory_bytes\n";
  for (const auto& r : report.rows) {
    out << r.target_edges << ',' << r.nodes << ',' << r.edges << ',' << fixed(r.score_seconds, 6) << ','
        << r.memory_bytes << '\n';
  }
}

}  // namespace clinlogic
