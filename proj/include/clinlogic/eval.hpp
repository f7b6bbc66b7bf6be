// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "clinlogic/healer.hpp"
#include "clinlogic/synth.hpp"
#include "clinlogic/trainer.hpp"

namespace clinlogic {

struct DetectionMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;  // 0 when nothing is flagged
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.5;  // 0.5 when either class is empty
  std::size_t extremes = 0;
  std::size_t extremes_flagged = 0;
  double extreme_fp_rate = 0.0;
};

/// Positives are labeled violations; every other reported node is a
/// negative, extremes included. AUC is the Mann-Whitney statistic with
/// midranks for tied scores. Throws MissingLabel when a labeled node has no
/// report.
DetectionMetrics detection_metrics(std::span<const AnomalyReport> reports, const GroundTruth& labels);

// AUC from raw scores and labels (ties at midrank).
double rank_auc(std::span<const double> scores, const std::vector<bool>& positive);

struct AblationToggles {
  bool no_symbolic = false;
  bool no_mdl = false;
  bool no_temporal = false;
  bool no_healing = false;

  std::string name() const;  // "full" or the set toggles joined by '+'
};

struct AblationConfig {
  TrainConfig train;  // used only when no_symbolic is set
  InductionConfig induction;
  std::optional<Grammar> grammar;  // induced from the corpus when unset
  ThresholdMethod threshold = ThresholdMethod::sigma(3.0);
  RepairConfig repair;
};

struct AblationRow {
  AblationToggles toggles;
  DetectionMetrics metrics;
  CodeLength threshold;
  // Share of flagged labeled violations whose corrupted field appears in a
  // top-k repair; unset when healing is switched off.
  std::optional<double> repair_accuracy;
};

/// no_symbolic: nodes scored by mean reconstruction NLL of their incident
/// edges under a trained encoder. no_mdl: scored by the count of crisply
/// violated clauses. no_temporal: unbounded window and zero decay in the
/// encoder. no_healing: repair accuracy left empty. Otherwise nodes are
/// scored by the frozen-grammar codelength.
AblationRow ablation_run(const Corpus& corpus, const AblationToggles& toggles, const AblationConfig& config = {});
std::vector<AblationRow> ablation_table(const Corpus& corpus, std::span<const AblationToggles> rows,
                                        const AblationConfig& config = {});

// Accuracy of top-k repairs on the flagged labeled violations.
double repair_accuracy(const Corpus& corpus, const Grammar& grammar, std::span<const NodeId> flagged,
                       const RepairConfig& config);

void write_metrics_csv(std::ostream& out, std::span<const AblationRow> rows);
void write_metrics_table(std::ostream& out, std::span<const AblationRow> rows);

struct ScalingRow {
  std::size_t target_edges = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double score_seconds = 0.0;  // best of `repeats` score_all runs
  std::size_t memory_bytes = 0;  // graph storage estimate
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
};

/// For each target edge count (strictly increasing) a corpus is drawn from
/// `base` with patients, physicians and events scaled together, and
/// score_all is timed against the planted grammar.
ScalingReport scaling_run(std::span<const std::size_t> target_edges, const CorpusConfig& base,
                          std::size_t repeats = 3);
void write_scaling_csv(std::ostream& out, const ScalingReport& report);

std::size_t memory_estimate(const ClinicalGraph& graph);

}  // namespace clinlogic
