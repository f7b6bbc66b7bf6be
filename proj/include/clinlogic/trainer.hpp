// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinlogic/encoder.hpp"
#include "clinlogic/error.hpp"
#include "clinlogic/induce.hpp"

namespace clinlogic {

struct TrainConfig {
  EncoderConfig encoder;
  LossWeights weights;  // alpha, beta, gamma
  double learning_rate = 0.05;
  std::size_t epochs = 50;
  std::size_t reinduce_every = 10;
  std::uint64_t seed = 7;
  std::size_t negatives = 1;
  InductionConfig induction;  // seeds come from seed_clauses
  std::vector<std::string> seed_clauses;
  // A step that raises the loss is halved up to this many times, then skipped.
  std::size_t max_backtracks = 20;
  double min_temperature = 0.05;

  static TrainConfig from_json(const nlohmann::json& doc);
  static TrainConfig load(const std::string& path);
  nlohmann::json to_json() const;
  // Throws InvalidArgument.
  void validate() const;
  // `induction` with seed_clauses parsed against the schema.
  InductionConfig induction_for(const Schema& schema) const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double recon = 0.0;
  double kl = 0.0;
  double soft_violation = 0.0;
  double grammar_bits = 0.0;
  double differentiable = 0.0;
  double total = 0.0;
  std::size_t grammar_size = 0;
  bool reinduced = false;  // grammar refreshed after this epoch
  double wall_seconds = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

// Deterministic columns only unless wall time is asked for.
void write_history_csv(std::ostream& out, const TrainHistory& history, bool wall_time = false);

struct TrainResult {
  EncoderParams params;
  Grammar grammar;
  TrainHistory history;
};

class TrainDiverged : public Error {
 public:
  TrainDiverged(const std::string& what, TrainHistory history)
      : Error(ErrorCode::diverged_loss, what), history_(std::move(history)) {}
  const TrainHistory& history() const noexcept { return history_; }

 private:
  TrainHistory history_;
};

LossComponents loss(const ClinicalGraph& graph, const EncoderParams& params, const Grammar& grammar,
                    const TrainConfig& config);

/// Alternating optimization. The grammar is induced once before the first
/// epoch and refreshed every reinduce_every epochs; within each epoch one
/// gradient step is taken on recon + beta*KL + gamma*soft with the grammar
/// fixed. A step that would raise that loss is halved until it does not (or
/// skipped), so the loss never increases inside a fixed-grammar phase. The
/// temperature is kept above min_temperature and decay rates at or above 0.
TrainResult train(const ClinicalGraph& graph, const TrainConfig& config);

/// Largest relative error between the analytic gradient of the
/// differentiable loss and central differences. Graphs are capped at 50 nodes.
double grad_check(const ClinicalGraph& graph, const EncoderParams& params, const Grammar& grammar,
                  const TrainConfig& config, double epsilon = 1e-5);

}  // namespace clinlogic
