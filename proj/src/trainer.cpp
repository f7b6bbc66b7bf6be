// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

namespace clinlogic {

using nlohmann::json;

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
  if (!doc.is_object()) throw Error(ErrorCode::invalid_argument, where + " must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw Error(ErrorCode::invalid_argument, "unknown key '" + key + "' in " + where);
  }
}

}  // namespace

TrainConfig TrainConfig::from_json(const json& doc) {
  TrainConfig c;
  try {
    reject_unknown(doc,
                   {"encoder", "alpha", "beta", "gamma", "learning_rate", "epochs", "reinduce_every", "seed",
                    "negatives", "induction", "max_backtracks", "min_temperature"},
                   "train config");
    if (doc.contains("encoder")) {
      const json& e = doc["encoder"];
      reject_unknown(e, {"hidden", "latent", "layers", "window_days", "temporal", "init_temperature", "init_decay",
                         "init_scale"},
                     "encoder");
      c.encoder.hidden = e.value("hidden", c.encoder.hidden);
      c.encoder.latent = e.value("latent", c.encoder.latent);
      c.encoder.layers = e.value("layers", c.encoder.layers);
      if (e.contains("window_days") && !e["window_days"].is_null()) {
        c.encoder.window = static_cast<Duration>(std::llround(e["window_days"].get<double>() * kSecondsPerDay));
      }
      c.encoder.temporal = e.value("temporal", c.encoder.temporal);
      c.encoder.init_temperature = e.value("init_temperature", c.encoder.init_temperature);
      c.encoder.init_decay = e.value("init_decay", c.encoder.init_decay);
      c.encoder.init_scale = e.value("init_scale", c.encoder.init_scale);
    }
    c.weights.alpha = doc.value("alpha", c.weights.alpha);
    c.weights.beta = doc.value("beta", c.weights.beta);
    c.weights.gamma = doc.value("gamma", c.weights.gamma);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.epochs = doc.value("epochs", c.epochs);
    c.reinduce_every = doc.value("reinduce_every", c.reinduce_every);
    c.seed = doc.value("seed", c.seed);
    c.negatives = doc.value("negatives", c.negatives);
    c.max_backtracks = doc.value("max_backtracks", c.max_backtracks);
    c.min_temperature = doc.value("min_temperature", c.min_temperature);
    if (doc.contains("induction")) {
      const json& i = doc["induction"];
      reject_unknown(i, {"budget", "min_support", "min_confidence", "neighbor_atoms", "pair_bodies", "min_pair_lift",
                         "seeds"},
                     "induction");
      c.induction.budget = i.value("budget", c.induction.budget);
      c.induction.min_support = i.value("min_support", c.induction.min_support);
      c.induction.min_confidence = i.value("min_confidence", c.induction.min_confidence);
      c.induction.neighbor_atoms = i.value("neighbor_atoms", c.induction.neighbor_atoms);
      c.induction.pair_bodies = i.value("pair_bodies", c.induction.pair_bodies);
      c.induction.min_pair_lift = i.value("min_pair_lift", c.induction.min_pair_lift);
      c.seed_clauses = i.value("seeds", c.seed_clauses);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return from_json(doc);
}

json TrainConfig::to_json() const {
  json window = encoder.window == kUnboundedWindow ? json(nullptr) : json(encoder.window / kSecondsPerDay);
  return {{"encoder",
           {{"hidden", encoder.hidden},
            {"latent", encoder.latent},
            {"layers", encoder.layers},
            {"window_days", window},
            {"temporal", encoder.temporal},
            {"init_temperature", encoder.init_temperature},
            {"init_decay", encoder.init_decay},
            {"init_scale", encoder.init_scale}}},
          {"alpha", weights.alpha},
          {"beta", weights.beta},
          {"gamma", weights.gamma},
          {"learning_rate", learning_rate},
          {"epochs", epochs},
          {"reinduce_every", reinduce_every},
          {"seed", seed},
          {"negatives", negatives},
          {"induction",
           {{"budget", induction.budget},
            {"min_support", induction.min_support},
            {"min_confidence", induction.min_confidence},
            {"neighbor_atoms", induction.neighbor_atoms},
            {"pair_bodies", induction.pair_bodies},
            {"min_pair_lift", induction.min_pair_lift},
            {"seeds", seed_clauses}}},
          {"max_backtracks", max_backtracks},
          {"min_temperature", min_temperature}};
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { return Error(ErrorCode::invalid_argument, what); };
  if (encoder.hidden == 0 || encoder.latent == 0 || encoder.layers == 0) {
    throw bad("encoder dimensions must be at least 1");
  }
  if (!(weights.alpha >= 0 && weights.beta >= 0 && weights.gamma >= 0)) throw bad("alpha, beta, gamma must be >= 0");
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) throw bad("learning rate must be finite and >= 0");
  if (epochs == 0) throw bad("epochs must be >= 1");
  if (reinduce_every == 0) throw bad("reinduce_every must be >= 1");
  if (negatives == 0) throw bad("negatives must be >= 1");
  if (!(min_temperature > 0)) throw bad("min_temperature must be positive");
  if (!(encoder.init_temperature >= min_temperature)) throw bad("init_temperature below min_temperature");
  if (!(encoder.init_decay >= 0)) throw bad("init_decay must be >= 0");
  if (encoder.window <= 0) throw bad("window must be positive");
  if (!induction.seeds.empty()) throw bad("induction seeds are given as clause text");
}

void write_history_csv(std::ostream& out, const TrainHistory& history, bool wall_time) {
  out << "epoch,recon,kl,soft_violation,grammar_bits,differentiable,total,grammar_size,reinduced";
  if (wall_time) out << ",wall_seconds";
  out << '\n';
  const auto old = out.precision(17);
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << r.recon << ',' << r.kl << ',' << r.soft_violation << ',' << r.grammar_bits << ','
        << r.differentiable << ',' << r.total << ',' << r.grammar_size << ',' << (r.reinduced ? 1 : 0);
    if (wall_time) out << ',' << r.wall_seconds;
    out << '\n';
  }
  out.precision(old);
}

LossComponents loss(const ClinicalGraph& graph, const EncoderParams& params, const Grammar& grammar,
                    const TrainConfig& config) {
  config.validate();
  const Encoder encoder(graph, config.encoder);
  Objective objective(encoder, config.seed, config.negatives);
  objective.set_grammar(grammar);
  return objective.evaluate(params, config.weights, LossSelector::total);
}

namespace {

void project(EncoderParams& p, const TrainConfig& config) {
  p.temperature = std::max(p.temperature, config.min_temperature);
  if (config.encoder.temporal) {
    p.decay = p.decay.cwiseMax(0.0);
  } else {
    p.decay.setZero();
  }
}

bool finite(const LossComponents& c) {
  return std::isfinite(c.recon) && std::isfinite(c.kl) && std::isfinite(c.soft_violation) &&
         std::isfinite(c.differentiable) && std::isfinite(c.total);
}

}  // namespace

InductionConfig TrainConfig::induction_for(const Schema& schema) const {
  InductionConfig out = induction;
  for (const auto& text : seed_clauses) out.seeds.push_back(parse_clause(text, schema));
  return out;
}

TrainResult train(const ClinicalGraph& graph, const TrainConfig& config) {
  config.validate();
  const InductionConfig induction = config.induction_for(graph.schema());
  const Encoder encoder(graph, config.encoder);
  Objective objective(encoder, config.seed, config.negatives);
  TrainResult result;
  result.params = EncoderParams::init(graph.schema(), config.encoder, config.seed);
  project(result.params, config);
  result.grammar = induce(graph, induction).grammar;
  objective.set_grammar(result.grammar);

  EncoderParams& params = result.params;
  EncoderParams grad;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    LossComponents current = objective.evaluate(params, config.weights, LossSelector::differentiable, &grad);
    if (!finite(current) || !grad.finite()) {
      throw TrainDiverged("non-finite loss at epoch " + std::to_string(epoch), result.history);
    }
    double step = config.learning_rate;
    for (std::size_t tries = 0; step > 0 && tries <= config.max_backtracks; ++tries, step *= 0.5) {
      EncoderParams trial = params;
      trial.axpy(-step, grad);
      project(trial, config);
      const LossComponents c = objective.evaluate(trial, config.weights, LossSelector::differentiable);
      if (finite(c) && c.differentiable <= current.differentiable) {
        params = std::move(trial);
        current = c;
        break;
      }
    }

    EpochRecord r;
    r.epoch = epoch;
    r.recon = current.recon;
    r.kl = current.kl;
    r.soft_violation = current.soft_violation;
    r.grammar_bits = current.grammar_bits;
    r.differentiable = current.differentiable;
    r.total = current.total;
    r.grammar_size = result.grammar.size();
    if (epoch % config.reinduce_every == 0 && epoch < config.epochs) {
      result.grammar = induce(graph, induction).grammar;
      objective.set_grammar(result.grammar);
      r.reinduced = true;
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(r);
  }
  return result;
}

double grad_check(const ClinicalGraph& graph, const EncoderParams& params, const Grammar& grammar,
                  const TrainConfig& config, double epsilon) {
  config.validate();
  if (graph.node_count() > 50) throw Error(ErrorCode::invalid_argument, "grad_check is limited to 50 nodes");
  const Encoder encoder(graph, config.encoder);
  Objective objective(encoder, config.seed, config.negatives);
  objective.set_grammar(grammar);
  return max_relative_error(objective, params, config.weights, LossSelector::differentiable, epsilon);
}

}  // namespace clinlogic
