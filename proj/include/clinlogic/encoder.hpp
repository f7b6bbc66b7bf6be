// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "clinlogic/grammar.hpp"

namespace clinlogic {

struct EncoderConfig {
  std::size_t hidden = 32;  // d
  std::size_t latent = 16;  // d_z
  std::size_t layers = 2;
  Duration window = kUnboundedWindow;
  bool temporal = true;  // false: unbounded window, decay pinned at 0
  double init_temperature = 1.0;
  double init_decay = 0.01;  // per day
  double init_scale = 0.3;   // weights ~ U(-s, s) / sqrt(fan_in)
};

/// Node input features: one-hot kind, then per kind and attribute a
/// min-max scaled number, a one-hot vocabulary block, or a 0/1 flag.
/// Unrecorded values and timestamp attributes contribute zeros.
class FeatureMap {
 public:
  explicit FeatureMap(const Schema& schema);
  std::size_t dim() const noexcept { return dim_; }
  Eigen::VectorXd features(const ClinicalGraph& graph, NodeId v) const;

 private:
  const Schema* schema_;
  std::vector<std::vector<std::size_t>> offset_;  // [kind][slot]
  std::size_t dim_ = 0;
};

// Categorical output head used by the soft-consistency term.
struct AttributeHead {
  KindId kind = 0;
  std::size_t slot = 0;
  Eigen::MatrixXd weights;  // arity x d_z
};

/// Trainable state. Matrices act on column vectors: P = W[l] * h.
/// relation_bias and decay have one entry per relation plus a final entry
/// for the self loop.
struct EncoderParams {
  std::vector<Eigen::MatrixXd> W;
  double temperature = 1.0;
  Eigen::VectorXd relation_bias;
  Eigen::VectorXd decay;
  Eigen::MatrixXd mean_head;    // d_z x d
  Eigen::MatrixXd logvar_head;  // d_z x d
  Eigen::VectorXd decoder_bias;  // one per relation
  std::vector<AttributeHead> attribute_heads;
  std::uint64_t seed = 0;

  static EncoderParams init(const Schema& schema, const EncoderConfig& config, std::uint64_t seed);
  // Same shapes, all zero.
  EncoderParams zeros_like() const;

  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> values);
  // this += scale * other
  void axpy(double scale, const EncoderParams& other);
  bool finite() const;

  nlohmann::json to_json() const;
  static EncoderParams from_json(const nlohmann::json& doc);
  void save(const std::string& path) const;
  static EncoderParams load(const std::string& path);
};

struct NodeEmbedding {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_variance;
};

constexpr double kLogVarianceBound = 10.0;
constexpr double kSecondsPerDay = 86400.0;

// exp(-lambda * dt), dt in days.
double time_kernel(double dt_days, double lambda);
// softmax(scores / temperature); weights sum to 1.
std::vector<double> attention_coeffs(std::span<const double> scores, double temperature);
// log p(label) under p = logistic(z_u . z_v + bias).
double recon_loglik(const Eigen::VectorXd& z_u, const Eigen::VectorXd& z_v, double bias, bool observed);
// KL(N(mean, exp(lv)) || N(0, I)).
double kl_term(const NodeEmbedding& embedding);

struct NeighborRef {
  std::uint32_t node = 0;
  RelationId relation = 0;  // == relation count for the self loop
  double dt_days = 0.0;
};

/// Forward pass over a fixed graph snapshot. Neighborhoods are taken at
/// t_now = the latest edge timestamp.
class Encoder {
 public:
  Encoder(const ClinicalGraph& graph, EncoderConfig config);

  const EncoderConfig& config() const noexcept { return config_; }
  const FeatureMap& feature_map() const noexcept { return features_; }
  const ClinicalGraph& graph() const noexcept { return *graph_; }
  const std::vector<std::vector<NeighborRef>>& neighborhoods() const noexcept { return neighborhoods_; }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }  // d_in x |V|
  Timestamp t_now() const noexcept { return t_now_; }

  void check(const EncoderParams& params) const;

  struct Layer {
    Eigen::MatrixXd input;   // d_l x |V|
    Eigen::MatrixXd proj;    // d x |V|
    Eigen::MatrixXd output;  // d x |V|
    std::vector<std::vector<double>> scores;
    std::vector<std::vector<double>> weights;
  };
  struct Forward {
    std::vector<Layer> layers;
    Eigen::MatrixXd mean;     // d_z x |V|
    Eigen::MatrixXd logvar;   // d_z x |V|, clamped
    Eigen::MatrixXd raw_logvar;
  };

  Forward forward(const EncoderParams& params) const;
  std::vector<NodeEmbedding> encode(const EncoderParams& params) const;

  // Adds the gradient flowing from d(loss)/d(mean), d(loss)/d(logvar).
  void backward(const EncoderParams& params, const Forward& fwd, const Eigen::MatrixXd& d_mean,
                const Eigen::MatrixXd& d_logvar, EncoderParams& grad) const;

 private:
  const ClinicalGraph* graph_;
  EncoderConfig config_;
  FeatureMap features_;
  Eigen::MatrixXd inputs_;
  std::vector<std::vector<NeighborRef>> neighborhoods_;
  Timestamp t_now_ = 0;
};

// `differentiable` and `total` share a gradient; they differ by alpha * grammar bits.
enum class LossSelector { recon, kl, soft_consistency, differentiable, total };

struct LossWeights {
  double alpha = 0.01;  // grammar bits
  double beta = 0.001;  // KL
  double gamma = 0.1;   // soft violation mass
};

struct LossComponents {
  double recon = 0.0;
  double kl = 0.0;
  double soft_violation = 0.0;
  double grammar_bits = 0.0;
  double differentiable = 0.0;  // recon + beta*kl + gamma*soft
  double total = 0.0;           // differentiable + alpha*grammar_bits
};

/// Training objective over one graph: edge reconstruction summed over every
/// observed edge and its fixed corrupted-endpoint negatives (`negatives` per
/// edge), KL to the unit Gaussian, soft
/// violation mass of the grammar under the attribute heads, and grammar bits.
class Objective {
 public:
  Objective(const Encoder& encoder, std::uint64_t negative_seed, std::size_t negatives = 1);

  void set_grammar(const Grammar& grammar);
  const Grammar& grammar() const noexcept { return grammar_; }

  // `grad` (if given) receives d(selected)/d(params), overwriting it.
  LossComponents evaluate(const EncoderParams& params, const LossWeights& weights,
                          LossSelector selector = LossSelector::total, EncoderParams* grad = nullptr) const;

  // Mean negative log-likelihood of each node's observed incident edges.
  std::vector<double> reconstruction_error(const EncoderParams& params) const;

  struct EdgeSample {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    RelationId relation = 0;
    bool observed = true;
  };
  const std::vector<EdgeSample>& samples() const noexcept { return samples_; }

 private:
  const Encoder* encoder_;
  std::vector<EdgeSample> samples_;
  Grammar grammar_;
  std::vector<BoundClause> bound_;
  double grammar_bits_ = 0.0;
};

/// Central finite differences over every parameter entry; returns the max
/// relative error |a - n| / max(|a|, |n|, floor).
double max_relative_error(const Objective& objective, const EncoderParams& params, const LossWeights& weights,
                          LossSelector selector, double epsilon = 1e-5, double floor = 1e-5);

}  // namespace clinlogic
