// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "clinlogic/error.hpp"
#include "clinlogic/mdl.hpp"
#include "clinlogic/rng.hpp"

namespace clinlogic {

using nlohmann::json;

namespace {

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& x : z) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : z) x /= sum;
}

std::size_t feature_width(const AttributeSpec& a) {
  switch (a.type) {
    case AttrType::numeric:
    case AttrType::boolean: return 1;
    case AttrType::categorical: return a.vocabulary.size();
    case AttrType::timestamp: return 0;
  }
  return 0;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  const double bound = scale * std::sqrt(6.0 / static_cast<double>(rows + cols));
  // Column-major fill order is part of the checkpoint contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw Error(ErrorCode::dimension_mismatch, "matrix rows");
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(data[i].size()) != cols) throw Error(ErrorCode::dimension_mismatch, "matrix cols");
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[i][j2].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <typename F>
void for_each_block(EncoderParams& p, F&& f) {
  for (auto& w : p.W) f(w.data(), w.size());
  f(&p.temperature, 1);
  f(p.relation_bias.data(), p.relation_bias.size());
  f(p.decay.data(), p.decay.size());
  f(p.mean_head.data(), p.mean_head.size());
  f(p.logvar_head.data(), p.logvar_head.size());
  f(p.decoder_bias.data(), p.decoder_bias.size());
  for (auto& h : p.attribute_heads) f(h.weights.data(), h.weights.size());
}

}  // namespace

FeatureMap::FeatureMap(const Schema& schema) : schema_(&schema) {
  dim_ = schema.kinds().size();
  for (const KindSpec& k : schema.kinds()) {
    std::vector<std::size_t> offsets;
    for (const AttributeSpec& a : k.attributes) {
      offsets.push_back(dim_);
      dim_ += feature_width(a);
    }
    offset_.push_back(std::move(offsets));
  }
}

Eigen::VectorXd FeatureMap::features(const ClinicalGraph& graph, NodeId v) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  const Node& n = graph.node(v);
  x(n.kind) = 1.0;
  const KindSpec& kind = schema_->kind(n.kind);
  for (std::size_t s = 0; s < kind.attributes.size(); ++s) {
    const auto& value = n.attrs[s];
    if (!value) continue;
    const AttributeSpec& a = kind.attributes[s];
    const auto at = static_cast<Eigen::Index>(offset_[n.kind][s]);
    switch (a.type) {
      case AttrType::numeric: x(at) = (std::get<double>(*value) - a.min) / (a.max - a.min); break;
      case AttrType::boolean: x(at) = std::get<bool>(*value) ? 1.0 : 0.0; break;
      case AttrType::categorical: x(at + std::get<Symbol>(*value).index) = 1.0; break;
      case AttrType::timestamp: break;
    }
  }
  return x;
}

EncoderParams EncoderParams::init(const Schema& schema, const EncoderConfig& config, std::uint64_t seed) {
  if (config.hidden == 0 || config.latent == 0 || config.layers == 0) {
    throw Error(ErrorCode::invalid_argument, "encoder dimensions must be positive");
  }
  Rng rng = Rng::stream(seed, "encoder-init");
  EncoderParams p;
  p.seed = seed;
  const FeatureMap features(schema);
  const auto d = static_cast<Eigen::Index>(config.hidden);
  const auto dz = static_cast<Eigen::Index>(config.latent);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto fan_in = l == 0 ? static_cast<Eigen::Index>(features.dim()) : d;
    p.W.push_back(random_matrix(d, fan_in, 4.0 * config.init_scale, rng));
  }
  p.temperature = config.init_temperature;
  const auto relations = static_cast<Eigen::Index>(schema.relation_names().size());
  p.relation_bias = Eigen::VectorXd::Zero(relations + 1);
  p.decay = Eigen::VectorXd::Constant(relations + 1, config.temporal ? config.init_decay : 0.0);
  p.decay(relations) = 0.0;
  p.mean_head = random_matrix(dz, d, 4.0 * config.init_scale, rng);
  p.logvar_head = random_matrix(dz, d, config.init_scale, rng);
  p.decoder_bias = Eigen::VectorXd::Zero(relations);
  for (std::size_t k = 0; k < schema.kinds().size(); ++k) {
    const KindSpec& kind = schema.kind(static_cast<KindId>(k));
    for (std::size_t s = 0; s < kind.attributes.size(); ++s) {
      const AttributeSpec& a = kind.attributes[s];
      if (a.type != AttrType::categorical && a.type != AttrType::boolean) continue;
      p.attribute_heads.push_back(
          {static_cast<KindId>(k), s, random_matrix(static_cast<Eigen::Index>(a.arity()), dz, config.init_scale, rng)});
    }
  }
  return p;
}

EncoderParams EncoderParams::zeros_like() const {
  EncoderParams z = *this;
  for_each_block(z, [](double* data, Eigen::Index n) { std::fill(data, data + n, 0.0); });
  return z;
}

std::size_t EncoderParams::size() const {
  std::size_t n = 0;
  for_each_block(const_cast<EncoderParams&>(*this), [&](double*, Eigen::Index k) { n += static_cast<std::size_t>(k); });
  return n;
}

std::vector<double> EncoderParams::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for_each_block(const_cast<EncoderParams&>(*this),
                 [&](double* data, Eigen::Index n) { out.insert(out.end(), data, data + n); });
  return out;
}

void EncoderParams::assign(std::span<const double> values) {
  if (values.size() != size()) throw Error(ErrorCode::dimension_mismatch, "parameter vector size");
  std::size_t at = 0;
  for_each_block(*this, [&](double* data, Eigen::Index n) {
    std::copy_n(values.data() + at, n, data);
    at += static_cast<std::size_t>(n);
  });
}

void EncoderParams::axpy(double scale, const EncoderParams& other) {
  const auto add = other.flatten();
  auto mine = flatten();
  if (add.size() != mine.size()) throw Error(ErrorCode::dimension_mismatch, "parameter shapes differ");
  for (std::size_t i = 0; i < mine.size(); ++i) mine[i] += scale * add[i];
  assign(mine);
}

bool EncoderParams::finite() const {
  for (double x : flatten()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

json EncoderParams::to_json() const {
  json layers = json::array();
  for (const auto& w : W) layers.push_back(matrix_to_json(w));
  json heads = json::array();
  for (const auto& h : attribute_heads) {
    heads.push_back({{"kind", h.kind}, {"slot", h.slot}, {"weights", matrix_to_json(h.weights)}});
  }
  return {{"format", "clinlogic-encoder"},
          {"version", 1},
          {"seed", seed},
          {"input_dim", W.empty() ? 0 : W.front().cols()},
          {"hidden", mean_head.cols()},
          {"latent", mean_head.rows()},
          {"temperature", temperature},
          {"W", std::move(layers)},
          {"relation_bias", vector_to_json(relation_bias)},
          {"decay", vector_to_json(decay)},
          {"mean_head", matrix_to_json(mean_head)},
          {"logvar_head", matrix_to_json(logvar_head)},
          {"decoder_bias", vector_to_json(decoder_bias)},
          {"attribute_heads", std::move(heads)}};
}

EncoderParams EncoderParams::from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "clinlogic-encoder" || doc.at("version").get<int>() != 1) {
      throw Error(ErrorCode::parse_error, "unsupported checkpoint format");
    }
    EncoderParams p;
    p.seed = doc.at("seed").get<std::uint64_t>();
    p.temperature = doc.at("temperature").get<double>();
    for (const auto& w : doc.at("W")) p.W.push_back(matrix_from_json(w));
    p.relation_bias = vector_from_json(doc.at("relation_bias"));
    p.decay = vector_from_json(doc.at("decay"));
    p.mean_head = matrix_from_json(doc.at("mean_head"));
    p.logvar_head = matrix_from_json(doc.at("logvar_head"));
    p.decoder_bias = vector_from_json(doc.at("decoder_bias"));
    for (const auto& h : doc.at("attribute_heads")) {
      p.attribute_heads.push_back(
          {h.at("kind").get<KindId>(), h.at("slot").get<std::size_t>(), matrix_from_json(h.at("weights"))});
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("checkpoint: ") + e.what());
  }
}

void EncoderParams::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write checkpoint " + path);
  out << to_json().dump() << '\n';
}

EncoderParams EncoderParams::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open checkpoint " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return from_json(doc);
}

double time_kernel(double dt_days, double lambda) { return std::exp(-lambda * dt_days); }

std::vector<double> attention_coeffs(std::span<const double> scores, double temperature) {
  std::vector<double> z(scores.begin(), scores.end());
  for (double& x : z) x /= temperature;
  softmax_inplace(z);
  return z;
}

double recon_loglik(const Eigen::VectorXd& z_u, const Eigen::VectorXd& z_v, double bias, bool observed) {
  if (z_u.size() != z_v.size()) throw Error(ErrorCode::dimension_mismatch, "latent sizes differ");
  const double x = z_u.dot(z_v) + bias;
  return observed ? -softplus(-x) : -softplus(x);
}

double kl_term(const NodeEmbedding& e) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < e.mean.size(); ++i) {
    const double lv = e.log_variance(i);
    kl += e.mean(i) * e.mean(i) + std::exp(lv) - 1.0 - lv;
  }
  return 0.5 * kl;
}

Encoder::Encoder(const ClinicalGraph& graph, EncoderConfig config)
    : graph_(&graph), config_(config), features_(graph.schema()) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  inputs_.resize(static_cast<Eigen::Index>(features_.dim()), n);
  for (Eigen::Index v = 0; v < n; ++v) inputs_.col(v) = features_.features(graph, static_cast<NodeId>(v));
  for (std::size_t e = 0; e < graph.edge_slots(); ++e) {
    const Edge& edge = graph.edge(static_cast<EdgeId>(e));
    if (edge.live) t_now_ = std::max(t_now_, edge.t);
  }
  const Duration window = config_.temporal ? config_.window : kUnboundedWindow;
  neighborhoods_.resize(graph.node_count());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    for (const NeighborEntry& e : graph.temporal_neighborhood(static_cast<NodeId>(v), t_now_, window)) {
      neighborhoods_[v].push_back(
          {index(e.neighbor), e.relation, static_cast<double>(e.delta) / kSecondsPerDay});
    }
  }
}

void Encoder::check(const EncoderParams& p) const {
  auto fail = [](const std::string& what) { return Error(ErrorCode::dimension_mismatch, what); };
  if (p.W.empty()) throw fail("no layers");
  if (static_cast<std::size_t>(p.W.front().cols()) != features_.dim()) {
    throw fail("input width " + std::to_string(p.W.front().cols()) + " != feature width " +
               std::to_string(features_.dim()));
  }
  const Eigen::Index d = p.W.front().rows();
  for (const auto& w : p.W) {
    if (w.rows() != d) throw fail("layer widths differ");
  }
  for (std::size_t l = 1; l < p.W.size(); ++l) {
    if (p.W[l].cols() != d) throw fail("hidden layer must be square");
  }
  const auto relations = static_cast<Eigen::Index>(graph_->schema().relation_names().size());
  if (p.relation_bias.size() != relations + 1 || p.decay.size() != relations + 1) throw fail("relation vectors");
  if (p.decoder_bias.size() != relations) throw fail("decoder bias");
  if (p.mean_head.cols() != d || p.logvar_head.cols() != d || p.mean_head.rows() != p.logvar_head.rows()) {
    throw fail("variational heads");
  }
  for (const auto& h : p.attribute_heads) {
    if (h.weights.cols() != p.mean_head.rows()) throw fail("attribute head width");
  }
  if (!(p.temperature > 0)) throw Error(ErrorCode::invalid_argument, "attention temperature must be positive");
}

Encoder::Forward Encoder::forward(const EncoderParams& p) const {
  check(p);
  Forward f;
  const auto n = inputs_.cols();
  Eigen::MatrixXd h = inputs_;
  for (const auto& w : p.W) {
    Layer layer;
    layer.input = h;
    layer.proj = w * h;
    const double scale = 1.0 / std::sqrt(static_cast<double>(w.rows()));
    const double decay = config_.temporal ? 1.0 : 0.0;
    layer.output.resize(w.rows(), n);
    layer.scores.resize(static_cast<std::size_t>(n));
    layer.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index v = 0; v < n; ++v) {
      const auto& nb = neighborhoods_[static_cast<std::size_t>(v)];
      auto& s = layer.scores[static_cast<std::size_t>(v)];
      s.resize(nb.size());
      for (std::size_t k = 0; k < nb.size(); ++k) {
        s[k] = layer.proj.col(v).dot(layer.proj.col(nb[k].node)) * scale + p.relation_bias(nb[k].relation) -
               decay * p.decay(nb[k].relation) * nb[k].dt_days;
      }
      auto& a = layer.weights[static_cast<std::size_t>(v)];
      a = attention_coeffs(s, p.temperature);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(w.rows());
      for (std::size_t k = 0; k < nb.size(); ++k) g += a[k] * layer.proj.col(nb[k].node);
      layer.output.col(v) = g.unaryExpr([](double x) { return logistic(x); });
    }
    h = layer.output;
    f.layers.push_back(std::move(layer));
  }
  f.mean = p.mean_head * h;
  f.raw_logvar = p.logvar_head * h;
  f.logvar = f.raw_logvar.cwiseMax(-kLogVarianceBound).cwiseMin(kLogVarianceBound);
  return f;
}

std::vector<NodeEmbedding> Encoder::encode(const EncoderParams& params) const {
  const Forward f = forward(params);
  std::vector<NodeEmbedding> out(static_cast<std::size_t>(f.mean.cols()));
  for (Eigen::Index v = 0; v < f.mean.cols(); ++v) {
    out[static_cast<std::size_t>(v)] = {f.mean.col(v), f.logvar.col(v)};
  }
  return out;
}

void Encoder::backward(const EncoderParams& p, const Forward& f, const Eigen::MatrixXd& d_mean,
                       const Eigen::MatrixXd& d_logvar, EncoderParams& grad) const {
  const Eigen::MatrixXd& top = f.layers.back().output;
  Eigen::MatrixXd d_raw = d_logvar;
  for (Eigen::Index j = 0; j < d_raw.cols(); ++j) {
    for (Eigen::Index i = 0; i < d_raw.rows(); ++i) {
      if (std::fabs(f.raw_logvar(i, j)) >= kLogVarianceBound) d_raw(i, j) = 0.0;
    }
  }
  grad.mean_head += d_mean * top.transpose();
  grad.logvar_head += d_raw * top.transpose();
  Eigen::MatrixXd d_h = p.mean_head.transpose() * d_mean + p.logvar_head.transpose() * d_raw;

  const double t = p.temperature;
  for (std::size_t l = p.W.size(); l-- > 0;) {
    const Layer& layer = f.layers[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.W[l].rows()));
    const Eigen::MatrixXd d_g = d_h.cwiseProduct(layer.output.cwiseProduct((1.0 - layer.output.array()).matrix()));
    Eigen::MatrixXd d_p = Eigen::MatrixXd::Zero(layer.proj.rows(), layer.proj.cols());
    for (Eigen::Index v = 0; v < layer.proj.cols(); ++v) {
      const auto& nb = neighborhoods_[static_cast<std::size_t>(v)];
      const auto& a = layer.weights[static_cast<std::size_t>(v)];
      const auto& s = layer.scores[static_cast<std::size_t>(v)];
      std::vector<double> da(nb.size());
      double mix = 0.0;
      for (std::size_t k = 0; k < nb.size(); ++k) {
        d_p.col(nb[k].node) += a[k] * d_g.col(v);
        da[k] = d_g.col(v).dot(layer.proj.col(nb[k].node));
        mix += a[k] * da[k];
      }
      for (std::size_t k = 0; k < nb.size(); ++k) {
        const double de = a[k] * (da[k] - mix);  // through softmax of s / t
        const double ds = de / t;
        grad.temperature += -de * s[k] / (t * t);
        d_p.col(v) += ds * scale * layer.proj.col(nb[k].node);
        d_p.col(nb[k].node) += ds * scale * layer.proj.col(v);
        grad.relation_bias(nb[k].relation) += ds;
        grad.decay(nb[k].relation) -= ds * nb[k].dt_days;
      }
    }
    grad.W[l] += d_p * layer.input.transpose();
    d_h = p.W[l].transpose() * d_p;
  }
  if (!config_.temporal) grad.decay.setZero();
}

Objective::Objective(const Encoder& encoder, std::uint64_t negative_seed, std::size_t negatives)
    : encoder_(&encoder) {
  const ClinicalGraph& g = encoder.graph();
  std::vector<std::vector<std::uint32_t>> by_kind(g.schema().kinds().size());
  for (std::size_t v = 0; v < g.node_count(); ++v) by_kind[g.node(static_cast<NodeId>(v)).kind].push_back(
      static_cast<std::uint32_t>(v));
  Rng rng = Rng::stream(negative_seed, "negatives");
  for (std::size_t e = 0; e < g.edge_slots(); ++e) {
    const Edge& edge = g.edge(static_cast<EdgeId>(e));
    if (!edge.live) continue;
    samples_.push_back({index(edge.src), index(edge.dst), edge.relation, true});
    const auto& pool = by_kind[g.node(edge.dst).kind];
    for (std::size_t k = 0; k < negatives; ++k) {
      samples_.push_back({index(edge.src), pool[rng.below(pool.size())], edge.relation, false});
    }
  }
  set_grammar(Grammar{});
}

void Objective::set_grammar(const Grammar& grammar) {
  grammar_ = grammar;
  bound_ = compile(grammar_, encoder_->graph().schema());
  grammar_bits_ = grammar_cost(grammar_, encoder_->graph().schema()).bits();
}

LossComponents Objective::evaluate(const EncoderParams& params, const LossWeights& w, LossSelector selector,
                                   EncoderParams* grad) const {
  const Encoder::Forward f = encoder_->forward(params);
  const ClinicalGraph& g = encoder_->graph();
  const auto n = f.mean.cols();
  const auto dz = f.mean.rows();

  const bool weighted = selector == LossSelector::total || selector == LossSelector::differentiable;
  const double c_recon = weighted || selector == LossSelector::recon ? 1.0 : 0.0;
  const double c_kl = weighted ? w.beta : (selector == LossSelector::kl ? 1.0 : 0.0);
  const double c_soft = weighted ? w.gamma : (selector == LossSelector::soft_consistency ? 1.0 : 0.0);

  Eigen::MatrixXd d_mean;
  Eigen::MatrixXd d_logvar;
  if (grad) {
    *grad = params.zeros_like();
    d_mean = Eigen::MatrixXd::Zero(dz, n);
    d_logvar = Eigen::MatrixXd::Zero(dz, n);
  }

  LossComponents out;
  {
    for (const EdgeSample& s : samples_) {
      const double x = f.mean.col(s.src).dot(f.mean.col(s.dst)) + params.decoder_bias(s.relation);
      out.recon += s.observed ? softplus(-x) : softplus(x);
      if (grad && c_recon != 0.0) {
        const double dx = (s.observed ? logistic(x) - 1.0 : logistic(x)) * c_recon;
        d_mean.col(s.src) += dx * f.mean.col(s.dst);
        d_mean.col(s.dst) += dx * f.mean.col(s.src);
        grad->decoder_bias(s.relation) += dx;
      }
    }
  }

  for (Eigen::Index v = 0; v < n; ++v) {
    for (Eigen::Index i = 0; i < dz; ++i) {
      const double mu = f.mean(i, v);
      const double lv = f.logvar(i, v);
      out.kl += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
      if (grad && c_kl != 0.0) {
        d_mean(i, v) += c_kl * mu;
        d_logvar(i, v) += c_kl * 0.5 * (std::exp(lv) - 1.0);
      }
    }
  }

  if (!bound_.empty()) {
    // Attribute heads by kind, for the relaxation of each node.
    std::vector<std::vector<const AttributeHead*>> heads(g.schema().kinds().size());
    std::vector<std::vector<std::size_t>> head_index(g.schema().kinds().size());
    for (std::size_t h = 0; h < params.attribute_heads.size(); ++h) {
      heads[params.attribute_heads[h].kind].push_back(&params.attribute_heads[h]);
      head_index[params.attribute_heads[h].kind].push_back(h);
    }
    for (Eigen::Index v = 0; v < n; ++v) {
      const auto node = static_cast<NodeId>(v);
      const KindId kind = g.node(node).kind;
      bool any = false;
      for (const auto& c : bound_) any = any || c.may_apply_to(kind);
      if (!any) continue;
      Relaxation relax = point_mass(g, node);
      std::vector<std::pair<const AttributeHead*, std::size_t>> used;
      for (std::size_t h = 0; h < heads[kind].size(); ++h) {
        const AttributeHead* head = heads[kind][h];
        if (!g.node(node).attrs[head->slot]) continue;
        Eigen::VectorXd y = head->weights * f.mean.col(v);
        std::vector<double> pi(y.data(), y.data() + y.size());
        softmax_inplace(pi);
        relax.simplex[head->slot] = std::move(pi);
        used.emplace_back(head, head_index[kind][h]);
      }
      SoftGradient sg;
      for (const auto& c : bound_) {
        out.soft_violation += 1.0 - soft_sat(c, node, g, relax, 0.0, grad && c_soft != 0.0 ? &sg : nullptr);
      }
      if (!grad || c_soft == 0.0) continue;
      for (const auto& [head, hi] : used) {
        auto it = sg.simplex.find(head->slot);
        if (it == sg.simplex.end()) continue;
        const auto& pi = relax.simplex.at(head->slot);
        // d(1 - S)/d pi = -dS/d pi, then back through the softmax.
        double mix = 0.0;
        for (std::size_t j = 0; j < pi.size(); ++j) mix += pi[j] * -it->second[j];
        Eigen::VectorXd dy(static_cast<Eigen::Index>(pi.size()));
        for (std::size_t j = 0; j < pi.size(); ++j) dy(static_cast<Eigen::Index>(j)) = c_soft * pi[j] * (-it->second[j] - mix);
        grad->attribute_heads[hi].weights += dy * f.mean.col(v).transpose();
        d_mean.col(v) += head->weights.transpose() * dy;
      }
    }
  }

  out.grammar_bits = grammar_bits_;
  out.differentiable = out.recon + w.beta * out.kl + w.gamma * out.soft_violation;
  out.total = out.differentiable + w.alpha * out.grammar_bits;
  if (grad) encoder_->backward(params, f, d_mean, d_logvar, *grad);
  return out;
}

std::vector<double> Objective::reconstruction_error(const EncoderParams& params) const {
  const Encoder::Forward f = encoder_->forward(params);
  const auto n = static_cast<std::size_t>(f.mean.cols());
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (const EdgeSample& s : samples_) {
    if (!s.observed) continue;
    const double x = f.mean.col(s.src).dot(f.mean.col(s.dst)) + params.decoder_bias(s.relation);
    const double nll = softplus(-x);
    sum[s.src] += nll;
    sum[s.dst] += nll;
    ++count[s.src];
    ++count[s.dst];
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (count[v]) sum[v] /= static_cast<double>(count[v]);
  }
  return sum;
}

namespace {

double selected(const LossComponents& c, LossSelector s) {
  switch (s) {
    case LossSelector::recon: return c.recon;
    case LossSelector::kl: return c.kl;
    case LossSelector::soft_consistency: return c.soft_violation;
    case LossSelector::differentiable: return c.differentiable;
    case LossSelector::total: return c.total;
  }
  return c.total;
}

}  // namespace

double max_relative_error(const Objective& objective, const EncoderParams& params, const LossWeights& weights,
                          LossSelector selector, double epsilon, double floor) {
  EncoderParams grad;
  objective.evaluate(params, weights, selector, &grad);
  const auto analytic = grad.flatten();
  auto x = params.flatten();
  EncoderParams probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + epsilon;
    probe.assign(x);
    const double up = selected(objective.evaluate(probe, weights, selector), selector);
    x[i] = keep - epsilon;
    probe.assign(x);
    const double down = selected(objective.evaluate(probe, weights, selector), selector);
    x[i] = keep;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), floor});
    worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace clinlogic
