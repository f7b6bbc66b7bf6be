// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "clinlogic/error.hpp"
#include "clinlogic/records.hpp"
#include "clinlogic/rng.hpp"

namespace clinlogic {

using nlohmann::json;

const Normal& AttributeDistribution::params(const std::string& given_value) const {
  auto it = by.find(given_value);
  return it == by.end() ? normal : it->second;
}

namespace {

Normal normal_from_json(const json& j) { return {j.at("mean").get<double>(), j.at("sd").get<double>()}; }
json normal_to_json(const Normal& n) { return {{"mean", n.mean}, {"sd", n.sd}}; }

std::vector<std::pair<std::string, double>> weights_from_json(const json& j) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [k, v] : j.items()) out.emplace_back(k, v.get<double>());
  return out;
}

json weights_to_json(const std::vector<std::pair<std::string, double>>& w) {
  json j = json::object();
  for (const auto& [k, v] : w) j[k] = v;
  return j;
}

}  // namespace

CorpusConfig CorpusConfig::from_json(const json& doc) {
  CorpusConfig c;
  try {
    c.seed = doc.value("seed", c.seed);
    c.n_patients = doc.value("n_patients", c.n_patients);
    c.n_physicians = doc.value("n_physicians", c.n_physicians);
    c.n_events = doc.value("n_events", c.n_events);
    c.violation_rate = doc.value("violation_rate", c.violation_rate);
    c.extreme_rate = doc.value("extreme_rate", c.extreme_rate);
    c.patient_kind = doc.value("patient_kind", c.patient_kind);
    c.provider_kind = doc.value("provider_kind", c.provider_kind);
    c.event_mix = weights_from_json(doc.at("event_mix"));
    c.t0 = doc.value("t0", c.t0);
    c.span_days = doc.value("span_days", c.span_days);
    c.planted_grammar = doc.value("planted_grammar", std::vector<std::string>{});
    c.schema = Schema::from_json(doc.at("schema"));
    for (const auto& [kind, list] : doc.at("distributions").items()) {
      auto& out = c.distributions[kind];
      for (const auto& d : list) {
        AttributeDistribution a;
        a.attribute = d.at("attribute").get<std::string>();
        if (d.contains("weights")) a.weights = weights_from_json(d.at("weights"));
        a.p = d.value("p", 0.5);
        if (d.contains("normal")) a.normal = normal_from_json(d.at("normal"));
        a.given = d.value("given", std::string());
        if (d.contains("by")) {
          for (const auto& [value, params] : d.at("by").items()) a.by[value] = normal_from_json(params);
        }
        a.decimals = d.value("decimals", 0);
        out.push_back(std::move(a));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("corpus config: ") + e.what());
  }
  c.validate();
  return c;
}

CorpusConfig CorpusConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open corpus config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return from_json(doc);
}

json CorpusConfig::to_json() const {
  json dists = json::object();
  for (const auto& [kind, list] : distributions) {
    json arr = json::array();
    for (const auto& a : list) {
      json d{{"attribute", a.attribute}};
      if (!a.weights.empty()) d["weights"] = weights_to_json(a.weights);
      const AttributeSpec* spec = schema.find_attribute(a.attribute);
      if (spec && spec->type == AttrType::boolean) d["p"] = a.p;
      if (spec && spec->type == AttrType::numeric) {
        d["normal"] = normal_to_json(a.normal);
        d["decimals"] = a.decimals;
        if (!a.given.empty()) {
          d["given"] = a.given;
          json by = json::object();
          for (const auto& [v, n] : a.by) by[v] = normal_to_json(n);
          d["by"] = by;
        }
      }
      arr.push_back(std::move(d));
    }
    dists[kind] = std::move(arr);
  }
  return {{"seed", seed},
          {"n_patients", n_patients},
          {"n_physicians", n_physicians},
          {"n_events", n_events},
          {"violation_rate", violation_rate},
          {"extreme_rate", extreme_rate},
          {"patient_kind", patient_kind},
          {"provider_kind", provider_kind},
          {"event_mix", weights_to_json(event_mix)},
          {"t0", t0},
          {"span_days", span_days},
          {"planted_grammar", planted_grammar},
          {"schema", schema.to_json()},
          {"distributions", std::move(dists)}};
}

void CorpusConfig::validate() const {
  auto bad = [](const std::string& why) { return Error(ErrorCode::invalid_argument, "corpus config: " + why); };
  if (!(violation_rate >= 0 && violation_rate <= 1)) throw bad("violation_rate outside [0, 1]");
  if (!(extreme_rate >= 0 && extreme_rate <= 1)) throw bad("extreme_rate outside [0, 1]");
  if (n_patients == 0 || n_physicians == 0) throw bad("need at least one patient and one physician");
  if (span_days <= 0 || t0 < 0) throw bad("bad time span");
  if (!schema.kind_id(patient_kind) || !schema.kind_id(provider_kind)) throw bad("unknown patient/provider kind");
  if (n_events > 0 && event_mix.empty()) throw bad("event_mix is empty");
  for (const auto& [kind, w] : event_mix) {
    if (!schema.kind_id(kind)) throw bad("unknown event kind " + kind);
    if (!(w > 0)) throw bad("event share must be positive");
  }
  for (const auto& [kind, list] : distributions) {
    auto kid = schema.kind_id(kind);
    if (!kid) throw bad("distribution for unknown kind " + kind);
    const KindSpec& spec = schema.kind(*kid);
    for (const auto& d : list) {
      auto slot = spec.slot(d.attribute);
      if (!slot) throw bad(kind + " has no attribute " + d.attribute);
      const AttributeSpec& a = spec.attributes[*slot];
      if (a.type == AttrType::categorical) {
        if (d.weights.empty()) throw bad(d.attribute + " needs weights");
        for (const auto& [v, w] : d.weights) {
          if (!a.symbol(v)) throw bad(d.attribute + " weight for unknown value " + v);
          if (!(w >= 0)) throw bad("negative weight");
        }
      }
      if (a.type == AttrType::numeric) {
        if (!(d.normal.sd > 0)) throw bad(d.attribute + " needs a positive sd");
        for (const auto& [v, n] : d.by) {
          if (!(n.sd > 0)) throw bad(d.attribute + " needs a positive sd");
        }
      }
    }
  }
  // Parse errors surface as the parser's own codes.
  for (const auto& text : planted_grammar) parse_clause(text, schema);
}

namespace {

constexpr int kMaxTries = 5000;

std::string pick_weighted(const std::vector<std::pair<std::string, double>>& weights, Rng& rng) {
  double total = 0.0;
  for (const auto& [v, w] : weights) total += w;
  double x = rng.uniform() * total;
  for (const auto& [v, w] : weights) {
    if (x < w) return v;
    x -= w;
  }
  return weights.back().first;
}

double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

class Generator {
 public:
  explicit Generator(const CorpusConfig& config)
      : config_(config),
        schema_(std::make_shared<const Schema>(config.schema)),
        graph_(schema_),
        patient_kind_(*schema_->kind_id(config.patient_kind)),
        provider_kind_(*schema_->kind_id(config.provider_kind)) {
    for (const auto& text : config.planted_grammar) planted_.add(parse_clause(text, *schema_));
    bound_ = compile(planted_, *schema_);
  }

  Corpus run() {
    Rng nodes = Rng::stream(config_.seed, "nodes");
    Rng links = Rng::stream(config_.seed, "links");
    for (std::size_t i = 0; i < config_.n_patients; ++i) patients_.push_back(make_node(patient_kind_, nodes));
    for (std::size_t i = 0; i < config_.n_physicians; ++i) providers_.push_back(make_node(provider_kind_, nodes));
    const auto consultation = relation_between(patient_kind_, provider_kind_);
    if (consultation) {
      for (NodeId p : patients_) {
        const NodeId doc = providers_[links.below(providers_.size())];
        add_edge(p, doc, *consultation, random_time(links));
      }
    }
    for (std::size_t i = 0; i < config_.n_events; ++i) {
      const KindId kind = *schema_->kind_id(pick_weighted(config_.event_mix, nodes));
      const NodeId e = make_node(kind, nodes);
      attach_event(e, links);
    }

    Rng corrupt = Rng::stream(config_.seed, "violations");
    const auto n_violations = static_cast<std::size_t>(std::floor(config_.violation_rate * config_.n_events));
    if (n_violations > 0 && planted_.empty()) {
      throw Error(ErrorCode::infeasible_config, "violations requested without a planted grammar");
    }
    for (std::size_t i = 0; i < n_violations; ++i) inject_violation(i % planted_.size(), corrupt);

    Rng tails = Rng::stream(config_.seed, "extremes");
    const auto n_extremes = static_cast<std::size_t>(std::floor(config_.extreme_rate * config_.n_events));
    for (std::size_t i = 0; i < n_extremes; ++i) inject_extreme(tails);

    // Rebuild so rejected edges leave no dead slots behind.
    std::stringstream records;
    export_records(graph_, records);
    Corpus out{ClinicalGraph(schema_), std::move(truth_), planted_};
    ingest(out.graph, records);
    refresh_stats(out.planted, out.graph);
    return out;
  }

 private:
  Timestamp random_time(Rng& rng) {
    const auto seconds = static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(config_.span_days) * 86400));
    return config_.t0 + seconds;
  }

  std::optional<std::string> relation_between(KindId src, KindId dst) const {
    for (const auto& t : schema_->relation_triples()) {
      if (*schema_->kind_id(t.src) == src && *schema_->kind_id(t.dst) == dst) return t.relation;
    }
    return std::nullopt;
  }

  const std::vector<AttributeDistribution>* distributions(KindId kind) const {
    auto it = config_.distributions.find(schema_->kind(kind).name);
    return it == config_.distributions.end() ? nullptr : &it->second;
  }

  const AttributeDistribution* distribution(KindId kind, const std::string& attribute) const {
    const auto* list = distributions(kind);
    if (!list) return nullptr;
    for (const auto& d : *list) {
      if (d.attribute == attribute) return &d;
    }
    return nullptr;
  }

  std::string given_value(const RawAttributes& attrs, const std::string& name) const {
    auto it = attrs.find(name);
    if (it == attrs.end()) return {};
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    if (const auto* b = std::get_if<bool>(&it->second)) return *b ? "true" : "false";
    return {};
  }

  Normal numeric_params(const AttributeDistribution& d, const RawAttributes& attrs) const {
    return d.given.empty() ? d.normal : d.params(given_value(attrs, d.given));
  }

  RawValue sample(KindId kind, const AttributeDistribution& d, const RawAttributes& attrs, Rng& rng) const {
    const KindSpec& spec = schema_->kind(kind);
    const AttributeSpec& a = spec.attributes[*spec.slot(d.attribute)];
    switch (a.type) {
      case AttrType::categorical: return pick_weighted(d.weights, rng);
      case AttrType::boolean: return rng.bernoulli(d.p);
      case AttrType::numeric:
      case AttrType::timestamp: {
        const Normal n = numeric_params(d, attrs);
        return std::clamp(round_to(rng.normal(n.mean, n.sd), d.decimals), a.min, a.max);
      }
    }
    return 0.0;
  }

  RawAttributes current(NodeId v) const {
    const Node& n = graph_.node(v);
    RawAttributes out;
    const KindSpec& spec = schema_->kind(n.kind);
    for (std::size_t s = 0; s < n.attrs.size(); ++s) {
      if (n.attrs[s]) out.emplace(spec.attributes[s].name, graph_.render(n.kind, s, *n.attrs[s]));
    }
    return out;
  }

  std::optional<std::size_t> first_violation(NodeId v) const {
    for (std::size_t c = 0; c < bound_.size(); ++c) {
      if (bound_[c].evaluate(graph_, v).outcome == Outcome::violated) return c;
    }
    return std::nullopt;
  }

  void set_raw(NodeId v, const std::string& attribute, const RawValue& raw) {
    const KindId kind = graph_.node(v).kind;
    const std::size_t slot = *schema_->kind(kind).slot(attribute);
    graph_.set_attribute(v, slot, graph_.resolve(kind, slot, raw));
  }

  NodeId make_node(KindId kind, Rng& rng) {
    RawAttributes attrs;
    if (const auto* list = distributions(kind)) {
      for (const auto& d : *list) attrs[d.attribute] = sample(kind, d, attrs, rng);
    }
    const NodeId v = graph_.add_node(schema_->kind(kind).name, attrs);
    // Resample clause heads until the node is clean on its own.
    for (int tries = 0; tries < kMaxTries; ++tries) {
      auto c = first_violation(v);
      if (!c) return v;
      const Atom& head = planted_.clauses[*c].head;
      const AttributeDistribution* d = head.is_focus_attribute() ? distribution(kind, head.name) : nullptr;
      if (!d) {
        throw Error(ErrorCode::infeasible_config,
                    "cannot satisfy '" + config_.planted_grammar[*c] + "' for a new " + schema_->kind(kind).name);
      }
      set_raw(v, head.name, sample(kind, *d, current(v), rng));
    }
    throw Error(ErrorCode::infeasible_config, "clean " + schema_->kind(kind).name + " not reachable by resampling");
  }

  bool clean(NodeId v) const { return !first_violation(v).has_value(); }

  void add_edge(NodeId src, NodeId dst, const std::string& relation, Timestamp t) {
    graph_.add_edge(src, dst, relation, t);
  }

  // Links an event to a compatible patient and, when the schema allows, a
  // provider; both endpoints must stay clean.
  void attach_event(NodeId e, Rng& rng) {
    const KindId kind = graph_.node(e).kind;
    const Timestamp t = random_time(rng);
    auto link = [&](const std::vector<NodeId>& pool, KindId pool_kind) {
      bool forward = true;
      auto rel = relation_between(pool_kind, kind);
      if (!rel) {
        rel = relation_between(kind, pool_kind);
        forward = false;
      }
      if (!rel) return;
      for (int tries = 0; tries < kMaxTries; ++tries) {
        const NodeId other = pool[rng.below(pool.size())];
        const NodeId src = forward ? other : e;
        const NodeId dst = forward ? e : other;
        const EdgeId id = graph_.add_edge(src, dst, *rel, t);
        if (clean(other) && clean(e)) return;
        graph_.remove_edge(id);
      }
      throw Error(ErrorCode::infeasible_config, "no compatible " + schema_->kind(pool_kind).name + " for a " +
                                                    schema_->kind(kind).name + " event");
    };
    link(patients_, patient_kind_);
    link(providers_, provider_kind_);
  }

  std::vector<NodeId> neighbors(NodeId v) const {
    std::vector<NodeId> out;
    for (EdgeId e : graph_.incident(v)) {
      const NodeId u = graph_.other_end(graph_.edge(e), v);
      if (u != v) out.push_back(u);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<Outcome> outcomes(NodeId v) const {
    std::vector<Outcome> out;
    for (const auto& c : bound_) out.push_back(c.evaluate(graph_, v).outcome);
    return out;
  }

  bool labeled(NodeId v) const { return truth_.is_violation(v) || truth_.is_extreme(v); }

  // A recorded value of `attribute` from another node of the same kind for
  // which `accept` holds; approximates the attribute's marginal.
  std::optional<double> donor_value(KindId kind, std::size_t slot, const std::function<bool(double)>& accept,
                                    Rng& rng) const {
    for (int tries = 0; tries < kMaxTries; ++tries) {
      const auto u = static_cast<NodeId>(rng.below(graph_.node_count()));
      const Node& n = graph_.node(u);
      if (n.kind != kind || !n.attrs[slot]) continue;
      const double x = std::get<double>(*n.attrs[slot]);
      if (accept(x)) return x;
    }
    return std::nullopt;
  }

  std::optional<RawValue> falsify(NodeId v, const Atom& atom, Rng& rng) const {
    const KindId kind = graph_.node(v).kind;
    const std::size_t slot = *schema_->kind(kind).slot(atom.name);
    const AttributeSpec& spec = schema_->kind(kind).attributes[slot];
    if (atom.form == AtomForm::cmp) {
      auto x = donor_value(
          kind, slot, [&](double x) { return !holds(atom.op, x, atom.constant) && x != atom.constant; }, rng);
      if (x) return *x;
      return std::nullopt;
    }
    if (spec.type == AttrType::boolean) return atom.value != "true";
    std::vector<std::string> options;
    for (const auto& s : spec.vocabulary) {
      if (s != atom.value) options.push_back(s);
    }
    if (options.empty()) return std::nullopt;
    return options[rng.below(options.size())];
  }

  std::optional<RawValue> satisfy(NodeId v, const Atom& atom, Rng& rng) const {
    const KindId kind = graph_.node(v).kind;
    const std::size_t slot = *schema_->kind(kind).slot(atom.name);
    const AttributeSpec& spec = schema_->kind(kind).attributes[slot];
    if (atom.form == AtomForm::cmp) {
      auto x = donor_value(kind, slot, [&](double x) { return holds(atom.op, x, atom.constant); }, rng);
      if (x) return *x;
      return std::nullopt;
    }
    if (spec.type == AttrType::boolean) return atom.value == "true";
    return atom.value;
  }

  bool try_corrupt(NodeId v, std::size_t c, Rng& rng) {
    if (labeled(v)) return false;
    const BoundClause& clause = bound_[c];
    const Clause& text = clause.clause();
    const KindId kind = graph_.node(v).kind;
    const std::size_t head = text.body.size();
    if (!text.head.is_focus_attribute() || clause.slot(head, kind) < 0) return false;

    const Outcome before = clause.evaluate(graph_, v).outcome;
    const bool head_mode = before == Outcome::satisfied;
    const bool body_mode = text.body.size() == 1 && text.body[0].is_focus_attribute() && clause.slot(0, kind) >= 0 &&
                           !clause.atom_holds(0, graph_, v, std::nullopt) &&
                           !clause.atom_holds(head, graph_, v, std::nullopt);
    if (!head_mode && !body_mode) return false;
    const bool use_head = head_mode && (!body_mode || rng.bernoulli(0.5));
    const Atom& target = use_head ? text.head : text.body[0];
    const auto value = use_head ? falsify(v, target, rng) : satisfy(v, target, rng);
    if (!value) return false;

    const auto around = neighbors(v);
    std::vector<std::vector<Outcome>> around_before;
    for (NodeId u : around) around_before.push_back(outcomes(u));

    const std::size_t slot = *schema_->kind(kind).slot(target.name);
    const auto old = graph_.node(v).attrs[slot];
    set_raw(v, target.name, *value);
    bool ok = clause.evaluate(graph_, v).outcome == Outcome::violated;
    for (std::size_t i = 0; ok && i < around.size(); ++i) ok = outcomes(around[i]) == around_before[i];
    if (!ok) {
      graph_.set_attribute(v, slot, old);
      return false;
    }
    std::optional<RawValue> original;
    if (old) original = graph_.render(kind, slot, *old);
    truth_.violations[v] = ViolationLabel{c, target.name, original};
    return true;
  }

  void inject_violation(std::size_t c, Rng& rng) {
    std::vector<NodeId> pool;
    const BoundClause& clause = bound_[c];
    const std::size_t head = clause.clause().body.size();
    for (std::size_t i = 0; i < graph_.node_count(); ++i) {
      const KindId k = graph_.node(static_cast<NodeId>(i)).kind;
      if (clause.may_apply_to(k) && clause.slot(head, k) >= 0) pool.push_back(static_cast<NodeId>(i));
    }
    for (int tries = 0; !pool.empty() && tries < kMaxTries; ++tries) {
      if (try_corrupt(pool[rng.below(pool.size())], c, rng)) return;
    }
    throw Error(ErrorCode::infeasible_config, "no node can be corrupted against '" + config_.planted_grammar[c] + "'");
  }

  void inject_extreme(Rng& rng) {
    for (int tries = 0; tries < kMaxTries; ++tries) {
      const auto v = static_cast<NodeId>(rng.below(graph_.node_count()));
      if (labeled(v)) continue;
      const KindId kind = graph_.node(v).kind;
      const auto* list = distributions(kind);
      if (!list) continue;
      std::vector<const AttributeDistribution*> numeric;
      const KindSpec& spec = schema_->kind(kind);
      for (const auto& d : *list) {
        if (spec.attributes[*spec.slot(d.attribute)].type == AttrType::numeric) numeric.push_back(&d);
      }
      if (numeric.empty()) continue;
      const AttributeDistribution& d = *numeric[rng.below(numeric.size())];
      const std::size_t slot = *spec.slot(d.attribute);
      const AttributeSpec& a = spec.attributes[slot];
      const Normal n = numeric_params(d, current(v));
      const double z = rng.uniform(2.576, 3.5);
      const double x = round_to(n.mean + z * n.sd, d.decimals);
      if (x > a.max || x < n.mean + 2.576 * n.sd) continue;

      const auto around = neighbors(v);
      std::vector<std::vector<Outcome>> before{outcomes(v)};
      for (NodeId u : around) before.push_back(outcomes(u));
      const auto old = graph_.node(v).attrs[slot];
      graph_.set_attribute(v, slot, graph_.resolve(kind, slot, x));
      bool ok = outcomes(v) == before[0] && clean(v);
      for (std::size_t i = 0; ok && i < around.size(); ++i) ok = outcomes(around[i]) == before[i + 1];
      if (!ok) {
        graph_.set_attribute(v, slot, old);
        continue;
      }
      truth_.extremes.insert(v);
      return;
    }
    throw Error(ErrorCode::infeasible_config, "no node can take an extreme value");
  }

  const CorpusConfig& config_;
  std::shared_ptr<const Schema> schema_;
  ClinicalGraph graph_;
  KindId patient_kind_;
  KindId provider_kind_;
  Grammar planted_;
  std::vector<BoundClause> bound_;
  std::vector<NodeId> patients_;
  std::vector<NodeId> providers_;
  GroundTruth truth_;
};

}  // namespace

Corpus generate(const CorpusConfig& config) {
  config.validate();
  return Generator(config).run();
}

void write_labels(const GroundTruth& truth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write labels file " + path);
  // One line per labeled node in NodeId order.
  auto v = truth.violations.begin();
  auto x = truth.extremes.begin();
  while (v != truth.violations.end() || x != truth.extremes.end()) {
    json rec;
    if (x == truth.extremes.end() || (v != truth.violations.end() && v->first < *x)) {
      rec = {{"node", index(v->first)}, {"label", "violation"}, {"clause", v->second.clause}, {"field", v->second.field}};
      ++v;
    } else {
      rec = {{"node", index(*x)}, {"label", "extreme"}, {"clause", nullptr}, {"field", nullptr}};
      ++x;
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path);
}

GroundTruth load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open labels file " + path);
  GroundTruth truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      const auto node = static_cast<NodeId>(rec.at("node").get<std::uint32_t>());
      const auto label = rec.at("label").get<std::string>();
      if (label == "violation") {
        truth.violations[node] = ViolationLabel{rec.at("clause").get<std::size_t>(), rec.at("field").get<std::string>(),
                                                std::nullopt};
      } else if (label == "extreme") {
        truth.extremes.insert(node);
      } else {
        throw Error(ErrorCode::parse_error, "unknown label '" + label + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return truth;
}

void export_corpus(const Corpus& corpus, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
  const std::filesystem::path root(dir);
  corpus.graph.schema().save((root / "schema.json").string());
  export_records(corpus.graph, (root / "records.jsonl").string());
  write_labels(corpus.truth, (root / "labels.jsonl").string());
  save_grammar(corpus.planted, (root / "planted.txt").string());
}

}  // namespace clinlogic
