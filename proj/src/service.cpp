// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#include "clinlogic/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

#include "clinlogic/error.hpp"

namespace clinlogic {

using nlohmann::json;

std::string_view to_string(ItemStatus status) noexcept {
  return status == ItemStatus::open ? "open" : "resolved";
}

std::string_view to_string(ResolutionAction action) noexcept {
  switch (action) {
    case ResolutionAction::apply_repair: return "apply_repair";
    case ResolutionAction::mark_valid: return "mark_valid";
    case ResolutionAction::reject: return "reject";
  }
  return "reject";
}

ItemStatus parse_item_status(std::string_view text) {
  if (text == "open") return ItemStatus::open;
  if (text == "resolved") return ItemStatus::resolved;
  throw Error(ErrorCode::invalid_argument, "unknown status '" + std::string(text) + "'");
}

ResolutionAction parse_resolution_action(std::string_view text) {
  if (text == "apply_repair") return ResolutionAction::apply_repair;
  if (text == "mark_valid") return ResolutionAction::mark_valid;
  if (text == "reject") return ResolutionAction::reject;
  throw Error(ErrorCode::invalid_argument, "unknown action '" + std::string(text) + "'");
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json raw_to_json(const RawValue& raw) {
  return std::visit([](const auto& x) { return json(x); }, raw);
}

json node_json(const ClinicalGraph& g, NodeId v) {
  const Node& n = g.node(v);
  const KindSpec& spec = g.schema().kind(n.kind);
  json attrs = json::object();
  for (std::size_t s = 0; s < spec.attributes.size(); ++s) {
    attrs[spec.attributes[s].name] = n.attrs[s] ? raw_to_json(g.render(n.kind, s, *n.attrs[s])) : json(nullptr);
  }
  return {{"id", index(v)}, {"kind", spec.name}, {"attributes", std::move(attrs)}};
}

json report_json(const AnomalyReport& r, const Grammar& grammar) {
  json contributions = json::array();
  for (const auto& c : r.contributions) {
    contributions.push_back({{"clause", c.clause},
                             {"text", to_string(grammar.clauses[c.clause])},
                             {"outcome", std::string(to_string(c.outcome))},
                             {"bits", c.bits}});
  }
  return {{"node", index(r.node)},
          {"score", r.score.bits()},
          {"flagged", r.flagged},
          {"contributions", std::move(contributions)}};
}

}  // namespace

ReviewService::ReviewService(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.clock) config_.clock = utc_now;
  if (config_.default_page_size == 0 || config_.max_page_size < config_.default_page_size) {
    throw Error(ErrorCode::invalid_argument, "page sizes");
  }
}

void ReviewService::initialize(ClinicalGraph graph, Grammar grammar) {
  std::unique_lock lock(mutex_);
  if (grammar.stats.size() != grammar.size()) refresh_stats(grammar, graph);
  graph_ = std::make_unique<ClinicalGraph>(std::move(graph));
  grammar_ = std::move(grammar);
  items_.clear();
  open_by_node_.clear();
  allowlist_.clear();
  next_id_ = 1;
  const Scorer scorer(*graph_, grammar_);
  scores_ = scorer.scores();
  threshold_ = calibrate_threshold(scores_, config_.threshold);
  ready_ = true;
  rescore_locked();
}

bool ReviewService::ready() const {
  std::shared_lock lock(mutex_);
  return ready_;
}

void ReviewService::require_ready() const {
  if (!ready_) throw Error(ErrorCode::service_not_ready, "no graph loaded");
}

RescoreSummary ReviewService::rescore() {
  std::unique_lock lock(mutex_);
  require_ready();
  return rescore_locked();
}

RescoreSummary ReviewService::rescore_locked() {
  const Scorer scorer(*graph_, grammar_);
  scores_ = scorer.scores();
  for (auto it = open_by_node_.begin(); it != open_by_node_.end();) {
    const NodeId v = it->first;
    if (scores_[index(v)] > threshold_.bits() && !allowlist_.count(v)) {
      ++it;
      continue;
    }
    items_.erase(it->second);
    it = open_by_node_.erase(it);
  }
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    const auto v = static_cast<NodeId>(i);
    if (!(scores_[i] > threshold_.bits()) || allowlist_.count(v) || open_by_node_.count(v)) continue;
    ReviewItem item;
    item.id = next_id_++;
    items_[item.id] = std::move(item);
    open_by_node_[v] = items_.rbegin()->first;
  }
  for (const auto& [v, id] : open_by_node_) {
    ReviewItem& item = items_.at(id);
    item.report = scorer.report(v, threshold_);
    item.violated = violated_clauses(v, scorer);
    item.graph_version = graph_->version();
    try {
      item.repairs = repair_candidates(v, grammar_, *graph_, config_.repair);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_repair_found) throw;
      item.repairs.clear();
    }
  }
  return summary_locked();
}

RescoreSummary ReviewService::summary() const {
  std::shared_lock lock(mutex_);
  require_ready();
  return summary_locked();
}

RescoreSummary ReviewService::summary_locked() const {
  RescoreSummary s;
  s.nodes = scores_.size();
  s.threshold = threshold_.bits();
  s.version = graph_->version();
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (scores_[i] > threshold_.bits() && !allowlist_.count(static_cast<NodeId>(i))) ++s.flagged;
  }
  for (const auto& [id, item] : items_) (item.status == ItemStatus::open ? s.open : s.resolved) += 1;
  if (!scores_.empty()) {
    const std::pair<const char*, double> qs[] = {{"min", 0.0},  {"p25", 0.25}, {"p50", 0.5}, {"p75", 0.75},
                                                 {"p95", 0.95}, {"p99", 0.99}, {"max", 1.0}};
    for (const auto& [name, q] : qs) {
      s.quantiles[name] = calibrate_threshold(scores_, ThresholdMethod::quantile(q)).bits();
    }
  }
  return s;
}

ItemPage ReviewService::list_anomalies(const ItemFilter& filter) const {
  std::shared_lock lock(mutex_);
  require_ready();
  if (filter.page == 0) throw Error(ErrorCode::invalid_argument, "page is 1-based");
  ItemPage page;
  page.page = filter.page;
  page.page_size = filter.page_size == 0 ? config_.default_page_size
                                         : std::min(filter.page_size, config_.max_page_size);
  page.version = graph_->version();
  std::vector<const ReviewItem*> hits;
  for (const auto& [id, item] : items_) {
    if (filter.status && item.status != *filter.status) continue;
    if (filter.min_score && item.report.score.bits() < *filter.min_score) continue;
    hits.push_back(&item);
  }
  std::stable_sort(hits.begin(), hits.end(), [](const ReviewItem* a, const ReviewItem* b) {
    return a->report.score > b->report.score;
  });
  page.total = hits.size();
  const std::size_t begin = (filter.page - 1) * page.page_size;
  for (std::size_t i = begin; i < hits.size() && i < begin + page.page_size; ++i) page.items.push_back(*hits[i]);
  return page;
}

ReviewItem ReviewService::item(std::uint64_t id) const {
  std::shared_lock lock(mutex_);
  require_ready();
  auto it = items_.find(id);
  if (it == items_.end()) throw Error(ErrorCode::unknown_item, "no item " + std::to_string(id));
  return it->second;
}

ResolveResult ReviewService::resolve(std::uint64_t id, Resolution resolution) {
  std::unique_lock lock(mutex_);
  require_ready();
  auto it = items_.find(id);
  if (it == items_.end()) throw Error(ErrorCode::unknown_item, "no item " + std::to_string(id));
  ReviewItem& item = it->second;
  if (item.status == ItemStatus::resolved) {
    throw Error(ErrorCode::already_resolved, "item " + std::to_string(id) + " is already resolved");
  }
  const NodeId v = item.report.node;
  json line = {{"item", id},
               {"node", index(v)},
               {"action", std::string(to_string(resolution.action))},
               {"actor", resolution.actor},
               {"version_before", graph_->version()}};
  ResolveResult result;
  switch (resolution.action) {
    case ResolutionAction::apply_repair: {
      if (resolution.repair_index >= item.repairs.size()) {
        throw Error(ErrorCode::invalid_argument, "repair index " + std::to_string(resolution.repair_index) +
                                                     " out of range (" + std::to_string(item.repairs.size()) +
                                                     " candidates)");
      }
      const RepairCandidate& candidate = item.repairs[resolution.repair_index];
      const AppliedRepair applied = apply_repair(*graph_, candidate, grammar_, threshold_);
      line["repair_index"] = resolution.repair_index;
      line["edits"] = to_json(candidate, *graph_).at("edits");
      line["score_before"] = item.report.score.bits();
      line["score_after"] = applied.report.score.bits();
      scores_[index(v)] = applied.report.score.bits();
      item.report = applied.report;
      result.new_report = applied.report;
      break;
    }
    case ResolutionAction::mark_valid: allowlist_.insert(v); break;
    case ResolutionAction::reject: break;
  }
  resolution.time = config_.clock();
  item.status = ItemStatus::resolved;
  item.resolution = resolution;
  open_by_node_.erase(v);
  line["time"] = resolution.time;
  line["version_after"] = graph_->version();
  audit(line);
  result.item = item;
  result.version = graph_->version();
  return result;
}

void ReviewService::audit(const json& line) {
  if (config_.audit_log.empty()) return;
  std::ofstream out(config_.audit_log, std::ios::app);
  if (!out) throw Error(ErrorCode::io_error, "cannot append to " + config_.audit_log);
  out << line.dump() << '\n';
}

std::uint64_t ReviewService::version() const {
  std::shared_lock lock(mutex_);
  require_ready();
  return graph_->version();
}

double ReviewService::threshold() const {
  std::shared_lock lock(mutex_);
  require_ready();
  return threshold_.bits();
}

std::set<NodeId> ReviewService::allowlist() const {
  std::shared_lock lock(mutex_);
  return allowlist_;
}

void ReviewService::with_graph(const std::function<void(const ClinicalGraph&)>& f) const {
  std::shared_lock lock(mutex_);
  require_ready();
  f(*graph_);
}

json ReviewService::item_json(const ReviewItem& item, bool detail) const {
  std::shared_lock lock(mutex_);
  require_ready();
  return item_json_locked(item, detail);
}

json ReviewService::item_json_locked(const ReviewItem& item, bool detail) const {
  const ClinicalGraph& g = *graph_;
  const NodeId v = item.report.node;
  json violated = json::array();
  for (const auto& c : item.violated) {
    json witness = {{"x", index(c.witness.x)}};
    witness["y"] = c.witness.y ? json(index(*c.witness.y)) : json(nullptr);
    violated.push_back(
        {{"clause", c.clause}, {"text", to_string(grammar_.clauses[c.clause])}, {"bits", c.bits}, {"witness", witness}});
  }
  json out = {{"id", item.id},
              {"node", index(v)},
              {"kind", g.kind_of(v).name},
              {"score", item.report.score.bits()},
              {"flagged", item.report.flagged},
              {"status", std::string(to_string(item.status))},
              {"graph_version", item.graph_version},
              {"violated", std::move(violated)},
              {"repairs", to_json(item.repairs, g)},
              {"version", g.version()}};
  if (item.resolution) {
    out["resolution"] = {{"action", std::string(to_string(item.resolution->action))},
                         {"actor", item.resolution->actor},
                         {"time", item.resolution->time}};
    if (item.resolution->action == ResolutionAction::apply_repair) {
      out["resolution"]["repair_index"] = item.resolution->repair_index;
    }
  } else {
    out["resolution"] = nullptr;
  }
  if (detail) {
    out["report"] = report_json(item.report, grammar_);
    out["node_record"] = node_json(g, v);
    json hood = json::array();
    for (EdgeId e : g.incident(v)) {
      const Edge& edge = g.edge(e);
      const NodeId u = g.other_end(edge, v);
      hood.push_back({{"edge", index(e)},
                      {"relation", g.schema().relation_name(edge.relation)},
                      {"direction", edge.src == v ? "out" : "in"},
                      {"t", edge.t},
                      {"neighbor", node_json(g, u)}});
    }
    out["neighborhood"] = std::move(hood);
  }
  return out;
}

json ReviewService::stats_json() const {
  std::shared_lock lock(mutex_);
  require_ready();
  const GraphStats gs = graph_->stats();
  const RescoreSummary s = summary_locked();
  return {{"graph",
           {{"nodes", gs.node_count},
            {"edges", gs.edge_count},
            {"per_kind", gs.per_kind},
            {"per_relation", gs.per_relation}}},
          {"grammar_size", grammar_.size()},
          {"threshold", s.threshold},
          {"flagged", s.flagged},
          {"open", s.open},
          {"resolved", s.resolved},
          {"allowlisted", allowlist_.size()},
          {"quantiles", s.quantiles},
          {"version", s.version}};
}

json ReviewService::grammar_json() const {
  std::shared_lock lock(mutex_);
  require_ready();
  json clauses = json::array();
  for (std::size_t c = 0; c < grammar_.size(); ++c) {
    clauses.push_back({{"index", c},
                       {"text", to_string(grammar_.clauses[c])},
                       {"confidence", grammar_.stats[c].confidence()},
                       {"n_applicable", grammar_.stats[c].n_applicable},
                       {"n_satisfied", grammar_.stats[c].n_satisfied}});
  }
  return {{"clauses", std::move(clauses)}, {"version", graph_->version()}};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  ReviewService& service;
  httplib::Server server;

  explicit Impl(ReviewService& s) : service(s) {}

  std::uint64_t current_version() const {
    try {
      return service.version();
    } catch (const Error&) {
      return 0;
    }
  }

  void send(httplib::Response& res, int status, const json& body) const {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void fail(httplib::Response& res, const Error& e) const {
    int status = 400;
    switch (e.code()) {
      case ErrorCode::unknown_item:
      case ErrorCode::missing_node: status = 404; break;
      case ErrorCode::already_resolved:
      case ErrorCode::stale_candidate: status = 409; break;
      case ErrorCode::service_not_ready: status = 503; break;
      case ErrorCode::io_error: status = 500; break;
      default: status = 400; break;
    }
    send(res, status,
         {{"error", std::string(to_string(e.code()))}, {"message", e.what()}, {"version", current_version()}});
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        fail(res, e);
      } catch (const json::exception& e) {
        fail(res, Error(ErrorCode::invalid_argument, e.what()));
      }
    };
  }

  static std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string text = req.get_param_value(name);
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw Error(ErrorCode::invalid_argument, std::string("bad ") + name + " '" + text + "'");
    }
    return value;
  }

  static std::uint64_t item_id(const httplib::Request& req) {
    const std::string text = req.matches[1];
    std::uint64_t id = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
    if (ec != std::errc() || end != text.data() + text.size()) throw Error(ErrorCode::unknown_item, "bad item id");
    return id;
  }

  void routes() {
    server.Get("/api/anomalies", guarded([this](const httplib::Request& req, httplib::Response& res) {
      ItemFilter filter;
      if (req.has_param("min_score")) {
        const std::string text = req.get_param_value("min_score");
        double x = 0;
        auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
        if (ec != std::errc() || end != text.data() + text.size()) {
          throw Error(ErrorCode::invalid_argument, "bad min_score '" + text + "'");
        }
        filter.min_score = x;
      }
      if (req.has_param("status") && req.get_param_value("status") != "all") {
        filter.status = parse_item_status(req.get_param_value("status"));
      }
      filter.page = size_param(req, "page", 1);
      filter.page_size = size_param(req, "page_size", 0);
      const ItemPage page = service.list_anomalies(filter);
      json items = json::array();
      for (const auto& item : page.items) items.push_back(service.item_json(item, false));
      send(res, 200,
           {{"items", std::move(items)},
            {"page", page.page},
            {"page_size", page.page_size},
            {"total", page.total},
            {"version", page.version}});
    }));
    server.Get(R"(/api/anomalies/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, service.item_json(service.item(item_id(req)), true));
    }));
    server.Post(R"(/api/anomalies/(\d+)/resolution)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = json::parse(req.body);
                  if (!body.is_object()) throw Error(ErrorCode::invalid_argument, "body must be an object");
                  Resolution r;
                  r.action = parse_resolution_action(body.at("action").get<std::string>());
                  r.actor = body.at("actor").get<std::string>();
                  if (r.actor.empty()) throw Error(ErrorCode::invalid_argument, "actor must be non-empty");
                  if (r.action == ResolutionAction::apply_repair) {
                    r.repair_index = body.at("repair_index").get<std::size_t>();
                  }
                  const ResolveResult out = service.resolve(item_id(req), r);
                  json new_report = nullptr;
                  if (out.new_report) {
                    new_report = {{"node", index(out.new_report->node)},
                                  {"score", out.new_report->score.bits()},
                                  {"flagged", out.new_report->flagged}};
                  }
                  send(res, 200,
                       {{"item", service.item_json(out.item, false)},
                        {"new_report", std::move(new_report)},
                        {"version", out.version}});
                }));
    server.Post("/api/rescore", guarded([this](const httplib::Request&, httplib::Response& res) {
      const RescoreSummary s = service.rescore();
      send(res, 200,
           {{"nodes", s.nodes},
            {"flagged", s.flagged},
            {"open", s.open},
            {"resolved", s.resolved},
            {"threshold", s.threshold},
            {"quantiles", s.quantiles},
            {"version", s.version}});
    }));
    server.Get("/api/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
      send(res, 200, service.stats_json());
    }));
    server.Get("/api/grammar", guarded([this](const httplib::Request&, httplib::Response& res) {
      send(res, 200, service.grammar_json());
    }));
  }
};

HttpServer::HttpServer(ReviewService& service, std::string static_dir) : impl_(std::make_unique<Impl>(service)) {
  impl_->routes();
  if (!static_dir.empty() && !impl_->server.set_mount_point("/", static_dir)) {
    throw Error(ErrorCode::io_error, "cannot serve " + static_dir);
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::io_error, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace clinlogic
