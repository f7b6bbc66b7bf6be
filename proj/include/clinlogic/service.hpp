// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinlogic/healer.hpp"

namespace clinlogic {

enum class ItemStatus { open, resolved };
enum class ResolutionAction { apply_repair, mark_valid, reject };

std::string_view to_string(ItemStatus status) noexcept;
std::string_view to_string(ResolutionAction action) noexcept;
ItemStatus parse_item_status(std::string_view text);
ResolutionAction parse_resolution_action(std::string_view text);

struct Resolution {
  ResolutionAction action = ResolutionAction::reject;
  std::size_t repair_index = 0;  // apply_repair only
  std::string actor;
  std::string time;  // set by the service
};

struct ReviewItem {
  std::uint64_t id = 0;
  AnomalyReport report;
  std::vector<ViolatedClause> violated;
  std::vector<RepairCandidate> repairs;
  ItemStatus status = ItemStatus::open;
  std::optional<Resolution> resolution;
  std::uint64_t graph_version = 0;  // when the repairs were proposed
};

struct ServiceConfig {
  ThresholdMethod threshold = ThresholdMethod::sigma(3.0);
  RepairConfig repair;
  std::string audit_log;  // JSONL; empty disables the file
  std::size_t default_page_size = 20;
  std::size_t max_page_size = 500;
  std::function<std::string()> clock;  // ISO-8601 UTC by default
};

struct ItemFilter {
  std::optional<double> min_score;
  std::optional<ItemStatus> status;  // unset: every status
  std::size_t page = 1;              // 1-based
  std::size_t page_size = 0;         // 0: the configured default
};

struct ItemPage {
  std::vector<ReviewItem> items;
  std::size_t page = 1;
  std::size_t page_size = 0;
  std::size_t total = 0;
  std::uint64_t version = 0;
};

struct RescoreSummary {
  std::size_t nodes = 0;
  std::size_t flagged = 0;
  std::size_t open = 0;
  std::size_t resolved = 0;
  double threshold = 0.0;
  std::map<std::string, double> quantiles;  // min, p25, p50, p75, p95, p99, max
  std::uint64_t version = 0;
};

struct ResolveResult {
  ReviewItem item;
  std::optional<AnomalyReport> new_report;
  std::uint64_t version = 0;
};

/// Review queue over one graph. The threshold is calibrated once, at
/// initialization; rescore keeps it fixed. Readers share the state, resolve
/// and rescore are serialized. Nodes marked valid never re-enter the queue.
class ReviewService {
 public:
  explicit ReviewService(ServiceConfig config = {});

  // Takes ownership of the graph; scores it and fills the queue.
  void initialize(ClinicalGraph graph, Grammar grammar);
  bool ready() const;

  ItemPage list_anomalies(const ItemFilter& filter) const;
  ReviewItem item(std::uint64_t id) const;
  ResolveResult resolve(std::uint64_t id, Resolution resolution);
  RescoreSummary rescore();

  RescoreSummary summary() const;
  std::uint64_t version() const;
  double threshold() const;
  std::set<NodeId> allowlist() const;

  // JSON views for the HTTP layer; every object carries "version".
  nlohmann::json item_json(const ReviewItem& item, bool detail) const;
  nlohmann::json stats_json() const;
  nlohmann::json grammar_json() const;

  // Runs `f` with shared access to the graph.
  void with_graph(const std::function<void(const ClinicalGraph&)>& f) const;

 private:
  RescoreSummary rescore_locked();
  RescoreSummary summary_locked() const;
  void require_ready() const;
  void audit(const nlohmann::json& line);
  nlohmann::json item_json_locked(const ReviewItem& item, bool detail) const;

  ServiceConfig config_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<ClinicalGraph> graph_;
  Grammar grammar_;
  CodeLength threshold_;
  std::vector<double> scores_;
  std::map<std::uint64_t, ReviewItem> items_;
  std::map<NodeId, std::uint64_t> open_by_node_;
  std::set<NodeId> allowlist_;
  std::uint64_t next_id_ = 1;
  bool ready_ = false;
};

/// HTTP front end (JSON):
///   GET  /api/anomalies?min_score&status&page&page_size
///   GET  /api/anomalies/{id}
///   POST /api/anomalies/{id}/resolution
///   POST /api/rescore
///   GET  /api/stats
///   GET  /api/grammar
/// 404 unknown item, 409 stale or already resolved, 503 not ready,
/// 400 malformed request.
class HttpServer {
 public:
  explicit HttpServer(ReviewService& service, std::string static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace clinlogic
