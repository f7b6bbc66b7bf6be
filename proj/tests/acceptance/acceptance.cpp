// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "../unit/fixtures.hpp"
#include "clinlogic/eval.hpp"
#include "clinlogic/records.hpp"
#include "clinlogic/rng.hpp"
#include "clinlogic/service.hpp"

// After the library headers: <resolv.h> defines a `_res` macro.
#include <httplib.h>

namespace {

using namespace clinlogic;
using namespace clinlogic::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Artifacts of one seeded pipeline run.
struct PipelineRun {
  Corpus corpus;
  TrainResult trained;
  std::vector<AnomalyReport> reports;
  CodeLength threshold;
  double seconds = 0.0;
};

PipelineRun run_pipeline(const fs::path& out) {
  const auto start = Clock::now();
  PipelineRun r{generate(standard_config()), {}, {}, {}, 0.0};
  fs::remove_all(out);
  export_corpus(r.corpus, out.string());
  r.trained = train(r.corpus.graph, TrainConfig{});
  r.trained.params.save((out / "encoder.json").string());
  save_grammar(r.trained.grammar, (out / "grammar.txt").string());
  std::ofstream history(out / "history.csv");
  write_history_csv(history, r.trained.history);
  const Scorer scorer(r.corpus.graph, r.trained.grammar);
  r.threshold = calibrate_threshold(scorer.scores(), ThresholdMethod::sigma(3.0));
  r.reports = scorer.score_all(r.threshold);
  std::ofstream scores(out / "scores.csv");
  write_scores_csv(scores, r.reports, r.trained.grammar);
  r.seconds = seconds_since(start);
  return r;
}

const fs::path& scratch() {
  static const fs::path dir = fs::temp_directory_path() / "clinlogic_acceptance";
  return dir;
}

PipelineRun& first_run() {
  static PipelineRun run = run_pipeline(scratch() / "run_a");
  return run;
}

Verdict detection() {
  const PipelineRun& r = first_run();
  const DetectionMetrics m = detection_metrics(r.reports, r.corpus.truth);
  return {m.f1 >= 0.90 && m.extreme_fp_rate <= 0.05 && r.seconds <= 300.0,
          fmt("F1 %.4f (P %.4f, R %.4f), extreme FP rate %.4f", m.f1, m.precision, m.recall, m.extreme_fp_rate) +
              fmt(", %.1f s", r.seconds)};
}

Verdict rule_recovery() {
  const auto start = Clock::now();
  CorpusConfig config = standard_config();
  config.violation_rate = 0.0;
  config.extreme_rate = 0.0;
  const Corpus corpus = generate(config);
  const Grammar induced = induce(corpus.graph).grammar;
  std::set<std::string> found;
  for (const Clause& c : induced.clauses) found.insert(to_string(c));
  std::size_t hits = 0;
  for (const Clause& c : corpus.planted.clauses) hits += found.count(to_string(c));
  const double share = static_cast<double>(hits) / static_cast<double>(corpus.planted.size());
  const double secs = seconds_since(start);
  return {share >= 0.80 && secs <= 120.0,
          std::to_string(hits) + "/" + std::to_string(corpus.planted.size()) + " planted clauses verbatim" +
              fmt(", %.1f s", secs)};
}

Verdict codelength() {
  std::string detail;
  bool ok = true;
  const std::pair<std::uint64_t, double> gamma[] = {{0, 1}, {1, 3}, {2, 3}, {3, 5}, {6, 5}, {7, 7}, {1024, 21}, {1048575, 41}};
  for (const auto& [n, bits] : gamma) ok &= universal_int(n).bits() == bits;

  ClinicalGraph g(clinic_schema());
  for (int i = 0; i < 99; ++i) add_diagnosis(g, add_patient(g, "female", 30, "general"), "pregnancy");
  add_diagnosis(g, add_patient(g, "male", 30, "general"), "pregnancy");
  const Grammar one = grammar_of({kPregnancyClause}, g);
  const double bernoulli = data_cost(g, one).bits();
  ok &= std::abs(bernoulli - 8.5009) <= 1e-3;
  detail = std::string("Elias-gamma goldens ") + (ok ? "exact" : "mismatch") + fmt(", data bits (100, 99) = %.6f", bernoulli);

  ClinicalGraph h(clinic_schema());
  Rng rng(2024);
  const char* sexes[] = {"female", "male"};
  const char* wards[] = {"general", "pediatric", "maternity"};
  const char* codes[] = {"pregnancy", "diabetes", "influenza"};
  std::vector<NodeId> patients;
  for (int i = 0; i < 300; ++i) {
    patients.push_back(add_patient(h, sexes[rng.below(2)], static_cast<double>(rng.below(100)), wards[rng.below(3)]));
  }
  for (int i = 0; i < 20; ++i) h.add_node("physician", {{"specialty", "obstetrics"}});
  for (int i = 0; i < 180; ++i) add_diagnosis(h, patients[rng.below(patients.size())], codes[rng.below(3)], i);
  const Grammar three = grammar_of({kPregnancyClause, kPediatricClause, kMaternityClause}, h);
  const Scorer scorer(h, three);
  const double full = data_cost_frozen(h, three).bits();
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto v = static_cast<NodeId>(rng.below(h.node_count()));
    const double diff = full - data_cost_frozen(h, three, v).bits();
    worst = std::max(worst, std::abs(scorer.anomaly_score(v).bits() - diff));
  }
  ok &= h.node_count() == 500 && worst <= 1e-9;
  return {ok, detail + fmt(", incremental vs frozen max |diff| %.3g on 100 nodes", worst)};
}

Verdict rarity() {
  Corpus corpus = generate(standard_config());
  ClinicalGraph& g = corpus.graph;
  const Grammar grammar = corpus.planted;
  const KindId patient = *g.schema().kind_id("patient");
  const std::size_t age = *g.schema().kind(patient).slot("age");
  std::vector<double> ages;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto v = static_cast<NodeId>(i);
    if (g.node(v).kind == patient && g.node(v).attrs[age]) ages.push_back(std::get<double>(g.render(patient, age, *g.node(v).attrs[age])));
  }
  std::sort(ages.begin(), ages.end());
  const double p999 = ages[static_cast<std::size_t>(0.999 * static_cast<double>(ages.size() - 1))];
  const double extreme = 120.0;

  const auto bound = compile(grammar, g.schema());
  std::size_t tried = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.node_count() && tried < 200; ++i) {
    const auto v = static_cast<NodeId>(i);
    if (g.node(v).kind != patient || !g.node(v).attrs[age]) continue;
    const double before = Scorer(g, grammar).anomaly_score(v).bits();
    const AttrValue old = *g.node(v).attrs[age];
    g.set_attribute(v, age, g.resolve(patient, age, extreme));
    bool violates = false;
    bool was_clean = true;
    for (const auto& c : bound) violates |= crisp_sat(c, v, g).outcome == clinlogic::Outcome::violated;
    const double after = Scorer(g, grammar).anomaly_score(v).bits();
    g.set_attribute(v, age, old);
    for (const auto& c : bound) was_clean &= crisp_sat(c, v, g).outcome != clinlogic::Outcome::violated;
    if (violates || !was_clean) continue;
    ++tried;
    worst = std::max(worst, std::abs(after - before));
  }
  return {tried > 0 && extreme > p999 && worst == 0.0,
          "age -> " + fmt("%.0f (99.9th pct %.0f) on %.0f clause-consistent patients, max |delta score| %g", extreme,
                          p999, static_cast<double>(tried), worst)};
}

ClinicalGraph gradient_fixture() {
  ClinicalGraph g(clinic_schema());
  Rng rng(77);
  const char* sexes[] = {"female", "male"};
  const char* wards[] = {"general", "pediatric", "maternity"};
  std::vector<NodeId> patients;
  for (int i = 0; i < 8; ++i) {
    patients.push_back(add_patient(g, sexes[rng.below(2)], static_cast<double>(5 + rng.below(60)), wards[rng.below(3)]));
  }
  const NodeId doc = g.add_node("physician", {{"specialty", "obstetrics"}});
  const NodeId gp = g.add_node("physician", {{"specialty", "general_practice"}});
  for (int i = 0; i < 6; ++i) {
    add_diagnosis(g, patients[rng.below(8)], i % 2 ? "pregnancy" : "diabetes", 1600000000 + 86400 * i);
  }
  for (int i = 0; i < 8; ++i) g.add_edge(patients[i], i % 3 ? doc : gp, "consultation", 1600000000 + 43200 * i);
  g.add_edge(patients[0], g.add_node("admission", {{"ward", "maternity"}}), "admission", 1600500000);
  return g;  // 17 nodes
}

Verdict gradients() {
  const ClinicalGraph g = gradient_fixture();
  const Grammar grammar = grammar_of({kPregnancyClause, kPediatricClause, kMaternityClause}, g);
  double enc = 0.0;
  for (bool temporal : {true, false}) {
    EncoderConfig config;
    config.hidden = 6;
    config.latent = 3;
    config.layers = 2;
    config.temporal = temporal;
    const Encoder encoder(g, config);
    Objective objective(encoder, 5, 2);
    objective.set_grammar(grammar);
    EncoderParams params = EncoderParams::init(g.schema(), config, 13);
    params.decay.setConstant(0.03);
    for (LossSelector s : {LossSelector::recon, LossSelector::kl, LossSelector::soft_consistency,
                           LossSelector::differentiable}) {
      enc = std::max(enc, max_relative_error(objective, params, {0.01, 0.1, 0.5}, s, 1e-5));
    }
  }

  // Soft score: directional central differences along simplex-preserving
  // moves and along each numeric coordinate.
  Rng rng(31);
  const double eps = 1e-5, floor = 1e-5;
  double soft = 0.0;
  auto rel = [&](double a, double fd) { return std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor}); };
  for (std::size_t i = 0; i < 8; ++i) {
    const auto v = static_cast<NodeId>(i);
    Relaxation r = point_mass(g, v);
    for (auto& [slot, pi] : r.simplex) {
      double z = 0.0;
      for (double& p : pi) z += (p = 0.1 + rng.uniform(0.0, 1.0));
      for (double& p : pi) p /= z;
    }
    for (auto& [slot, x] : r.numeric) x = rng.uniform(5.0, 40.0);
    const double T = 3.0;
    const SoftScore s = soft_score_gradient(v, grammar, g, r, T);
    for (const auto& [slot, pi] : r.simplex) {
      for (std::size_t a = 0; a < pi.size(); ++a) {
        for (std::size_t b = 0; b < pi.size(); ++b) {
          if (a == b) continue;
          Relaxation up = r, down = r;
          up.simplex[slot][a] += eps, up.simplex[slot][b] -= eps;
          down.simplex[slot][a] -= eps, down.simplex[slot][b] += eps;
          const double fd = (soft_score_gradient(v, grammar, g, up, T).value -
                             soft_score_gradient(v, grammar, g, down, T).value) / (2 * eps);
          const auto& gr = s.gradient.simplex.count(slot) ? s.gradient.simplex.at(slot) : std::vector<double>(pi.size());
          soft = std::max(soft, rel(gr[a] - gr[b], fd));
        }
      }
    }
    for (const auto& [slot, x] : r.numeric) {
      Relaxation up = r, down = r;
      up.numeric[slot] += eps;
      down.numeric[slot] -= eps;
      const double fd =
          (soft_score_gradient(v, grammar, g, up, T).value - soft_score_gradient(v, grammar, g, down, T).value) / (2 * eps);
      const double a = s.gradient.numeric.count(slot) ? s.gradient.numeric.at(slot) : 0.0;
      soft = std::max(soft, rel(a, fd));
    }
  }
  return {g.node_count() <= 20 && enc <= 1e-4 && soft <= 1e-4,
          fmt("%.0f-node fixture, encoder max rel err %.3g, soft-score max rel err %.3g",
              static_cast<double>(g.node_count()), enc, soft)};
}

Verdict healing() {
  PipelineRun& r = first_run();
  std::vector<NodeId> flagged;
  for (const auto& rep : r.reports) {
    if (rep.flagged) flagged.push_back(rep.node);
  }
  const double accuracy = repair_accuracy(r.corpus, r.trained.grammar, flagged, RepairConfig{});

  ClinicalGraph g = r.corpus.graph;
  double worst = 0.0;
  std::size_t checked = 0;
  for (NodeId v : flagged) {
    if (!r.corpus.truth.is_violation(v)) continue;
    std::size_t n = 0;
    try {
      n = repair_candidates(v, r.trained.grammar, g).size();
    } catch (const Error&) {
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const RepairCandidate c = repair_candidates(v, r.trained.grammar, g)[k];
      const AppliedRepair applied = apply_repair(g, c, r.trained.grammar, r.threshold);
      const double fresh = Scorer(g, r.trained.grammar).anomaly_score(v).bits();
      worst = std::max({worst, std::abs(fresh - c.predicted_score_after.bits()),
                        std::abs(applied.report.score.bits() - c.predicted_score_after.bits())});
      revert_repair(g, applied);
      ++checked;
    }
  }
  return {accuracy >= 0.90 && worst <= 1e-9 && checked > 0,
          fmt("top-3 field accuracy %.4f, predicted vs rescored max |diff| %.3g over %.0f candidates", accuracy, worst,
              static_cast<double>(checked))};
}

Verdict ablation() {
  const PipelineRun& r = first_run();
  AblationConfig config;
  config.grammar = r.trained.grammar;
  AblationToggles none, no_symbolic;
  no_symbolic.no_symbolic = true;
  none.no_healing = no_symbolic.no_healing = true;
  const AblationRow full = ablation_run(r.corpus, none, config);
  const AblationRow neural = ablation_run(r.corpus, no_symbolic, config);
  return {full.metrics.f1 > neural.metrics.f1,
          fmt("full F1 %.4f vs no_symbolic F1 %.4f", full.metrics.f1, neural.metrics.f1)};
}

Verdict scalability() {
  const std::vector<std::size_t> sizes{1000, 10000};
  const ScalingReport report = scaling_run(sizes, standard_config(), 5);
  const double ratio = report.rows[1].score_seconds / report.rows[0].score_seconds;
  return {ratio <= 15.0, fmt("%.0f -> %.0f edges, score_all %.4f s -> %.4f s", static_cast<double>(report.rows[0].edges),
                             static_cast<double>(report.rows[1].edges), report.rows[0].score_seconds,
                             report.rows[1].score_seconds) +
                             fmt(", ratio %.2f", ratio)};
}

Verdict determinism() {
  first_run();
  run_pipeline(scratch() / "run_b");
  std::string differs;
  for (const char* f : {"schema.json", "records.jsonl", "labels.jsonl", "planted.txt", "encoder.json", "grammar.txt",
                        "grammar.txt.stats.json", "history.csv", "scores.csv"}) {
    const fs::path a = scratch() / "run_a" / f, b = scratch() / "run_b" / f;
    if (!fs::exists(a) || slurp(a) != slurp(b)) differs += std::string(differs.empty() ? "" : ", ") + f;
  }
  return {differs.empty(), differs.empty() ? "exports, encoder, grammar, history and scores identical across two runs"
                                           : "differs: " + differs};
}

Verdict service_headless() {
  const PipelineRun& r = first_run();
  ServiceConfig config;
  config.audit_log = (scratch() / "audit.jsonl").string();
  fs::remove(config.audit_log);
  ReviewService service(config);
  service.initialize(r.corpus.graph, r.trained.grammar);
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  std::thread listener([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);

  bool ok = true;
  std::string detail;
  auto list = cli.Get("/api/anomalies?status=open&page_size=5");
  ok &= list && list->status == 200;
  std::uint64_t id = 0;
  if (ok) {
    const auto body = nlohmann::json::parse(list->body);
    ok &= !body["items"].empty();
    if (ok) id = body["items"][0]["id"].get<std::uint64_t>();
    detail = "queue " + std::to_string(body.value("total", 0)) + " items";
  }
  if (ok) {
    auto item = cli.Get(("/api/anomalies/" + std::to_string(id)).c_str());
    ok &= item && item->status == 200;
    const std::string path = "/api/anomalies/" + std::to_string(id) + "/resolution";
    const std::string apply = R"({"action":"apply_repair","actor":"acceptance","repair_index":0})";
    auto res = cli.Post(path.c_str(), apply, "application/json");
    ok &= res && res->status == 200;
    if (ok) {
      const auto out = nlohmann::json::parse(res->body);
      ok &= !out["new_report"]["flagged"].get<bool>();
    }
    auto again = cli.Post(path.c_str(), apply, "application/json");
    ok &= again && again->status == 409;
    auto rescore = cli.Post("/api/rescore");
    ok &= rescore && rescore->status == 200;
    detail += ", repair applied over HTTP, repeat -> 409, rescore ok, UI not built";
  }
  server.stop();
  listener.join();
  return {ok, detail};
}

}  // namespace

int main() {
  fs::create_directories(scratch());
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"detection", detection},          {"rule_recovery", rule_recovery}, {"codelength_arithmetic", codelength},
      {"rarity_insensitivity", rarity},  {"gradients", gradients},         {"healing", healing},
      {"ablation_ordering", ablation},   {"scalability", scalability},     {"determinism", determinism},
      {"headless_suite", service_headless},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
