// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

// Command-line front end: synth, ingest, train, induce, score, heal, eval
// and serve. Exit status 0 on success, 1 on domain errors, 2 on usage errors.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "clinlogic/eval.hpp"
#include "clinlogic/healer.hpp"
#include "clinlogic/induce.hpp"
#include "clinlogic/records.hpp"
#include "clinlogic/service.hpp"
#include "clinlogic/synth.hpp"
#include "clinlogic/trainer.hpp"

namespace fs = std::filesystem;
using namespace clinlogic;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

Globals g_opts;

std::ostream& info() {
  static std::ofstream null_stream;
  return g_opts.quiet ? static_cast<std::ostream&>(null_stream) : std::cerr;
}

// A state directory holds schema.json and records.jsonl.
ClinicalGraph load_state(const std::string& dir) {
  const fs::path root(dir);
  auto schema = std::make_shared<const Schema>(Schema::load((root / "schema.json").string()));
  ClinicalGraph graph(schema);
  ingest(graph, (root / "records.jsonl").string());
  return graph;
}

void save_state(const ClinicalGraph& graph, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  graph.schema().save((root / "schema.json").string());
  export_records(graph, (root / "records.jsonl").string());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  return out;
}

void print_stats(const GraphStats& s) {
  info() << "nodes " << s.node_count << ", edges " << s.edge_count << '\n';
  for (const auto& [kind, n] : s.per_kind) info() << "  " << kind << ' ' << n << '\n';
}

// --- subcommands -----------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string out;
};

void run_synth(const SynthArgs& a) {
  CorpusConfig config = CorpusConfig::load(a.config);
  if (g_opts.seed) config.seed = *g_opts.seed;
  const Corpus corpus = generate(config);
  export_corpus(corpus, a.out);
  print_stats(corpus.graph.stats());
  info() << "violations " << corpus.truth.violations.size() << ", extremes " << corpus.truth.extremes.size() << '\n';
}

struct IngestArgs {
  std::string schema;
  std::string records;
  std::string out;
};

void run_ingest(const IngestArgs& a) {
  auto schema = std::make_shared<const Schema>(Schema::load(a.schema));
  ClinicalGraph graph(schema);
  const GraphStats stats = ingest(graph, a.records);
  save_state(graph, a.out);
  print_stats(stats);
}

struct TrainArgs {
  std::string state;
  std::string config;
  std::string out;
  bool wall_time = false;
};

void run_train(const TrainArgs& a) {
  const ClinicalGraph graph = load_state(a.state);
  TrainConfig config = a.config.empty() ? TrainConfig{} : TrainConfig::load(a.config);
  if (g_opts.seed) config.seed = *g_opts.seed;
  const fs::path out(a.out.empty() ? a.state : a.out);
  fs::create_directories(out);
  auto write_history = [&](const TrainHistory& h) {
    std::ofstream csv = open_out((out / "history.csv").string());
    write_history_csv(csv, h, a.wall_time);
  };
  try {
    const TrainResult result = train(graph, config);
    result.params.save((out / "encoder.json").string());
    save_grammar(result.grammar, (out / "trained_grammar.txt").string());
    write_history(result.history);
    const EpochRecord& last = result.history.back();
    info() << "epochs " << result.history.size() << ", recon " << last.recon << ", kl " << last.kl
           << ", grammar " << last.grammar_size << " clauses\n";
  } catch (const TrainDiverged& e) {
    write_history(e.history());
    throw;
  }
}

struct InduceArgs {
  std::string state;
  std::string out;
  std::size_t budget = InductionConfig{}.budget;
  std::size_t min_support = InductionConfig{}.min_support;
  double min_confidence = InductionConfig{}.min_confidence;
  std::string seeds;
};

void run_induce(const InduceArgs& a) {
  const ClinicalGraph graph = load_state(a.state);
  InductionConfig config;
  config.budget = a.budget;
  config.min_support = a.min_support;
  config.min_confidence = a.min_confidence;
  if (!a.seeds.empty()) config.seeds = load_grammar(a.seeds, graph.schema()).clauses;
  const InductionResult result = induce(graph, config);
  save_grammar(result.grammar, a.out);
  info() << result.grammar.size() << " clauses from " << result.candidates << " candidates\n";
  for (const auto& t : result.trace) info() << "  " << to_string(t.clause) << "  (" << t.gain_bits << " bits)\n";
}

struct ScoreArgs {
  std::string state;
  std::string grammar;
  std::string threshold = "sigma:3";
  std::string out;
};

void run_score(const ScoreArgs& a) {
  const ClinicalGraph graph = load_state(a.state);
  Grammar grammar = load_grammar(a.grammar, graph.schema());
  if (grammar.stats.size() != grammar.size()) refresh_stats(grammar, graph);
  const Scorer scorer(graph, grammar);
  const auto scores = scorer.scores();
  const CodeLength tau = calibrate_threshold(scores, parse_threshold_method(a.threshold));
  const auto reports = scorer.score_all(tau);
  std::ofstream csv = open_out(a.out);
  write_scores_csv(csv, reports, grammar);
  std::size_t flagged = 0;
  for (const auto& r : reports) flagged += r.flagged ? 1 : 0;
  info() << "threshold " << tau.bits() << " bits, flagged " << flagged << " of " << reports.size() << '\n';
}

struct HealArgs {
  std::string state;
  std::string grammar;
  std::size_t node = 0;
  std::size_t top_k = 3;
  std::size_t max_edits = 1;
  bool apply = false;
  std::string threshold = "sigma:3";
};

void run_heal(const HealArgs& a) {
  ClinicalGraph graph = load_state(a.state);
  Grammar grammar = load_grammar(a.grammar, graph.schema());
  if (grammar.stats.size() != grammar.size()) refresh_stats(grammar, graph);
  if (a.node >= graph.node_count()) {
    throw Error(ErrorCode::missing_node, "node " + std::to_string(a.node) + " does not exist");
  }
  RepairConfig config;
  config.top_k = a.top_k;
  config.max_edits = a.max_edits;
  const auto v = static_cast<NodeId>(a.node);
  const auto candidates = repair_candidates(v, grammar, graph, config);
  std::cout << to_json(candidates, graph).dump(2) << '\n';
  if (!a.apply) return;
  const CodeLength tau = calibrate_threshold(Scorer(graph, grammar).scores(), parse_threshold_method(a.threshold));
  const AppliedRepair applied = apply_repair(graph, candidates.front(), grammar, tau);
  save_state(graph, a.state);
  info() << "applied " << candidates.front().description << "; score " << applied.report.score.bits()
         << " bits, flagged " << (applied.report.flagged ? "yes" : "no") << '\n';
}

struct EvalArgs {
  std::string state;
  std::string labels;
  std::string out;
  std::string grammar;
  std::string train_config;
  std::string threshold = "sigma:3";
  bool ablation = false;
  std::string scaling_config;
  std::vector<std::size_t> scaling_sizes;
  std::string scaling_out;
};

void run_eval(const EvalArgs& a) {
  Corpus corpus{load_state(a.state), load_labels(a.labels), {}};
  AblationConfig config;
  config.threshold = parse_threshold_method(a.threshold);
  if (!a.train_config.empty()) config.train = TrainConfig::load(a.train_config);
  if (g_opts.seed) config.train.seed = *g_opts.seed;
  if (!a.grammar.empty()) {
    Grammar grammar = load_grammar(a.grammar, corpus.graph.schema());
    if (grammar.stats.size() != grammar.size()) refresh_stats(grammar, corpus.graph);
    config.grammar = std::move(grammar);
  }
  std::vector<AblationToggles> rows{{}};
  if (a.ablation) {
    rows.push_back({.no_symbolic = true});
    rows.push_back({.no_mdl = true});
    rows.push_back({.no_symbolic = true, .no_temporal = true});
    rows.push_back({.no_healing = true});
  }
  const auto table = ablation_table(corpus, rows, config);
  std::ofstream csv = open_out(a.out);
  write_metrics_csv(csv, table);
  if (!g_opts.quiet) write_metrics_table(std::cout, table);

  if (!a.scaling_sizes.empty()) {
    if (a.scaling_config.empty() || a.scaling_out.empty()) {
      throw Error(ErrorCode::invalid_argument, "--scaling needs --scaling-config and --scaling-out");
    }
    CorpusConfig base = CorpusConfig::load(a.scaling_config);
    if (g_opts.seed) base.seed = *g_opts.seed;
    const ScalingReport report = scaling_run(a.scaling_sizes, base);
    std::ofstream scsv = open_out(a.scaling_out);
    write_scaling_csv(scsv, report);
    for (const auto& r : report.rows) {
      info() << r.edges << " edges: " << r.score_seconds << " s\n";
    }
  }
}

struct ServeArgs {
  std::string state;
  std::string grammar;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
  std::string audit;
  std::string threshold = "sigma:3";
};

void run_serve(const ServeArgs& a) {
  ClinicalGraph graph = load_state(a.state);
  Grammar grammar = load_grammar(a.grammar, graph.schema());
  ServiceConfig config;
  config.threshold = parse_threshold_method(a.threshold);
  config.audit_log = a.audit.empty() ? (fs::path(a.state) / "audit.jsonl").string() : a.audit;
  ReviewService service(config);
  service.initialize(std::move(graph), std::move(grammar));

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpServer server(service, a.static_dir);
  const int port = server.bind(a.host, a.port);
  const RescoreSummary s = service.summary();
  info() << "listening on http://" << a.host << ':' << port << "  (" << s.open << " open items, threshold "
         << s.threshold << " bits)\n";
  std::thread listener([&] { server.listen(); });
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  listener.join();
  info() << "stopped\n";
}

const CLI::Validator kThresholdSpec(
    [](std::string& text) -> std::string {
      try {
        parse_threshold_method(text);
      } catch (const Error& e) {
        return e.what();
      }
      return {};
    },
    "SPEC", "threshold");

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logic-based anomaly detection and repair for clinical record graphs"};
  app.require_subcommand(1);
  app.add_option("--seed", g_opts.seed, "Override every random seed");
  app.add_flag("--quiet,-q", g_opts.quiet, "Suppress progress output");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
  c_synth->add_option("--config", synth.config, "Corpus config (JSON)")->required()->check(CLI::ExistingFile);
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  IngestArgs ing;
  auto* c_ingest = app.add_subcommand("ingest", "Validate records into a state directory");
  c_ingest->add_option("--schema", ing.schema, "Schema (JSON)")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--records", ing.records, "Records (JSONL)")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ing.out, "State directory")->required();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the encoder and refine the grammar");
  c_train->add_option("--state", tr.state, "State directory")->required()->check(CLI::ExistingDirectory);
  c_train->add_option("--config", tr.config, "Train config (JSON)")->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out, "Output directory (default: the state)");
  c_train->add_flag("--wall-time", tr.wall_time, "Add a wall-clock column to history.csv");

  InduceArgs ind;
  auto* c_induce = app.add_subcommand("induce", "Induce a grammar by compression");
  c_induce->add_option("--state", ind.state, "State directory")->required()->check(CLI::ExistingDirectory);
  c_induce->add_option("--out", ind.out, "Grammar file")->required();
  c_induce->add_option("--budget", ind.budget, "Maximum number of clauses")->check(CLI::PositiveNumber);
  c_induce->add_option("--min-support", ind.min_support, "Minimum applicable nodes");
  c_induce->add_option("--min-confidence", ind.min_confidence, "Minimum raw confidence")->check(CLI::Range(0.0, 1.0));
  c_induce->add_option("--seeds", ind.seeds, "Seed clauses file")->check(CLI::ExistingFile);

  ScoreArgs sc;
  auto* c_score = app.add_subcommand("score", "Score every node");
  c_score->add_option("--state", sc.state, "State directory")->required()->check(CLI::ExistingDirectory);
  c_score->add_option("--grammar", sc.grammar, "Grammar file")->required()->check(CLI::ExistingFile);
  c_score->add_option("--threshold", sc.threshold, "quantile:Q | sigma:M | abs:B")->capture_default_str()->check(kThresholdSpec);
  c_score->add_option("--out", sc.out, "Scores CSV")->required();

  HealArgs he;
  auto* c_heal = app.add_subcommand("heal", "Propose repairs for one node");
  c_heal->add_option("--state", he.state, "State directory")->required()->check(CLI::ExistingDirectory);
  c_heal->add_option("--grammar", he.grammar, "Grammar file")->required()->check(CLI::ExistingFile);
  c_heal->add_option("--node", he.node, "Node id")->required();
  c_heal->add_option("--top-k", he.top_k, "Candidates to return")->capture_default_str()->check(CLI::PositiveNumber);
  c_heal->add_option("--max-edits", he.max_edits, "Edits per candidate")->capture_default_str()->check(
      CLI::PositiveNumber);
  c_heal->add_flag("--apply", he.apply, "Apply the best candidate and rewrite the state");
  c_heal->add_option("--threshold", he.threshold, "Threshold for the post-repair report")->capture_default_str()->check(kThresholdSpec);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Detection metrics against labels");
  c_eval->add_option("--state", ev.state, "State directory")->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--labels", ev.labels, "Labels (JSONL)")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", ev.out, "Metrics CSV")->required();
  c_eval->add_option("--grammar", ev.grammar, "Grammar file (default: induce)")->check(CLI::ExistingFile);
  c_eval->add_option("--train-config", ev.train_config, "Train config for no_symbolic")->check(CLI::ExistingFile);
  c_eval->add_option("--threshold", ev.threshold, "quantile:Q | sigma:M | abs:B")->capture_default_str()->check(kThresholdSpec);
  c_eval->add_flag("--ablation", ev.ablation, "Add the ablation rows");
  c_eval->add_option("--scaling", ev.scaling_sizes, "Target edge counts for the scaling run")->delimiter(',');
  c_eval->add_option("--scaling-config", ev.scaling_config, "Corpus config for the scaling run")
      ->check(CLI::ExistingFile);
  c_eval->add_option("--scaling-out", ev.scaling_out, "Scaling CSV");

  ServeArgs sv;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP review service");
  c_serve->add_option("--state", sv.state, "State directory")->required()->check(CLI::ExistingDirectory);
  c_serve->add_option("--grammar", sv.grammar, "Grammar file")->required()->check(CLI::ExistingFile);
  c_serve->add_option("--port", sv.port, "Port (0 picks a free one)")->capture_default_str()->check(
      CLI::Range(0, 65535));
  c_serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  c_serve->add_option("--static", sv.static_dir, "Directory of UI assets")->check(CLI::ExistingDirectory);
  c_serve->add_option("--audit", sv.audit, "Audit log (default: STATE/audit.jsonl)");
  c_serve->add_option("--threshold", sv.threshold, "quantile:Q | sigma:M | abs:B")->capture_default_str()->check(kThresholdSpec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_synth) run_synth(synth);
    if (*c_ingest) run_ingest(ing);
    if (*c_train) run_train(tr);
    if (*c_induce) run_induce(ind);
    if (*c_score) run_score(sc);
    if (*c_heal) run_heal(he);
    if (*c_eval) run_eval(ev);
    if (*c_serve) run_serve(sv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
