// Copyright 2026 The mcdec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <chrono>
#include <csignal>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mcdec/cli.hpp"
#include "mcdec/conflict.hpp"
#include "mcdec/error.hpp"
#include "mcdec/jsonl.hpp"
#include "mcdec/mock_server.hpp"
#include "mcdec/rng.hpp"

namespace mcdec {
namespace {

using nlohmann::json;

std::atomic<bool> g_stop_requested{false};

extern "C" void on_signal(int) { g_stop_requested = true; }

/// "\n" and "\t" typed on a shell arrive as two characters.
std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      const char next = s[i + 1];
      if (next == 'n' || next == 't' || next == '\\') {
        out.push_back(next == 'n' ? '\n' : next == 't' ? '\t' : '\\');
        ++i;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

/// Options shared by `ask` and `eval run`. Each is applied over the config
/// file only when given on the command line.
struct RunFlags {
  std::string config;
  std::string backend;
  std::string index;
  std::vector<std::string> strategies;
  double alpha = 0.0;
  std::string irrelevant;
  std::size_t pool_size = 0;
  std::string embedder;
  std::string shots;
  std::uint64_t seed = 0;
  std::size_t max_new_tokens = 0;
  std::vector<std::string> stop;
  std::map<std::string, CLI::Option*> given;

  void add(CLI::App* app) {
    given["config"] = app->add_option("--config", config, "JSON run config file");
    given["backend"] = app->add_option("--backend", backend, "scripted:<file> | ngram:<config> | remote:<url>");
    given["index"] = app->add_option("--index", index, "BM25 index directory");
    given["strategies"] = app->add_option("--strategy,--strategies", strategies,
                                          "reg-closed, reg-open, cad, ours-fixed, ours-dynamic")
                              ->delimiter(',');
    given["alpha"] = app->add_option("--alpha", alpha, "mixing weight for cad / ours-fixed");
    given["irrelevant"] = app->add_option("--irrelevant", irrelevant,
                                          "irrelevant-context strategy: random, fixed, fixed-permuted, most-distant");
    given["pool_size"] = app->add_option("--pool-size", pool_size, "irrelevant-context pool size");
    given["embedder"] = app->add_option("--embedder", embedder, "tfidf | remote:<url>");
    given["shots"] = app->add_option("--shots", shots, "few-shot demonstrations (JSONL)");
    given["seed"] = app->add_option("--seed", seed, "base seed");
    given["max_new_tokens"] = app->add_option("--max-new-tokens", max_new_tokens, "generation limit");
    given["stop"] = app->add_option("--stop", stop, "stop string (repeatable; \\n escapes allowed)");
  }

  bool has(const std::string& name) const { return given.at(name)->count() > 0; }

  RunConfig resolve() const {
    RunConfig cfg = has("config") ? RunConfig::from_file(config) : RunConfig{};
    cfg.apply_env();
    if (has("backend")) cfg.backend = BackendSpec::parse(backend);
    if (has("index")) cfg.index = index;
    if (has("strategies")) cfg.strategies = strategies;
    if (has("alpha")) cfg.alpha = alpha;
    if (has("irrelevant")) cfg.irrelevant = irrelevant;
    if (has("pool_size")) cfg.pool_size = pool_size;
    if (has("embedder")) cfg.embedder = embedder;
    if (has("shots")) cfg.shots = shots;
    if (has("seed")) cfg.seed = seed;
    if (has("max_new_tokens")) cfg.max_new_tokens = max_new_tokens;
    if (has("stop")) {
      cfg.stop.clear();
      for (const auto& s : stop) cfg.stop.push_back(unescape(s));
    }
    return cfg;
  }
};

struct Loaded {
  std::unique_ptr<LanguageModel> model;
  std::shared_ptr<const Bm25Index> index;
  std::unique_ptr<Embedder> embedder;
  std::vector<FewShotExample> shots;
};

Loaded load_resources(const RunConfig& cfg, bool need_embedder) {
  if (!cfg.backend) throw Error(ErrorCode::kInvalidArgument, "no backend configured (--backend)");
  Loaded r;
  r.model = make_backend(*cfg.backend);
  if (cfg.index) {
    r.index = std::make_shared<const Bm25Index>(std::filesystem::is_regular_file(*cfg.index)
                                                    ? Bm25Index::build(load_corpus(*cfg.index))
                                                    : Bm25Index::load(*cfg.index));
  }
  if (cfg.shots) r.shots = load_shots(*cfg.shots);
  if (need_embedder) {
    if (cfg.embedder == "tfidf") {
      if (r.index) r.embedder = std::make_unique<TfidfEmbedder>(r.index);
    } else if (cfg.embedder.rfind("remote:", 0) == 0) {
      r.embedder = std::make_unique<RemoteEmbedder>(cfg.embedder.substr(7));
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown embedder '" + cfg.embedder + "'");
    }
  }
  return r;
}

bool needs_embedder(const RunConfig& cfg, const std::vector<DecodeStrategy>& strategies) {
  if (parse_irrelevant_strategy(cfg.irrelevant) != IrrelevantStrategy::kMostDistant) return false;
  for (const auto& s : strategies) {
    if (s.needs_irrelevant()) return true;
  }
  return false;
}

std::string token_text(const LanguageModel& model, TokenId id) {
  const TokenId one[] = {id};
  return json(model.detokenize(one)).dump();
}

void print_trace(std::ostream& out, const LanguageModel& model, const DecodeResult& result) {
  out << "step\talpha\tC\tC_R\tchosen\ttop5\n";
  for (const auto& t : result.traces) {
    out << t.step_index << '\t' << fixed(t.alpha_used) << '\t' << fixed(t.confidence_parametric) << '\t'
        << fixed(t.confidence_relevant) << '\t' << token_text(model, t.chosen_token) << '\t';
    for (std::size_t i = 0; i < t.top5_combined.size(); ++i) {
      if (i > 0) out << ' ';
      out << token_text(model, t.top5_combined[i].first) << '=' << fixed(t.top5_combined[i].second);
    }
    out << '\n';
  }
}

struct TableRow {
  std::string name;
  const RunReport* report;
};

void print_table(std::ostream& out, const std::vector<TableRow>& rows) {
  std::set<std::string> buckets;
  for (const auto& row : rows) {
    for (const auto& [label, stat] : row.report->per_bucket) buckets.insert(label);
  }
  const bool show_buckets = !(buckets.empty() || (buckets.size() == 1 && *buckets.begin() == kUnknownBucket));

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"strategy", "alpha", "EM", "n", "errored"};
  if (show_buckets) header.insert(header.end(), buckets.begin(), buckets.end());
  cells.push_back(header);
  for (const auto& row : rows) {
    const auto& r = *row.report;
    std::vector<std::string> line = {
        row.name,
        r.strategy.alpha_mode() == "fixed" ? fixed(r.strategy.alpha, 2) : std::string(r.strategy.alpha_mode()),
        r.em ? fixed(*r.em) : "n/a", std::to_string(r.items.size()), std::to_string(r.errored)};
    if (show_buckets) {
      for (const auto& b : buckets) {
        const auto it = r.per_bucket.find(b);
        line.push_back(it == r.per_bucket.end() ? "-" : fixed(it->second.em) + " (" + std::to_string(it->second.count) + ")");
      }
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out << "  ";
      out << std::left << std::setw(static_cast<int>(width[c])) << line[c];
    }
    out << '\n';
  }
}

int cmd_index_build(std::ostream& out, const std::string& corpus, const std::string& dir, double k1, double b) {
  const auto index = Bm25Index::build(load_corpus(corpus), Bm25Params{k1, b});
  index.save(dir);
  out << "indexed " << index.num_docs() << " passages, " << index.terms().size() << " terms -> " << dir << '\n';
  return kExitOk;
}

int cmd_index_search(std::ostream& out, const std::string& dir, const std::string& query, std::size_t k) {
  const auto index = Bm25Index::load(dir);
  for (const auto& hit : index.search(query, k)) {
    out << hit.rank << '\t' << fixed(hit.score, 6) << '\t' << hit.passage.id << '\t' << hit.passage.title << '\n';
  }
  return kExitOk;
}

int cmd_ask(std::ostream& out, const RunFlags& flags, const std::string& question, bool trace,
            const std::optional<std::string>& context, const std::optional<std::string>& irrelevant_context) {
  const RunConfig cfg = flags.resolve();
  const auto strategies = cfg.parsed_strategies();
  bool need_relevant = false;
  bool need_irrelevant = false;
  for (const auto& s : strategies) {
    need_relevant |= s.needs_relevant();
    need_irrelevant |= s.needs_irrelevant();
  }
  const auto res = load_resources(cfg, need_irrelevant && !irrelevant_context && needs_embedder(cfg, strategies));

  BranchPrompts prompts;
  const auto templates = cfg.templates();
  prompts.parametric =
      res.model->tokenize(render_prompt(PromptMode::kClosed, question, std::nullopt, res.shots, templates));
  if (need_relevant) {
    const Passage c_plus = context ? Passage{"cli:context", "", *context}
                                   : select_relevant(question, res.index.get(), std::nullopt);
    prompts.relevant =
        res.model->tokenize(render_prompt(PromptMode::kOpen, question, c_plus.text, res.shots, templates));
    if (need_irrelevant) {
      Passage c_minus;
      if (irrelevant_context) {
        c_minus = Passage{"cli:irrelevant-context", "", *irrelevant_context};
      } else {
        const auto strategy = parse_irrelevant_strategy(cfg.irrelevant);
        std::vector<Passage> pool;
        if (uses_pool(strategy)) {
          if (!res.index) throw Error(ErrorCode::kEmptyPool, "irrelevant-context pool needs --index");
          pool = irrelevant_pool(*res.index, question, cfg.pool_size);
        }
        c_minus = select_irrelevant(strategy, c_plus, pool, res.embedder.get(), derive_seed(cfg.seed, 0));
      }
      prompts.irrelevant =
          res.model->tokenize(render_prompt(PromptMode::kOpen, question, c_minus.text, res.shots, templates));
    }
  }

  for (const auto& strategy : strategies) {
    const auto result = decode(strategy, prompts, *res.model, cfg.limits());
    const auto answer = extract_prediction(result.text);
    if (strategies.size() > 1) out << strategy_name(strategy.kind) << '\t';
    out << answer << '\n';
    if (trace) print_trace(out, *res.model, result);
  }
  return kExitOk;
}

int cmd_eval(std::ostream& out, std::ostream& err, const RunFlags& flags, const std::string& dataset,
             const std::string& out_path, const std::string& trace_dir, std::size_t jobs, bool strict,
             bool no_gold) {
  RunConfig cfg = flags.resolve();
  if (!dataset.empty()) cfg.dataset = dataset;
  if (!out_path.empty()) cfg.out = out_path;
  if (!trace_dir.empty()) cfg.trace_dir = trace_dir;
  if (jobs > 0) cfg.jobs = jobs;
  if (no_gold) cfg.use_gold_context = false;
  if (!cfg.dataset) throw Error(ErrorCode::kInvalidArgument, "no dataset given (--dataset)");

  const auto strategies = cfg.parsed_strategies();
  const auto records = load_dataset(*cfg.dataset);
  const auto res = load_resources(cfg, needs_embedder(cfg, strategies));

  PipelineConfig pipeline;
  pipeline.strategies = strategies;
  pipeline.irrelevant = parse_irrelevant_strategy(cfg.irrelevant);
  pipeline.pool_size = cfg.pool_size;
  pipeline.shots = res.shots;
  pipeline.templates = cfg.templates();
  pipeline.limits = cfg.limits();
  pipeline.seed = cfg.seed;
  pipeline.jobs = cfg.jobs;
  pipeline.use_gold_context = cfg.use_gold_context;
  if (cfg.trace_dir) pipeline.trace_dir = *cfg.trace_dir;
  pipeline.resolved_config = cfg.to_json();

  const auto reports = run_eval(records, pipeline, EvalResources{res.model.get(), res.index, res.embedder.get()});
  if (cfg.out) {
    write_file_atomic(*cfg.out, dump_reports(reports));
    std::vector<TableRow> rows;
    for (const auto& r : reports) rows.push_back({std::string(strategy_name(r.strategy.kind)), &r});
    print_table(out, rows);
  } else {
    out << dump_reports(reports);
  }

  std::size_t errored = 0;
  for (const auto& r : reports) {
    errored += r.errored;
    for (const auto& item : r.items) {
      if (item.error) err << "item " << item.id << " (" << strategy_name(r.strategy.kind) << "): " << *item.error << '\n';
    }
  }
  return strict && errored > 0 ? kExitStrictErrors : kExitOk;
}

int cmd_conflict(std::ostream& out, const std::string& dataset, const std::string& out_path,
                 const std::string& pool_path, std::uint64_t seed) {
  const auto records = load_dataset(dataset);
  const auto pool = pool_path.empty() ? self_entity_pool(records) : load_entity_pool(pool_path);
  const auto set = generate_conflict_set(records, pool, seed);

  std::string body;
  for (const auto& r : set.records) body += substitution_to_json(r).dump() + "\n";
  write_file_atomic(out_path, body);

  std::set<std::string> distinct;
  for (const auto& e : pool) distinct.insert(normalize_answer(e));
  json skipped = json::array();
  for (const auto& s : set.skipped) skipped.push_back({{"id", s.id}, {"reason", s.reason}});
  const json meta = {{"dataset", dataset},
                     {"pool", {{"source", pool_path.empty() ? std::string("self") : pool_path},
                               {"entries", pool.size()},
                               {"distinct_normalized", distinct.size()}}},
                     {"seed", seed},
                     {"records", set.records.size()},
                     {"ineligible", set.ineligible},
                     {"skipped", skipped}};
  write_file_atomic(out_path + ".meta.json", meta.dump(2) + "\n");
  out << "wrote " << set.records.size() << " records to " << out_path << " (" << set.skipped.size()
      << " skipped, " << set.ineligible << " without span)\n";
  return kExitOk;
}

int cmd_compare(std::ostream& out, const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, std::vector<RunReport>>> files;
  for (const auto& p : paths) {
    json j;
    try {
      j = json::parse(read_file(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, p + ": " + e.what());
    }
    files.emplace_back(p, reports_from_json(j));
  }
  std::vector<TableRow> rows;
  for (const auto& [path, reports] : files) {
    for (const auto& r : reports) {
      std::string name(strategy_name(r.strategy.kind));
      if (files.size() > 1) name = std::filesystem::path(path).stem().string() + ":" + name;
      rows.push_back({name, &r});
    }
  }
  if (rows.size() < 2) throw Error(ErrorCode::kInvalidArgument, "compare needs at least two reports");

  auto ids = [](const RunReport& r) {
    std::vector<std::string> v;
    for (const auto& item : r.items) v.push_back(item.id);
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto reference = ids(*rows.front().report);
  for (const auto& row : rows) {
    if (ids(*row.report) != reference) {
      throw Error(ErrorCode::kDatasetMismatch, "'" + row.name + "' covers different item ids than '" +
                                                   rows.front().name + "'");
    }
  }
  print_table(out, rows);
  return kExitOk;
}

int cmd_serve(std::ostream& out, const std::string& backend, const std::string& host, int port,
              const std::string& index_dir, bool encoder_decoder, const std::string& model_id,
              std::size_t max_context, const std::string& port_file) {
  const auto model = make_backend(BackendSpec::parse(backend));
  std::shared_ptr<const Bm25Index> index;
  std::unique_ptr<Embedder> embedder;
  if (!index_dir.empty()) {
    index = std::make_shared<const Bm25Index>(Bm25Index::load(index_dir));
    embedder = std::make_unique<TfidfEmbedder>(index);
  }
  MockServerOptions options;
  options.host = host;
  options.port = port;
  options.encoder_decoder = encoder_decoder;
  options.model_id = model_id;
  if (max_context > 0) options.max_context = max_context;
  MockServer server(*model, options, embedder.get());
  if (!port_file.empty()) write_file_atomic(port_file, std::to_string(server.port()) + "\n");
  out << "listening on " << server.url() << std::endl;

  g_stop_requested = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-input contrastive decoding for retrieval-augmented QA", "mcdec"};
  app.require_subcommand(1);

  auto* index_cmd = app.add_subcommand("index", "Build or query a BM25 index");
  index_cmd->require_subcommand(1);
  std::string corpus;
  std::string index_dir;
  double k1 = Bm25Params{}.k1;
  double b = Bm25Params{}.b;
  auto* build = index_cmd->add_subcommand("build", "Index a JSONL corpus");
  build->add_option("--corpus", corpus, "JSONL corpus")->required();
  build->add_option("--out", index_dir, "output directory")->required();
  build->add_option("--k1", k1, "term-frequency saturation");
  build->add_option("--b", b, "length normalization");
  std::string query;
  std::size_t k = 10;
  auto* search = index_cmd->add_subcommand("search", "Query an index");
  search->add_option("--index", index_dir, "index directory")->required();
  search->add_option("--query", query, "query text")->required();
  search->add_option("-k", k, "number of hits");

  RunFlags ask_flags;
  std::string question;
  bool trace = false;
  std::optional<std::string> context;
  std::optional<std::string> irrelevant_context;
  auto* ask = app.add_subcommand("ask", "Answer one question");
  ask_flags.add(ask);
  ask->add_flag("--trace", trace, "print per-step alpha, confidences and top-5 tokens");
  ask->add_option("--context", context, "relevant context text (skips retrieval)");
  ask->add_option("--irrelevant-context", irrelevant_context, "irrelevant context text");
  ask->add_option("question", question, "question text")->required();

  RunFlags eval_flags;
  std::string dataset;
  std::string out_path;
  std::string trace_dir;
  std::size_t jobs = 0;
  bool strict = false;
  bool no_gold = false;
  auto* eval = app.add_subcommand("eval", "Batch evaluation");
  eval->require_subcommand(1);
  auto* eval_run = eval->add_subcommand("run", "Evaluate strategies over a QA dataset");
  eval_flags.add(eval_run);
  eval_run->add_option("--dataset", dataset, "QA JSONL");
  eval_run->add_option("--out", out_path, "report path (JSON)");
  eval_run->add_option("--trace-dir", trace_dir, "per-item trace directory");
  eval_run->add_option("--jobs", jobs, "worker threads");
  eval_run->add_flag("--strict", strict, "exit non-zero when any item errored");
  eval_run->add_flag("--no-gold", no_gold, "retrieve c+ even when a gold context is present");

  std::string pool_path;
  std::uint64_t seed = 0;
  auto* conflict = app.add_subcommand("conflict", "Knowledge-conflict sets");
  conflict->require_subcommand(1);
  auto* generate = conflict->add_subcommand("generate", "Substitute answer entities in gold contexts");
  generate->add_option("--dataset", dataset, "QA JSONL with spans")->required();
  generate->add_option("--out", out_path, "output JSONL")->required();
  generate->add_option("--pool", pool_path, "entity list, one per line (default: dataset answers)");
  generate->add_option("--seed", seed, "base seed");

  std::vector<std::string> report_paths;
  auto* compare = app.add_subcommand("compare", "Tabulate run reports");
  compare->add_option("reports", report_paths, "report files")->required();

  std::string backend;
  std::string host = "127.0.0.1";
  int port = 0;
  bool encoder_decoder = false;
  std::string model_id = "mock";
  std::size_t max_context = 0;
  std::string port_file;
  auto* serve = app.add_subcommand("serve-mock", "Serve a local backend over the /v1 protocol");
  serve->add_option("--backend", backend, "scripted:<file> | ngram:<config>")->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 = any)");
  serve->add_option("--index", index_dir, "index for the /v1/embed TF-IDF embedder");
  serve->add_flag("--encoder-decoder", encoder_decoder, "declare an encoder-decoder model");
  serve->add_option("--model-id", model_id, "reported model id");
  serve->add_option("--max-context", max_context, "advertised max context");
  serve->add_option("--port-file", port_file, "write the bound port here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (build->parsed()) return cmd_index_build(out, corpus, index_dir, k1, b);
    if (search->parsed()) return cmd_index_search(out, index_dir, query, k);
    if (ask->parsed()) return cmd_ask(out, ask_flags, question, trace, context, irrelevant_context);
    if (eval_run->parsed()) return cmd_eval(out, err, eval_flags, dataset, out_path, trace_dir, jobs, strict, no_gold);
    if (generate->parsed()) return cmd_conflict(out, dataset, out_path, pool_path, seed);
    if (compare->parsed()) return cmd_compare(out, report_paths);
    if (serve->parsed()) {
      return cmd_serve(out, backend, host, port, index_dir, encoder_decoder, model_id, max_context, port_file);
    }
  } catch (const Error& e) {
    err << "error [" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error [Internal]: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace mcdec
