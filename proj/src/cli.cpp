// Copyright 2026 The cagr Authors
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
#include "cagr/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cagr/config.hpp"
#include "cagr/evalharness.hpp"
#include "cagr/retrieval.hpp"
#include "cagr/synthetic.hpp"
#include "cagr/training.hpp"

namespace fs = std::filesystem;

namespace cagr {
namespace {

constexpr const char* kMetricsFile = "metrics.tsv";
constexpr const char* kHistoryFile = "interactions.tsv";  // copied into the model dir

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) throw Error(fmt::format("no such file or directory: '{}'", path.string()));
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    open_out(path) << text;
  }
}

ModelConfig config_from(const std::string& path, std::optional<std::uint64_t> seed) {
  ModelConfig c;
  if (!path.empty()) {
    require_exists(path);
    c = load_config(path);
  }
  if (seed) c.seed = *seed;
  c.validate();
  return c;
}

Corpus corpus_from(const fs::path& dir) {
  require_exists(dir / kInteractionsFile);
  require_exists(dir / kItemsFile);
  return load_corpus(dir);
}

// --- gen-synth ---

struct GenSynthArgs {
  SyntheticConfig synth;
  std::uint64_t seed = 0;
  std::string out;
};

void add_gen_synth(CLI::App& app, GenSynthArgs& a) {
  auto* cmd = app.add_subcommand("gen-synth", "Write a synthetic corpus with planted structure");
  cmd->add_option("--users", a.synth.users, "Number of users")->capture_default_str();
  cmd->add_option("--items", a.synth.items, "Number of items")->capture_default_str();
  cmd->add_option("--categories", a.synth.categories, "Number of leaf categories")
      ->capture_default_str();
  cmd->add_option("--min-length", a.synth.min_length, "Shortest sequence")->capture_default_str();
  cmd->add_option("--max-length", a.synth.max_length, "Longest sequence")->capture_default_str();
  cmd->add_option("--days", a.synth.days, "Days spanned by the log")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", a.out, "Output directory")->required();
}

void gen_synth(const GenSynthArgs& a) {
  write_synthetic(generate_synthetic(a.synth, a.seed), a.out);
}

// --- train ---

struct TrainArgs {
  std::string config, data, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  bool quiet = false;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* cmd = app.add_subcommand("train", "Train a model on the training partition");
  cmd->add_option("--config", a.config, "Config file (key = value); defaults when omitted");
  cmd->add_option("--data", a.data, "Corpus directory")->required();
  cmd->add_option("--out", a.out, "Model directory to write")->required();
  cmd->add_option("--seed", a.seed, "Override the config seed");
  cmd->add_option("--epochs", a.epochs, "Override the config epoch count");
  cmd->add_flag("--quiet", a.quiet, "Do not print per-epoch loss");
}

void train_cmd(const TrainArgs& a) {
  ModelConfig config = config_from(a.config, a.seed);
  if (a.epochs) config.epochs = *a.epochs;
  config.validate();
  const Corpus corpus = corpus_from(a.data);
  const Experiment experiment = prepare_experiment(config, corpus);
  Model model = initialize_model(config, corpus, experiment);

  std::ostringstream log;
  log << "epoch\tloss\n";
  train(model, experiment.split.train, [&](const EpochStats& s) {
    log << fmt::format("{}\t{:.9g}\n", s.epoch, s.loss);
    if (!a.quiet) fmt::print(stderr, "epoch {} loss {:.6f}\n", s.epoch, s.loss);
  });
  model.save(a.out);
  open_out(fs::path(a.out) / kMetricsFile) << log.str();
  fs::copy_file(fs::path(a.data) / kInteractionsFile, fs::path(a.out) / kHistoryFile,
                fs::copy_options::overwrite_existing);
}

// --- build-index ---

struct IndexArgs {
  std::string model, out, backend = "hnsw";
  HnswParams hnsw;
  std::optional<std::uint64_t> seed;
};

void add_build_index(CLI::App& app, IndexArgs& a) {
  auto* cmd = app.add_subcommand("build-index", "Index every item vector for inner-product search");
  cmd->add_option("--model", a.model, "Model directory")->required();
  cmd->add_option("--out", a.out, "Index file to write")->required();
  cmd->add_option("--backend", a.backend, "exact or hnsw")
      ->check(CLI::IsMember({"exact", "hnsw"}))
      ->capture_default_str();
  cmd->add_option("--m", a.hnsw.m, "HNSW links per node")->capture_default_str();
  cmd->add_option("--ef-construction", a.hnsw.ef_construction, "HNSW build beam")
      ->capture_default_str();
  cmd->add_option("--ef-search", a.hnsw.ef_search, "HNSW query beam")->capture_default_str();
  cmd->add_option("--seed", a.seed, "HNSW level seed");
}

std::unique_ptr<ItemIndex> make_index(const Model& model, const std::string& backend,
                                      const HnswParams& hnsw) {
  ItemEmbeddingSet items = batch_item_inference(model);
  if (items.missing_features > 0) {
    fmt::print(stderr, "warning: {} items have no feature row and use unknown features\n",
               items.missing_features);
  }
  if (backend == "exact") {
    return std::make_unique<ExactIndex>(std::move(items.ids), std::move(items.vectors));
  }
  return std::make_unique<HnswIndex>(std::move(items.ids), std::move(items.vectors), hnsw);
}

void build_index_cmd(IndexArgs a) {
  if (a.seed) a.hnsw.seed = *a.seed;
  require_exists(a.model);
  const Model model = Model::load(a.model);
  const auto index = make_index(model, a.backend, a.hnsw);
  auto out = open_out(a.out);
  save_index(out, *index);
}

// --- recommend ---

struct RecommendArgs {
  std::string model, index, out, data, embeddings_out;
  std::vector<std::string> users;
  bool all_users = false;
  std::size_t top_n = 20;
  std::optional<std::size_t> n_per_interest;
};

void add_recommend(CLI::App& app, RecommendArgs& a) {
  auto* cmd = app.add_subcommand("recommend", "Rank items for users from their full history");
  cmd->add_option("--model", a.model, "Model directory")->required();
  cmd->add_option("--index", a.index, "Index file; exact search over the model when omitted");
  cmd->add_option("--data", a.data, "Corpus directory for histories (default: the model's copy)");
  auto* user = cmd->add_option("--user", a.users, "User id (repeatable)");
  auto* all = cmd->add_flag("--all-users", a.all_users, "Recommend for every user");
  user->excludes(all);
  cmd->add_option("--top-n", a.top_n, "Items per user")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--n-per-interest", a.n_per_interest, "Override the config value");
  cmd->add_option("--out", a.out, "Output file (default stdout)");
  cmd->add_option("--embeddings-out", a.embeddings_out, "Also write the users' interest vectors");
}

void recommend_cmd(const RecommendArgs& a) {
  if (a.users.empty() && !a.all_users) throw CLI::ValidationError("give --user or --all-users");
  require_exists(a.model);
  const Model model = Model::load(a.model);
  const fs::path history = a.data.empty() ? fs::path(a.model) / kHistoryFile
                                          : fs::path(a.data) / kInteractionsFile;
  require_exists(history);
  const auto sequences = build_sequences(load_interactions(history), model.config().t_max);

  std::vector<UserSequence> chosen;
  if (a.all_users) {
    chosen = sequences;
  } else {
    for (const auto& id : a.users) {
      auto it = std::find_if(sequences.begin(), sequences.end(),
                             [&](const UserSequence& s) { return s.user_id == id; });
      if (it == sequences.end()) throw Error(fmt::format("unknown user '{}'", id));
      chosen.push_back(*it);
    }
  }

  std::unique_ptr<ItemIndex> index;
  if (a.index.empty()) {
    index = make_index(model, "exact", {});
  } else {
    require_exists(a.index);
    std::ifstream in(a.index, std::ios::binary);
    index = load_index(in);
  }
  const std::size_t per_interest = a.n_per_interest.value_or(model.config().n_per_interest);
  const auto embeddings = batch_user_inference(model, chosen);
  std::ostringstream out;
  for (const auto& u : embeddings) {
    const auto items = recommend(u.interests, *index, per_interest, a.top_n);
    write_recommendations(out, u.user_id, items);
  }
  emit(a.out, out.str());
  if (!a.embeddings_out.empty()) {
    auto eout = open_out(a.embeddings_out);
    write_user_embeddings(eout, embeddings);
  }
}

// --- eval ---

struct EvalArgs {
  std::string model, data, out, split = "test", format = "table", backend = "exact";
  std::vector<std::size_t> ks{20, 50};
  unsigned threads = 1;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "Recall, NDCG and hit rate on a held-out partition");
  cmd->add_option("--model", a.model, "Model directory")->required();
  cmd->add_option("--data", a.data, "Corpus directory the model was trained on")->required();
  cmd->add_option("--k", a.ks, "Cutoffs, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--split", a.split, "test, validation or train (memorization)")
      ->check(CLI::IsMember({"test", "validation", "train"}))
      ->capture_default_str();
  cmd->add_option("--backend", a.backend, "exact or hnsw")
      ->check(CLI::IsMember({"exact", "hnsw"}))
      ->capture_default_str();
  cmd->add_option("--format", a.format, "table or kv")
      ->check(CLI::IsMember({"table", "kv"}))
      ->capture_default_str();
  cmd->add_option("--threads", a.threads, "Worker threads")->capture_default_str();
  cmd->add_option("--out", a.out, "Report file (default stdout)");
}

void eval_cmd(const EvalArgs& a) {
  require_exists(a.model);
  const Model model = Model::load(a.model);
  const Corpus corpus = corpus_from(a.data);
  const Experiment experiment = prepare_experiment(model.config(), corpus);
  std::vector<EvalCase> cases;
  if (a.split == "test") {
    cases = experiment.split.test;
  } else if (a.split == "validation") {
    cases = experiment.split.validation;
  } else {
    cases = memorization_cases(experiment.split.train, model.config().targets);
  }
  if (cases.empty()) throw Error(fmt::format("the {} partition is empty", a.split));
  MetricReport report = evaluate(model, cases, a.ks,
                                 a.backend == "exact" ? Backend::kExact : Backend::kHnsw, a.threads);
  report.label = a.split;
  emit(a.out, a.format == "kv" ? format_kv(report) : format_table(report));
}

// --- ablate ---

struct AblateArgs {
  std::string config, data, out, format = "table";
  std::vector<std::size_t> ks{20, 50};
  std::vector<double> lambdas;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

void add_ablate(CLI::App& app, AblateArgs& a) {
  auto* cmd = app.add_subcommand(
      "ablate", "Train and evaluate the ablation variants, or a lambda sweep with --lambdas");
  cmd->add_option("--config", a.config, "Config file; defaults when omitted");
  cmd->add_option("--data", a.data, "Corpus directory")->required();
  cmd->add_option("--k", a.ks, "Cutoffs, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lambdas", a.lambdas, "Sweep these lambda values instead")->delimiter(',');
  cmd->add_option("--seed", a.seed, "Override the config seed");
  cmd->add_option("--epochs", a.epochs, "Override the config epoch count");
  cmd->add_option("--format", a.format, "table or kv")
      ->check(CLI::IsMember({"table", "kv"}))
      ->capture_default_str();
  cmd->add_option("--out", a.out, "Report file (default stdout)");
}

void ablate_cmd(const AblateArgs& a) {
  ModelConfig config = config_from(a.config, a.seed);
  if (a.epochs) config.epochs = *a.epochs;
  config.validate();
  const Corpus corpus = corpus_from(a.data);
  std::vector<MetricReport> reports;
  if (a.lambdas.empty()) {
    const auto variants = standard_ablations();
    reports = ablation_run(config, corpus, variants, a.ks);
  } else {
    reports = lambda_sweep(config, corpus, a.lambdas, a.ks);
  }
  std::string text;
  for (const auto& r : reports) {
    if (!text.empty()) text += '\n';
    text += a.format == "kv" ? format_kv(r) : format_table(r);
  }
  emit(a.out, text);
}

// --- grad-check ---

struct GradCheckArgs {
  std::uint64_t seed = 0;
  double step = 1e-4;
  double floor = 1e-6;
  double tolerance = 1e-4;
  double lambda = 0.2;
};

void add_grad_check(CLI::App& app, GradCheckArgs& a) {
  auto* cmd = app.add_subcommand("grad-check",
                                 "Compare analytic and finite-difference gradients on a tiny model");
  cmd->add_option("--seed", a.seed, "Seed for the instance")->capture_default_str();
  cmd->add_option("--step", a.step, "Central difference step")->capture_default_str();
  cmd->add_option("--floor", a.floor, "Denominator floor of the relative error")
      ->capture_default_str();
  cmd->add_option("--tolerance", a.tolerance, "Fail above this relative error")
      ->capture_default_str();
  cmd->add_option("--lambda", a.lambda, "Weight of the item-embedding loss")->capture_default_str();
}

bool grad_check_cmd(const GradCheckArgs& a) {
  GradCheckInstance inst = make_grad_check_instance(a.seed);
  const auto report = grad_check(inst.model, inst.examples, inst.sequences, a.lambda, a.step, a.floor);
  for (const auto& t : report.tensors) {
    fmt::print("{:<36}{:>6}  {:.3e}\n", t.name, t.size, t.max_rel_error);
  }
  const bool ok = report.max_rel_error < a.tolerance;
  fmt::print("max relative error {:.3e} ({})\n", report.max_rel_error, ok ? "ok" : "FAILED");
  return ok;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Two-tower multi-interest recommender with co-action item graphs"};
  app.require_subcommand(1);
  GenSynthArgs gen;
  TrainArgs tr;
  IndexArgs idx;
  RecommendArgs rec;
  EvalArgs ev;
  AblateArgs ab;
  GradCheckArgs gc;
  add_gen_synth(app, gen);
  add_train(app, tr);
  add_build_index(app, idx);
  add_recommend(app, rec);
  add_eval(app, ev);
  add_ablate(app, ab);
  add_grad_check(app, gc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "gen-synth") gen_synth(gen);
    if (name == "train") train_cmd(tr);
    if (name == "build-index") build_index_cmd(idx);
    if (name == "recommend") recommend_cmd(rec);
    if (name == "eval") eval_cmd(ev);
    if (name == "ablate") ablate_cmd(ab);
    if (name == "grad-check" && !grad_check_cmd(gc)) return 2;
  } catch (const CLI::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace cagr
