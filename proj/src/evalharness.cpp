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
#include "cagr/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "cagr/retrieval.hpp"
#include "cagr/synthetic.hpp"

namespace cagr {
namespace {

std::unordered_set<std::string_view> as_set(std::span<const std::string> relevant) {
  if (relevant.empty()) throw Error("relevant set is empty");
  return {relevant.begin(), relevant.end()};
}

// Ranks (from 1) within the top k at which a relevant item first appears.
std::vector<std::size_t> hit_ranks(std::span<const std::string> retrieved,
                                   const std::unordered_set<std::string_view>& relevant,
                                   std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  std::vector<std::size_t> ranks;
  std::unordered_set<std::string_view> seen;
  const std::size_t n = std::min(k, retrieved.size());
  for (std::size_t r = 0; r < n; ++r) {
    if (relevant.contains(retrieved[r]) && seen.insert(retrieved[r]).second) ranks.push_back(r + 1);
  }
  return ranks;
}

struct UserMetrics {
  bool skipped = true;
  std::vector<double> recall, ndcg, hitrate;
};

}  // namespace

double recall_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                   std::size_t k) {
  const auto rel = as_set(relevant);
  return static_cast<double>(hit_ranks(retrieved, rel, k).size()) / static_cast<double>(rel.size());
}

double ndcg_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                 std::size_t k) {
  const auto rel = as_set(relevant);
  double dcg = 0.0;
  for (std::size_t r : hit_ranks(retrieved, rel, k)) dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  double idcg = 0.0;
  for (std::size_t r = 1; r <= std::min(k, rel.size()); ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  return dcg / idcg;
}

double hitrate_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                    std::size_t k) {
  return hit_ranks(retrieved, as_set(relevant), k).empty() ? 0.0 : 1.0;
}

std::string format_table(const MetricReport& report) {
  std::string out;
  if (!report.label.empty()) out += fmt::format("# {}\n", report.label);
  out += fmt::format("{:<10}{:>6}{:>12}\n", "metric", "k", "value");
  const auto rows = [&](std::string_view name, const std::vector<double>& values) {
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      out += fmt::format("{:<10}{:>6}{:>12.6f}\n", name, report.ks[i], values[i]);
    }
  };
  rows("recall", report.recall);
  rows("ndcg", report.ndcg);
  rows("hitrate", report.hitrate);
  out += fmt::format("users {}, skipped {}, config {}\n", report.users, report.skipped,
                     report.fingerprint);
  return out;
}

std::string format_kv(const MetricReport& report) {
  std::string out;
  if (!report.label.empty()) out += fmt::format("label={}\n", report.label);
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    out += fmt::format("recall@{}={:.9g}\n", report.ks[i], report.recall[i]);
    out += fmt::format("ndcg@{}={:.9g}\n", report.ks[i], report.ndcg[i]);
    out += fmt::format("hitrate@{}={:.9g}\n", report.ks[i], report.hitrate[i]);
  }
  out += fmt::format("users={}\nskipped={}\nfingerprint={}\n", report.users, report.skipped,
                     report.fingerprint);
  return out;
}

MetricReport evaluate(const Model& model, std::span<const EvalCase> cases,
                      std::span<const std::size_t> ks, Backend backend, unsigned threads) {
  if (ks.empty()) throw Error("evaluate: no cutoffs given");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  const ItemEmbeddingSet items = batch_item_inference(model);
  std::unique_ptr<ItemIndex> index;
  if (backend == Backend::kExact) {
    index = std::make_unique<ExactIndex>(items.ids, items.vectors);
  } else {
    index = std::make_unique<HnswIndex>(items.ids, items.vectors);
  }
  const std::size_t per_interest = std::max(model.config().n_per_interest, max_k);

  std::vector<UserMetrics> per_user(cases.size());
  const auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t c = begin; c < cases.size(); c += stride) {
      const EvalCase& ec = cases[c];
      if (ec.targets.empty() || ec.history.actions.empty()) continue;
      const Mat interests = model.user_interests(ec.history.actions);
      std::vector<std::string> retrieved;
      for (auto& s : recommend(interests, *index, per_interest, max_k)) {
        retrieved.push_back(std::move(s.item_id));
      }
      UserMetrics& m = per_user[c];
      m.skipped = false;
      for (std::size_t k : ks) {
        m.recall.push_back(recall_at_k(retrieved, ec.targets, k));
        m.ndcg.push_back(ndcg_at_k(retrieved, ec.targets, k));
        m.hitrate.push_back(hitrate_at_k(retrieved, ec.targets, k));
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  MetricReport report;
  report.ks.assign(ks.begin(), ks.end());
  report.recall.assign(ks.size(), 0.0);
  report.ndcg.assign(ks.size(), 0.0);
  report.hitrate.assign(ks.size(), 0.0);
  report.fingerprint = config_fingerprint(model.config());
  for (const auto& m : per_user) {
    if (m.skipped) {
      ++report.skipped;
      continue;
    }
    ++report.users;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      report.recall[i] += m.recall[i];
      report.ndcg[i] += m.ndcg[i];
      report.hitrate[i] += m.hitrate[i];
    }
  }
  if (report.users > 0) {
    const double n = static_cast<double>(report.users);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      report.recall[i] /= n;
      report.ndcg[i] /= n;
      report.hitrate[i] /= n;
    }
  }
  return report;
}

std::vector<EvalCase> memorization_cases(std::span<const UserSequence> sequences,
                                         std::span<const BehaviorType> targets) {
  std::vector<EvalCase> cases;
  cases.reserve(sequences.size());
  for (const auto& seq : sequences) {
    EvalCase ec{seq.user_id, seq, {}};
    std::set<std::string_view> seen;
    for (std::size_t i = 1; i < seq.actions.size(); ++i) {
      const auto& a = seq.actions[i];
      if (std::find(targets.begin(), targets.end(), a.behavior) == targets.end()) continue;
      if (seen.insert(a.item_id).second) ec.targets.push_back(a.item_id);
    }
    cases.push_back(std::move(ec));
  }
  return cases;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  return {load_interactions(dir / kInteractionsFile), load_item_features(dir / kItemsFile)};
}

Experiment prepare_experiment(const ModelConfig& config, const Corpus& corpus) {
  const auto records = filter_min_clicks(corpus.interactions, config.min_clicks);
  if (records.empty()) throw Error("no interactions left after filtering");
  const auto sequences = build_sequences(records, config.t_max);

  SplitParams params;
  params.mode = config.split;
  params.train_fraction = config.train_fraction;
  params.validation_fraction = config.validation_fraction;
  params.test_fraction = config.test_fraction;
  params.seed = config.seed;
  params.t_max = config.t_max;
  params.target_behaviors = config.targets;
  if (config.split == SplitMode::kByTime) params.boundary = day_boundary(records, config.train_days);

  Experiment ex;
  ex.split = split_dataset(sequences, params);
  ex.graph = build_coaction_graph(flatten(ex.split.train));
  std::set<std::string_view> known;
  for (const auto& row : corpus.items.rows) known.insert(row.item_id);
  std::set<std::string> extra;
  for (const auto& r : records) {
    if (!known.contains(r.item_id)) extra.insert(r.item_id);
  }
  ex.extra_ids.assign(extra.begin(), extra.end());
  return ex;
}

Model initialize_model(const ModelConfig& config, const Corpus& corpus,
                       const Experiment& experiment) {
  return Model::initialize(config, corpus.items, experiment.extra_ids, experiment.graph);
}

std::vector<AblationVariant> standard_ablations() {
  return {
      {"full", false, false, false, false},
      {"-c", true, false, false, false},
      {"-p", false, true, false, false},
      {"-a", true, true, false, false},
      {"-e", false, false, true, false},
      {"-g", false, false, false, true},
  };
}

namespace {

MetricReport train_and_evaluate(const ModelConfig& config, const Corpus& corpus,
                                const Experiment& experiment, std::span<const std::size_t> ks,
                                std::string label) {
  config.validate();
  Model model = initialize_model(config, corpus, experiment);
  train(model, experiment.split.train);
  MetricReport report = evaluate(model, experiment.split.test, ks);
  report.label = std::move(label);
  return report;
}

}  // namespace

std::vector<MetricReport> ablation_run(const ModelConfig& config, const Corpus& corpus,
                                       std::span<const AblationVariant> variants,
                                       std::span<const std::size_t> ks) {
  const Experiment experiment = prepare_experiment(config, corpus);
  std::vector<MetricReport> reports;
  for (const auto& v : variants) {
    ModelConfig c = config;
    c.drop_co_click = v.drop_co_click;
    c.drop_co_purchase = v.drop_co_purchase;
    c.drop_edge_feats = v.drop_edge_feats;
    c.drop_seq_graph = v.drop_seq_graph;
    reports.push_back(train_and_evaluate(c, corpus, experiment, ks, v.label));
  }
  return reports;
}

std::vector<MetricReport> lambda_sweep(const ModelConfig& config, const Corpus& corpus,
                                       std::span<const double> lambdas,
                                       std::span<const std::size_t> ks) {
  const Experiment experiment = prepare_experiment(config, corpus);
  std::vector<MetricReport> reports;
  for (double lambda : lambdas) {
    ModelConfig c = config;
    c.lambda = lambda;
    reports.push_back(train_and_evaluate(c, corpus, experiment, ks, fmt::format("lambda={}", lambda)));
  }
  return reports;
}

GradCheckInstance make_grad_check_instance(std::uint64_t seed) {
  SyntheticConfig sc;
  sc.users = 6;
  sc.items = 12;
  sc.categories = 3;
  sc.min_length = 3;
  sc.max_length = 5;
  sc.pool_size = 4;
  sc.complementary_purchase_rate = 1.0;
  const SyntheticCorpus corpus = generate_synthetic(sc, seed);

  ModelConfig c;
  c.dim = 4;
  c.feature_dim = 2;
  c.behavior_dim = 2;
  c.attn_dim = 3;
  c.layers = 2;
  c.interests = 2;
  c.negatives = 3;
  c.t_max = 3;
  c.init_scale = 0.5;
  c.seed = seed;

  GradCheckInstance inst;
  inst.sequences = build_sequences(corpus.interactions, c.t_max);
  inst.model = Model::initialize(c, corpus.items, {}, build_coaction_graph(corpus.interactions));
  inst.examples = make_examples(inst.sequences, inst.model.catalog(), c.targets);
  NegativeSampler sampler(inst.model.catalog().size(), seed);
  for (auto& ex : inst.examples) ex.negatives = sampler.draw(ex.target, c.negatives);
  if (inst.examples.size() > 6) inst.examples.resize(6);
  return inst;
}

}  // namespace cagr
