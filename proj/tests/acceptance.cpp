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
// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cagr/cli.hpp"
#include "cagr/evalharness.hpp"
#include "cagr/retrieval.hpp"
#include "cagr/synthetic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cagr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Vectorized interaction stack against the scalar oracle.
Outcome interaction_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  struct Shape { int t, d, layers; };
  for (const Shape s : {Shape{2, 2, 1}, Shape{3, 4, 2}}) {
    for (int trial = 0; trial < 25; ++trial) {
      const auto g = oracle::random_graph(s.t, s.d, 5, rng);
      const auto p = InteractionParams::random(s.d, 5, 4, s.layers, false, 0.7, rng);
      worst = std::max(worst, oracle::max_rel_diff(oracle::explicit_interaction(g, p),
                                                   explicit_interaction(g, p)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 1.0, fmt::format("max rel diff {:.2e}, {:.3f}s", worst, secs)};
}

// 2. Finite-difference gradient check on the T=3/d=4/L=2/K=2 instance.
Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  auto inst = make_grad_check_instance(0);
  const auto report = grad_check(inst.model, inst.examples, inst.sequences, 0.2, 1e-4);
  const double secs = seconds_since(t0);
  bool covered = report.tensors.size() == named_tensors(inst.model.params()).size();
  for (const auto& t : report.tensors) {
    if (t.name != "coaction.out_bias" && t.max_abs_grad == 0.0) covered = false;
  }
  const auto& m = inst.model.config();
  const bool shape = m.t_max == 3 && m.dim == 4 && m.layers == 2 && m.interests == 2;
  return {report.max_rel_error < 1e-4 && covered && shape && secs < 30.0,
          fmt::format("{} tensors, max rel error {:.2e}, {:.2f}s", report.tensors.size(),
                      report.max_rel_error, secs)};
}

// 3. Perturbing future positions leaves earlier rows bit-identical.
Outcome causality_suite() {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_int_distribution<int> len(2, 8);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int t = len(rng);
    const int cut = std::uniform_int_distribution<int>(0, t - 2)(rng);
    const auto g = oracle::random_graph(t, 4, 6, rng);
    const auto p = InteractionParams::random(4, 6, 5, 2, false, 0.5, rng);
    auto h = g;
    for (int i = cut + 1; i < t; ++i) {
      for (int c = 0; c < 4; ++c) h.node_embs(i, c) = n(rng);
      for (int j = 0; j <= i; ++j) {
        for (int c = 0; c < 6; ++c) h.edge_feats(c, i * t + j) = n(rng);
      }
    }
    const Mat a = explicit_interaction(g, p);
    const Mat b = explicit_interaction(h, p);
    for (int i = 0; i <= cut; ++i) {
      if (std::memcmp(a.row(i).eval().data(), b.row(i).eval().data(), sizeof(double) * 4) != 0) {
        ++failures;
        break;
      }
    }
  }
  return {failures == 0, fmt::format("100 trials, {} failures", failures)};
}

// 4. Hand-evaluated edge vectors plus invariants over random pairs.
Outcome edge_suite() {
  ItemFeatureTable table;
  table.rows.push_back({"a", {1, 10, 100, 7}, {2.0}, {3, 1}});
  table.rows.push_back({"b", {2, 10, 100, 7}, {2.5}, {3, 2}});
  const auto encoder = ItemEncoder::fit(table);
  auto tables = EmbeddingTables::zeros(encoder, {4, 2, 2});
  tables.behavior << 1, 2, 3, 4, 5, 6, 7, 8;
  const EdgeLayout layout(2, FeatureSchema{});
  int bad = 0;

  Vec view_buy(layout.size());
  view_buy << 7, 8, 3, 4, 0, -1.0, 1, 1, 1, 1, 0, 0, 0;
  bad += edge_features({BehaviorType::kPurchase, 86400 + 50, &table.rows[0]},
                       {BehaviorType::kWatch, 50, &table.rows[0]}, tables) != view_buy;
  Vec price(layout.size());
  price << 1, 2, 1, 2, 1, 0, 0, 1, 1, 1, 0.5, 0, 1;
  bad += edge_features({BehaviorType::kClick, 0, &table.rows[0]},
                       {BehaviorType::kClick, 0, &table.rows[1]}, tables) != price;
  bad += feat_equal(5, 5) != 1 || feat_equal(5, 6) != 0 || feat_gap(3.0, 5.0) != 2.0 ||
         feat_order(2, 7) != 1 || feat_order(7, 2) != -1 || feat_order(4, 4) != 0;
  const int unit_bad = bad;

  std::mt19937_64 rng(104);
  std::uniform_int_distribution<int> code(0, 4), beh(0, 3);
  std::uniform_int_distribution<std::int64_t> ts(0, 30 * 86400);
  std::normal_distribution<double> lp(3.0, 1.0);
  ItemFeatureTable pool;
  for (int i = 0; i < 2; ++i) pool.rows.push_back({"x" + std::to_string(i), {}, {}, {}});
  int invariant_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    for (auto& r : pool.rows) {
      r.onehot = {code(rng), code(rng), code(rng), code(rng)};
      r.numeric = {lp(rng)};
      r.ordinal = {code(rng), code(rng)};
    }
    const ActionNode s1{static_cast<BehaviorType>(beh(rng)), ts(rng), &pool.rows[0]};
    const ActionNode s2{static_cast<BehaviorType>(beh(rng)), ts(rng), &pool.rows[1]};
    const Vec self = edge_features(s1, s1, tables);
    bool ok = self(layout.behavior_equal()) == 1.0 && self(layout.time_gap()) == 0.0 &&
              (self.segment(layout.onehot_begin(), 4).array() == 1.0).all() &&
              self(layout.numeric_begin()) == 0.0 &&
              self.segment(layout.ordinal_begin(), 2).isZero(0.0) &&
              self.segment(layout.behavior_i(), 2) == self.segment(layout.behavior_j(), 2);
    // Two-node graph: the earlier node's row toward the later node is zero.
    ItemFeatureTable two = pool;
    const auto enc = ItemEncoder::fit(two);
    const ItemCatalog catalog(two, enc);
    auto t2 = EmbeddingTables::zeros(enc, {4, 2, 2});
    t2.behavior = tables.behavior;
    const std::int64_t first = std::min(s1.timestamp, s2.timestamp);
    const std::vector<ActionRecord> seq{{"u", "x0", s1.behavior, first},
                                        {"u", "x1", s2.behavior, first + 1}};
    const auto g = build_sequence_graph(seq, catalog, t2);
    ok = ok && g.edge(0, 1).isZero(0.0) && !g.edge(1, 0).isZero(0.0) &&
         g.edge_feats.rows() == layout.size();
    invariant_bad += !ok;
  }
  return {unit_bad == 0 && invariant_bad == 0,
          fmt::format("unit examples {} bad, 1000 random pairs {} bad", unit_bad, invariant_bad)};
}

// 5. Co-action graph against pair enumeration.
Outcome coaction_oracle() {
  std::mt19937_64 rng(105);
  int mismatches = 0;
  for (int log = 0; log < 50; ++log) {
    std::uniform_int_distribution<int> users(1, 20), items(1, 20), beh(0, 3), len(0, 120);
    const int nu = users(rng), ni = items(rng), n = len(rng);
    std::vector<ActionRecord> records;
    for (int i = 0; i < n; ++i) {
      records.push_back({"u" + std::to_string(std::uniform_int_distribution<int>(0, nu - 1)(rng)),
                         "i" + std::to_string(std::uniform_int_distribution<int>(0, ni - 1)(rng)),
                         static_cast<BehaviorType>(beh(rng)), i});
    }
    mismatches += oracle::graph_pairs(build_coaction_graph(records)) != oracle::coaction_pairs(records);
  }
  return {mismatches == 0, fmt::format("50 logs, {} mismatches", mismatches)};
}

// 6. Metrics against naive set arithmetic.
Outcome metric_oracle() {
  std::mt19937_64 rng(106);
  std::uniform_int_distribution<int> item(0, 29), len(0, 25), rlen(1, 8), kd(1, 30);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> retrieved, relevant;
    const int n = len(rng), r = rlen(rng);
    for (int i = 0; i < n; ++i) retrieved.push_back("i" + std::to_string(item(rng)));
    for (int i = 0; i < r; ++i) relevant.push_back("i" + std::to_string(item(rng)));
    const auto k = static_cast<std::size_t>(kd(rng));
    worst = std::max({worst,
                      std::abs(recall_at_k(retrieved, relevant, k) - oracle::recall(retrieved, relevant, k)),
                      std::abs(ndcg_at_k(retrieved, relevant, k) - oracle::ndcg(retrieved, relevant, k)),
                      std::abs(hitrate_at_k(retrieved, relevant, k) - oracle::hitrate(retrieved, relevant, k))});
  }
  return {worst <= 1e-12, fmt::format("1000 cases, max abs diff {:.2e}", worst)};
}

struct Toy {
  SyntheticCorpus corpus;
  std::vector<UserSequence> sequences;
  std::optional<Model> model;
};

ModelConfig toy_config() {
  ModelConfig c;
  c.interests = 4;
  c.lambda = 0.2;
  c.layers = 2;
  c.negatives = 16;
  c.lr = 3e-3;
  c.epochs = 40;
  c.batch = 32;
  c.seed = 1;
  return c;
}

// 7. Overfit the toy corpus.
Outcome toy_overfit(Toy& toy) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelConfig c = toy_config();
  SyntheticConfig sc;
  sc.users = 100;
  sc.items = 500;
  toy.corpus = generate_synthetic(sc, 7);
  toy.sequences = build_sequences(toy.corpus.interactions, c.t_max);
  toy.model = Model::initialize(c, toy.corpus.items, {}, build_coaction_graph(toy.corpus.interactions));
  const auto log = train(*toy.model, toy.sequences);
  const auto cases = memorization_cases(toy.sequences, c.targets);
  const std::vector<std::size_t> ks{20};
  const double recall = evaluate(*toy.model, cases, ks).recall[0];
  const double ratio = log.back().loss / log.front().loss;
  const double secs = seconds_since(t0);
  return {c.epochs <= 300 && ratio < 0.2 && recall >= 0.8 && secs < 600.0,
          fmt::format("{} epochs, loss {:.4f} -> {:.4f} ({:.1f}%), memorized Recall@20 {:.3f}, {:.1f}s",
                      log.size(), log.front().loss, log.back().loss, 100 * ratio, recall, secs)};
}

// 8. Exact recommend equals max-over-interests scoring of every item.
Outcome serving_parity(const Toy& toy) {
  const Model& m = *toy.model;
  const auto items = batch_item_inference(m);
  const ExactIndex index(items.ids, items.vectors);
  const std::size_t top = 20;
  int id_mismatch = 0;
  double worst = 0.0;
  for (const auto& u : batch_user_inference(m, toy.sequences)) {
    const auto got = recommend(u.interests, index, top, top);
    const auto want = oracle::max_interest_ranking(u.interests, items.ids, items.vectors, top);
    if (got.size() != want.size()) {
      ++id_mismatch;
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      id_mismatch += got[i].item_id != want[i].item_id;
      worst = std::max(worst, std::abs(got[i].score - want[i].score));
    }
  }
  return {id_mismatch == 0 && worst <= 1e-9,
          fmt::format("{} users, {} id mismatches, max score diff {:.2e}", toy.sequences.size(),
                      id_mismatch, worst)};
}

// 9. Approximate index recall against the exact one.
Outcome hnsw_recall() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(109);
  std::normal_distribution<double> n(0.0, 1.0);
  const Mat v = Mat::NullaryExpr(32, 2000, [&] { return n(rng); });
  const Mat q = Mat::NullaryExpr(32, 500, [&] { return n(rng); });
  std::vector<std::string> ids;
  for (int i = 0; i < 2000; ++i) ids.push_back(fmt::format("v{:04d}", i));
  const ExactIndex exact(ids, v);
  const HnswIndex hnsw(ids, v);
  const bool defaults = hnsw.params().m == 16 && hnsw.params().ef_search == 64;
  double hits = 0;
  for (int i = 0; i < q.cols(); ++i) {
    std::set<std::string> truth;
    for (const auto& r : exact.query(q.col(i), 10)) truth.insert(r.item_id);
    for (const auto& r : hnsw.query(q.col(i), 10)) hits += truth.contains(r.item_id);
  }
  const double recall = hits / (10.0 * q.cols());
  const double secs = seconds_since(t0);
  return {defaults && recall >= 0.95 && secs < 30.0,
          fmt::format("recall@10 {:.4f} over 500 queries, {:.2f}s", recall, secs)};
}

// 10. Per-example loss does not decrease as lambda grows.
Outcome lambda_monotone(const Toy& toy) {
  const Model& m = *toy.model;
  auto examples = make_examples(toy.sequences, m.catalog(), m.config().targets);
  NegativeSampler sampler(m.catalog().size(), 110);
  int violations = 0;
  for (auto& ex : examples) {
    ex.negatives = sampler.draw(ex.target, m.config().negatives);
    const double l0 = example_loss(m, ex, toy.sequences, 0.0).total;
    const double l2 = example_loss(m, ex, toy.sequences, 0.2).total;
    const double l4 = example_loss(m, ex, toy.sequences, 0.4).total;
    violations += !(l0 <= l2 && l2 <= l4);
  }
  return {violations == 0, fmt::format("{} examples, {} violations", examples.size(), violations)};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cagr");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 11. Two seeded CLI runs produce byte-identical reports.
Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "cagr_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "cfg") << "epochs = 3\nnegatives = 16\nlr = 0.003\n";
  std::vector<std::string> outputs;
  int failures = 0;
  for (const std::string run : {"a", "b"}) {
    const auto d = [&](const char* name) { return (root / run / name).string(); };
    failures += cli({"gen-synth", "--users", "100", "--items", "500", "--seed", "7", "--out", d("data")}) != 0;
    failures += cli({"train", "--config", (root / "cfg").string(), "--data", d("data"), "--out",
                     d("model"), "--seed", "7", "--quiet"}) != 0;
    failures += cli({"eval", "--model", d("model"), "--data", d("data"), "--k", "20,50", "--out",
                     d("report.txt")}) != 0;
    failures += cli({"build-index", "--model", d("model"), "--out", d("index.txt"), "--seed", "7"}) != 0;
    failures += cli({"recommend", "--model", d("model"), "--index", d("index.txt"), "--all-users",
                     "--out", d("recs.tsv")}) != 0;
    outputs.push_back(slurp(d("report.txt")) + slurp(d("recs.tsv")));
  }
  const bool same = outputs[0] == outputs[1] && !outputs[0].empty();
  fs::remove_all(root);
  return {failures == 0 && same,
          fmt::format("{} command failures, reports {}", failures, same ? "identical" : "differ")};
}

}  // namespace

int main() {
  Toy toy;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"interaction matches scalar oracle", interaction_oracle},
      {"gradient check", gradient_suite},
      {"causality", causality_suite},
      {"edge features", edge_suite},
      {"co-action oracle", coaction_oracle},
      {"metric oracle", metric_oracle},
      {"toy overfit", [&] { return toy_overfit(toy); }},
      {"serving parity", [&] { return toy.model ? serving_parity(toy) : Outcome{false, "no toy model"}; }},
      {"approximate index recall", hnsw_recall},
      {"lambda monotonicity", [&] { return toy.model ? lambda_monotone(toy) : Outcome{false, "no toy model"}; }},
      {"cli determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("{} {:>2}. {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
