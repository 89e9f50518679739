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
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>
#include <span>

#include "cagr/coaction.hpp"
#include "cagr/config.hpp"
#include "cagr/data_model.hpp"
#include "cagr/model.hpp"
#include "cagr/training.hpp"

namespace cagr {

// Top-k metrics for one user. `relevant` is treated as a set; an empty set
// throws Error.
double recall_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                   std::size_t k);
double ndcg_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                 std::size_t k);
double hitrate_at_k(std::span<const std::string> retrieved, std::span<const std::string> relevant,
                    std::size_t k);

enum class Backend { kExact, kHnsw };

struct MetricReport {
  std::string label;
  std::vector<std::size_t> ks;
  std::vector<double> recall;  // mean per k
  std::vector<double> ndcg;
  std::vector<double> hitrate;
  std::size_t users = 0;    // evaluated
  std::size_t skipped = 0;  // no targets
  std::string fingerprint;
};

// One row per (metric, k).
std::string format_table(const MetricReport& report);
// `key=value` lines, e.g. `recall@20=0.41`.
std::string format_kv(const MetricReport& report);

// Recommends for every case and averages the metrics. Retrieval asks each
// interest for max(n_per_interest, max k) items so every k is filled.
MetricReport evaluate(const Model& model, std::span<const EvalCase> cases,
                      std::span<const std::size_t> ks, Backend backend = Backend::kExact,
                      unsigned threads = 1);

// Each training user with their whole sequence as history and their distinct
// target-behavior items as the relevant set.
std::vector<EvalCase> memorization_cases(std::span<const UserSequence> sequences,
                                         std::span<const BehaviorType> targets);

struct Corpus {
  std::vector<ActionRecord> interactions;
  ItemFeatureTable items;
};

// Reads interactions.tsv and items.tsv from `dir`.
Corpus load_corpus(const std::filesystem::path& dir);

// Everything derived from a corpus before training: the split, the co-action
// graph over training actions, and interaction items lacking a feature row.
struct Experiment {
  DatasetSplit split;
  CoActionGraph graph;
  std::vector<std::string> extra_ids;
};

Experiment prepare_experiment(const ModelConfig& config, const Corpus& corpus);
Model initialize_model(const ModelConfig& config, const Corpus& corpus,
                       const Experiment& experiment);

// Trains one model per variant on the same split and evaluates each on the
// test partition. The first report is the unablated model.
struct AblationVariant {
  std::string label;
  bool drop_co_click = false;
  bool drop_co_purchase = false;
  bool drop_edge_feats = false;
  bool drop_seq_graph = false;
};

// full, -c, -p, -a (both co-action relations), -e, -g.
std::vector<AblationVariant> standard_ablations();

std::vector<MetricReport> ablation_run(const ModelConfig& config, const Corpus& corpus,
                                       std::span<const AblationVariant> variants,
                                       std::span<const std::size_t> ks);

std::vector<MetricReport> lambda_sweep(const ModelConfig& config, const Corpus& corpus,
                                       std::span<const double> lambdas,
                                       std::span<const std::size_t> ks);

// A tiny fully specified problem (T=3, d=4, L=2, K=2) whose every tensor
// receives gradient, for finite-difference checks.
struct GradCheckInstance {
  Model model;
  std::vector<UserSequence> sequences;
  std::vector<TrainExample> examples;
};

GradCheckInstance make_grad_check_instance(std::uint64_t seed);

}  // namespace cagr
