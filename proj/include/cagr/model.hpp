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

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cagr/catalog.hpp"
#include "cagr/coaction.hpp"
#include "cagr/config.hpp"
#include "cagr/embedding.hpp"
#include "cagr/interaction.hpp"
#include "cagr/interests.hpp"
#include "cagr/seqgraph.hpp"

namespace cagr {

struct ModelParams {
  EmbeddingTables embedding;
  CoActionParams coaction;
  InteractionParams interaction;
  InterestParams interests;

  // Same shapes, all zeros.
  ModelParams zeros_like() const;
};

struct NamedTensor {
  std::string name;
  Mat* value;
};

// Every trainable tensor in a fixed order. Names are stable; they double as
// file names when a model is saved.
std::vector<NamedTensor> named_tensors(ModelParams& params);

// Item tower activations for one batch. Vectors are stored column-wise per
// catalog index; only requested items (and their neighbors, for e) are filled.
struct ItemTowerState {
  struct PerItem {
    int item = -1;
    std::vector<int> click_neighbors;
    std::vector<int> purchase_neighbors;
    Mat click_embs;
    Mat purchase_embs;
    AggregateCache click_cache;
    AggregateCache purchase_cache;
    Vec z_click;
    Vec z_purchase;
  };
  std::vector<PerItem> items;
  std::vector<int> slot;      // catalog index -> position in items, or -1
  std::vector<char> has_embedding;
  Mat e;                      // d x catalog size
  Mat z;                      // d x catalog size
};

struct UserTowerState {
  SequenceGraph graph;
  InteractionCache interaction;
  Mat behavior;  // T x d, input to interest extraction
  InterestCache pooling;
  Mat interests;  // K x d
};

// The two towers plus everything needed to run them: encoder, catalog and
// the co-action neighbor lists sampled from the training graph.
class Model {
 public:
  Model() = default;
  // Fits the encoder on `items` and builds the catalog from `items` plus
  // `extra_item_ids` (items seen in interactions without a feature row).
  Model(ModelConfig config, ItemFeatureTable items, std::vector<std::string> extra_item_ids,
        CoActionGraph graph, ModelParams params);

  // Random initialization seeded by config.seed.
  static Model initialize(const ModelConfig& config, ItemFeatureTable items,
                          std::vector<std::string> extra_item_ids, CoActionGraph graph);

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }
  const ItemCatalog& catalog() const { return catalog_; }
  const ItemEncoder& encoder() const { return encoder_; }
  const CoActionGraph& graph() const { return graph_; }
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  int dim() const { return config_.dim; }
  int edge_dim() const;

  const std::vector<int>& click_neighbors(int item) const;
  const std::vector<int>& purchase_neighbors(int item) const;

  // z_q for every requested item, plus e for those items and their neighbors.
  ItemTowerState item_forward(std::span<const int> items) const;
  // grad_z / grad_e are d x catalog size; columns outside the batch must be zero.
  void item_backward(const ItemTowerState& state, const Mat& grad_z, const Mat& grad_e,
                     ModelParams& grads) const;

  // Interests for a history; keeps the most recent t_max actions.
  UserTowerState user_forward(std::span<const ActionRecord> history) const;
  void user_backward(const UserTowerState& state, const Mat& grad_interests,
                     ModelParams& grads) const;

  Mat item_vectors() const;     // d x catalog size, z_q
  Mat item_embeddings() const;  // d x catalog size, e_q
  Mat user_interests(std::span<const ActionRecord> history) const;

  // A directory of named tensor files plus config, fingerprint, encoder,
  // catalog features and the co-action graph.
  void save(const std::filesystem::path& dir) const;
  static Model load(const std::filesystem::path& dir);

 private:
  void index_neighbors();

  ModelConfig config_;
  ItemFeatureTable features_;
  std::vector<std::string> extra_ids_;
  ItemEncoder encoder_;
  ItemCatalog catalog_;
  CoActionGraph graph_;
  ModelParams params_;
  std::vector<std::vector<int>> click_neighbors_;
  std::vector<std::vector<int>> purchase_neighbors_;
};

}  // namespace cagr
