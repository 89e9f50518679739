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

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cagr/catalog.hpp"
#include "cagr/data_model.hpp"
#include "cagr/embedding.hpp"
#include "cagr/types.hpp"

namespace cagr {

// Pairwise comparison functions applied per feature.
inline int feat_equal(std::int64_t a, std::int64_t b) { return a == b ? 1 : 0; }
inline double feat_gap(double a, double b) { return b - a; }
inline int feat_order(std::int64_t a, std::int64_t b) { return (b > a) - (b < a); }

inline constexpr double kSecondsPerDay = 86400.0;

// Slice offsets of an edge vector:
//   [ behavior emb of s_i | behavior emb of s_j | I(b_i,b_j) | G(t_i,t_j) in days |
//     I over one-hot features | G over numeric features | H over ordinal features ]
struct EdgeLayout {
  int behavior_dim = 0;
  int onehot = 0;
  int numeric = 0;
  int ordinal = 0;

  EdgeLayout() = default;
  EdgeLayout(int behavior_dim, int onehot, int numeric, int ordinal)
      : behavior_dim(behavior_dim), onehot(onehot), numeric(numeric), ordinal(ordinal) {}
  EdgeLayout(int behavior_dim, const FeatureSchema& schema)
      : EdgeLayout(behavior_dim, static_cast<int>(schema.onehot.size()),
                   static_cast<int>(schema.numeric.size()),
                   static_cast<int>(schema.ordinal.size())) {}

  int behavior_i() const { return 0; }
  int behavior_j() const { return behavior_dim; }
  int behavior_equal() const { return 2 * behavior_dim; }
  int time_gap() const { return 2 * behavior_dim + 1; }
  int onehot_begin() const { return 2 * behavior_dim + 2; }
  int numeric_begin() const { return onehot_begin() + onehot; }
  int ordinal_begin() const { return numeric_begin() + numeric; }
  int size() const { return ordinal_begin() + ordinal; }
};

// One sequence position: the action plus its item's raw features.
struct ActionNode {
  BehaviorType behavior = BehaviorType::kClick;
  std::int64_t timestamp = 0;
  const ItemFeatureRow* features = nullptr;
};

// E(s_i, s_j). Meaningful for i >= j (s_i later); callers store zeros for i < j.
Vec edge_features(const ActionNode& s_i, const ActionNode& s_j, const EmbeddingTables& tables);

struct SequenceGraph {
  int valid_len = 0;
  Mat node_embs;   // T x d
  Mat edge_feats;  // d_e x (T*T); column i*T + j holds E(s_i, s_j)
  std::vector<BehaviorType> behaviors;
  std::vector<int> items;  // catalog index per node, -1 if unknown

  auto edge(int i, int j) const { return edge_feats.col(i * valid_len + j); }
  auto edge(int i, int j) { return edge_feats.col(i * valid_len + j); }
};

SequenceGraph build_sequence_graph(std::span<const ActionRecord> actions,
                                   const ItemCatalog& catalog, const EmbeddingTables& tables);

// Rows `i \t j \t v0,v1,...` for every slot, 9 significant digits.
void dump_sequence_graph(std::ostream& out, const SequenceGraph& graph);

}  // namespace cagr
