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
#include "cagr/seqgraph.hpp"

#include <ostream>

#include <fmt/format.h>

namespace cagr {

Vec edge_features(const ActionNode& s_i, const ActionNode& s_j, const EmbeddingTables& tables) {
  const ItemFeatureRow& x_i = *s_i.features;
  const ItemFeatureRow& x_j = *s_j.features;
  const EdgeLayout layout(tables.behavior_dim(), static_cast<int>(x_i.onehot.size()),
                          static_cast<int>(x_i.numeric.size()),
                          static_cast<int>(x_i.ordinal.size()));
  Vec e(layout.size());
  e.segment(layout.behavior_i(), layout.behavior_dim) = embed_behavior(s_i.behavior, tables);
  e.segment(layout.behavior_j(), layout.behavior_dim) = embed_behavior(s_j.behavior, tables);
  e[layout.behavior_equal()] =
      feat_equal(static_cast<int>(s_i.behavior), static_cast<int>(s_j.behavior));
  e[layout.time_gap()] = feat_gap(static_cast<double>(s_i.timestamp) / kSecondsPerDay,
                                  static_cast<double>(s_j.timestamp) / kSecondsPerDay);
  for (int f = 0; f < layout.onehot; ++f) {
    e[layout.onehot_begin() + f] = feat_equal(x_i.onehot[f], x_j.onehot[f]);
  }
  for (int f = 0; f < layout.numeric; ++f) {
    e[layout.numeric_begin() + f] = feat_gap(x_i.numeric[f], x_j.numeric[f]);
  }
  for (int f = 0; f < layout.ordinal; ++f) {
    e[layout.ordinal_begin() + f] = feat_order(x_i.ordinal[f], x_j.ordinal[f]);
  }
  return e;
}

SequenceGraph build_sequence_graph(std::span<const ActionRecord> actions,
                                   const ItemCatalog& catalog, const EmbeddingTables& tables) {
  const int t = static_cast<int>(actions.size());
  SequenceGraph g;
  g.valid_len = t;
  g.node_embs.resize(t, tables.dim());
  std::vector<ActionNode> nodes(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) {
    const auto& a = actions[static_cast<std::size_t>(i)];
    const auto index = catalog.find(a.item_id);
    g.items.push_back(index ? *index : -1);
    g.behaviors.push_back(a.behavior);
    const EncodedItem& enc = index ? catalog.encoded(*index) : catalog.unknown_encoded();
    g.node_embs.row(i) = embed_item(enc, tables).transpose();
    nodes[static_cast<std::size_t>(i)] = {
        a.behavior, a.timestamp, index ? &catalog.features(*index) : &catalog.unknown_features()};
  }
  if (t == 0) return g;
  const auto d_e = edge_features(nodes[0], nodes[0], tables).size();
  g.edge_feats = Mat::Zero(d_e, static_cast<Eigen::Index>(t) * t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j <= i; ++j) {
      g.edge(i, j) = edge_features(nodes[static_cast<std::size_t>(i)],
                                   nodes[static_cast<std::size_t>(j)], tables);
    }
  }
  return g;
}

void dump_sequence_graph(std::ostream& out, const SequenceGraph& graph) {
  for (int i = 0; i < graph.valid_len; ++i) {
    for (int j = 0; j < graph.valid_len; ++j) {
      out << i << '\t' << j << '\t';
      const auto e = graph.edge(i, j);
      for (Eigen::Index k = 0; k < e.size(); ++k) {
        if (k > 0) out << ',';
        out << fmt::format("{:.9g}", e[k]);
      }
      out << '\n';
    }
  }
}

}  // namespace cagr
