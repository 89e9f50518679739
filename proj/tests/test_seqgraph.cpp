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
#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cagr/catalog.hpp"
#include "cagr/seqgraph.hpp"

namespace cagr {
namespace {

TEST(PairFunctions, Equal) {
  EXPECT_EQ(feat_equal(5, 5), 1);
  EXPECT_EQ(feat_equal(5, 6), 0);
  for (int a = -3; a < 3; ++a) {
    for (int b = -3; b < 3; ++b) EXPECT_EQ(feat_equal(a, b), feat_equal(b, a));
  }
}

TEST(PairFunctions, Gap) {
  EXPECT_EQ(feat_gap(3.0, 5.0), 2.0);
  EXPECT_EQ(feat_gap(1.25, 1.25), 0.0);
  EXPECT_EQ(feat_gap(0.5, -2.0), -feat_gap(-2.0, 0.5));
}

TEST(PairFunctions, Order) {
  EXPECT_EQ(feat_order(2, 7), 1);
  EXPECT_EQ(feat_order(7, 2), -1);
  EXPECT_EQ(feat_order(4, 4), 0);
}

TEST(EdgeLayout, DefaultSchemaOffsets) {
  const EdgeLayout l(8, FeatureSchema{});
  EXPECT_EQ(l.behavior_i(), 0);
  EXPECT_EQ(l.behavior_j(), 8);
  EXPECT_EQ(l.behavior_equal(), 16);
  EXPECT_EQ(l.time_gap(), 17);
  EXPECT_EQ(l.onehot_begin(), 18);
  EXPECT_EQ(l.numeric_begin(), 22);
  EXPECT_EQ(l.ordinal_begin(), 23);
  EXPECT_EQ(l.size(), 25);
}

class EdgeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    table.rows.push_back({"a", {1, 10, 100, 7}, {2.0}, {3, 1}});
    table.rows.push_back({"b", {2, 10, 100, 7}, {2.5}, {3, 2}});
    encoder = ItemEncoder::fit(table);
    tables = EmbeddingTables::zeros(encoder, {4, 2, 2});
    tables.behavior << 1, 2, 3, 4, 5, 6, 7, 8;
  }
  ItemFeatureTable table;
  ItemEncoder encoder;
  EmbeddingTables tables;
  const EdgeLayout layout{2, FeatureSchema{}};
};

TEST_F(EdgeTest, SamePairIdentity) {
  const ActionNode s{BehaviorType::kCart, 1000, &table.rows[0]};
  const Vec e = edge_features(s, s, tables);
  ASSERT_EQ(e.size(), layout.size());
  EXPECT_EQ(e.segment(layout.behavior_i(), 2), e.segment(layout.behavior_j(), 2));
  EXPECT_EQ(e(layout.behavior_equal()), 1.0);
  EXPECT_EQ(e(layout.time_gap()), 0.0);
  EXPECT_TRUE((e.segment(layout.onehot_begin(), 4).array() == 1.0).all());
  EXPECT_EQ(e(layout.numeric_begin()), 0.0);
  EXPECT_TRUE(e.segment(layout.ordinal_begin(), 2).isZero(0.0));
}

TEST_F(EdgeTest, ViewThenPurchaseOneDayApart) {
  const ActionNode earlier{BehaviorType::kWatch, 50000, &table.rows[0]};
  const ActionNode later{BehaviorType::kPurchase, 50000 + 86400, &table.rows[0]};
  const Vec e = edge_features(later, earlier, tables);
  Vec expected(layout.size());
  expected << 7, 8,  // purchase
      3, 4,          // watch
      0,             // different behaviors
      -1.0,          // t_j - t_i in days
      1, 1, 1, 1,    // same item, every one-hot feature equal
      0,             // same price
      0, 0;          // same ordinals
  EXPECT_EQ(e, expected);
}

TEST_F(EdgeTest, PriceOnlyDifference) {
  const ActionNode si{BehaviorType::kClick, 10, &table.rows[0]};
  const ActionNode sj{BehaviorType::kClick, 10, &table.rows[1]};
  const Vec e = edge_features(si, sj, tables);
  Vec expected(layout.size());
  expected << 1, 2, 1, 2, 1, 0,
      0, 1, 1, 1,  // item codes differ, categories and seller equal
      0.5,         // log-price gap p_j - p_i
      0, 1;        // seller level equal, price bucket 1 -> 2
  EXPECT_EQ(e, expected);
}

TEST_F(EdgeTest, RandomPairsInvariants) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> code(0, 3), beh(0, 3);
  std::uniform_int_distribution<std::int64_t> ts(0, 10'000'000);
  std::normal_distribution<double> price(3.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    ItemFeatureRow r1{"x", {code(rng), code(rng), code(rng), code(rng)}, {price(rng)}, {code(rng), code(rng)}};
    ItemFeatureRow r2{"y", {code(rng), code(rng), code(rng), code(rng)}, {price(rng)}, {code(rng), code(rng)}};
    const ActionNode s1{static_cast<BehaviorType>(beh(rng)), ts(rng), &r1};
    const ActionNode s2{static_cast<BehaviorType>(beh(rng)), ts(rng), &r2};
    const Vec self = edge_features(s1, s1, tables);
    EXPECT_EQ(self(layout.time_gap()), 0.0);
    EXPECT_TRUE((self.segment(layout.onehot_begin(), 4).array() == 1.0).all());
    const Vec e12 = edge_features(s1, s2, tables);
    const Vec e21 = edge_features(s2, s1, tables);
    EXPECT_EQ(e12(layout.time_gap()), -e21(layout.time_gap()));
    EXPECT_EQ(e12(layout.numeric_begin()), -e21(layout.numeric_begin()));
    EXPECT_EQ(e12.segment(layout.onehot_begin(), 4), e21.segment(layout.onehot_begin(), 4));
    EXPECT_EQ(e12.segment(layout.ordinal_begin(), 2), -e21.segment(layout.ordinal_begin(), 2));
  }
}

class GraphTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int i = 0; i < 4; ++i) {
      table.rows.push_back({"i" + std::to_string(i), {i, i % 2, 0, i}, {1.0 + i}, {i, 0}});
    }
    encoder = ItemEncoder::fit(table);
    catalog = ItemCatalog(table, encoder);
    std::mt19937_64 rng(1);
    tables = EmbeddingTables::random(encoder, {4, 2, 2}, 0.1, rng);
  }
  std::vector<ActionRecord> seq(int t) {
    std::vector<ActionRecord> out;
    for (int i = 0; i < t; ++i) {
      out.push_back({"u", "i" + std::to_string(i), static_cast<BehaviorType>(i % 4), 100 * i});
    }
    return out;
  }
  ItemFeatureTable table;
  ItemEncoder encoder;
  ItemCatalog catalog;
  EmbeddingTables tables;
};

TEST_F(GraphTest, SingleActionHoldsSelfPair) {
  const auto g = build_sequence_graph(seq(1), catalog, tables);
  EXPECT_EQ(g.valid_len, 1);
  EXPECT_EQ(g.edge_feats.cols(), 1);
  const ActionNode s{BehaviorType::kClick, 0, &table.rows[0]};
  EXPECT_EQ(g.edge(0, 0), edge_features(s, s, tables));
}

TEST_F(GraphTest, FutureEdgesZeroPastEdgesFilled) {
  const auto actions = seq(4);
  const auto g = build_sequence_graph(actions, catalog, tables);
  EXPECT_EQ(g.edge_feats.cols(), 16);
  EXPECT_EQ(g.edge_feats.rows(), 25 - 16 + 4);
  int eligible = 0;
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(g.node_embs.row(i).transpose(), embed_item(table.rows[i], encoder, tables));
    for (int j = 0; j < 4; ++j) {
      if (i < j) {
        EXPECT_TRUE(g.edge(i, j).isZero(0.0));
      } else {
        ++eligible;
        const ActionNode si{actions[i].behavior, actions[i].timestamp, &table.rows[i]};
        const ActionNode sj{actions[j].behavior, actions[j].timestamp, &table.rows[j]};
        EXPECT_EQ(g.edge(i, j), edge_features(si, sj, tables));
      }
    }
  }
  EXPECT_EQ(eligible, 10);
}

TEST_F(GraphTest, SwappingActionsFlipsZeroedOrientation) {
  auto actions = seq(2);
  const auto g1 = build_sequence_graph(actions, catalog, tables);
  std::swap(actions[0], actions[1]);
  std::swap(actions[0].timestamp, actions[1].timestamp);
  const auto g2 = build_sequence_graph(actions, catalog, tables);
  EXPECT_FALSE(g1.edge(1, 0).isZero(0.0));
  EXPECT_TRUE(g1.edge(0, 1).isZero(0.0));
  EXPECT_NE(g1.edge(1, 0), g2.edge(1, 0));
  EXPECT_EQ(g2.items[0], 1);
}

TEST_F(GraphTest, RepeatedItemsAreDistinctNodesAndUnknownItemsUseUnk) {
  std::vector<ActionRecord> actions{{"u", "i2", BehaviorType::kClick, 0},
                                    {"u", "i2", BehaviorType::kClick, 5},
                                    {"u", "nope", BehaviorType::kClick, 9}};
  const auto g = build_sequence_graph(actions, catalog, tables);
  EXPECT_EQ(g.valid_len, 3);
  EXPECT_EQ(g.node_embs.row(0), g.node_embs.row(1));
  EXPECT_EQ(g.items[2], -1);
  EXPECT_EQ(g.node_embs.row(2).transpose(), embed_item(catalog.unknown_encoded(), tables));
}

TEST_F(GraphTest, DumpListsEverySlot) {
  const auto g = build_sequence_graph(seq(2), catalog, tables);
  std::ostringstream out;
  dump_sequence_graph(out, g);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(out.str().rfind("0\t0\t", 0), 0u);
}

}  // namespace
}  // namespace cagr
