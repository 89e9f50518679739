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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cagr/data_model.hpp"
#include "cagr/model.hpp"
#include "cagr/types.hpp"

namespace cagr {

struct ScoredItem {
  std::string item_id;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

// Orders by descending score, then ascending item id.
bool ranks_before(const ScoredItem& a, const ScoredItem& b);

// Inner-product index over item vectors (one per column). Immutable after
// construction; query() is safe to call concurrently.
class ItemIndex {
 public:
  ItemIndex(std::vector<std::string> ids, Mat vectors);
  virtual ~ItemIndex() = default;

  // Top n by inner product, best first. n larger than the corpus returns
  // everything.
  virtual std::vector<ScoredItem> query(const Vec& q, std::size_t n) const = 0;
  virtual std::string_view backend() const = 0;

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Mat& vectors() const { return vectors_; }

 protected:
  std::vector<ScoredItem> top_n(std::span<const int> candidates, const Vec& q,
                                std::size_t n) const;

  std::vector<std::string> ids_;
  Mat vectors_;
};

class ExactIndex final : public ItemIndex {
 public:
  ExactIndex(std::vector<std::string> ids, Mat vectors);
  std::vector<ScoredItem> query(const Vec& q, std::size_t n) const override;
  std::string_view backend() const override { return "exact"; }
};

struct HnswParams {
  int m = 16;  // max links per node above layer 0; layer 0 allows 2m
  int ef_construction = 200;
  int ef_search = 64;
  std::uint64_t seed = 42;
};

// Layered navigable small-world graph searched with similarity = inner product.
class HnswIndex final : public ItemIndex {
 public:
  HnswIndex(std::vector<std::string> ids, Mat vectors, HnswParams params = {});
  std::vector<ScoredItem> query(const Vec& q, std::size_t n) const override;
  std::string_view backend() const override { return "hnsw"; }

  const HnswParams& params() const { return params_; }
  // Search with an explicit beam width instead of params().ef_search.
  std::vector<ScoredItem> query(const Vec& q, std::size_t n, int ef_search) const;

  void save(std::ostream& out) const;
  static std::unique_ptr<HnswIndex> load(std::istream& in, std::vector<std::string> ids,
                                         Mat vectors, HnswParams params);

 private:
  struct Node {
    int level = 0;
    std::vector<std::vector<int>> links;  // per layer
  };
  HnswIndex(std::vector<std::string> ids, Mat vectors, HnswParams params, std::vector<Node> nodes,
            int entry, int max_level);

  void insert(int node, int level);
  // Best-first search on one layer; returns up to ef (similarity, node) pairs, best first.
  std::vector<std::pair<double, int>> search_layer(const Vec& q, std::vector<int> entry_points,
                                                   int ef, int layer) const;
  void connect(int node, int layer, const std::vector<std::pair<double, int>>& candidates);
  double similarity(const Vec& q, int node) const { return vectors_.col(node).dot(q); }

  HnswParams params_;
  std::vector<Node> nodes_;
  int entry_ = -1;
  int max_level_ = -1;
};

// Versioned text persistence of either backend.
void save_index(std::ostream& out, const ItemIndex& index);
std::unique_ptr<ItemIndex> load_index(std::istream& in);

struct ItemEmbeddingSet {
  std::vector<std::string> ids;
  Mat vectors;  // d x n, z_q per item
  std::size_t missing_features = 0;
};

struct UserEmbeddings {
  std::string user_id;
  Mat interests;  // K x d
};

ItemEmbeddingSet batch_item_inference(const Model& model);
std::vector<UserEmbeddings> batch_user_inference(const Model& model,
                                                 std::span<const UserSequence> users);

// K queries of n_per_interest each, merged keeping each item's best score,
// ranked and cut to top_n.
std::vector<ScoredItem> recommend(const Mat& interests, const ItemIndex& index,
                                  std::size_t n_per_interest, std::size_t top_n);

void write_user_embeddings(std::ostream& out, std::span<const UserEmbeddings> users);
// `user_id \t rank \t item_id \t score`, rank from 1.
void write_recommendations(std::ostream& out, const std::string& user_id,
                           std::span<const ScoredItem> items);

}  // namespace cagr
