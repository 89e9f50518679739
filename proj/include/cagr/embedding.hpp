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
#include <map>
#include <random>
#include <span>
#include <vector>

#include "cagr/data_model.hpp"
#include "cagr/types.hpp"

namespace cagr {

// An item's features mapped into embedding inputs: one vocabulary index per
// one-hot column (0 is UNK) and the numeric then ordinal values standardized
// to zero mean and unit variance.
struct EncodedItem {
  std::vector<int> codes;
  Vec dense;
};

// Vocabularies and dense-feature statistics fitted on an item feature table.
class ItemEncoder {
 public:
  ItemEncoder() = default;
  static ItemEncoder fit(const ItemFeatureTable& table);

  EncodedItem encode(const ItemFeatureRow& row) const;
  // All codes UNK, dense values at the mean.
  EncodedItem unknown() const;

  std::size_t onehot_count() const { return vocab_.size(); }
  std::size_t dense_count() const { return mean_.size(); }
  // Table rows for column `f`, including the UNK row.
  std::size_t vocab_size(std::size_t f) const { return vocab_[f].size() + 1; }

 private:
  std::vector<std::map<std::int64_t, int>> vocab_;
  std::vector<double> mean_;
  std::vector<double> scale_;
};

struct EmbeddingDims {
  int dim = 32;
  int feature_dim = 8;
  int behavior_dim = 8;
};

// Shared embedding module. Item vector = projection * [feature rows..., dense]
// + bias.
struct EmbeddingTables {
  std::vector<Mat> feature;  // vocab_size(f) x feature_dim
  Mat projection;            // dim x (onehot_count * feature_dim + dense_count)
  Mat projection_bias;       // dim x 1
  Mat behavior;              // kNumBehaviors x behavior_dim

  static EmbeddingTables zeros(const ItemEncoder& encoder, const EmbeddingDims& dims);
  static EmbeddingTables random(const ItemEncoder& encoder, const EmbeddingDims& dims,
                                double scale, std::mt19937_64& rng);

  int dim() const { return static_cast<int>(projection.rows()); }
  int feature_dim() const { return feature.empty() ? 0 : static_cast<int>(feature[0].cols()); }
  int behavior_dim() const { return static_cast<int>(behavior.cols()); }
};

// Concatenated projection input for one item.
Vec embedding_input(const EncodedItem& item, const EmbeddingTables& tables);

Vec embed_item(const EncodedItem& item, const EmbeddingTables& tables);
Vec embed_item(const ItemFeatureRow& row, const ItemEncoder& encoder,
               const EmbeddingTables& tables);

// Accumulates d(loss)/d(tables) into `grads` given d(loss)/d(item vector).
void embed_item_backward(const EncodedItem& item, const EmbeddingTables& tables,
                         const Vec& grad_out, EmbeddingTables& grads);

Vec embed_behavior(BehaviorType b, const EmbeddingTables& tables);

// `id \t v0,v1,...` with 9 significant digits.
void write_embedding_rows(std::ostream& out, std::span<const std::string> ids, const Mat& vectors);
// Inverse of write_embedding_rows; vectors are returned column-wise.
std::pair<std::vector<std::string>, Mat> read_embedding_rows(std::istream& in);

// Fills every entry with uniform(-scale, scale) draws.
void fill_uniform(Mat& m, double scale, std::mt19937_64& rng);

}  // namespace cagr
