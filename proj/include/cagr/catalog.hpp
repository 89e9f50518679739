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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cagr/data_model.hpp"
#include "cagr/embedding.hpp"

namespace cagr {

// Every item the model knows about, indexed densely in ascending id order.
// Items referenced by interactions but absent from the feature table get the
// UNK encoding and are counted in missing_features().
class ItemCatalog {
 public:
  ItemCatalog() = default;
  ItemCatalog(const ItemFeatureTable& table, const ItemEncoder& encoder,
              std::span<const std::string> extra_ids = {});

  std::size_t size() const { return ids_.size(); }
  const std::string& id(int index) const { return ids_[static_cast<std::size_t>(index)]; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<int> find(std::string_view id) const;

  const ItemFeatureRow& features(int index) const { return rows_[static_cast<std::size_t>(index)]; }
  const EncodedItem& encoded(int index) const { return encoded_[static_cast<std::size_t>(index)]; }
  std::size_t missing_features() const { return missing_; }

  // Raw row used for items the catalog has never seen.
  const ItemFeatureRow& unknown_features() const { return unknown_row_; }
  const EncodedItem& unknown_encoded() const { return unknown_encoded_; }

 private:
  std::vector<std::string> ids_;
  std::vector<ItemFeatureRow> rows_;
  std::vector<EncodedItem> encoded_;
  std::unordered_map<std::string, int> index_;
  ItemFeatureRow unknown_row_;
  EncodedItem unknown_encoded_;
  std::size_t missing_ = 0;
};

}  // namespace cagr
