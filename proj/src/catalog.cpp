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
#include "cagr/catalog.hpp"

#include <algorithm>
#include <map>

namespace cagr {

ItemCatalog::ItemCatalog(const ItemFeatureTable& table, const ItemEncoder& encoder,
                         std::span<const std::string> extra_ids) {
  std::map<std::string, const ItemFeatureRow*> by_id;
  for (const auto& row : table.rows) by_id.emplace(row.item_id, &row);
  for (const auto& id : extra_ids) by_id.emplace(id, nullptr);

  // Raw UNK row: codes that never match a real code, dense values at zero.
  unknown_row_.onehot.assign(table.schema.onehot.size(), -1);
  unknown_row_.numeric.assign(table.schema.numeric.size(), 0.0);
  unknown_row_.ordinal.assign(table.schema.ordinal.size(), 0);
  unknown_encoded_ = encoder.unknown();

  for (const auto& [id, row] : by_id) {
    index_.emplace(id, static_cast<int>(ids_.size()));
    ids_.push_back(id);
    if (row != nullptr) {
      rows_.push_back(*row);
      encoded_.push_back(encoder.encode(*row));
    } else {
      ++missing_;
      rows_.push_back(unknown_row_);
      rows_.back().item_id = id;
      encoded_.push_back(unknown_encoded_);
    }
  }
}

std::optional<int> ItemCatalog::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace cagr
