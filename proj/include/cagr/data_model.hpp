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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cagr {

// Stable integer codes are part of the on-disk format; do not reorder.
enum class BehaviorType : int { kClick = 0, kWatch = 1, kCart = 2, kPurchase = 3 };
inline constexpr int kNumBehaviors = 4;

std::string_view behavior_name(BehaviorType b);
std::optional<BehaviorType> parse_behavior(std::string_view token);

// One user action s = (item, behavior, timestamp).
struct ActionRecord {
  std::string user_id;
  std::string item_id;
  BehaviorType behavior = BehaviorType::kClick;
  std::int64_t timestamp = 0;

  bool operator==(const ActionRecord&) const = default;
};

// Column layout of the item features file. One-hot features come first,
// then numeric, then ordinal, mirroring the order used for edge features.
struct FeatureSchema {
  std::vector<std::string> onehot{"item_code", "leaf_category", "parent_category", "seller"};
  std::vector<std::string> numeric{"log_price"};
  std::vector<std::string> ordinal{"seller_level", "price_bucket"};

  std::size_t total() const { return onehot.size() + numeric.size() + ordinal.size(); }
  bool operator==(const FeatureSchema&) const = default;
};

struct ItemFeatureRow {
  std::string item_id;
  std::vector<std::int64_t> onehot;
  std::vector<double> numeric;
  std::vector<std::int64_t> ordinal;

  bool operator==(const ItemFeatureRow&) const = default;
};

struct ItemFeatureTable {
  FeatureSchema schema;
  std::vector<ItemFeatureRow> rows;
};

struct UserSequence {
  std::string user_id;
  std::vector<ActionRecord> actions;  // non-decreasing timestamps
};

enum class SplitMode { kByUser, kByTime };

struct SplitParams {
  SplitMode mode = SplitMode::kByTime;
  // by_user
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  // Share of a held-out user's sequence used as history; the rest are targets.
  double history_fraction = 0.8;
  // by_time: actions with timestamp < boundary are training data.
  std::int64_t boundary = 0;
  std::size_t t_max = 200;
  std::vector<BehaviorType> target_behaviors{BehaviorType::kClick};
};

// A held-out user: history the model may see and the items it should retrieve.
struct EvalCase {
  std::string user_id;
  UserSequence history;
  std::vector<std::string> targets;  // distinct, in order of first occurrence
};

struct DatasetSplit {
  std::vector<UserSequence> train;
  std::vector<EvalCase> validation;
  std::vector<EvalCase> test;
};

// Interactions file: user_id \t item_id \t behavior \t timestamp, LF endings.
std::vector<ActionRecord> parse_interactions(std::istream& in);
std::vector<ActionRecord> load_interactions(const std::filesystem::path& path);
void write_interactions(std::ostream& out, std::span<const ActionRecord> records);
void save_interactions(const std::filesystem::path& path, std::span<const ActionRecord> records);

// Item features file: a header row of typed column names
// (item_id, onehot:<name>..., numeric:<name>..., ordinal:<name>...) then one
// row per item.
ItemFeatureTable parse_item_features(std::istream& in);
ItemFeatureTable load_item_features(const std::filesystem::path& path);
void write_item_features(std::ostream& out, const ItemFeatureTable& table);
void save_item_features(const std::filesystem::path& path, const ItemFeatureTable& table);

// Groups by user (ascending user id), sorts each group by timestamp with ties
// kept in input order, and keeps the most recent t_max actions.
std::vector<UserSequence> build_sequences(std::span<const ActionRecord> records,
                                          std::size_t t_max);

// Iteratively drops users and items with fewer than min_clicks click actions.
// min_clicks == 0 is a no-op.
std::vector<ActionRecord> filter_min_clicks(std::span<const ActionRecord> records,
                                            std::size_t min_clicks);

DatasetSplit split_dataset(std::span<const UserSequence> sequences, const SplitParams& params);

// Start of the UTC day holding the earliest action, plus `days` whole days.
std::int64_t day_boundary(std::span<const ActionRecord> records, int days);

// Every record referenced by the sequences, for graph construction.
std::vector<ActionRecord> flatten(std::span<const UserSequence> sequences);

}  // namespace cagr
