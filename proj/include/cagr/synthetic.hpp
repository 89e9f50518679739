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

#include "cagr/data_model.hpp"

namespace cagr {

// Synthetic corpus with planted sequence patterns: each user browses a small
// pool of items drawn from one or two categories, re-views items, and buys
// complementary pairs (item i is complemented by item i+1, which sits in the
// next category).
struct SyntheticConfig {
  std::size_t users = 100;
  std::size_t items = 500;
  std::size_t categories = 20;
  std::size_t min_length = 8;
  std::size_t max_length = 20;
  std::size_t pool_size = 6;
  double repeated_view_rate = 0.5;
  double complementary_purchase_rate = 0.3;
  int days = 8;
  std::int64_t start_time = 1699920000;  // a UTC midnight
};

struct SyntheticCorpus {
  std::vector<ActionRecord> interactions;
  ItemFeatureTable items;
};

SyntheticCorpus generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

// Writes interactions.tsv and items.tsv into `dir` (created if missing).
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

inline constexpr const char* kInteractionsFile = "interactions.tsv";
inline constexpr const char* kItemsFile = "items.tsv";

}  // namespace cagr
