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
#include "cagr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cagr/types.hpp"

namespace cagr {
namespace {

std::string padded_id(char prefix, std::size_t i, std::size_t count) {
  const auto width = fmt::format("{}", count > 0 ? count - 1 : 0).size();
  return fmt::format("{}{:0{}}", prefix, i, width);
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.users == 0) throw Error("synthetic corpus needs at least one user");
  if (config.items == 0) throw Error("synthetic corpus needs at least one item");
  if (config.categories == 0 || config.categories > config.items) {
    throw Error("synthetic corpus needs 1 <= categories <= items");
  }
  if (config.min_length == 0 || config.min_length > config.max_length) {
    throw Error("synthetic corpus needs 1 <= min_length <= max_length");
  }
  if (config.days < 1) throw Error("synthetic corpus needs at least one day");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.3);

  SyntheticCorpus corpus;
  const std::size_t sellers = std::max<std::size_t>(1, config.items / 10);
  std::uniform_int_distribution<std::size_t> pick_seller(0, sellers - 1);
  for (std::size_t i = 0; i < config.items; ++i) {
    const std::size_t category = i % config.categories;
    const std::size_t seller = pick_seller(rng);
    const double log_price = 2.0 + 0.5 * static_cast<double>(category % 7) + noise(rng);
    ItemFeatureRow row;
    row.item_id = padded_id('i', i, config.items);
    row.onehot = {static_cast<std::int64_t>(i), static_cast<std::int64_t>(category),
                  static_cast<std::int64_t>(category / 4), static_cast<std::int64_t>(seller)};
    row.numeric = {std::round(log_price * 1e6) / 1e6};
    row.ordinal = {static_cast<std::int64_t>(1 + seller % 5),
                   std::clamp<std::int64_t>(static_cast<std::int64_t>(log_price - 1.0), 0, 5)};
    corpus.items.rows.push_back(std::move(row));
  }

  std::vector<std::vector<std::size_t>> by_category(config.categories);
  for (std::size_t i = 0; i < config.items; ++i) by_category[i % config.categories].push_back(i);

  const std::int64_t horizon = static_cast<std::int64_t>(config.days) * 86400;
  std::uniform_int_distribution<std::size_t> pick_len(config.min_length, config.max_length);
  std::uniform_int_distribution<std::size_t> pick_category(0, config.categories - 1);
  std::uniform_int_distribution<std::int64_t> pick_gap(60, 4 * 3600);

  for (std::size_t u = 0; u < config.users; ++u) {
    const std::string user = padded_id('u', u, config.users);
    const std::size_t n_interests = unit(rng) < 0.5 ? 1 : 2;
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < n_interests; ++k) {
      const auto& members = by_category[pick_category(rng)];
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      const std::size_t share = (config.pool_size + n_interests - 1) / n_interests;
      for (std::size_t p = 0; p < share; ++p) pool.push_back(members[pick(rng)]);
    }
    std::uniform_int_distribution<std::size_t> pick_pool(0, pool.size() - 1);

    const std::size_t length = pick_len(rng);
    struct Step {
      std::size_t item;
      BehaviorType behavior;
    };
    std::vector<Step> steps;
    for (std::size_t t = 0; t < length; ++t) {
      const double r = unit(rng);
      const BehaviorType b = r < 0.8   ? BehaviorType::kClick
                             : r < 0.9 ? BehaviorType::kWatch
                                       : BehaviorType::kCart;
      steps.push_back({pool[pick_pool(rng)], b});
    }
    if (length >= 2 && unit(rng) < config.repeated_view_rate) {
      std::uniform_int_distribution<std::size_t> pick_pos(1, length - 1);
      const std::size_t pos = pick_pos(rng);
      std::uniform_int_distribution<std::size_t> pick_earlier(0, pos - 1);
      steps[pos] = {steps[pick_earlier(rng)].item, BehaviorType::kClick};
    }
    if (unit(rng) < config.complementary_purchase_rate) {
      const std::size_t bought = pool[pick_pool(rng)];
      const std::size_t complement = (bought + 1) % config.items;
      std::uniform_int_distribution<std::size_t> pick_pos(0, steps.size());
      const std::size_t pos = pick_pos(rng);
      steps.insert(steps.begin() + static_cast<std::ptrdiff_t>(pos),
                   {{bought, BehaviorType::kPurchase}, {complement, BehaviorType::kPurchase}});
    }

    std::vector<std::int64_t> gaps(steps.size(), 0);
    std::int64_t span = 0;
    for (std::size_t t = 1; t < steps.size(); ++t) span += gaps[t] = pick_gap(rng);
    std::uniform_int_distribution<std::int64_t> pick_start(0, std::max<std::int64_t>(0, horizon - 1 - span));
    std::int64_t ts = config.start_time + pick_start(rng);
    for (std::size_t t = 0; t < steps.size(); ++t) {
      ts += gaps[t];
      corpus.interactions.push_back(
          {user, corpus.items.rows[steps[t].item].item_id, steps[t].behavior, ts});
    }
  }
  return corpus;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_interactions(dir / kInteractionsFile, corpus.interactions);
  save_item_features(dir / kItemsFile, corpus.items);
}

}  // namespace cagr
