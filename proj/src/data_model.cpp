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
#include "cagr/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "cagr/types.hpp"

namespace cagr {
namespace {

constexpr std::string_view kBehaviorNames[kNumBehaviors] = {"click", "watch", "cart", "purchase"};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

EvalCase make_case(const UserSequence& history_source, std::size_t history_len,
                   std::span<const ActionRecord> future, const SplitParams& params) {
  EvalCase c;
  c.user_id = history_source.user_id;
  c.history.user_id = history_source.user_id;
  const std::size_t keep = std::min(history_len, params.t_max);
  c.history.actions.assign(history_source.actions.begin() + (history_len - keep),
                           history_source.actions.begin() + history_len);
  std::set<std::string> seen;
  for (const auto& a : future) {
    const bool is_target = std::find(params.target_behaviors.begin(), params.target_behaviors.end(),
                                     a.behavior) != params.target_behaviors.end();
    if (is_target && seen.insert(a.item_id).second) c.targets.push_back(a.item_id);
  }
  return c;
}

}  // namespace

std::string_view behavior_name(BehaviorType b) { return kBehaviorNames[static_cast<int>(b)]; }

std::optional<BehaviorType> parse_behavior(std::string_view token) {
  for (int i = 0; i < kNumBehaviors; ++i) {
    if (kBehaviorNames[i] == token) return static_cast<BehaviorType>(i);
  }
  return std::nullopt;
}

std::vector<ActionRecord> parse_interactions(std::istream& in) {
  std::vector<ActionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw Error(fmt::format("malformed line {}: expected 4 tab-separated fields, got {}", line_no,
                              fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw Error(fmt::format("malformed line {}: empty identifier", line_no));
    }
    const auto behavior = parse_behavior(fields[2]);
    if (!behavior) {
      throw Error(fmt::format("unknown behavior '{}' at line {}", fields[2], line_no));
    }
    const auto ts = parse_number<std::int64_t>(fields[3]);
    if (!ts || *ts < 0) {
      throw Error(fmt::format("malformed line {}: bad timestamp '{}'", line_no, fields[3]));
    }
    records.push_back({std::string(fields[0]), std::string(fields[1]), *behavior, *ts});
  }
  return records;
}

std::vector<ActionRecord> load_interactions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_interactions(in);
}

void write_interactions(std::ostream& out, std::span<const ActionRecord> records) {
  for (const auto& r : records) {
    out << r.user_id << '\t' << r.item_id << '\t' << behavior_name(r.behavior) << '\t'
        << r.timestamp << '\n';
  }
}

void save_interactions(const std::filesystem::path& path, std::span<const ActionRecord> records) {
  auto out = open_output(path);
  write_interactions(out, records);
}

ItemFeatureTable parse_item_features(std::istream& in) {
  ItemFeatureTable table;
  table.schema.onehot.clear();
  table.schema.numeric.clear();
  table.schema.ordinal.clear();

  std::string line;
  if (!std::getline(in, line)) throw Error("item features: missing header row");
  strip_cr(line);
  const auto header = split_tabs(line);
  if (header.empty() || header[0] != "item_id") {
    throw Error("item features: header must start with 'item_id'");
  }
  // 0 = onehot, 1 = numeric, 2 = ordinal; blocks must appear in that order.
  int last_kind = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto col = header[c];
    const auto colon = col.find(':');
    if (colon == std::string_view::npos) {
      throw Error(fmt::format("item features: column '{}' lacks a type prefix", col));
    }
    const auto kind = col.substr(0, colon);
    const std::string name(col.substr(colon + 1));
    int k = -1;
    if (kind == "onehot") {
      k = 0;
      table.schema.onehot.push_back(name);
    } else if (kind == "numeric") {
      k = 1;
      table.schema.numeric.push_back(name);
    } else if (kind == "ordinal") {
      k = 2;
      table.schema.ordinal.push_back(name);
    } else {
      throw Error(fmt::format("item features: unknown column type '{}'", kind));
    }
    if (k < last_kind) throw Error("item features: columns must be onehot, numeric, ordinal");
    last_kind = k;
  }

  const std::size_t g = table.schema.onehot.size();
  const std::size_t n_num = table.schema.numeric.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw Error(fmt::format("item features: malformed line {}: expected {} fields, got {}",
                              line_no, header.size(), fields.size()));
    }
    ItemFeatureRow row;
    row.item_id = std::string(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const std::size_t f = c - 1;
      if (f < g || f >= g + n_num) {
        const auto v = parse_number<std::int64_t>(fields[c]);
        if (!v) throw Error(fmt::format("item features: bad integer at line {}", line_no));
        (f < g ? row.onehot : row.ordinal).push_back(*v);
      } else {
        const auto v = parse_number<double>(fields[c]);
        if (!v || !std::isfinite(*v)) {
          throw Error(fmt::format("item features: bad number at line {}", line_no));
        }
        row.numeric.push_back(*v);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ItemFeatureTable load_item_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_item_features(in);
}

void write_item_features(std::ostream& out, const ItemFeatureTable& table) {
  out << "item_id";
  for (const auto& n : table.schema.onehot) out << "\tonehot:" << n;
  for (const auto& n : table.schema.numeric) out << "\tnumeric:" << n;
  for (const auto& n : table.schema.ordinal) out << "\tordinal:" << n;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.item_id;
    for (auto v : row.onehot) out << '\t' << v;
    for (auto v : row.numeric) out << '\t' << fmt::format("{}", v);
    for (auto v : row.ordinal) out << '\t' << v;
    out << '\n';
  }
}

void save_item_features(const std::filesystem::path& path, const ItemFeatureTable& table) {
  auto out = open_output(path);
  write_item_features(out, table);
}

std::vector<UserSequence> build_sequences(std::span<const ActionRecord> records,
                                          std::size_t t_max) {
  if (t_max == 0) throw Error("t_max must be at least 1");
  std::map<std::string, std::vector<ActionRecord>> by_user;
  for (const auto& r : records) by_user[r.user_id].push_back(r);

  std::vector<UserSequence> out;
  out.reserve(by_user.size());
  for (auto& [user, actions] : by_user) {
    std::stable_sort(actions.begin(), actions.end(),
                     [](const ActionRecord& a, const ActionRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
    if (actions.size() > t_max) {
      actions.erase(actions.begin(), actions.end() - static_cast<std::ptrdiff_t>(t_max));
    }
    out.push_back({user, std::move(actions)});
  }
  return out;
}

std::vector<ActionRecord> filter_min_clicks(std::span<const ActionRecord> records,
                                            std::size_t min_clicks) {
  std::vector<ActionRecord> kept(records.begin(), records.end());
  if (min_clicks == 0) return kept;
  while (true) {
    std::unordered_map<std::string, std::size_t> user_clicks, item_clicks;
    for (const auto& r : kept) {
      if (r.behavior != BehaviorType::kClick) continue;
      ++user_clicks[r.user_id];
      ++item_clicks[r.item_id];
    }
    const auto before = kept.size();
    std::erase_if(kept, [&](const ActionRecord& r) {
      return user_clicks[r.user_id] < min_clicks || item_clicks[r.item_id] < min_clicks;
    });
    if (kept.size() == before) return kept;
  }
}

DatasetSplit split_dataset(std::span<const UserSequence> sequences, const SplitParams& params) {
  DatasetSplit split;
  if (params.mode == SplitMode::kByUser) {
    const double total =
        params.train_fraction + params.validation_fraction + params.test_fraction;
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(fmt::format("split fractions must sum to 1, got {}", total));
    }
    std::vector<std::size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(params.seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto n = static_cast<double>(sequences.size());
    const auto n_train = static_cast<std::size_t>(std::llround(params.train_fraction * n));
    const auto n_val = std::min(sequences.size() - n_train,
                                static_cast<std::size_t>(std::llround(params.validation_fraction * n)));
    for (std::size_t r = 0; r < order.size(); ++r) {
      const UserSequence& seq = sequences[order[r]];
      if (r < n_train) {
        UserSequence s = seq;
        if (s.actions.size() > params.t_max) {
          s.actions.erase(s.actions.begin(),
                          s.actions.end() - static_cast<std::ptrdiff_t>(params.t_max));
        }
        split.train.push_back(std::move(s));
        continue;
      }
      const std::size_t t = seq.actions.size();
      auto hist = static_cast<std::size_t>(std::ceil(params.history_fraction * static_cast<double>(t)));
      hist = std::clamp<std::size_t>(hist, 1, t);
      auto c = make_case(seq, hist, std::span(seq.actions).subspan(hist), params);
      (r < n_train + n_val ? split.validation : split.test).push_back(std::move(c));
    }
    const auto by_id = [](const auto& a, const auto& b) { return a.user_id < b.user_id; };
    std::sort(split.train.begin(), split.train.end(), by_id);
    std::sort(split.validation.begin(), split.validation.end(), by_id);
    std::sort(split.test.begin(), split.test.end(), by_id);
    if (split.train.empty()) throw Error("empty train partition");
    if (params.validation_fraction > 0 && split.validation.empty()) {
      throw Error("empty validation partition");
    }
    if (split.test.empty()) throw Error("empty test partition");
    return split;
  }

  for (const auto& seq : sequences) {
    const auto first_after = std::find_if(seq.actions.begin(), seq.actions.end(),
                                          [&](const ActionRecord& a) {
                                            return a.timestamp >= params.boundary;
                                          });
    const auto hist = static_cast<std::size_t>(first_after - seq.actions.begin());
    if (hist == 0) continue;
    UserSequence train{seq.user_id, {seq.actions.begin(), first_after}};
    if (train.actions.size() > params.t_max) {
      train.actions.erase(train.actions.begin(),
                          train.actions.end() - static_cast<std::ptrdiff_t>(params.t_max));
    }
    split.train.push_back(std::move(train));
    if (hist < seq.actions.size()) {
      auto c = make_case(seq, hist, std::span(seq.actions).subspan(hist), params);
      if (!c.targets.empty()) split.test.push_back(std::move(c));
    }
  }
  if (split.train.empty()) throw Error("empty train partition");
  if (split.test.empty()) throw Error("empty test partition");
  return split;
}

std::int64_t day_boundary(std::span<const ActionRecord> records, int days) {
  if (records.empty()) throw Error("no interactions");
  std::int64_t first = records.front().timestamp;
  for (const auto& r : records) first = std::min(first, r.timestamp);
  constexpr std::int64_t kDay = 86400;
  return (first / kDay) * kDay + static_cast<std::int64_t>(days) * kDay;
}

std::vector<ActionRecord> flatten(std::span<const UserSequence> sequences) {
  std::vector<ActionRecord> out;
  for (const auto& s : sequences) out.insert(out.end(), s.actions.begin(), s.actions.end());
  return out;
}

}  // namespace cagr
