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
#include "cagr/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "cagr/types.hpp"

namespace cagr {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw Error(fmt::format("config: bad value '{}' for '{}'", v, key));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(fmt::format("config: bad boolean '{}' for '{}'", v, key));
}

std::vector<BehaviorType> parse_behaviors(const std::string& key, const std::string& v) {
  std::vector<BehaviorType> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = parse_behavior(trim(tok));
    if (!b) throw Error(fmt::format("config: unknown behavior '{}' for '{}'", tok, key));
    out.push_back(*b);
  }
  if (out.empty()) throw Error(fmt::format("config: '{}' needs at least one behavior", key));
  return out;
}

using Setter = std::function<void(ModelConfig&, const std::string& key, const std::string& value)>;

template <typename T>
Setter num(T ModelConfig::*field) {
  return [field](ModelConfig& c, const std::string& k, const std::string& v) {
    c.*field = parse_value<T>(k, v);
  };
}

Setter flag(bool ModelConfig::*field) {
  return [field](ModelConfig& c, const std::string& k, const std::string& v) {
    c.*field = parse_bool(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dim", num(&ModelConfig::dim)},
      {"feature_dim", num(&ModelConfig::feature_dim)},
      {"behavior_dim", num(&ModelConfig::behavior_dim)},
      {"attn_dim", num(&ModelConfig::attn_dim)},
      {"coaction_hidden", num(&ModelConfig::coaction_hidden)},
      {"interest_hidden", num(&ModelConfig::interest_hidden)},
      {"layers", num(&ModelConfig::layers)},
      {"interests", num(&ModelConfig::interests)},
      {"shared_qkv", flag(&ModelConfig::shared_qkv)},
      {"neighbor_cap", num(&ModelConfig::neighbor_cap)},
      {"t_max", num(&ModelConfig::t_max)},
      {"init_scale", num(&ModelConfig::init_scale)},
      {"drop_co_click", flag(&ModelConfig::drop_co_click)},
      {"drop_co_purchase", flag(&ModelConfig::drop_co_purchase)},
      {"drop_edge_feats", flag(&ModelConfig::drop_edge_feats)},
      {"drop_seq_graph", flag(&ModelConfig::drop_seq_graph)},
      {"lambda", num(&ModelConfig::lambda)},
      {"negatives", num(&ModelConfig::negatives)},
      {"lr", num(&ModelConfig::lr)},
      {"epochs", num(&ModelConfig::epochs)},
      {"batch", num(&ModelConfig::batch)},
      {"seed", num(&ModelConfig::seed)},
      {"optimizer",
       [](ModelConfig& c, const std::string& k, const std::string& v) {
         if (v == "adam") {
           c.optimizer = OptimizerKind::kAdam;
         } else if (v == "sgd") {
           c.optimizer = OptimizerKind::kSgd;
         } else {
           throw Error(fmt::format("config: bad value '{}' for '{}'", v, k));
         }
       }},
      {"targets",
       [](ModelConfig& c, const std::string& k, const std::string& v) {
         c.targets = parse_behaviors(k, v);
       }},
      {"split",
       [](ModelConfig& c, const std::string& k, const std::string& v) {
         if (v == "by_time") {
           c.split = SplitMode::kByTime;
         } else if (v == "by_user") {
           c.split = SplitMode::kByUser;
         } else {
           throw Error(fmt::format("config: bad value '{}' for '{}'", v, k));
         }
       }},
      {"train_days", num(&ModelConfig::train_days)},
      {"train_fraction", num(&ModelConfig::train_fraction)},
      {"validation_fraction", num(&ModelConfig::validation_fraction)},
      {"test_fraction", num(&ModelConfig::test_fraction)},
      {"min_clicks", num(&ModelConfig::min_clicks)},
      {"n_per_interest", num(&ModelConfig::n_per_interest)},
  };
  return table;
}

}  // namespace

void ModelConfig::validate() const {
  const auto require = [](bool ok, std::string_view what) {
    if (!ok) throw Error(fmt::format("config: {}", what));
  };
  require(dim >= 1 && feature_dim >= 1 && behavior_dim >= 1 && attn_dim >= 1,
          "dimensions must be positive");
  require(coaction_hidden >= 0 && interest_hidden >= 0, "hidden sizes must be >= 0");
  require(layers >= 1, "layers must be >= 1");
  require(interests >= 1, "interests must be >= 1");
  require(neighbor_cap >= 1, "neighbor_cap must be >= 1");
  require(t_max >= 1, "t_max must be >= 1");
  require(init_scale > 0, "init_scale must be positive");
  require(lambda >= 0, "lambda must be >= 0");
  require(negatives >= 1, "negatives must be >= 1");
  require(lr > 0, "lr must be positive");
  require(epochs >= 1, "epochs must be >= 1");
  require(batch >= 1, "batch must be >= 1");
  require(train_days >= 1, "train_days must be >= 1");
  require(n_per_interest >= 1, "n_per_interest must be >= 1");
}

ModelConfig parse_config(std::istream& in) {
  ModelConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(fmt::format("config: line {}: expected key = value", line_no));
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(fmt::format("config: unknown key '{}'", key));
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return parse_config(in);
}

std::string config_text(const ModelConfig& c) {
  std::string targets;
  for (auto b : c.targets) {
    if (!targets.empty()) targets += ',';
    targets += behavior_name(b);
  }
  const auto b = [](bool v) { return v ? "true" : "false"; };
  std::string out;
  const auto add = [&](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  add("dim", c.dim);
  add("feature_dim", c.feature_dim);
  add("behavior_dim", c.behavior_dim);
  add("attn_dim", c.attn_dim);
  add("coaction_hidden", c.coaction_hidden);
  add("interest_hidden", c.interest_hidden);
  add("layers", c.layers);
  add("interests", c.interests);
  add("shared_qkv", b(c.shared_qkv));
  add("neighbor_cap", c.neighbor_cap);
  add("t_max", c.t_max);
  add("init_scale", fmt::format("{:.17g}", c.init_scale));
  add("drop_co_click", b(c.drop_co_click));
  add("drop_co_purchase", b(c.drop_co_purchase));
  add("drop_edge_feats", b(c.drop_edge_feats));
  add("drop_seq_graph", b(c.drop_seq_graph));
  add("lambda", fmt::format("{:.17g}", c.lambda));
  add("negatives", c.negatives);
  add("lr", fmt::format("{:.17g}", c.lr));
  add("epochs", c.epochs);
  add("batch", c.batch);
  add("seed", c.seed);
  add("optimizer", c.optimizer == OptimizerKind::kAdam ? "adam" : "sgd");
  add("targets", targets);
  add("split", c.split == SplitMode::kByTime ? "by_time" : "by_user");
  add("train_days", c.train_days);
  add("train_fraction", fmt::format("{:.17g}", c.train_fraction));
  add("validation_fraction", fmt::format("{:.17g}", c.validation_fraction));
  add("test_fraction", fmt::format("{:.17g}", c.test_fraction));
  add("min_clicks", c.min_clicks);
  add("n_per_interest", c.n_per_interest);
  return out;
}

std::string config_fingerprint(const ModelConfig& config) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_text(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cagr
