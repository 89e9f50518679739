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
#include <string>
#include <vector>

#include "cagr/data_model.hpp"

namespace cagr {

enum class OptimizerKind { kSgd, kAdam };

// Every hyperparameter of a run. Read from and written to `key = value` text.
struct ModelConfig {
  // architecture
  int dim = 32;
  int feature_dim = 8;
  int behavior_dim = 8;
  int attn_dim = 32;
  int coaction_hidden = 0;  // 0 -> dim
  int interest_hidden = 0;  // 0 -> 4 * dim
  int layers = 2;
  int interests = 4;
  bool shared_qkv = false;
  std::size_t neighbor_cap = 10;
  std::size_t t_max = 200;
  double init_scale = 0.05;

  // ablations
  bool drop_co_click = false;
  bool drop_co_purchase = false;
  bool drop_edge_feats = false;
  bool drop_seq_graph = false;

  // training
  double lambda = 0.2;
  std::size_t negatives = 64;
  double lr = 1e-3;
  int epochs = 10;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::vector<BehaviorType> targets{BehaviorType::kClick};

  // data
  SplitMode split = SplitMode::kByTime;
  int train_days = 7;
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;
  std::size_t min_clicks = 0;

  // serving
  std::size_t n_per_interest = 50;

  int resolved_coaction_hidden() const { return coaction_hidden > 0 ? coaction_hidden : dim; }
  int resolved_interest_hidden() const { return interest_hidden > 0 ? interest_hidden : 4 * dim; }

  // Throws Error describing the first invalid value.
  void validate() const;
};

ModelConfig parse_config(std::istream& in);
ModelConfig load_config(const std::filesystem::path& path);
// Canonical text: every key, fixed order, round-trips through parse_config.
std::string config_text(const ModelConfig& config);
// Hex digest of config_text; identifies the hyperparameters a model was built with.
std::string config_fingerprint(const ModelConfig& config);

}  // namespace cagr
