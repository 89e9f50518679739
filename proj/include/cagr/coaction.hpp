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
#include <string>
#include <vector>

#include "cagr/data_model.hpp"
#include "cagr/types.hpp"

namespace cagr {

enum class Relation { kClick, kPurchase };

struct CoActionNeighbor {
  std::string item;
  std::uint32_t count = 0;  // distinct users who acted on both items

  bool operator==(const CoActionNeighbor&) const = default;
};

// Global item-item co-action graph. Symmetric, no self loops, neighbor lists
// sorted by item id.
struct CoActionGraph {
  std::map<std::string, std::vector<CoActionNeighbor>> co_click;
  std::map<std::string, std::vector<CoActionNeighbor>> co_purchase;

  const std::vector<CoActionNeighbor>& neighbors(const std::string& item, Relation relation) const;
  bool operator==(const CoActionGraph&) const = default;
};

// Must only see training-range records; later actions would leak into item
// vectors used at evaluation time.
CoActionGraph build_coaction_graph(std::span<const ActionRecord> records);

// Top `cap` neighbors by count, ties by ascending item id.
std::vector<std::string> sample_neighbors(const CoActionGraph& graph, const std::string& item,
                                          Relation relation, std::size_t cap);

// Lines `relation \t item_a \t item_b \t count` with item_a < item_b.
void write_coaction_graph(std::ostream& out, const CoActionGraph& graph);
CoActionGraph read_coaction_graph(std::istream& in);

// GATv2-style neighbor attention:
//   score_n = a . LeakyReLU(W [e_q; e_n]),  alpha = softmax(score),
//   out = sum_n alpha_n e_n.
struct RelationAttention {
  Mat weight;  // hidden x 2d
  Mat score;   // hidden x 1
};

struct CoActionParams {
  RelationAttention click;
  RelationAttention purchase;
  Mat out_weight;  // d x 3d, applied to [e_q; z_qc; z_qp]
  Mat out_bias;    // d x 1

  static CoActionParams zeros(int dim, int hidden);
  static CoActionParams random(int dim, int hidden, double scale, std::mt19937_64& rng);
};

struct AggregateCache {
  Mat pre;    // hidden x n, pre-activation
  Vec alpha;  // n
};

// `neighbors` holds one neighbor embedding per column. No neighbors gives the
// zero vector.
Vec aggregate_relation(const Vec& e_q, const Mat& neighbors, const RelationAttention& params,
                       AggregateCache* cache = nullptr);

void aggregate_relation_backward(const Vec& e_q, const Mat& neighbors,
                                 const RelationAttention& params, const AggregateCache& cache,
                                 const Vec& grad_out, Vec& grad_eq, Mat& grad_neighbors,
                                 RelationAttention& grads);

// z_q = W_zq [e_q; z_qc; z_qp] + b_zq
Vec item_vector(const Vec& e_q, const Vec& z_qc, const Vec& z_qp, const CoActionParams& params);

void item_vector_backward(const Vec& e_q, const Vec& z_qc, const Vec& z_qp,
                          const CoActionParams& params, const Vec& grad_out, Vec& grad_eq,
                          Vec& grad_zc, Vec& grad_zp, CoActionParams& grads);

}  // namespace cagr
