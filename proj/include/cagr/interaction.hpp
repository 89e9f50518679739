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

#include <random>
#include <vector>

#include "cagr/seqgraph.hpp"
#include "cagr/types.hpp"

namespace cagr {

// Additive mask value for future positions; finite so softmax never sees NaN.
inline constexpr double kMaskValue = -1e9;

struct QkvProjections {
  Mat query;  // d x d
  Mat key;    // d x d
  Mat value;  // d x d
};

struct InteractionLayer {
  Mat attn_weight;  // d_attn x (3d + d_e), applied to [q_i; k_j; q_i*k_j; E_ij]
  Mat attn_score;   // d_attn x 1
};

struct InteractionParams {
  std::vector<QkvProjections> qkv;  // one per layer, or a single shared set
  std::vector<InteractionLayer> layers;

  int num_layers() const { return static_cast<int>(layers.size()); }
  const QkvProjections& projections(int layer) const {
    return qkv[qkv.size() == 1 ? 0 : static_cast<std::size_t>(layer)];
  }
  QkvProjections& projections(int layer) {
    return qkv[qkv.size() == 1 ? 0 : static_cast<std::size_t>(layer)];
  }

  static InteractionParams zeros(int dim, int edge_dim, int attn_dim, int num_layers,
                                 bool shared_qkv = false);
  static InteractionParams random(int dim, int edge_dim, int attn_dim, int num_layers,
                                  bool shared_qkv, double scale, std::mt19937_64& rng);
};

struct InteractionLayerCache {
  Mat h_in;              // T x d
  Mat q, k, v;           // T x d
  std::vector<Mat> pre;  // row i: d_attn x (i+1) pre-activations for j <= i
  Mat attn;              // T x T, row-stochastic, zero above the diagonal
};

struct InteractionCache {
  std::vector<InteractionLayerCache> layers;
};

// Masked softmax over one row of raw scores: position i may attend to j <= i.
Vec attention_row(const Vec& raw_scores, int i);

// L layers of edge-aware causal attention with residual connections.
// Returns the T x d matrix of enhanced node embeddings.
Mat explicit_interaction(const SequenceGraph& graph, const InteractionParams& params,
                         InteractionCache* cache = nullptr);

// Accumulates parameter gradients into `grads`, node-embedding gradients into
// `grad_nodes` (T x d) and, if non-null, edge-feature gradients into
// `grad_edges` (same layout as graph.edge_feats).
void explicit_interaction_backward(const SequenceGraph& graph, const InteractionParams& params,
                                   const InteractionCache& cache, const Mat& grad_out,
                                   Mat& grad_nodes, Mat* grad_edges, InteractionParams& grads);

}  // namespace cagr
