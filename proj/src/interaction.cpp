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
#include "cagr/interaction.hpp"

#include <cmath>

#include "cagr/embedding.hpp"

namespace cagr {

InteractionParams InteractionParams::zeros(int dim, int edge_dim, int attn_dim, int num_layers,
                                           bool shared_qkv) {
  if (num_layers < 1) throw Error("interaction needs at least one layer");
  InteractionParams p;
  const int n_qkv = shared_qkv ? 1 : num_layers;
  for (int l = 0; l < n_qkv; ++l) {
    p.qkv.push_back({Mat::Zero(dim, dim), Mat::Zero(dim, dim), Mat::Zero(dim, dim)});
  }
  for (int l = 0; l < num_layers; ++l) {
    p.layers.push_back({Mat::Zero(attn_dim, 3 * dim + edge_dim), Mat::Zero(attn_dim, 1)});
  }
  return p;
}

InteractionParams InteractionParams::random(int dim, int edge_dim, int attn_dim, int num_layers,
                                            bool shared_qkv, double scale, std::mt19937_64& rng) {
  auto p = zeros(dim, edge_dim, attn_dim, num_layers, shared_qkv);
  for (auto& s : p.qkv) {
    fill_uniform(s.query, scale, rng);
    fill_uniform(s.key, scale, rng);
    fill_uniform(s.value, scale, rng);
  }
  for (auto& layer : p.layers) {
    fill_uniform(layer.attn_weight, scale, rng);
    fill_uniform(layer.attn_score, scale, rng);
  }
  return p;
}

Vec attention_row(const Vec& raw_scores, int i) {
  Vec row = raw_scores;
  for (Eigen::Index j = i + 1; j < row.size(); ++j) row[j] += kMaskValue;
  // std::exp underflows exp(-1e9) to exactly 0; Eigen's vectorized exp
  // returns a denormal there.
  const double top = row.maxCoeff();
  row = row.unaryExpr([top](double x) { return std::exp(x - top); });
  return row / row.sum();
}

Mat explicit_interaction(const SequenceGraph& graph, const InteractionParams& params,
                         InteractionCache* cache) {
  const int t = graph.valid_len;
  Mat h = graph.node_embs;
  const auto d = h.cols();
  if (cache) cache->layers.assign(static_cast<std::size_t>(params.num_layers()), {});

  for (int l = 0; l < params.num_layers(); ++l) {
    const auto& proj = params.projections(l);
    const auto& layer = params.layers[static_cast<std::size_t>(l)];
    const auto& wa = layer.attn_weight;
    const auto d_e = wa.cols() - 3 * d;

    const Mat q = h * proj.query.transpose();
    const Mat k = h * proj.key.transpose();
    const Mat v = h * proj.value.transpose();
    const Mat q_part = wa.leftCols(d) * q.transpose();          // d_attn x T
    const Mat k_part = wa.middleCols(d, d) * k.transpose();     // d_attn x T
    const Mat k_t = k.transpose();

    Mat attn = Mat::Zero(t, t);
    std::vector<Mat> pre_rows;
    pre_rows.reserve(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
      const int n = i + 1;
      // q_i * k_j enters through W_qk diag(q_i) k_j.
      Mat qk_weight = wa.middleCols(2 * d, d);
      qk_weight.array().rowwise() *= q.row(i).array();
      Mat pre = k_part.leftCols(n);
      pre.noalias() += qk_weight * k_t.leftCols(n);
      if (d_e > 0) {
        pre.noalias() += wa.rightCols(d_e) * graph.edge_feats.middleCols(
                                                 static_cast<Eigen::Index>(i) * t, n);
      }
      pre.colwise() += q_part.col(i);

      Vec raw = Vec::Zero(t);
      raw.head(n) = pre.unaryExpr(&leaky_relu).transpose() * layer.attn_score.col(0);
      attn.row(i) = attention_row(raw, i).transpose();
      pre_rows.push_back(std::move(pre));
    }

    Mat h_next = attn * v + h;
    if (cache) {
      auto& c = cache->layers[static_cast<std::size_t>(l)];
      c.h_in = std::move(h);
      c.q = q;
      c.k = k;
      c.v = v;
      c.pre = std::move(pre_rows);
      c.attn = std::move(attn);
    }
    h = std::move(h_next);
  }
  return h;
}

void explicit_interaction_backward(const SequenceGraph& graph, const InteractionParams& params,
                                   const InteractionCache& cache, const Mat& grad_out,
                                   Mat& grad_nodes, Mat* grad_edges, InteractionParams& grads) {
  const int t = graph.valid_len;
  Mat dh = grad_out;
  for (int l = params.num_layers() - 1; l >= 0; --l) {
    const auto& c = cache.layers[static_cast<std::size_t>(l)];
    const auto& proj = params.projections(l);
    auto& gproj = grads.projections(l);
    const auto& layer = params.layers[static_cast<std::size_t>(l)];
    auto& glayer = grads.layers[static_cast<std::size_t>(l)];
    const auto& wa = layer.attn_weight;
    const auto d = c.q.cols();
    const auto d_e = wa.cols() - 3 * d;

    // Residual path.
    Mat dh_in = dh;
    // h_out = attn * v + h_in.
    const Mat d_attn = dh * c.v.transpose();  // T x T
    Mat dv = c.attn.transpose() * dh;
    Mat dq = Mat::Zero(t, d);
    Mat dk = Mat::Zero(t, d);

    for (int i = 0; i < t; ++i) {
      const int n = i + 1;
      const Eigen::RowVectorXd a = c.attn.row(i).head(n);
      const Eigen::RowVectorXd da = d_attn.row(i).head(n);
      const Eigen::RowVectorXd d_raw = a.array() * (da.array() - a.dot(da));
      const Mat& pre = c.pre[static_cast<std::size_t>(i)];

      glayer.attn_score.col(0).noalias() += pre.unaryExpr(&leaky_relu) * d_raw.transpose();
      Mat d_pre = pre.unaryExpr(&leaky_relu_grad);
      d_pre.array().colwise() *= layer.attn_score.col(0).array();
      d_pre.array().rowwise() *= d_raw.array();

      const Vec d_pre_sum = d_pre.rowwise().sum();
      const auto k_rows = c.k.topRows(n);  // n x d
      // q_i block
      glayer.attn_weight.leftCols(d).noalias() += d_pre_sum * c.q.row(i);
      dq.row(i).noalias() += (wa.leftCols(d).transpose() * d_pre_sum).transpose();
      // k_j block
      glayer.attn_weight.middleCols(d, d).noalias() += d_pre * k_rows;
      dk.topRows(n).noalias() += d_pre.transpose() * wa.middleCols(d, d);
      // q_i * k_j block
      Mat prod = k_rows;
      prod.array().rowwise() *= c.q.row(i).array();
      glayer.attn_weight.middleCols(2 * d, d).noalias() += d_pre * prod;
      const Mat d_prod = d_pre.transpose() * wa.middleCols(2 * d, d);  // n x d
      dq.row(i).array() += (d_prod.array() * k_rows.array()).colwise().sum();
      Mat dk_part = d_prod;
      dk_part.array().rowwise() *= c.q.row(i).array();
      dk.topRows(n) += dk_part;
      // edge block
      if (d_e > 0) {
        const auto edges = graph.edge_feats.middleCols(static_cast<Eigen::Index>(i) * t, n);
        glayer.attn_weight.rightCols(d_e).noalias() += d_pre * edges.transpose();
        if (grad_edges != nullptr) {
          grad_edges->middleCols(static_cast<Eigen::Index>(i) * t, n).noalias() +=
              wa.rightCols(d_e).transpose() * d_pre;
        }
      }
    }

    // q = h_in W_Q^T etc.
    gproj.query.noalias() += dq.transpose() * c.h_in;
    gproj.key.noalias() += dk.transpose() * c.h_in;
    gproj.value.noalias() += dv.transpose() * c.h_in;
    dh_in.noalias() += dq * proj.query + dk * proj.key + dv * proj.value;
    dh = std::move(dh_in);
  }
  grad_nodes += dh;
}

}  // namespace cagr
