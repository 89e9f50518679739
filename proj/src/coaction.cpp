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
#include "cagr/coaction.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "cagr/embedding.hpp"

namespace cagr {
namespace {

using PairCounts = std::map<std::pair<std::string, std::string>, std::uint32_t>;

void count_pairs(const std::map<std::string, std::set<std::string>>& items_by_user,
                 PairCounts& counts) {
  for (const auto& [user, items] : items_by_user) {
    for (auto a = items.begin(); a != items.end(); ++a) {
      for (auto b = std::next(a); b != items.end(); ++b) ++counts[{*a, *b}];
    }
  }
}

std::map<std::string, std::vector<CoActionNeighbor>> to_adjacency(const PairCounts& counts) {
  std::map<std::string, std::vector<CoActionNeighbor>> adj;
  for (const auto& [pair, count] : counts) {
    adj[pair.first].push_back({pair.second, count});
    adj[pair.second].push_back({pair.first, count});
  }
  for (auto& [item, list] : adj) {
    std::sort(list.begin(), list.end(),
              [](const auto& x, const auto& y) { return x.item < y.item; });
  }
  return adj;
}

}  // namespace

const std::vector<CoActionNeighbor>& CoActionGraph::neighbors(const std::string& item,
                                                              Relation relation) const {
  static const std::vector<CoActionNeighbor> kEmpty;
  const auto& adj = relation == Relation::kClick ? co_click : co_purchase;
  const auto it = adj.find(item);
  return it == adj.end() ? kEmpty : it->second;
}

CoActionGraph build_coaction_graph(std::span<const ActionRecord> records) {
  std::map<std::string, std::set<std::string>> clicks, purchases;
  for (const auto& r : records) {
    if (r.behavior == BehaviorType::kClick) clicks[r.user_id].insert(r.item_id);
    if (r.behavior == BehaviorType::kPurchase) purchases[r.user_id].insert(r.item_id);
  }
  PairCounts click_pairs, purchase_pairs;
  count_pairs(clicks, click_pairs);
  count_pairs(purchases, purchase_pairs);
  return {to_adjacency(click_pairs), to_adjacency(purchase_pairs)};
}

std::vector<std::string> sample_neighbors(const CoActionGraph& graph, const std::string& item,
                                          Relation relation, std::size_t cap) {
  auto list = graph.neighbors(item, relation);
  std::stable_sort(list.begin(), list.end(), [](const auto& x, const auto& y) {
    return x.count != y.count ? x.count > y.count : x.item < y.item;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < list.size() && i < cap; ++i) out.push_back(list[i].item);
  return out;
}

void write_coaction_graph(std::ostream& out, const CoActionGraph& graph) {
  const auto dump = [&](const auto& adj, std::string_view name) {
    for (const auto& [item, list] : adj) {
      for (const auto& n : list) {
        if (item < n.item) out << name << '\t' << item << '\t' << n.item << '\t' << n.count << '\n';
      }
    }
  };
  dump(graph.co_click, "click");
  dump(graph.co_purchase, "purchase");
}

CoActionGraph read_coaction_graph(std::istream& in) {
  PairCounts click_pairs, purchase_pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string relation, a, b;
    std::uint32_t count = 0;
    if (!std::getline(ss, relation, '\t') || !std::getline(ss, a, '\t') ||
        !std::getline(ss, b, '\t') || !(ss >> count) || count == 0 || !(a < b)) {
      throw Error(fmt::format("co-action graph: malformed line {}", line_no));
    }
    if (relation == "click") {
      click_pairs[{a, b}] = count;
    } else if (relation == "purchase") {
      purchase_pairs[{a, b}] = count;
    } else {
      throw Error(fmt::format("co-action graph: unknown relation '{}' at line {}", relation, line_no));
    }
  }
  return {to_adjacency(click_pairs), to_adjacency(purchase_pairs)};
}

CoActionParams CoActionParams::zeros(int dim, int hidden) {
  CoActionParams p;
  p.click = {Mat::Zero(hidden, 2 * dim), Mat::Zero(hidden, 1)};
  p.purchase = {Mat::Zero(hidden, 2 * dim), Mat::Zero(hidden, 1)};
  p.out_weight = Mat::Zero(dim, 3 * dim);
  p.out_bias = Mat::Zero(dim, 1);
  return p;
}

CoActionParams CoActionParams::random(int dim, int hidden, double scale, std::mt19937_64& rng) {
  auto p = zeros(dim, hidden);
  for (Mat* m : {&p.click.weight, &p.click.score, &p.purchase.weight, &p.purchase.score,
                 &p.out_weight, &p.out_bias}) {
    fill_uniform(*m, scale, rng);
  }
  return p;
}

Vec aggregate_relation(const Vec& e_q, const Mat& neighbors, const RelationAttention& params,
                       AggregateCache* cache) {
  const auto d = e_q.size();
  if (neighbors.cols() == 0) {
    if (cache) *cache = {};
    return Vec::Zero(d);
  }
  Mat pre = params.weight.rightCols(d) * neighbors;
  pre.colwise() += params.weight.leftCols(d) * e_q;
  const Vec scores = params.score.col(0).transpose() * pre.unaryExpr(&leaky_relu);
  Vec alpha = (scores.array() - scores.maxCoeff()).exp();
  alpha /= alpha.sum();
  Vec out = neighbors * alpha;
  if (cache) *cache = {std::move(pre), std::move(alpha)};
  return out;
}

void aggregate_relation_backward(const Vec& e_q, const Mat& neighbors,
                                 const RelationAttention& params, const AggregateCache& cache,
                                 const Vec& grad_out, Vec& grad_eq, Mat& grad_neighbors,
                                 RelationAttention& grads) {
  const auto n = neighbors.cols();
  if (n == 0) return;
  const auto d = e_q.size();
  const Vec& alpha = cache.alpha;
  const Vec d_alpha = neighbors.transpose() * grad_out;
  grad_neighbors.noalias() += grad_out * alpha.transpose();
  const Vec d_score = alpha.array() * (d_alpha.array() - alpha.dot(d_alpha));

  grads.score.col(0).noalias() += cache.pre.unaryExpr(&leaky_relu) * d_score;
  Mat d_pre = cache.pre.unaryExpr(&leaky_relu_grad);
  d_pre.array().colwise() *= params.score.col(0).array();
  d_pre.array().rowwise() *= d_score.transpose().array();

  const Vec d_pre_sum = d_pre.rowwise().sum();
  grads.weight.leftCols(d).noalias() += d_pre_sum * e_q.transpose();
  grads.weight.rightCols(d).noalias() += d_pre * neighbors.transpose();
  grad_eq.noalias() += params.weight.leftCols(d).transpose() * d_pre_sum;
  grad_neighbors.noalias() += params.weight.rightCols(d).transpose() * d_pre;
}

Vec item_vector(const Vec& e_q, const Vec& z_qc, const Vec& z_qp, const CoActionParams& params) {
  const auto d = e_q.size();
  return params.out_weight.leftCols(d) * e_q + params.out_weight.middleCols(d, d) * z_qc +
         params.out_weight.rightCols(d) * z_qp + params.out_bias.col(0);
}

void item_vector_backward(const Vec& e_q, const Vec& z_qc, const Vec& z_qp,
                          const CoActionParams& params, const Vec& grad_out, Vec& grad_eq,
                          Vec& grad_zc, Vec& grad_zp, CoActionParams& grads) {
  const auto d = e_q.size();
  grads.out_weight.leftCols(d).noalias() += grad_out * e_q.transpose();
  grads.out_weight.middleCols(d, d).noalias() += grad_out * z_qc.transpose();
  grads.out_weight.rightCols(d).noalias() += grad_out * z_qp.transpose();
  grads.out_bias.col(0) += grad_out;
  grad_eq.noalias() += params.out_weight.leftCols(d).transpose() * grad_out;
  grad_zc.noalias() += params.out_weight.middleCols(d, d).transpose() * grad_out;
  grad_zp.noalias() += params.out_weight.rightCols(d).transpose() * grad_out;
}

}  // namespace cagr
