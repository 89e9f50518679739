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
#include "cagr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>

#include <fmt/format.h>

namespace cagr {
namespace {

constexpr std::string_view kIndexMagic = "cagr-index";
constexpr int kIndexVersion = 1;

using Scored = std::pair<double, int>;

// Heap orderings on (similarity, node); node id breaks ties so builds are
// reproducible.
struct WorseFirst {
  bool operator()(const Scored& a, const Scored& b) const {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  }
};
struct BetterFirst {
  bool operator()(const Scored& a, const Scored& b) const {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  }
};

}  // namespace

bool ranks_before(const ScoredItem& a, const ScoredItem& b) {
  return a.score != b.score ? a.score > b.score : a.item_id < b.item_id;
}

ItemIndex::ItemIndex(std::vector<std::string> ids, Mat vectors)
    : ids_(std::move(ids)), vectors_(std::move(vectors)) {
  if (ids_.empty()) throw Error("item index needs at least one item");
  if (static_cast<Eigen::Index>(ids_.size()) != vectors_.cols()) {
    throw Error("item index: id count does not match vector count");
  }
}

std::vector<ScoredItem> ItemIndex::top_n(std::span<const int> candidates, const Vec& q,
                                         std::size_t n) const {
  std::vector<ScoredItem> scored;
  scored.reserve(candidates.size());
  for (int c : candidates) {
    scored.push_back({ids_[static_cast<std::size_t>(c)], vectors_.col(c).dot(q)});
  }
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), ranks_before);
  scored.resize(keep);
  return scored;
}

ExactIndex::ExactIndex(std::vector<std::string> ids, Mat vectors)
    : ItemIndex(std::move(ids), std::move(vectors)) {}

std::vector<ScoredItem> ExactIndex::query(const Vec& q, std::size_t n) const {
  std::vector<int> all(ids_.size());
  std::iota(all.begin(), all.end(), 0);
  return top_n(all, q, n);
}

HnswIndex::HnswIndex(std::vector<std::string> ids, Mat vectors, HnswParams params)
    : ItemIndex(std::move(ids), std::move(vectors)), params_(params) {
  if (params_.m < 2) throw Error("hnsw: m must be at least 2");
  std::mt19937_64 rng(params_.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double level_mult = 1.0 / std::log(static_cast<double>(params_.m));
  nodes_.resize(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const double u = 1.0 - unit(rng);  // (0, 1]
    insert(static_cast<int>(i), static_cast<int>(std::floor(-std::log(u) * level_mult)));
  }
}

HnswIndex::HnswIndex(std::vector<std::string> ids, Mat vectors, HnswParams params,
                     std::vector<Node> nodes, int entry, int max_level)
    : ItemIndex(std::move(ids), std::move(vectors)),
      params_(params),
      nodes_(std::move(nodes)),
      entry_(entry),
      max_level_(max_level) {}

std::vector<std::pair<double, int>> HnswIndex::search_layer(const Vec& q,
                                                            std::vector<int> entry_points,
                                                            int ef, int layer) const {
  std::vector<char> visited(nodes_.size(), 0);
  std::priority_queue<Scored, std::vector<Scored>, WorseFirst> candidates;  // best on top
  std::priority_queue<Scored, std::vector<Scored>, BetterFirst> results;    // worst on top
  for (int ep : entry_points) {
    if (visited[static_cast<std::size_t>(ep)]) continue;
    visited[static_cast<std::size_t>(ep)] = 1;
    const Scored s{similarity(q, ep), ep};
    candidates.push(s);
    results.push(s);
  }
  while (static_cast<int>(results.size()) > ef) results.pop();
  while (!candidates.empty()) {
    const Scored current = candidates.top();
    candidates.pop();
    if (static_cast<int>(results.size()) >= ef && current.first < results.top().first) break;
    for (int nb : nodes_[static_cast<std::size_t>(current.second)].links[static_cast<std::size_t>(layer)]) {
      if (visited[static_cast<std::size_t>(nb)]) continue;
      visited[static_cast<std::size_t>(nb)] = 1;
      const Scored s{similarity(q, nb), nb};
      if (static_cast<int>(results.size()) < ef || BetterFirst{}(s, results.top())) {
        candidates.push(s);
        results.push(s);
        if (static_cast<int>(results.size()) > ef) results.pop();
      }
    }
  }
  std::vector<Scored> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void HnswIndex::connect(int node, int layer, const std::vector<std::pair<double, int>>& candidates) {
  const std::size_t max_links = static_cast<std::size_t>(layer == 0 ? 2 * params_.m : params_.m);
  auto& mine = nodes_[static_cast<std::size_t>(node)].links[static_cast<std::size_t>(layer)];
  for (std::size_t c = 0; c < candidates.size() && mine.size() < static_cast<std::size_t>(params_.m); ++c) {
    const int other = candidates[c].second;
    if (other == node) continue;
    mine.push_back(other);
    auto& theirs = nodes_[static_cast<std::size_t>(other)].links[static_cast<std::size_t>(layer)];
    theirs.push_back(node);
    if (theirs.size() > max_links) {
      // Keep the neighbors most similar to `other`.
      const Vec anchor = vectors_.col(other);
      std::vector<Scored> ranked;
      for (int t : theirs) ranked.push_back({similarity(anchor, t), t});
      std::sort(ranked.begin(), ranked.end(), BetterFirst{});
      ranked.resize(max_links);
      theirs.clear();
      for (const auto& r : ranked) theirs.push_back(r.second);
    }
  }
}

void HnswIndex::insert(int node, int level) {
  auto& n = nodes_[static_cast<std::size_t>(node)];
  n.level = level;
  n.links.assign(static_cast<std::size_t>(level) + 1, {});
  if (entry_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }
  const Vec q = vectors_.col(node);
  int ep = entry_;
  for (int l = max_level_; l > level; --l) ep = search_layer(q, {ep}, 1, l).front().second;
  std::vector<int> eps{ep};
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    const auto found = search_layer(q, eps, params_.ef_construction, l);
    connect(node, l, found);
    eps.clear();
    for (const auto& f : found) eps.push_back(f.second);
  }
  if (level > max_level_) {
    entry_ = node;
    max_level_ = level;
  }
}

std::vector<ScoredItem> HnswIndex::query(const Vec& q, std::size_t n) const {
  return query(q, n, params_.ef_search);
}

std::vector<ScoredItem> HnswIndex::query(const Vec& q, std::size_t n, int ef_search) const {
  int ep = entry_;
  for (int l = max_level_; l > 0; --l) ep = search_layer(q, {ep}, 1, l).front().second;
  const int ef = std::max(ef_search, static_cast<int>(std::min(n, ids_.size())));
  const auto found = search_layer(q, {ep}, ef, 0);
  std::vector<int> nodes;
  for (const auto& f : found) nodes.push_back(f.second);
  return top_n(nodes, q, n);
}

void HnswIndex::save(std::ostream& out) const {
  out << fmt::format("hnsw {} {} {} {} {} {}\n", params_.m, params_.ef_construction,
                     params_.ef_search, params_.seed, entry_, max_level_);
  for (const auto& node : nodes_) {
    out << node.level;
    for (const auto& layer : node.links) {
      out << " | " << layer.size();
      for (int l : layer) out << ' ' << l;
    }
    out << '\n';
  }
}

std::unique_ptr<HnswIndex> HnswIndex::load(std::istream& in, std::vector<std::string> ids,
                                           Mat vectors, HnswParams params) {
  std::string tag;
  int entry = -1, max_level = -1;
  if (!(in >> tag >> params.m >> params.ef_construction >> params.ef_search >> params.seed >>
        entry >> max_level) ||
      tag != "hnsw") {
    throw Error("index: bad hnsw header");
  }
  std::vector<Node> nodes(ids.size());
  for (auto& node : nodes) {
    if (!(in >> node.level) || node.level < 0) throw Error("index: bad hnsw node");
    node.links.resize(static_cast<std::size_t>(node.level) + 1);
    for (auto& layer : node.links) {
      std::string bar;
      std::size_t count = 0;
      if (!(in >> bar >> count) || bar != "|") throw Error("index: bad hnsw adjacency");
      layer.resize(count);
      for (auto& l : layer) {
        if (!(in >> l) || l < 0 || static_cast<std::size_t>(l) >= ids.size()) {
          throw Error("index: bad hnsw link");
        }
      }
    }
  }
  return std::unique_ptr<HnswIndex>(
      new HnswIndex(std::move(ids), std::move(vectors), params, std::move(nodes), entry, max_level));
}

void save_index(std::ostream& out, const ItemIndex& index) {
  out << kIndexMagic << ' ' << kIndexVersion << '\n';
  out << index.backend() << ' ' << index.vectors().rows() << ' ' << index.size() << '\n';
  for (std::size_t i = 0; i < index.size(); ++i) {
    out << index.ids()[i];
    for (Eigen::Index k = 0; k < index.vectors().rows(); ++k) {
      out << ' ' << fmt::format("{}", index.vectors()(k, static_cast<Eigen::Index>(i)));
    }
    out << '\n';
  }
  if (const auto* hnsw = dynamic_cast<const HnswIndex*>(&index)) hnsw->save(out);
}

std::unique_ptr<ItemIndex> load_index(std::istream& in) {
  std::string magic, backend;
  int version = 0;
  Eigen::Index dim = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version) || magic != kIndexMagic) throw Error("index: bad magic");
  if (version != kIndexVersion) throw Error(fmt::format("index: unsupported version {}", version));
  if (!(in >> backend >> dim >> count)) throw Error("index: bad header");
  std::vector<std::string> ids(count);
  Mat vectors(dim, static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> ids[i])) throw Error("index: truncated ids");
    for (Eigen::Index k = 0; k < dim; ++k) {
      if (!(in >> vectors(k, static_cast<Eigen::Index>(i)))) throw Error("index: truncated vectors");
    }
  }
  if (backend == "exact") return std::make_unique<ExactIndex>(std::move(ids), std::move(vectors));
  if (backend == "hnsw") return HnswIndex::load(in, std::move(ids), std::move(vectors), {});
  throw Error(fmt::format("index: unknown backend '{}'", backend));
}

ItemEmbeddingSet batch_item_inference(const Model& model) {
  return {model.catalog().ids(), model.item_vectors(), model.catalog().missing_features()};
}

std::vector<UserEmbeddings> batch_user_inference(const Model& model,
                                                 std::span<const UserSequence> users) {
  std::vector<UserEmbeddings> out;
  out.reserve(users.size());
  for (const auto& u : users) out.push_back({u.user_id, model.user_interests(u.actions)});
  return out;
}

std::vector<ScoredItem> recommend(const Mat& interests, const ItemIndex& index,
                                  std::size_t n_per_interest, std::size_t top_n) {
  std::map<std::string, double> best;
  for (Eigen::Index k = 0; k < interests.rows(); ++k) {
    for (auto& hit : index.query(interests.row(k).transpose(), n_per_interest)) {
      auto [it, inserted] = best.emplace(std::move(hit.item_id), hit.score);
      if (!inserted) it->second = std::max(it->second, hit.score);
    }
  }
  std::vector<ScoredItem> merged;
  merged.reserve(best.size());
  for (auto& [id, s] : best) merged.push_back({id, s});
  std::sort(merged.begin(), merged.end(), ranks_before);
  if (merged.size() > top_n) merged.resize(top_n);
  return merged;
}

void write_user_embeddings(std::ostream& out, std::span<const UserEmbeddings> users) {
  for (const auto& u : users) {
    for (Eigen::Index k = 0; k < u.interests.rows(); ++k) {
      out << u.user_id << '\t' << k << '\t';
      for (Eigen::Index c = 0; c < u.interests.cols(); ++c) {
        if (c > 0) out << ',';
        out << fmt::format("{:.9g}", u.interests(k, c));
      }
      out << '\n';
    }
  }
}

void write_recommendations(std::ostream& out, const std::string& user_id,
                           std::span<const ScoredItem> items) {
  for (std::size_t r = 0; r < items.size(); ++r) {
    out << user_id << '\t' << r + 1 << '\t' << items[r].item_id << '\t'
        << fmt::format("{:.9g}", items[r].score) << '\n';
  }
}

}  // namespace cagr
