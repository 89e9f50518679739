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
#include "cagr/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace cagr {
namespace {

void write_tensor(const std::filesystem::path& path, const Mat& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ' ';
      out << fmt::format("{}", m(r, c));
    }
    out << '\n';
  }
}

void read_tensor(const std::filesystem::path& path, Mat& m) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows != m.rows() || cols != m.cols()) {
    throw Error(fmt::format("tensor '{}' has shape {}x{}, expected {}x{}", path.string(), rows,
                           cols, m.rows(), m.cols()));
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(in >> m(r, c))) throw Error(fmt::format("tensor '{}' is truncated", path.string()));
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& t : named_tensors(z)) t.value->setZero();
  return z;
}

std::vector<NamedTensor> named_tensors(ModelParams& p) {
  std::vector<NamedTensor> out;
  for (std::size_t f = 0; f < p.embedding.feature.size(); ++f) {
    out.push_back({fmt::format("embedding.feature{}", f), &p.embedding.feature[f]});
  }
  out.push_back({"embedding.projection", &p.embedding.projection});
  out.push_back({"embedding.projection_bias", &p.embedding.projection_bias});
  out.push_back({"embedding.behavior", &p.embedding.behavior});
  out.push_back({"coaction.click.weight", &p.coaction.click.weight});
  out.push_back({"coaction.click.score", &p.coaction.click.score});
  out.push_back({"coaction.purchase.weight", &p.coaction.purchase.weight});
  out.push_back({"coaction.purchase.score", &p.coaction.purchase.score});
  out.push_back({"coaction.out_weight", &p.coaction.out_weight});
  out.push_back({"coaction.out_bias", &p.coaction.out_bias});
  for (std::size_t l = 0; l < p.interaction.qkv.size(); ++l) {
    auto& s = p.interaction.qkv[l];
    out.push_back({fmt::format("interaction.qkv{}.query", l), &s.query});
    out.push_back({fmt::format("interaction.qkv{}.key", l), &s.key});
    out.push_back({fmt::format("interaction.qkv{}.value", l), &s.value});
  }
  for (std::size_t l = 0; l < p.interaction.layers.size(); ++l) {
    auto& layer = p.interaction.layers[l];
    out.push_back({fmt::format("interaction.layer{}.attn_weight", l), &layer.attn_weight});
    out.push_back({fmt::format("interaction.layer{}.attn_score", l), &layer.attn_score});
  }
  out.push_back({"interests.w1", &p.interests.w1});
  out.push_back({"interests.w2", &p.interests.w2});
  return out;
}

Model::Model(ModelConfig config, ItemFeatureTable items, std::vector<std::string> extra_item_ids,
             CoActionGraph graph, ModelParams params)
    : config_(std::move(config)),
      features_(std::move(items)),
      extra_ids_(std::move(extra_item_ids)),
      encoder_(ItemEncoder::fit(features_)),
      catalog_(features_, encoder_, extra_ids_),
      graph_(std::move(graph)),
      params_(std::move(params)) {
  config_.validate();
  index_neighbors();
}

Model Model::initialize(const ModelConfig& config, ItemFeatureTable items,
                        std::vector<std::string> extra_item_ids, CoActionGraph graph) {
  config.validate();
  const ItemEncoder encoder = ItemEncoder::fit(items);
  const EdgeLayout layout(config.behavior_dim, items.schema);
  std::mt19937_64 rng(config.seed);
  const double s = config.init_scale;
  ModelParams p;
  p.embedding = EmbeddingTables::random(
      encoder, {config.dim, config.feature_dim, config.behavior_dim}, s, rng);
  p.coaction = CoActionParams::random(config.dim, config.resolved_coaction_hidden(), s, rng);
  p.interaction = InteractionParams::random(config.dim, layout.size(), config.attn_dim,
                                            config.layers, config.shared_qkv, s, rng);
  p.interests = InterestParams::random(config.dim, config.resolved_interest_hidden(),
                                       config.interests, s, rng);
  return Model(config, std::move(items), std::move(extra_item_ids), std::move(graph),
               std::move(p));
}

int Model::edge_dim() const { return EdgeLayout(config_.behavior_dim, features_.schema).size(); }

void Model::index_neighbors() {
  const auto resolve = [&](int item, Relation relation) {
    std::vector<int> out;
    for (const auto& id :
         sample_neighbors(graph_, catalog_.id(item), relation, config_.neighbor_cap)) {
      if (const auto idx = catalog_.find(id)) out.push_back(*idx);
    }
    return out;
  };
  const auto n = static_cast<int>(catalog_.size());
  click_neighbors_.resize(static_cast<std::size_t>(n));
  purchase_neighbors_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    click_neighbors_[static_cast<std::size_t>(i)] = resolve(i, Relation::kClick);
    purchase_neighbors_[static_cast<std::size_t>(i)] = resolve(i, Relation::kPurchase);
  }
}

const std::vector<int>& Model::click_neighbors(int item) const {
  return click_neighbors_[static_cast<std::size_t>(item)];
}

const std::vector<int>& Model::purchase_neighbors(int item) const {
  return purchase_neighbors_[static_cast<std::size_t>(item)];
}

ItemTowerState Model::item_forward(std::span<const int> items) const {
  const auto n = static_cast<Eigen::Index>(catalog_.size());
  const int d = dim();
  ItemTowerState s;
  s.slot.assign(static_cast<std::size_t>(n), -1);
  s.has_embedding.assign(static_cast<std::size_t>(n), 0);
  s.e = Mat::Zero(d, n);
  s.z = Mat::Zero(d, n);

  const auto ensure = [&](int i) {
    if (s.has_embedding[static_cast<std::size_t>(i)]) return;
    s.e.col(i) = embed_item(catalog_.encoded(i), params_.embedding);
    s.has_embedding[static_cast<std::size_t>(i)] = 1;
  };
  const auto gather = [&](const std::vector<int>& ids) {
    Mat m(d, static_cast<Eigen::Index>(ids.size()));
    for (std::size_t c = 0; c < ids.size(); ++c) {
      ensure(ids[c]);
      m.col(static_cast<Eigen::Index>(c)) = s.e.col(ids[c]);
    }
    return m;
  };

  for (int q : items) {
    if (s.slot[static_cast<std::size_t>(q)] >= 0) continue;
    s.slot[static_cast<std::size_t>(q)] = static_cast<int>(s.items.size());
    ItemTowerState::PerItem p;
    p.item = q;
    if (!config_.drop_co_click) p.click_neighbors = click_neighbors(q);
    if (!config_.drop_co_purchase) p.purchase_neighbors = purchase_neighbors(q);
    ensure(q);
    p.click_embs = gather(p.click_neighbors);
    p.purchase_embs = gather(p.purchase_neighbors);
    const Vec e_q = s.e.col(q);
    p.z_click = aggregate_relation(e_q, p.click_embs, params_.coaction.click, &p.click_cache);
    p.z_purchase =
        aggregate_relation(e_q, p.purchase_embs, params_.coaction.purchase, &p.purchase_cache);
    s.z.col(q) = item_vector(e_q, p.z_click, p.z_purchase, params_.coaction);
    s.items.push_back(std::move(p));
  }
  return s;
}

void Model::item_backward(const ItemTowerState& s, const Mat& grad_z, const Mat& grad_e,
                          ModelParams& grads) const {
  const int d = dim();
  Mat de = grad_e;
  for (const auto& p : s.items) {
    const Vec dz = grad_z.col(p.item);
    if (dz.isZero(0.0)) continue;
    const Vec e_q = s.e.col(p.item);
    Vec deq = Vec::Zero(d), dzc = Vec::Zero(d), dzp = Vec::Zero(d);
    item_vector_backward(e_q, p.z_click, p.z_purchase, params_.coaction, dz, deq, dzc, dzp,
                         grads.coaction);
    const auto through = [&](const std::vector<int>& ids, const Mat& embs,
                             const RelationAttention& params, const AggregateCache& cache,
                             const Vec& dout, RelationAttention& g) {
      if (ids.empty()) return;
      Mat dn = Mat::Zero(d, static_cast<Eigen::Index>(ids.size()));
      aggregate_relation_backward(e_q, embs, params, cache, dout, deq, dn, g);
      for (std::size_t c = 0; c < ids.size(); ++c) de.col(ids[c]) += dn.col(static_cast<Eigen::Index>(c));
    };
    through(p.click_neighbors, p.click_embs, params_.coaction.click, p.click_cache, dzc,
            grads.coaction.click);
    through(p.purchase_neighbors, p.purchase_embs, params_.coaction.purchase, p.purchase_cache,
            dzp, grads.coaction.purchase);
    de.col(p.item) += deq;
  }
  for (Eigen::Index i = 0; i < de.cols(); ++i) {
    if (!s.has_embedding[static_cast<std::size_t>(i)]) continue;
    const Vec g = de.col(i);
    if (g.isZero(0.0)) continue;
    embed_item_backward(catalog_.encoded(static_cast<int>(i)), params_.embedding, g,
                        grads.embedding);
  }
}

UserTowerState Model::user_forward(std::span<const ActionRecord> history) const {
  if (history.empty()) throw Error("user history must contain at least one action");
  if (history.size() > config_.t_max) history = history.last(config_.t_max);
  UserTowerState s;
  s.graph = build_sequence_graph(history, catalog_, params_.embedding);
  if (config_.drop_edge_feats) s.graph.edge_feats.setZero();
  if (config_.drop_seq_graph) {
    s.behavior = s.graph.node_embs;
  } else {
    s.behavior = explicit_interaction(s.graph, params_.interaction, &s.interaction);
  }
  s.interests = extract_interests(s.behavior, params_.interests, &s.pooling);
  return s;
}

void Model::user_backward(const UserTowerState& s, const Mat& grad_interests,
                          ModelParams& grads) const {
  const int t = s.graph.valid_len;
  Mat dh = Mat::Zero(t, dim());
  extract_interests_backward(s.behavior, params_.interests, s.pooling, grad_interests, dh,
                             grads.interests);
  Mat d_nodes;
  if (config_.drop_seq_graph) {
    d_nodes = std::move(dh);
  } else {
    d_nodes = Mat::Zero(t, dim());
    if (config_.drop_edge_feats) {
      explicit_interaction_backward(s.graph, params_.interaction, s.interaction, dh, d_nodes,
                                    nullptr, grads.interaction);
    } else {
      Mat d_edges = Mat::Zero(s.graph.edge_feats.rows(), s.graph.edge_feats.cols());
      explicit_interaction_backward(s.graph, params_.interaction, s.interaction, dh, d_nodes,
                                    &d_edges, grads.interaction);
      const int bd = params_.embedding.behavior_dim();
      for (int i = 0; i < t; ++i) {
        for (int j = 0; j <= i; ++j) {
          const auto col = d_edges.col(static_cast<Eigen::Index>(i) * t + j);
          grads.embedding.behavior.row(static_cast<int>(s.graph.behaviors[i])) +=
              col.segment(0, bd).transpose();
          grads.embedding.behavior.row(static_cast<int>(s.graph.behaviors[j])) +=
              col.segment(bd, bd).transpose();
        }
      }
    }
  }
  for (int i = 0; i < t; ++i) {
    const int item = s.graph.items[static_cast<std::size_t>(i)];
    const EncodedItem& enc = item >= 0 ? catalog_.encoded(item) : catalog_.unknown_encoded();
    embed_item_backward(enc, params_.embedding, d_nodes.row(i).transpose(), grads.embedding);
  }
}

Mat Model::item_vectors() const {
  std::vector<int> all(catalog_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return item_forward(all).z;
}

Mat Model::item_embeddings() const {
  Mat e(dim(), static_cast<Eigen::Index>(catalog_.size()));
  for (Eigen::Index i = 0; i < e.cols(); ++i) {
    e.col(i) = embed_item(catalog_.encoded(static_cast<int>(i)), params_.embedding);
  }
  return e;
}

Mat Model::user_interests(std::span<const ActionRecord> history) const {
  return user_forward(history).interests;
}

void Model::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "tensors");
  {
    std::ofstream out(dir / "config.txt", std::ios::binary);
    out << config_text(config_);
  }
  {
    std::ofstream out(dir / "fingerprint.txt", std::ios::binary);
    out << config_fingerprint(config_) << '\n';
  }
  save_item_features(dir / "items.tsv", features_);
  {
    std::ofstream out(dir / "extra_items.txt", std::ios::binary);
    for (const auto& id : extra_ids_) out << id << '\n';
  }
  {
    std::ofstream out(dir / "coaction.tsv", std::ios::binary);
    write_coaction_graph(out, graph_);
  }
  auto params = params_;
  for (const auto& t : named_tensors(params)) {
    write_tensor(dir / "tensors" / (t.name + ".txt"), *t.value);
  }
}

Model Model::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(fmt::format("model directory '{}' not found", dir.string()));
  }
  const ModelConfig config = load_config(dir / "config.txt");
  std::string stored = read_file(dir / "fingerprint.txt");
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
  if (stored != config_fingerprint(config)) {
    throw Error(fmt::format("model '{}': config fingerprint mismatch ({} vs {})", dir.string(),
                            stored, config_fingerprint(config)));
  }
  auto items = load_item_features(dir / "items.tsv");
  std::vector<std::string> extra;
  {
    std::ifstream in(dir / "extra_items.txt");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) extra.push_back(line);
    }
  }
  CoActionGraph graph;
  {
    std::ifstream in(dir / "coaction.tsv");
    if (!in) throw Error(fmt::format("cannot open '{}'", (dir / "coaction.tsv").string()));
    graph = read_coaction_graph(in);
  }
  Model model = initialize(config, std::move(items), std::move(extra), std::move(graph));
  for (const auto& t : named_tensors(model.params_)) {
    read_tensor(dir / "tensors" / (t.name + ".txt"), *t.value);
  }
  return model;
}

}  // namespace cagr
