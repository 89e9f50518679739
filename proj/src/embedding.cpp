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
#include "cagr/embedding.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace cagr {

ItemEncoder ItemEncoder::fit(const ItemFeatureTable& table) {
  ItemEncoder enc;
  const std::size_t g = table.schema.onehot.size();
  const std::size_t n_dense = table.schema.numeric.size() + table.schema.ordinal.size();
  enc.vocab_.resize(g);
  std::vector<double> sum(n_dense, 0.0), sum_sq(n_dense, 0.0);
  for (const auto& row : table.rows) {
    for (std::size_t f = 0; f < g; ++f) enc.vocab_[f].emplace(row.onehot[f], 0);
    std::size_t k = 0;
    for (double v : row.numeric) {
      sum[k] += v;
      sum_sq[k++] += v * v;
    }
    for (auto v : row.ordinal) {
      sum[k] += static_cast<double>(v);
      sum_sq[k++] += static_cast<double>(v) * static_cast<double>(v);
    }
  }
  for (auto& vocab : enc.vocab_) {
    int next = 1;
    for (auto& [code, index] : vocab) index = next++;
  }
  const double n = std::max<double>(1.0, static_cast<double>(table.rows.size()));
  enc.mean_.resize(n_dense);
  enc.scale_.resize(n_dense);
  for (std::size_t k = 0; k < n_dense; ++k) {
    enc.mean_[k] = sum[k] / n;
    const double var = std::max(0.0, sum_sq[k] / n - enc.mean_[k] * enc.mean_[k]);
    enc.scale_[k] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  return enc;
}

EncodedItem ItemEncoder::encode(const ItemFeatureRow& row) const {
  EncodedItem out;
  out.codes.resize(vocab_.size(), 0);
  for (std::size_t f = 0; f < vocab_.size() && f < row.onehot.size(); ++f) {
    const auto it = vocab_[f].find(row.onehot[f]);
    out.codes[f] = it == vocab_[f].end() ? 0 : it->second;
  }
  out.dense = Vec::Zero(static_cast<Eigen::Index>(mean_.size()));
  std::size_t k = 0;
  for (double v : row.numeric) {
    if (k < mean_.size()) out.dense[k] = (v - mean_[k]) / scale_[k];
    ++k;
  }
  for (auto v : row.ordinal) {
    if (k < mean_.size()) out.dense[k] = (static_cast<double>(v) - mean_[k]) / scale_[k];
    ++k;
  }
  return out;
}

EncodedItem ItemEncoder::unknown() const {
  return {std::vector<int>(vocab_.size(), 0), Vec::Zero(static_cast<Eigen::Index>(mean_.size()))};
}

EmbeddingTables EmbeddingTables::zeros(const ItemEncoder& encoder, const EmbeddingDims& dims) {
  EmbeddingTables t;
  for (std::size_t f = 0; f < encoder.onehot_count(); ++f) {
    t.feature.push_back(Mat::Zero(static_cast<Eigen::Index>(encoder.vocab_size(f)), dims.feature_dim));
  }
  const auto in_dim = static_cast<Eigen::Index>(encoder.onehot_count()) * dims.feature_dim +
                      static_cast<Eigen::Index>(encoder.dense_count());
  t.projection = Mat::Zero(dims.dim, in_dim);
  t.projection_bias = Mat::Zero(dims.dim, 1);
  t.behavior = Mat::Zero(kNumBehaviors, dims.behavior_dim);
  return t;
}

EmbeddingTables EmbeddingTables::random(const ItemEncoder& encoder, const EmbeddingDims& dims,
                                        double scale, std::mt19937_64& rng) {
  auto t = zeros(encoder, dims);
  for (auto& m : t.feature) fill_uniform(m, scale, rng);
  fill_uniform(t.projection, scale, rng);
  fill_uniform(t.projection_bias, scale, rng);
  fill_uniform(t.behavior, scale, rng);
  return t;
}

Vec embedding_input(const EncodedItem& item, const EmbeddingTables& tables) {
  const int fd = tables.feature_dim();
  const auto g = static_cast<Eigen::Index>(tables.feature.size());
  Vec x(g * fd + item.dense.size());
  for (Eigen::Index f = 0; f < g; ++f) {
    x.segment(f * fd, fd) = tables.feature[f].row(item.codes[f]).transpose();
  }
  x.tail(item.dense.size()) = item.dense;
  return x;
}

Vec embed_item(const EncodedItem& item, const EmbeddingTables& tables) {
  return tables.projection * embedding_input(item, tables) + tables.projection_bias.col(0);
}

Vec embed_item(const ItemFeatureRow& row, const ItemEncoder& encoder,
               const EmbeddingTables& tables) {
  return embed_item(encoder.encode(row), tables);
}

void embed_item_backward(const EncodedItem& item, const EmbeddingTables& tables,
                         const Vec& grad_out, EmbeddingTables& grads) {
  const Vec x = embedding_input(item, tables);
  grads.projection.noalias() += grad_out * x.transpose();
  grads.projection_bias.col(0) += grad_out;
  const Vec dx = tables.projection.transpose() * grad_out;
  const int fd = tables.feature_dim();
  for (std::size_t f = 0; f < tables.feature.size(); ++f) {
    grads.feature[f].row(item.codes[f]) +=
        dx.segment(static_cast<Eigen::Index>(f) * fd, fd).transpose();
  }
}

Vec embed_behavior(BehaviorType b, const EmbeddingTables& tables) {
  return tables.behavior.row(static_cast<int>(b)).transpose();
}

void write_embedding_rows(std::ostream& out, std::span<const std::string> ids, const Mat& vectors) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i] << '\t';
    for (Eigen::Index k = 0; k < vectors.rows(); ++k) {
      if (k > 0) out << ',';
      out << fmt::format("{:.9g}", vectors(k, static_cast<Eigen::Index>(i)));
    }
    out << '\n';
  }
}

std::pair<std::vector<std::string>, Mat> read_embedding_rows(std::istream& in) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> cols;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error("embedding rows: missing tab");
    ids.push_back(line.substr(0, tab));
    std::vector<double> values;
    std::stringstream ss(line.substr(tab + 1));
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (!cols.empty() && values.size() != cols.front().size()) {
      throw Error("embedding rows: inconsistent dimension");
    }
    cols.push_back(std::move(values));
  }
  Mat m(cols.empty() ? 0 : static_cast<Eigen::Index>(cols.front().size()),
        static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t k = 0; k < cols[c].size(); ++k) {
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = cols[c][k];
    }
  }
  return {std::move(ids), std::move(m)};
}

void fill_uniform(Mat& m, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

}  // namespace cagr
