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
#include "cagr/training.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include <fmt/format.h>

namespace cagr {

std::vector<TrainExample> make_examples(std::span<const UserSequence> sequences,
                                        const ItemCatalog& catalog,
                                        std::span<const BehaviorType> targets) {
  std::vector<TrainExample> out;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& actions = sequences[s].actions;
    for (std::size_t t = 1; t < actions.size(); ++t) {
      if (std::find(targets.begin(), targets.end(), actions[t].behavior) == targets.end()) continue;
      const auto item = catalog.find(actions[t].item_id);
      if (!item) continue;
      out.push_back({s, t, *item, {}});
    }
  }
  return out;
}

NegativeSampler::NegativeSampler(std::size_t n_items, std::uint64_t seed)
    : n_items_(n_items), rng_(seed) {
  if (n_items < 2) throw Error("negative sampling needs at least two items");
}

int NegativeSampler::draw(int positive) {
  std::uniform_int_distribution<std::size_t> dist(0, n_items_ - 2);
  auto r = static_cast<int>(dist(rng_));
  if (r >= positive) ++r;
  return r;
}

std::vector<int> NegativeSampler::draw(int positive, std::size_t count) {
  std::vector<int> out(count);
  for (auto& n : out) n = draw(positive);
  return out;
}

double sampled_softmax_loss(const Vec& user, const Vec& positive, std::span<const Vec> negatives) {
  Mat candidates(user.size(), static_cast<Eigen::Index>(negatives.size()) + 1);
  candidates.col(0) = positive;
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    candidates.col(static_cast<Eigen::Index>(n) + 1) = negatives[n];
  }
  return sampled_softmax_loss(user, candidates, nullptr, nullptr);
}

double sampled_softmax_loss(const Vec& user, const Mat& candidates, Vec* grad_user,
                            Mat* grad_candidates) {
  const Vec logits = candidates.transpose() * user;
  const double top = logits.maxCoeff();
  const Vec shifted = (logits.array() - top).exp();
  const double total = shifted.sum();
  const double loss = std::log(total) - (logits[0] - top);
  if (grad_user != nullptr || grad_candidates != nullptr) {
    Vec delta = shifted / total;
    delta[0] -= 1.0;
    if (grad_user != nullptr) *grad_user = candidates * delta;
    if (grad_candidates != nullptr) *grad_candidates = user * delta.transpose();
  }
  return loss;
}

LossBreakdown batch_loss(const Model& model, std::span<const TrainExample> examples,
                         std::span<const UserSequence> sequences, double lambda,
                         ModelParams* grads) {
  LossBreakdown out;
  if (examples.empty()) return out;
  std::vector<int> items;
  for (const auto& ex : examples) {
    items.push_back(ex.target);
    items.insert(items.end(), ex.negatives.begin(), ex.negatives.end());
  }
  const ItemTowerState tower = model.item_forward(items);
  const int d = model.dim();
  const double w = 1.0 / static_cast<double>(examples.size());
  Mat grad_z, grad_e;
  if (grads != nullptr) {
    grad_z = Mat::Zero(d, tower.z.cols());
    grad_e = Mat::Zero(d, tower.e.cols());
  }

  for (const auto& ex : examples) {
    const auto& seq = sequences[ex.sequence].actions;
    const UserTowerState user =
        model.user_forward(std::span(seq).first(ex.prefix_len));
    const auto n_cand = static_cast<Eigen::Index>(ex.negatives.size()) + 1;
    const auto candidate = [&](Eigen::Index c) {
      return c == 0 ? ex.target : ex.negatives[static_cast<std::size_t>(c - 1)];
    };
    Mat cz(d, n_cand), ce(d, n_cand);
    for (Eigen::Index c = 0; c < n_cand; ++c) {
      cz.col(c) = tower.z.col(candidate(c));
      ce.col(c) = tower.e.col(candidate(c));
    }
    const InterestChoice on_z = select_interest(user.interests, cz.col(0));
    const InterestChoice on_e = select_interest(user.interests, ce.col(0));

    Vec du_z, du_e;
    Mat dc_z, dc_e;
    const bool want = grads != nullptr;
    const double lz = sampled_softmax_loss(on_z.vector, cz, want ? &du_z : nullptr,
                                           want ? &dc_z : nullptr);
    const double le = sampled_softmax_loss(on_e.vector, ce, want ? &du_e : nullptr,
                                           want ? &dc_e : nullptr);
    out.coaction += w * lz;
    out.item += w * le;

    if (want) {
      Mat d_interests = Mat::Zero(user.interests.rows(), d);
      d_interests.row(on_z.index) += w * du_z.transpose();
      d_interests.row(on_e.index) += (w * lambda) * du_e.transpose();
      for (Eigen::Index c = 0; c < n_cand; ++c) {
        grad_z.col(candidate(c)) += w * dc_z.col(c);
        grad_e.col(candidate(c)) += (w * lambda) * dc_e.col(c);
      }
      model.user_backward(user, d_interests, *grads);
    }
  }
  if (grads != nullptr) model.item_backward(tower, grad_z, grad_e, *grads);
  out.total = out.coaction + lambda * out.item;
  return out;
}

LossBreakdown example_loss(const Model& model, const TrainExample& example,
                           std::span<const UserSequence> sequences, double lambda) {
  return batch_loss(model, std::span(&example, 1), sequences, lambda);
}

void SgdOptimizer::step(ModelParams& params, ModelParams& grads) {
  const auto p = named_tensors(params);
  const auto g = named_tensors(grads);
  for (std::size_t i = 0; i < p.size(); ++i) *p[i].value -= lr_ * *g[i].value;
}

AdamOptimizer::AdamOptimizer(const ModelParams& shape, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(shape.zeros_like()),
      v_(shape.zeros_like()) {}

void AdamOptimizer::step(ModelParams& params, ModelParams& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  const auto p = named_tensors(params);
  const auto g = named_tensors(grads);
  const auto m = named_tensors(m_);
  const auto v = named_tensors(v_);
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto gi = g[i].value->array();
    m[i].value->array() = beta1_ * m[i].value->array() + (1.0 - beta1_) * gi;
    v[i].value->array() = beta2_ * v[i].value->array() + (1.0 - beta2_) * gi.square();
    p[i].value->array() -=
        lr_ * (m[i].value->array() / c1) / ((v[i].value->array() / c2).sqrt() + eps_);
  }
}

std::vector<EpochStats> train(Model& model, std::span<const UserSequence> sequences,
                              const std::function<void(const EpochStats&)>& on_epoch) {
  const ModelConfig& config = model.config();
  auto examples = make_examples(sequences, model.catalog(), config.targets);
  if (examples.empty()) throw Error("no training examples");

  NegativeSampler sampler(model.catalog().size(), config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::unique_ptr<Optimizer> optimizer;
  if (config.optimizer == OptimizerKind::kAdam) {
    optimizer = std::make_unique<AdamOptimizer>(model.params(), config.lr);
  } else {
    optimizer = std::make_unique<SgdOptimizer>(config.lr);
  }

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  ModelParams grads = model.params().zeros_like();
  std::vector<EpochStats> log;
  std::vector<TrainExample> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch, ++step) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        TrainExample ex = examples[order[i]];
        ex.negatives = sampler.draw(ex.target, config.negatives);
        batch.push_back(std::move(ex));
      }
      for (const auto& t : named_tensors(grads)) t.value->setZero();
      const LossBreakdown loss = batch_loss(model, batch, sequences, config.lambda, &grads);
      if (!std::isfinite(loss.total)) {
        throw Error(fmt::format("training diverged: loss is {} at epoch {} step {}", loss.total,
                                epoch, step + 1));
      }
      loss_sum += loss.total * static_cast<double>(batch.size());
      optimizer->step(model.params(), grads);
    }
    log.push_back({epoch, loss_sum / static_cast<double>(examples.size())});
    if (on_epoch) on_epoch(log.back());
  }
  return log;
}

GradCheckReport grad_check(Model& model, std::span<const TrainExample> examples,
                           std::span<const UserSequence> sequences, double lambda, double step,
                           double floor) {
  ModelParams analytic = model.params().zeros_like();
  batch_loss(model, examples, sequences, lambda, &analytic);
  const auto params = named_tensors(model.params());
  const auto grads = named_tensors(analytic);

  GradCheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Mat& p = *params[t].value;
    const Mat& g = *grads[t].value;
    TensorGradCheck check{params[t].name, static_cast<std::size_t>(p.size()), 0.0, 0.0};
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + step;
      const double up = batch_loss(model, examples, sequences, lambda).total;
      p.data()[i] = saved - step;
      const double down = batch_loss(model, examples, sequences, lambda).total;
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = g.data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      check.max_rel_error = std::max(check.max_rel_error, std::abs(a - numeric) / denom);
      check.max_abs_grad = std::max(check.max_abs_grad, std::abs(a));
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.tensors.push_back(std::move(check));
  }
  return report;
}

}  // namespace cagr
