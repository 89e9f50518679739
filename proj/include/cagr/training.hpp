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
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cagr/data_model.hpp"
#include "cagr/model.hpp"

namespace cagr {

// Next-item example: the first `prefix_len` actions of a training sequence
// predict the item of action `prefix_len`.
struct TrainExample {
  std::size_t sequence = 0;
  std::size_t prefix_len = 0;
  int target = -1;
  std::vector<int> negatives;  // never contains target
};

// One example per position >= 1 whose behavior is a prediction target.
std::vector<TrainExample> make_examples(std::span<const UserSequence> sequences,
                                        const ItemCatalog& catalog,
                                        std::span<const BehaviorType> targets);

// Uniform over [0, n_items) excluding the positive.
class NegativeSampler {
 public:
  NegativeSampler(std::size_t n_items, std::uint64_t seed);
  int draw(int positive);
  std::vector<int> draw(int positive, std::size_t count);

 private:
  std::size_t n_items_;
  std::mt19937_64 rng_;
};

// -log softmax of the positive among {positive} + negatives, on dot-product
// logits against `user`.
double sampled_softmax_loss(const Vec& user, const Vec& positive, std::span<const Vec> negatives);

// Same loss with candidates as columns (column 0 is the positive). Gradients
// are written (not accumulated) when the pointers are non-null.
double sampled_softmax_loss(const Vec& user, const Mat& candidates, Vec* grad_user,
                            Mat* grad_candidates);

struct LossBreakdown {
  double total = 0.0;
  double coaction = 0.0;  // L_z, against z vectors
  double item = 0.0;      // L_e, against raw e vectors
};

// Mean of L_z + lambda * L_e over the examples. When `grads` is non-null the
// gradient of that mean is accumulated into it. Each term picks its own
// interest row by argmax; no gradient flows through the choice.
LossBreakdown batch_loss(const Model& model, std::span<const TrainExample> examples,
                         std::span<const UserSequence> sequences, double lambda,
                         ModelParams* grads = nullptr);

LossBreakdown example_loss(const Model& model, const TrainExample& example,
                           std::span<const UserSequence> sequences, double lambda);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ModelParams& params, ModelParams& grads) = 0;
};

class SgdOptimizer final : public Optimizer {
 public:
  explicit SgdOptimizer(double lr) : lr_(lr) {}
  void step(ModelParams& params, ModelParams& grads) override;

 private:
  double lr_;
};

class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(const ModelParams& shape, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(ModelParams& params, ModelParams& grads) override;

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  ModelParams m_;
  ModelParams v_;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
};

// Trains in place with the model's own config. Deterministic for a fixed seed.
// Throws Error naming the epoch and step if the loss stops being finite.
std::vector<EpochStats> train(Model& model, std::span<const UserSequence> sequences,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

struct TensorGradCheck {
  std::string name;
  std::size_t size = 0;
  double max_rel_error = 0.0;
  double max_abs_grad = 0.0;
};

struct GradCheckReport {
  std::vector<TensorGradCheck> tensors;
  double max_rel_error = 0.0;
};

// Central differences on batch_loss for every scalar of every tensor.
// Relative error per element is |analytic - numeric| / max(|analytic|, |numeric|, floor).
GradCheckReport grad_check(Model& model, std::span<const TrainExample> examples,
                           std::span<const UserSequence> sequences, double lambda,
                           double step = 1e-4, double floor = 1e-6);

}  // namespace cagr
