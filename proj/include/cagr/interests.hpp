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

#include "cagr/types.hpp"

namespace cagr {

// Self-attentive multi-interest pooling:
//   P = softmax over positions of (W2^T tanh(W1^T H^T))   (K x T)
//   O = P H                                                 (K x d)
struct InterestParams {
  Mat w1;  // d x d_a
  Mat w2;  // d_a x K

  int num_interests() const { return static_cast<int>(w2.cols()); }

  static InterestParams zeros(int dim, int hidden, int interests);
  static InterestParams random(int dim, int hidden, int interests, double scale,
                               std::mt19937_64& rng);
};

struct InterestCache {
  Mat hidden;  // T x d_a, tanh activations
  Mat pool;    // K x T, rows sum to one
};

// Returns the K x d interest matrix for a T x d behavior matrix (T >= 1).
Mat extract_interests(const Mat& h, const InterestParams& params, InterestCache* cache = nullptr);

void extract_interests_backward(const Mat& h, const InterestParams& params,
                                const InterestCache& cache, const Mat& grad_out, Mat& grad_h,
                                InterestParams& grads);

struct InterestChoice {
  int index = 0;
  Vec vector;
};

// Row with the largest dot product against `target`; ties go to the smallest index.
InterestChoice select_interest(const Mat& interests, const Vec& target);

// max_k O_k . z
double score(const Mat& interests, const Vec& item);

}  // namespace cagr
