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
#include "cagr/interests.hpp"

#include "cagr/embedding.hpp"

namespace cagr {

InterestParams InterestParams::zeros(int dim, int hidden, int interests) {
  if (interests < 1) throw Error("need at least one interest");
  return {Mat::Zero(dim, hidden), Mat::Zero(hidden, interests)};
}

InterestParams InterestParams::random(int dim, int hidden, int interests, double scale,
                                      std::mt19937_64& rng) {
  auto p = zeros(dim, hidden, interests);
  fill_uniform(p.w1, scale, rng);
  fill_uniform(p.w2, scale, rng);
  return p;
}

Mat extract_interests(const Mat& h, const InterestParams& params, InterestCache* cache) {
  const Mat hidden = (h * params.w1).array().tanh().matrix();  // T x d_a
  Mat logits = (hidden * params.w2).transpose();                  // K x T
  for (Eigen::Index k = 0; k < logits.rows(); ++k) {
    auto row = logits.row(k);
    row = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  Mat out = logits * h;
  if (cache) *cache = {hidden, std::move(logits)};
  return out;
}

void extract_interests_backward(const Mat& h, const InterestParams& params,
                                const InterestCache& cache, const Mat& grad_out, Mat& grad_h,
                                InterestParams& grads) {
  const Mat& p = cache.pool;
  grad_h.noalias() += p.transpose() * grad_out;
  const Mat d_pool = grad_out * h.transpose();  // K x T
  Mat d_logits(p.rows(), p.cols());
  for (Eigen::Index k = 0; k < p.rows(); ++k) {
    const double dot = p.row(k).dot(d_pool.row(k));
    d_logits.row(k) = p.row(k).array() * (d_pool.row(k).array() - dot);
  }
  // logits^T = hidden * w2
  const Mat d_scores = d_logits.transpose();  // T x K
  grads.w2.noalias() += cache.hidden.transpose() * d_scores;
  const Mat d_hidden = d_scores * params.w2.transpose();
  const Mat d_pre = (d_hidden.array() * (1.0 - cache.hidden.array().square())).matrix();
  grads.w1.noalias() += h.transpose() * d_pre;
  grad_h.noalias() += d_pre * params.w1.transpose();
}

InterestChoice select_interest(const Mat& interests, const Vec& target) {
  const Vec dots = interests * target;
  int best = 0;
  for (int k = 1; k < dots.size(); ++k) {
    if (dots[k] > dots[best]) best = k;
  }
  return {best, interests.row(best).transpose()};
}

double score(const Mat& interests, const Vec& item) { return (interests * item).maxCoeff(); }

}  // namespace cagr
