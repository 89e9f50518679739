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
#include <gtest/gtest.h>

#include <random>

#include "cagr/interests.hpp"
#include "oracles.hpp"

namespace cagr {
namespace {

Mat random_mat(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  return Mat::NullaryExpr(r, c, [&] { return n(rng); });
}

oracle::Grid to_grid(const Mat& m) {
  oracle::Grid g(m.rows(), std::vector<double>(m.cols()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int c = 0; c < m.cols(); ++c) g[i][c] = m(i, c);
  }
  return g;
}

TEST(ExtractInterests, SinglePositionRepeatsIt) {
  std::mt19937_64 rng(1);
  const auto p = InterestParams::random(3, 5, 4, 0.5, rng);
  const Mat h = random_mat(1, 3, rng);
  const Mat o = extract_interests(h, p);
  ASSERT_EQ(o.rows(), 4);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(o.row(k), h.row(0));
}

TEST(ExtractInterests, ConvexCombinationsMatchingOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int t = 2 + trial;
    const auto p = InterestParams::random(4, 6, 2, 1.0, rng);
    const Mat h = random_mat(t, 4, rng);
    InterestCache cache;
    const Mat o = extract_interests(h, p, &cache);
    const auto [pool, out] = oracle::extract_interests(to_grid(h), p);
    EXPECT_LT(oracle::max_rel_diff(pool, cache.pool), 1e-12);
    EXPECT_LT(oracle::max_rel_diff(out, o), 1e-12);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(cache.pool.row(k).sum(), 1.0, 1e-14);
      EXPECT_GE(cache.pool.row(k).minCoeff(), 0.0);
    }
  }
}

TEST(ExtractInterests, HandSizedExample) {
  // d=1, d_a=1, K=2: P_k = softmax(w2_k * tanh(w1 * h)).
  InterestParams p = InterestParams::zeros(1, 1, 2);
  p.w1(0, 0) = 1.0;
  p.w2 << 1.0, -1.0;
  Mat h(2, 1);
  h << 0.0, 1.0;
  const double t1 = std::tanh(1.0);
  const double w = std::exp(t1) / (1.0 + std::exp(t1));
  const Mat o = extract_interests(h, p);
  EXPECT_NEAR(o(0, 0), w, 1e-15);
  EXPECT_NEAR(o(1, 0), 1.0 - w, 1e-15);
}

TEST(SelectInterest, ArgmaxAndTies) {
  Mat o(2, 2);
  o << 1, 0, 0, 1;
  Vec z(2);
  z << 2, 1;
  EXPECT_EQ(select_interest(o, z).index, 0);
  EXPECT_EQ(select_interest(o, z).vector, o.row(0).transpose());
  EXPECT_EQ(select_interest(o, 7.5 * z).index, 0);
  z << 1, 2;
  EXPECT_EQ(select_interest(o, z).index, 1);
  Mat same(3, 2);
  same << 1, 1, 1, 1, 1, 1;
  EXPECT_EQ(select_interest(same, z).index, 0);
}

TEST(Score, MaxOverRows) {
  Mat o(2, 2);
  o << 1, 0, 0, 1;
  Vec z(2);
  z << 2, 1;
  EXPECT_EQ(score(o, z), 2.0);
  std::mt19937_64 rng(3);
  const Mat r = random_mat(4, 5, rng);
  const Vec q = random_mat(5, 1, rng);
  for (int k = 0; k < 4; ++k) EXPECT_GE(score(r, q), r.row(k).dot(q));
  EXPECT_EQ(score(r, q), select_interest(r, q).vector.dot(q));
  EXPECT_EQ(score(r.topRows(1), q), r.row(0).dot(q));
}

}  // namespace
}  // namespace cagr
