/**
 * Copyright 2026 The rpmaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "rpmaug/morph.hpp"
#include "rpmaug/random.hpp"

namespace rpmaug {
namespace {

TEST(Rng, KnownAnswerSequence) {
  // SplitMix64 state expansion followed by xoshiro256**.
  Rng a(0);
  EXPECT_EQ(a.next_u64(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(a.next_u64(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(a.next_u64(), 0x1a5f849d4933e6e0ULL);
  Rng b(12345);
  EXPECT_EQ(b.next_u64(), 0xbe6a36374160d49bULL);
  EXPECT_EQ(b.next_u64(), 0x214aaa0637a688c6ULL);
  EXPECT_EQ(b.next_u64(), 0xf69d16de9954d388ULL);
}

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
  auto a = Rng::substream(7, 3);
  auto b = Rng::substream(7, 3);
  auto c = Rng::substream(7, 4);
  auto d = Rng::substream(8, 3);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
}

TEST(Rng, BelowIsInRangeAndCoversIt) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
  EXPECT_THROW(rng.below(0), Error);
}

TEST(Rng, RangeIsClosed) {
  Rng rng(2);
  bool lo = false, hi = false;
  for (int i = 0; i < 1000; ++i) {
    const int v = rng.range(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    lo |= v == -2;
    hi |= v == 2;
  }
  EXPECT_TRUE(lo && hi);
}

TEST(Rng, UniformBounds) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform_open0();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng rng(4);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, GammaMeanEqualsShape) {
  for (double shape : {0.3, 1.0, 2.5, 9.0}) {
    Rng rng(5);
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += rng.gamma(shape);
    EXPECT_NEAR(sum / n, shape, 0.03 * std::max(1.0, shape)) << shape;
  }
}

TEST(Beta, UniformCaseMeanAndKs) {
  Rng rng(0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_lambda(1.0, rng);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  EXPECT_NEAR(mean, 0.5, 0.01);
  EXPECT_LT(oracle::ks_uniform(xs), 0.01);
}

TEST(Beta, SymmetricShapesHaveMeanHalfAndKnownVariance) {
  for (double a : {0.2, 0.5, 2.0, 5.0}) {
    Rng rng(6);
    const int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_lambda(a, rng);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.5, 0.01) << a;
    EXPECT_NEAR(var, 1.0 / (4.0 * (2.0 * a + 1.0)), 0.01) << a;
  }
}

TEST(Beta, FixedSeedReproducesSequence) {
  Rng a(77), b(77);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_lambda(0.4, a), sample_lambda(0.4, b));
}

}  // namespace
}  // namespace rpmaug
