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

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "rpmaug/analysis.hpp"
#include "rpmaug/morph.hpp"
#include "rpmaug/puzzle.hpp"
#include "test_support.hpp"

namespace rpmaug {
namespace {

using testing::error_code_of;
using testing::random_panel_from;
using testing::random_sample;

RpmSample binary_sample(std::size_t w, std::size_t h, int target, Rng& rng) {
  RpmSample s;
  for (std::size_t i = 0; i < kContextCount; ++i) s.context.push_back(random_panel_from(w, h, {0, 255}, rng));
  for (std::size_t i = 0; i < kCandidateCount; ++i) s.candidates.push_back(random_panel_from(w, h, {0, 255}, rng));
  s.target = target;
  return s;
}

Dataset augment_all(const Dataset& d, const MixRecipe& recipe) {
  Dataset out{{}, d.split};
  for (std::size_t i = 0; i < d.samples.size(); ++i) out.samples.push_back(augment_sample(d.samples[i], recipe, i).sample);
  return out;
}

TEST(CheckClosure, MorphologicalRecipesNeverLeaveTheInputValues) {
  Rng rng(1);
  Dataset d;
  for (int i = 0; i < 60; ++i) d.samples.push_back(random_sample(1 + rng.below(12), 1 + rng.below(12), i % 8, rng));
  for (auto kind : {MixKind::kOr, MixKind::kAnd}) {
    for (auto policy : {CollisionPolicy::kKeepOriginal, CollisionPolicy::kKeepMixed}) {
      const auto r = check_closure(d, augment_all(d, {kind, 1.0, policy, 0}));
      EXPECT_EQ(r.samples_checked, 60u);
      EXPECT_EQ(r.closure_violations, 0u);
      EXPECT_TRUE(r.value_set_closed());
    }
  }
}

TEST(CheckClosure, GeneratedDatasetValueSetIsClosed) {
  Rng rng(2);
  Dataset d;
  for (auto c : kAllConfigurations)
    d.samples.push_back(puzzle::generate_sample(c, puzzle::NegativeStyle::kRaven, 48, 48, rng).sample);
  const auto r = check_closure(d, augment_all(d, {MixKind::kAnd}));
  EXPECT_EQ(r.closure_violations, 0u);
  EXPECT_TRUE(r.value_set_closed());
  const auto allowed = puzzle::render_value_set();
  EXPECT_TRUE(std::includes(allowed.begin(), allowed.end(), r.value_set_before.begin(), r.value_set_before.end()));
}

TEST(CheckClosure, VanillaBlendOfBinaryPanelsCreatesNewValues) {
  Rng rng(3);
  Dataset d;
  for (int i = 0; i < 10; ++i) d.samples.push_back(binary_sample(8, 8, i % 8, rng));
  Dataset mixed{{}, d.split};
  for (const auto& s : d.samples) mixed.samples.push_back(vanilla_mix_sample(s, [] { return 0.3; }).sample);
  const auto r = check_closure(d, mixed);
  EXPECT_GT(r.closure_violations, 0u);
  EXPECT_LE(r.closure_violations, r.samples_checked * 7);
  EXPECT_EQ(r.value_set_before, (std::vector<std::uint8_t>{0, 255}));
  // 0.3 * 255 + 0.7 * 0 and 0.3 * 0 + 0.7 * 255 round to 77 and 179.
  const auto blended = oracle::blend(Panel(1, 1, 255), Panel(1, 1, 0), 0.3);
  EXPECT_EQ(blended.at(0, 0), 77);
  EXPECT_TRUE(std::binary_search(r.value_set_after.begin(), r.value_set_after.end(), 77) ||
              std::binary_search(r.value_set_after.begin(), r.value_set_after.end(), 179));
  EXPECT_FALSE(r.value_set_closed());
}

TEST(CheckClosure, ViolationsMatchPerPixelOracle) {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const auto s = random_sample(6, 5, k % 8, rng);
    const auto m = vanilla_mix_sample(s, 1.0, rng).sample;
    std::size_t expected = 0;
    for (std::size_t i = 0; i < kCandidateCount; ++i) {
      if (static_cast<int>(i) == s.target) continue;
      bool bad = false;
      for (std::size_t p = 0; p < m.candidates[i].size(); ++p) {
        const auto v = m.candidates[i].pixels()[p];
        bad |= v != s.candidates[i].pixels()[p] && v != s.correct().pixels()[p];
      }
      expected += bad;
    }
    EXPECT_EQ(check_closure_sample(s, m).closure_violations, expected);
  }
}

TEST(CheckClosure, CountsDegenerateCandidates) {
  RpmSample s;
  for (std::size_t i = 0; i < kContextCount; ++i) s.context.emplace_back(2, 2, 0);
  for (std::size_t i = 0; i < kCandidateCount; ++i) s.candidates.emplace_back(2, 2, static_cast<std::uint8_t>(i * 10));
  s.target = 7;
  const auto m = cam_mix_sample(s, MixKind::kAnd, CollisionPolicy::kKeepMixed);
  EXPECT_EQ(check_closure_sample(s, m.sample).degenerate_candidates, 7u);
  const auto kept = cam_mix_sample(s, MixKind::kAnd, CollisionPolicy::kKeepOriginal);
  EXPECT_EQ(check_closure_sample(s, kept.sample).degenerate_candidates, 0u);
}

TEST(CheckClosure, EmptyDatasetsGiveZeroReport) {
  const auto r = check_closure(Dataset{}, Dataset{});
  EXPECT_EQ(r.samples_checked, 0u);
  EXPECT_EQ(r.closure_violations, 0u);
  EXPECT_EQ(r.degenerate_candidates, 0u);
  EXPECT_TRUE(r.value_set_before.empty());
  EXPECT_TRUE(r.value_set_after.empty());
}

TEST(CheckClosure, MisalignedDatasetsAreRejected) {
  Rng rng(5);
  Dataset a, b;
  a.samples.push_back(random_sample(4, 4, 0, rng));
  EXPECT_EQ(error_code_of([&] { check_closure(a, b); }), ErrorCode::kInvalidArgument);
  b.samples.push_back(random_sample(4, 4, 1, rng));
  EXPECT_EQ(error_code_of([&] { check_closure(a, b); }), ErrorCode::kInvalidArgument);
  b.samples[0] = random_sample(5, 4, 0, rng);
  EXPECT_EQ(error_code_of([&] { check_closure(a, b); }), ErrorCode::kInvalidArgument);
}

TEST(DatasetStats, DoubledTrainingSplitCounts) {
  Rng rng(6);
  RpmSample original = random_sample(1, 1, 3, rng);
  RpmSample mixed = original;
  mixed.provenance = Provenance::kCamOr;
  DatasetStats st;
  for (int i = 0; i < 42000; ++i) st.add(original, Split::kTrain);
  for (int i = 0; i < 42000; ++i) st.add(mixed, Split::kTrain);
  EXPECT_EQ(st.total, 84000u);
  EXPECT_EQ(st.split_count(Split::kTrain), 84000u);
  EXPECT_EQ(st.provenance_count(Provenance::kOriginal), 42000u);
  EXPECT_EQ(st.provenance_count(Provenance::kCamOr), 42000u);
  EXPECT_EQ(st.provenance_count(Split::kTrain, Provenance::kCamOr), 42000u);
  EXPECT_EQ(st.provenance_count(Split::kVal, Provenance::kOriginal), 0u);
  EXPECT_EQ(st.target_histogram[3], 84000u);
  const auto j = st.to_json();
  EXPECT_EQ(j["provenance"]["original"], 42000);
  EXPECT_EQ(j["provenance"]["cam_or"], 42000);
}

TEST(DatasetStats, MiniSetHasTenPerConfiguration) {
  Rng rng(7);
  Dataset d;
  for (auto c : kAllConfigurations)
    for (int i = 0; i < 10; ++i)
      d.samples.push_back(puzzle::generate_sample(c, puzzle::NegativeStyle::kIRaven, 16, 16, rng).sample);
  const auto st = dataset_stats(d);
  EXPECT_EQ(st.total, 70u);
  std::size_t sum = 0;
  for (auto c : kAllConfigurations) {
    EXPECT_EQ(st.config_count(c), 10u) << config_flag(c);
    sum += st.config_count(c);
  }
  EXPECT_EQ(sum, st.total);
  std::size_t targets = 0;
  for (auto t : st.target_histogram) targets += t;
  EXPECT_EQ(targets, 70u);
}

TEST(DatasetStats, EmptyIsAllZero) {
  const auto st = dataset_stats(Dataset{});
  EXPECT_EQ(st.total, 0u);
  for (auto v : st.per_config) EXPECT_EQ(v, 0u);
  for (auto v : st.per_split) EXPECT_EQ(v, 0u);
  for (auto v : st.target_histogram) EXPECT_EQ(v, 0u);
  for (auto v : st.provenance_histogram) EXPECT_EQ(v, 0u);
  for (const auto& row : st.split_provenance)
    for (auto v : row) EXPECT_EQ(v, 0u);
}

TEST(DatasetStats, JsonFieldOrderIsStable) {
  const auto j = dataset_stats(Dataset{}).to_json();
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"total", "configurations", "splits", "target_histogram", "provenance",
                                            "split_provenance"}));
}

FeatureMatrix matrix(std::vector<std::vector<double>> rows) {
  FeatureMatrix m(rows.size(), rows.at(0).size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

FeatureMatrix random_features(std::size_t n, std::size_t d, Rng& rng) {
  FeatureMatrix m(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = rng.normal() * static_cast<double>(c + 1) + (r % 3 == 0 ? c : 0.0);
  return m;
}

void expect_orthonormal(const ProjectionModel& m, double tol) {
  for (std::size_t i = 0; i < m.components.size(); ++i)
    for (std::size_t j = i; j < m.components.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < m.mean.size(); ++k) dot += m.components[i][k] * m.components[j][k];
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, tol) << i << "," << j;
    }
}

TEST(PcaFit, LineThroughOrigin) {
  const auto m = pca_fit(matrix({{0, 0}, {1, 2}, {2, 4}, {-1, -2}, {3, 6}}));
  EXPECT_NEAR(m.components[0][0], 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(m.components[0][1], 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(m.explained_variance[1], 0.0, 1e-12);
  EXPECT_GT(m.components[1][0], 0.0);
}

TEST(PcaFit, MatchesClosedFormCubicOracle) {
  const auto x = matrix({{2.0, 0.5, 1.0}, {-1.0, 1.5, 0.0}, {0.5, -2.0, 3.0}, {3.0, 1.0, -1.0}, {-0.5, 0.0, 2.5}});
  std::array<double, 3> mean{};
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 3; ++c) mean[c] += x(r, c) / 5.0;
  std::array<std::array<double, 3>, 3> cov{};
  for (std::size_t r = 0; r < 5; ++r)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov[i][j] += (x(r, i) - mean[i]) * (x(r, j) - mean[j]) / 4.0;

  const auto ev = oracle::symmetric3_eigenvalues(cov);
  const auto m = pca_fit(x, 3);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(m.explained_variance[k], ev[k], 1e-6) << k;
    const auto v = oracle::symmetric3_eigenvector(cov, ev[k]);
    double dot = 0.0;
    for (int i = 0; i < 3; ++i) dot += v[i] * m.components[k][i];
    EXPECT_NEAR(std::abs(dot), 1.0, 1e-6) << k;
  }
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(m.mean[c], mean[c], 1e-12);
}

TEST(PcaFit, SignConventionMakesLargestCoordinatePositive) {
  Rng rng(8);
  const auto m = pca_fit(random_features(40, 5, rng));
  for (const auto& comp : m.components) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < comp.size(); ++i)
      if (std::abs(comp[i]) > std::abs(comp[best])) best = i;
    EXPECT_GT(comp[best], 0.0);
  }
}

TEST(PcaFit, ComponentsAreOrthonormalAndVarianceOrdered) {
  Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const auto m = pca_fit(random_features(10 + rng.below(30), 2 + rng.below(8), rng));
    expect_orthonormal(m, 1e-9);
    EXPECT_GE(m.explained_variance[0], m.explained_variance[1]);
    EXPECT_GE(m.explained_variance[1], 0.0);
  }
}

TEST(PcaFit, DegenerateAndInvalidInputs) {
  EXPECT_EQ(error_code_of([] { pca_fit(matrix({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}})); }),
            ErrorCode::kDegenerateVariance);
  EXPECT_EQ(error_code_of([] { pca_fit(matrix({{1, 2}})); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { pca_fit(matrix({{1}, {2}})); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { pca_fit(matrix({{1, NAN}, {2, 3}})); }), ErrorCode::kInvalidArgument);
}

TEST(PcaProject, MeanMapsToOriginAndAxesMapToUnitVectors) {
  Rng rng(10);
  const auto x = random_features(30, 6, rng);
  const auto m = pca_fit(x);
  FeatureMatrix probe(3, 6);
  for (std::size_t c = 0; c < 6; ++c) {
    probe(0, c) = m.mean[c];
    probe(1, c) = m.mean[c] + m.components[0][c];
    probe(2, c) = m.mean[c] + m.components[1][c];
  }
  const auto p = pca_project(m, probe);
  EXPECT_NEAR(p(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(p(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(p(1, 0), 1.0, 1e-9);
  EXPECT_NEAR(p(1, 1), 0.0, 1e-9);
  EXPECT_NEAR(p(2, 0), 0.0, 1e-9);
  EXPECT_NEAR(p(2, 1), 1.0, 1e-9);
}

TEST(PcaProject, ColumnVariancesEqualExplainedVariance) {
  Rng rng(11);
  const auto x = random_features(50, 4, rng);
  const auto m = pca_fit(x);
  const auto p = pca_project(m, x);
  for (std::size_t k = 0; k < 2; ++k) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < p.rows; ++r) mean += p(r, k) / static_cast<double>(p.rows);
    for (std::size_t r = 0; r < p.rows; ++r) var += (p(r, k) - mean) * (p(r, k) - mean);
    var /= static_cast<double>(p.rows - 1);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(var, m.explained_variance[k], 1e-6);
  }
}

TEST(PcaProject, DimensionMismatch) {
  const auto m = pca_fit(matrix({{0, 1}, {1, 0}, {2, 2}}));
  EXPECT_EQ(error_code_of([&] { pca_project(m, FeatureMatrix(1, 3)); }), ErrorCode::kInvalidArgument);
}

TEST(Standardize, ColumnsHaveZeroMeanUnitVariance) {
  Rng rng(12);
  auto x = random_features(25, 3, rng);
  for (std::size_t r = 0; r < x.rows; ++r) x(r, 2) = 4.0;
  const auto z = standardize(x);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < z.rows; ++r) mean += z(r, c) / static_cast<double>(z.rows);
    for (std::size_t r = 0; r < z.rows; ++r) sq += (z(r, c) - mean) * (z(r, c) - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq / static_cast<double>(z.rows - 1), 1.0, 1e-12);
  }
  for (std::size_t r = 0; r < z.rows; ++r) EXPECT_EQ(z(r, 2), 0.0);
}

TEST(ScatterText, HeaderAndRows) {
  const auto p = matrix({{0.5, -1.0}, {1.0 / 3.0, 2.0}, {1e-10, 12345678.9}});
  const auto text = scatter_text(p, {"correct", "negative_original", "negative_synthetic"});
  EXPECT_EQ(text,
            "x,y,label\n"
            "0.5,-1,correct\n"
            "0.333333333,2,negative_original\n"
            "1e-10,12345678.9,negative_synthetic\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(ExportScatter, RepeatedExportIsByteIdentical) {
  testing::TempDir dir("scatter");
  const auto p = matrix({{0.25, 0.75}, {-3.0, 4.5}, {7.0, 8.0}});
  const std::vector<std::string> labels{"correct", "negative_original", "negative_original"};
  export_scatter(p, labels, dir.path() / "a.csv");
  export_scatter(p, labels, dir.path() / "b.csv");
  EXPECT_EQ(read_file(dir.path() / "a.csv"), read_file(dir.path() / "b.csv"));
}

TEST(ExportScatter, RejectsBadLabelsAndCounts) {
  const auto p = matrix({{0, 0}, {1, 1}});
  EXPECT_EQ(error_code_of([&] { scatter_text(p, {"correct", "distractor"}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { scatter_text(p, {"correct"}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { scatter_text(matrix({{0, 0, 0}}), {"correct"}); }), ErrorCode::kInvalidArgument);
}

TEST(ParseFeatureTable, NumericAndLabelledRows) {
  const auto t = parse_feature_table("1,2,3\n\n 4.5 , -6 ,7e1\n");
  EXPECT_EQ(t.features.rows, 2u);
  EXPECT_EQ(t.features.cols, 3u);
  EXPECT_EQ(t.features.values, (std::vector<double>{1, 2, 3, 4.5, -6, 70}));
  EXPECT_TRUE(t.labels.empty());

  const auto l = parse_feature_table("1,2,correct\n3,4,negative_synthetic\n");
  EXPECT_EQ(l.features.cols, 2u);
  EXPECT_EQ(l.labels, (std::vector<std::string>{"correct", "negative_synthetic"}));
}

TEST(ParseFeatureTable, MalformedInput) {
  for (const char* text : {"1,2\n3\n", "1,2,correct\n3,4\n", "1,,2\n", "1,2\n3,x4,5\n"})
    EXPECT_EQ(error_code_of([&] { parse_feature_table(text); }), ErrorCode::kMalformedHeader) << text;
  EXPECT_EQ(parse_feature_table("").features.rows, 0u);
}

}  // namespace
}  // namespace rpmaug
