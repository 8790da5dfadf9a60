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
#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rpmaug/archive.hpp"
#include "rpmaug/domain.hpp"
#include "rpmaug/error.hpp"

namespace rpmaug {

// ---------------------------------------------------------------------------
// Closure of augmented datasets

struct ClosureReport {
  std::size_t samples_checked = 0;
  std::size_t closure_violations = 0;  // mixed negatives with an out-of-pair pixel
  std::size_t degenerate_candidates = 0;
  std::vector<std::uint8_t> value_set_before;
  std::vector<std::uint8_t> value_set_after;

  bool value_set_closed() const {
    return std::includes(value_set_before.begin(), value_set_before.end(),
                         value_set_after.begin(), value_set_after.end());
  }
};

namespace detail {

inline void collect_values(const RpmSample& s, std::bitset<256>& seen) {
  std::array<bool, 256> hit{};
  for (const auto* group : {&s.context, &s.candidates})
    for (const auto& p : *group)
      for (auto v : p.pixels()) hit[v] = true;
  for (std::size_t v = 0; v < 256; ++v)
    if (hit[v]) seen.set(v);
}

inline std::vector<std::uint8_t> to_sorted(const std::bitset<256>& seen) {
  std::vector<std::uint8_t> out;
  for (std::size_t v = 0; v < 256; ++v)
    if (seen.test(v)) out.push_back(static_cast<std::uint8_t>(v));
  return out;
}

}  // namespace detail

/// Per-sample closure counts. Samples must be aligned (augmented derives from original).
inline ClosureReport check_closure_sample(const RpmSample& original, const RpmSample& augmented) {
  require(original.candidates.size() == kCandidateCount &&
              augmented.candidates.size() == kCandidateCount,
          "check_closure: samples must carry 8 candidates");
  require(original.target == augmented.target, "check_closure: target indices differ");
  require(original.target >= 0 && original.target < static_cast<int>(kCandidateCount),
          "check_closure: target out of range");
  ClosureReport r;
  r.samples_checked = 1;
  const auto target = static_cast<std::size_t>(original.target);
  const Panel& correct = original.correct();
  for (std::size_t i = 0; i < kCandidateCount; ++i) {
    if (i == target) continue;
    const Panel& before = original.candidates[i];
    const Panel& after = augmented.candidates[i];
    require(before.same_shape(after) && before.same_shape(correct),
            "check_closure: panel dimensions differ");
    const auto a = before.pixels();
    const auto c = correct.pixels();
    const auto m = after.pixels();
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] != a[k] && m[k] != c[k]) {
        ++r.closure_violations;
        break;
      }
    }
    if (after == augmented.correct()) ++r.degenerate_candidates;
  }
  return r;
}

inline ClosureReport check_closure(const Dataset& original, const Dataset& augmented) {
  require(original.samples.size() == augmented.samples.size(),
          "check_closure: datasets have different sample counts");
  ClosureReport total;
  std::bitset<256> before, after;
  for (std::size_t i = 0; i < original.samples.size(); ++i) {
    const auto r = check_closure_sample(original.samples[i], augmented.samples[i]);
    total.samples_checked += r.samples_checked;
    total.closure_violations += r.closure_violations;
    total.degenerate_candidates += r.degenerate_candidates;
    detail::collect_values(original.samples[i], before);
    detail::collect_values(augmented.samples[i], after);
  }
  total.value_set_before = detail::to_sorted(before);
  total.value_set_after = detail::to_sorted(after);
  return total;
}

// ---------------------------------------------------------------------------
// Dataset statistics

inline constexpr std::array<Provenance, 4> kProvenances = {Provenance::kOriginal, Provenance::kCamOr,
                                                           Provenance::kCamAnd, Provenance::kVanilla};

struct DatasetStats {
  std::size_t total = 0;
  std::array<std::size_t, kAllConfigurations.size()> per_config{};
  std::array<std::size_t, 3> per_split{};
  std::array<std::size_t, kCandidateCount> target_histogram{};
  std::array<std::size_t, 4> provenance_histogram{};
  std::array<std::array<std::size_t, 4>, 3> split_provenance{};

  void add(const RpmSample& s, Split split) {
    ++total;
    ++per_config[static_cast<std::size_t>(s.config)];
    ++per_split[static_cast<std::size_t>(split)];
    if (s.target >= 0 && s.target < static_cast<int>(kCandidateCount))
      ++target_histogram[static_cast<std::size_t>(s.target)];
    ++provenance_histogram[static_cast<std::size_t>(s.provenance)];
    ++split_provenance[static_cast<std::size_t>(split)][static_cast<std::size_t>(s.provenance)];
  }

  std::size_t split_count(Split s) const { return per_split[static_cast<std::size_t>(s)]; }
  std::size_t provenance_count(Provenance p) const {
    return provenance_histogram[static_cast<std::size_t>(p)];
  }
  std::size_t provenance_count(Split s, Provenance p) const {
    return split_provenance[static_cast<std::size_t>(s)][static_cast<std::size_t>(p)];
  }
  std::size_t config_count(PuzzleConfiguration c) const {
    return per_config[static_cast<std::size_t>(c)];
  }

  /// Field order is fixed so text and JSON output are stable.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    auto& configs = j["configurations"] = nlohmann::ordered_json::object();
    for (auto c : kAllConfigurations) configs[std::string(config_flag(c))] = config_count(c);
    auto& splits = j["splits"] = nlohmann::ordered_json::object();
    for (auto s : {Split::kTrain, Split::kVal, Split::kTest}) splits[std::string(to_string(s))] = split_count(s);
    j["target_histogram"] = target_histogram;
    auto& prov = j["provenance"] = nlohmann::ordered_json::object();
    for (auto p : kProvenances) prov[std::string(to_string(p))] = provenance_count(p);
    auto& by_split = j["split_provenance"] = nlohmann::ordered_json::object();
    for (auto s : {Split::kTrain, Split::kVal, Split::kTest}) {
      auto& h = by_split[std::string(to_string(s))] = nlohmann::ordered_json::object();
      for (auto p : kProvenances) h[std::string(to_string(p))] = provenance_count(s, p);
    }
    return j;
  }
};

inline DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats st;
  for (const auto& s : d.samples) st.add(s, d.split);
  return st;
}

// ---------------------------------------------------------------------------
// Principal component projection

/// Dense row-major real matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c, std::vector<double> v = {})
      : rows(r), cols(c), values(v.empty() ? std::vector<double>(r * c, 0.0) : std::move(v)) {
    require(values.size() == rows * cols, "feature matrix size mismatch");
  }

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

struct ProjectionModel {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // orthonormal rows, length d
  std::vector<double> explained_variance;       // non-increasing
};

struct Eigen {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
};

/**
 * Cyclic Jacobi eigensolver for a symmetric matrix. Sweeps until the
 * off-diagonal Frobenius norm drops below `tol` times the matrix norm.
 */
inline Eigen jacobi_eigen(FeatureMatrix a, double tol = 1e-12, int max_sweeps = 100) {
  require(a.rows == a.cols, "jacobi_eigen: matrix must be square");
  const std::size_t n = a.rows;
  FeatureMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double norm = 0.0;
  for (double x : a.values) norm += x * x;
  norm = std::sqrt(norm);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * norm) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  Eigen out;
  for (auto k : order) {
    out.values.push_back(a(k, k));
    std::vector<double> vec(n);
    for (std::size_t i = 0; i < n; ++i) vec[i] = v(i, k);
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

/// Flips `v` so its largest-magnitude coordinate (lowest index on ties) is positive.
inline void canonical_sign(std::vector<double>& v) {
  constexpr double kTie = 1e-12;
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best]) + kTie) best = i;
  if (v[best] < 0.0)
    for (auto& x : v) x = -x;
}

inline FeatureMatrix covariance(const FeatureMatrix& x, const std::vector<double>& mean) {
  FeatureMatrix cov(x.cols, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t i = 0; i < x.cols; ++i) {
      const double di = x(r, i) - mean[i];
      for (std::size_t j = i; j < x.cols; ++j) cov(i, j) += di * (x(r, j) - mean[j]);
    }
  const double denom = static_cast<double>(x.rows - 1);
  for (std::size_t i = 0; i < x.cols; ++i)
    for (std::size_t j = i; j < x.cols; ++j) cov(j, i) = cov(i, j) = cov(i, j) / denom;
  return cov;
}

inline ProjectionModel pca_fit(const FeatureMatrix& x, std::size_t dims = 2) {
  require(x.rows >= 2, "pca_fit: at least two rows are required");
  require(dims >= 1 && x.cols >= dims, "pca_fit: feature dimension smaller than output dims");
  require(std::all_of(x.values.begin(), x.values.end(), [](double v) { return std::isfinite(v); }),
          "pca_fit: features must be finite");

  ProjectionModel m;
  m.mean.assign(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) m.mean[c] += x(r, c);
  for (auto& v : m.mean) v /= static_cast<double>(x.rows);

  const FeatureMatrix cov = covariance(x, m.mean);
  if (std::all_of(cov.values.begin(), cov.values.end(), [](double v) { return v == 0.0; }))
    fail(ErrorCode::kDegenerateVariance, "pca_fit: all features are constant");

  auto eig = jacobi_eigen(cov);
  for (std::size_t k = 0; k < dims; ++k) {
    canonical_sign(eig.vectors[k]);
    m.components.push_back(std::move(eig.vectors[k]));
    m.explained_variance.push_back(std::max(0.0, eig.values[k]));
  }
  return m;
}

inline FeatureMatrix pca_project(const ProjectionModel& m, const FeatureMatrix& x) {
  require(x.cols == m.mean.size(), "pca_project: feature dimension does not match the model");
  FeatureMatrix out(x.rows, m.components.size());
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t k = 0; k < m.components.size(); ++k) {
      double acc = 0.0;
      for (std::size_t c = 0; c < x.cols; ++c) acc += (x(r, c) - m.mean[c]) * m.components[k][c];
      out(r, k) = acc;
    }
  return out;
}

/// Per-column z-score (sample standard deviation). Constant columns are only centered.
inline FeatureMatrix standardize(const FeatureMatrix& x) {
  require(x.rows >= 2, "standardize: at least two rows are required");
  FeatureMatrix out = x;
  for (std::size_t c = 0; c < x.cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) mean += x(r, c);
    mean /= static_cast<double>(x.rows);
    double var = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) var += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(x.rows - 1));
    for (std::size_t r = 0; r < x.rows; ++r)
      out(r, c) = sd > 0.0 ? (x(r, c) - mean) / sd : x(r, c) - mean;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature and scatter text files

inline constexpr std::array<std::string_view, 3> kScatterLabels = {
    "correct", "negative_original", "negative_synthetic"};

inline bool is_scatter_label(std::string_view s) {
  return std::find(kScatterLabels.begin(), kScatterLabels.end(), s) != kScatterLabels.end();
}

struct FeatureTable {
  FeatureMatrix features;
  std::vector<std::string> labels;  // empty when the file carries none
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/**
 * Comma-separated real matrix, one row per line. A trailing non-numeric field
 * on every row is read as that row's scatter label. Blank lines are skipped.
 */
inline FeatureTable parse_feature_table(std::string_view text) {
  FeatureTable t;
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  bool labelled = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const bool has_label = !detail::parse_real(fields.back()).has_value();
    if (rows == 0) labelled = has_label;
    if (has_label != labelled)
      fail(ErrorCode::kMalformedHeader, "line " + std::to_string(line_no) + ": inconsistent label column");
    if (has_label) {
      t.labels.emplace_back(detail::trim(fields.back()));
      fields.pop_back();
    }
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols || cols == 0)
      fail(ErrorCode::kMalformedHeader, "line " + std::to_string(line_no) + ": expected " +
                                            std::to_string(cols) + " numeric fields");
    for (auto f : fields) {
      const auto v = detail::parse_real(f);
      if (!v) fail(ErrorCode::kMalformedHeader, "line " + std::to_string(line_no) + ": bad number");
      values.push_back(*v);
    }
    ++rows;
  }
  t.features = FeatureMatrix(rows, cols, rows * cols == 0 ? std::vector<double>{} : std::move(values));
  return t;
}

inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// "x,y,label" rows with 9 significant digits, in input order.
inline std::string scatter_text(const FeatureMatrix& projected, const std::vector<std::string>& labels) {
  require(projected.cols == 2, "export_scatter: projection must have two columns");
  require(labels.size() == projected.rows, "export_scatter: label count does not match row count");
  for (const auto& l : labels) require(is_scatter_label(l), "export_scatter: unknown label '" + l + "'");
  std::string out = "x,y,label\n";
  for (std::size_t r = 0; r < projected.rows; ++r)
    out += format_g9(projected(r, 0)) + "," + format_g9(projected(r, 1)) + "," + labels[r] + "\n";
  return out;
}

inline void export_scatter(const FeatureMatrix& projected, const std::vector<std::string>& labels,
                           const std::filesystem::path& path) {
  const std::string text = scatter_text(projected, labels);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace rpmaug
