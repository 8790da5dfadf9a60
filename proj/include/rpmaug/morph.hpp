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
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "rpmaug/domain.hpp"
#include "rpmaug/error.hpp"
#include "rpmaug/random.hpp"

namespace rpmaug {

/**
 * Candidate answer mixup.
 *
 * Gray-level morphology on a white-background raster: OR is the pixel-wise
 * minimum (union of dark strokes) and AND the pixel-wise maximum
 * (intersection of dark strokes). Both pick one of the two input intensities
 * at every pixel, so they never introduce an intensity value absent from the
 * inputs. The vanilla baseline blends linearly and does.
 */

enum class MixKind { kOr, kAnd, kVanilla };

enum class CollisionPolicy {
  kKeepOriginal,  // restore the input negative when the mix equals the answer
  kKeepMixed,     // keep the duplicate and report it
};

inline constexpr std::string_view to_string(MixKind k) {
  switch (k) {
    case MixKind::kOr: return "or";
    case MixKind::kAnd: return "and";
    case MixKind::kVanilla: return "vanilla";
  }
  return "?";
}

inline constexpr std::string_view to_string(CollisionPolicy p) {
  return p == CollisionPolicy::kKeepOriginal ? "keep-original" : "keep-mixed";
}

inline constexpr Provenance provenance_of(MixKind k) {
  switch (k) {
    case MixKind::kOr: return Provenance::kCamOr;
    case MixKind::kAnd: return Provenance::kCamAnd;
    case MixKind::kVanilla: return Provenance::kVanilla;
  }
  return Provenance::kOriginal;
}

struct MixRecipe {
  MixKind kind = MixKind::kOr;
  double alpha = 1.0;  // Beta(alpha, alpha) shape; vanilla only
  CollisionPolicy collision = CollisionPolicy::kKeepOriginal;
  std::uint64_t seed = 0;
};

struct MixedCandidate {
  Panel panel;
  double soft_label = 0.0;  // correctness weight in [0, 1]
};

/// An augmented sample plus the per-candidate bookkeeping of the mix.
struct MixOutcome {
  RpmSample sample;
  std::array<double, kCandidateCount> soft_labels{};
  std::vector<std::size_t> degenerate;  // duplicates of the answer kept in place
  std::vector<std::size_t> restored;    // duplicates replaced by the input negative
};

/// Raised when an operation receives a sample that fails validation.
class InvalidSampleError : public Error {
 public:
  explicit InvalidSampleError(ValidationReport report)
      : Error(ErrorCode::kInvalidArgument, describe(report)), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  static std::string describe(const ValidationReport& report) {
    std::string s = "invalid sample:";
    for (const auto& v : report) s += " " + std::string(to_string(v.code));
    return s;
  }

  ValidationReport report_;
};

namespace detail {

template <typename Op>
Panel pixelwise(const Panel& a, const Panel& b, Op op, const char* name) {
  require(a.same_shape(b), std::string(name) + ": panel dimensions differ");
  std::vector<std::uint8_t> out(a.size());
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::transform(pa.begin(), pa.end(), pb.begin(), out.begin(), op);
  return Panel(a.width(), a.height(), std::move(out));
}

inline void require_valid(const RpmSample& s) {
  auto report = validate_sample(s);
  if (!report.empty()) throw InvalidSampleError(std::move(report));
}

}  // namespace detail

/// Pixel-wise minimum.
inline Panel gray_or(const Panel& a, const Panel& b) {
  return detail::pixelwise(
      a, b, [](std::uint8_t x, std::uint8_t y) { return std::min(x, y); }, "gray_or");
}

/// Pixel-wise maximum.
inline Panel gray_and(const Panel& a, const Panel& b) {
  return detail::pixelwise(
      a, b, [](std::uint8_t x, std::uint8_t y) { return std::max(x, y); }, "gray_and");
}

/// round(lambda * a + (1 - lambda) * b), half away from zero.
inline Panel vanilla_blend(const Panel& a, const Panel& b, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "vanilla_blend: lambda outside [0, 1]");
  const double mu = 1.0 - lambda;
  return detail::pixelwise(
      a, b,
      [lambda, mu](std::uint8_t x, std::uint8_t y) {
        return round_to_u8(lambda * static_cast<double>(x) + mu * static_cast<double>(y));
      },
      "vanilla_blend");
}

/// One draw of lambda ~ Beta(alpha, alpha).
inline double sample_lambda(double alpha, Rng& rng) {
  require(alpha > 0.0 && std::isfinite(alpha), "sample_lambda: alpha must be positive");
  return std::clamp(rng.beta(alpha, alpha), 0.0, 1.0);
}

inline bool is_degenerate(const Panel& mixed, const Panel& correct) {
  require(mixed.same_shape(correct), "is_degenerate: panel dimensions differ");
  return mixed == correct;
}

/**
 * Replaces every negative a_i with OR(a_i, a_c) or AND(a_i, a_c). Context
 * panels, the answer and the target index are untouched.
 */
inline MixOutcome cam_mix_sample(const RpmSample& s, MixKind kind,
                                 CollisionPolicy policy = CollisionPolicy::kKeepOriginal) {
  require(kind == MixKind::kOr || kind == MixKind::kAnd,
          "cam_mix_sample: kind must be OR or AND");
  detail::require_valid(s);

  MixOutcome out{s, {}, {}, {}};
  out.sample.provenance = provenance_of(kind);
  const auto target = static_cast<std::size_t>(s.target);
  const Panel& correct = s.correct();
  for (std::size_t i = 0; i < kCandidateCount; ++i) {
    if (i == target) {
      out.soft_labels[i] = 1.0;
      continue;
    }
    Panel mixed = kind == MixKind::kOr ? gray_or(s.candidates[i], correct)
                                       : gray_and(s.candidates[i], correct);
    if (is_degenerate(mixed, correct)) {
      if (policy == CollisionPolicy::kKeepOriginal) {
        out.restored.push_back(i);
        continue;
      }
      out.degenerate.push_back(i);
    }
    out.sample.candidates[i] = std::move(mixed);
  }
  return out;
}

/**
 * Vanilla mixup baseline: every negative becomes blend(a_c, a_i, lambda_i)
 * with soft label lambda_i. `draw` supplies each lambda in negative order,
 * which lets tests pin the mixing weights.
 */
template <typename LambdaSource>
  requires std::invocable<LambdaSource&> &&
           std::convertible_to<std::invoke_result_t<LambdaSource&>, double>
MixOutcome vanilla_mix_sample(const RpmSample& s, LambdaSource&& draw,
                              CollisionPolicy policy = CollisionPolicy::kKeepMixed) {
  detail::require_valid(s);

  MixOutcome out{s, {}, {}, {}};
  out.sample.provenance = Provenance::kVanilla;
  const auto target = static_cast<std::size_t>(s.target);
  const Panel& correct = s.correct();
  for (std::size_t i = 0; i < kCandidateCount; ++i) {
    if (i == target) {
      out.soft_labels[i] = 1.0;
      continue;
    }
    const double lambda = static_cast<double>(draw());
    Panel mixed = vanilla_blend(correct, s.candidates[i], lambda);
    if (is_degenerate(mixed, correct)) {
      if (policy == CollisionPolicy::kKeepOriginal) {
        out.restored.push_back(i);
        out.soft_labels[i] = 0.0;
        continue;
      }
      out.degenerate.push_back(i);
    }
    out.sample.candidates[i] = std::move(mixed);
    out.soft_labels[i] = lambda;
  }
  return out;
}

inline MixOutcome vanilla_mix_sample(const RpmSample& s, double alpha, Rng& rng,
                                     CollisionPolicy policy = CollisionPolicy::kKeepMixed) {
  require(alpha > 0.0 && std::isfinite(alpha), "vanilla_mix_sample: alpha must be positive");
  return vanilla_mix_sample(s, [&] { return sample_lambda(alpha, rng); }, policy);
}

inline std::vector<MixedCandidate> labelled_candidates(const MixOutcome& m) {
  std::vector<MixedCandidate> out;
  out.reserve(m.sample.candidates.size());
  for (std::size_t i = 0; i < m.sample.candidates.size(); ++i)
    out.push_back({m.sample.candidates[i], m.soft_labels[i]});
  return out;
}

/// Applies a recipe to sample number `ordinal` of a batch.
inline MixOutcome augment_sample(const RpmSample& s, const MixRecipe& recipe,
                                 std::uint64_t ordinal) {
  if (recipe.kind == MixKind::kVanilla) {
    Rng rng = Rng::substream(recipe.seed, ordinal);
    return vanilla_mix_sample(s, recipe.alpha, rng, recipe.collision);
  }
  return cam_mix_sample(s, recipe.kind, recipe.collision);
}

}  // namespace rpmaug
