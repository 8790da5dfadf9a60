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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rpmaug/error.hpp"

namespace rpmaug {

inline constexpr std::size_t kContextCount = 8;
inline constexpr std::size_t kCandidateCount = 8;

/// A single gray-scale cell, row-major, 0 = black and 255 = white.
class Panel {
 public:
  Panel(std::size_t width, std::size_t height, std::uint8_t fill = 255)
      : width_(width), height_(height), pixels_(width * height, fill) {
    require(width > 0 && height > 0, "panel dimensions must be positive");
  }

  Panel(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    require(width > 0 && height > 0, "panel dimensions must be positive");
    require(pixels_.size() == width * height,
            "panel pixel count must equal width * height");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  bool same_shape(const Panel& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Panel&, const Panel&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> pixels_;
};

enum class PuzzleConfiguration {
  kCenter,
  kGrid2x2,
  kGrid3x3,
  kLeftRight,
  kUpDown,
  kOutInCenter,
  kOutInGrid,
};

inline constexpr std::array<PuzzleConfiguration, 7> kAllConfigurations = {
    PuzzleConfiguration::kCenter,    PuzzleConfiguration::kGrid2x2,
    PuzzleConfiguration::kGrid3x3,   PuzzleConfiguration::kLeftRight,
    PuzzleConfiguration::kUpDown,    PuzzleConfiguration::kOutInCenter,
    PuzzleConfiguration::kOutInGrid,
};

struct ConfigurationNames {
  PuzzleConfiguration config;
  std::string_view flag;       // command-line spelling
  std::string_view directory;  // dataset directory name of the public releases
};

inline constexpr std::array<ConfigurationNames, 7> kConfigurationNames = {{
    {PuzzleConfiguration::kCenter, "center", "center_single"},
    {PuzzleConfiguration::kGrid2x2, "grid2", "distribute_four"},
    {PuzzleConfiguration::kGrid3x3, "grid3", "distribute_nine"},
    {PuzzleConfiguration::kLeftRight, "left-right",
     "left_center_single_right_center_single"},
    {PuzzleConfiguration::kUpDown, "up-down", "up_center_single_down_center_single"},
    {PuzzleConfiguration::kOutInCenter, "out-in-center",
     "in_center_single_out_center_single"},
    {PuzzleConfiguration::kOutInGrid, "out-in-grid",
     "in_distribute_four_out_center_single"},
}};

inline std::string_view config_flag(PuzzleConfiguration c) {
  for (const auto& n : kConfigurationNames)
    if (n.config == c) return n.flag;
  return "?";
}

inline std::string_view config_directory(PuzzleConfiguration c) {
  for (const auto& n : kConfigurationNames)
    if (n.config == c) return n.directory;
  return "?";
}

inline std::optional<PuzzleConfiguration> config_from_flag(std::string_view s) {
  for (const auto& n : kConfigurationNames)
    if (n.flag == s) return n.config;
  return std::nullopt;
}

inline std::optional<PuzzleConfiguration> config_from_directory(std::string_view s) {
  for (const auto& n : kConfigurationNames)
    if (n.directory == s) return n.config;
  return std::nullopt;
}

enum class Provenance { kOriginal, kCamOr, kCamAnd, kVanilla };

inline constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kCamOr: return "cam_or";
    case Provenance::kCamAnd: return "cam_and";
    case Provenance::kVanilla: return "vanilla";
  }
  return "?";
}

inline std::optional<Provenance> provenance_from_string(std::string_view s) {
  for (auto p : {Provenance::kOriginal, Provenance::kCamOr, Provenance::kCamAnd,
                 Provenance::kVanilla})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

enum class Split { kTrain, kVal, kTest };

inline constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

inline std::optional<Split> split_from_string(std::string_view s) {
  for (auto sp : {Split::kTrain, Split::kVal, Split::kTest})
    if (to_string(sp) == s) return sp;
  return std::nullopt;
}

/// One puzzle: the 3x3 matrix minus its last cell, and eight candidates.
struct RpmSample {
  std::vector<Panel> context;
  std::vector<Panel> candidates;
  int target = 0;
  PuzzleConfiguration config = PuzzleConfiguration::kCenter;
  Provenance provenance = Provenance::kOriginal;

  const Panel& correct() const { return candidates.at(static_cast<std::size_t>(target)); }

  friend bool operator==(const RpmSample&, const RpmSample&) = default;
};

struct Dataset {
  std::vector<RpmSample> samples;
  Split split = Split::kTrain;
};

enum class ViolationCode {
  kContextCount,
  kCandidateCount,
  kTargetRange,
  kDimensionMismatch,
  kDuplicateCorrect,
};

inline constexpr std::string_view to_string(ViolationCode c) {
  switch (c) {
    case ViolationCode::kContextCount: return "CONTEXT_COUNT";
    case ViolationCode::kCandidateCount: return "CANDIDATE_COUNT";
    case ViolationCode::kTargetRange: return "TARGET_RANGE";
    case ViolationCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ViolationCode::kDuplicateCorrect: return "DUPLICATE_CORRECT";
  }
  return "?";
}

struct Violation {
  ViolationCode code;
  std::string detail;
};

using ValidationReport = std::vector<Violation>;

inline bool contains(const ValidationReport& report, ViolationCode code) {
  return std::any_of(report.begin(), report.end(),
                     [code](const Violation& v) { return v.code == code; });
}

/// Lists every violated sample invariant. An empty report means valid.
inline ValidationReport validate_sample(const RpmSample& s) {
  ValidationReport report;
  if (s.context.size() != kContextCount)
    report.push_back({ViolationCode::kContextCount,
                      "expected 8 context panels, found " + std::to_string(s.context.size())});
  if (s.candidates.size() != kCandidateCount)
    report.push_back({ViolationCode::kCandidateCount,
                      "expected 8 candidate panels, found " +
                          std::to_string(s.candidates.size())});

  const bool target_ok =
      s.target >= 0 && static_cast<std::size_t>(s.target) < kCandidateCount;
  if (!target_ok)
    report.push_back({ViolationCode::kTargetRange,
                      "target " + std::to_string(s.target) + " outside [0, 8)"});

  const Panel* reference = !s.context.empty()      ? &s.context.front()
                           : !s.candidates.empty() ? &s.candidates.front()
                                                   : nullptr;
  if (reference != nullptr) {
    std::size_t mismatched = 0;
    for (const auto* group : {&s.context, &s.candidates})
      for (const auto& p : *group)
        if (!p.same_shape(*reference)) ++mismatched;
    if (mismatched > 0)
      report.push_back({ViolationCode::kDimensionMismatch,
                        std::to_string(mismatched) + " panel(s) differ from " +
                            std::to_string(reference->width()) + "x" +
                            std::to_string(reference->height())});
  }

  if (target_ok && static_cast<std::size_t>(s.target) < s.candidates.size()) {
    const Panel& correct = s.correct();
    for (std::size_t i = 0; i < s.candidates.size(); ++i) {
      if (i == static_cast<std::size_t>(s.target)) continue;
      if (s.candidates[i] == correct)
        report.push_back({ViolationCode::kDuplicateCorrect,
                          "candidate " + std::to_string(i) +
                              " is byte-identical to the correct answer"});
    }
  }
  return report;
}

/// Rounds half away from zero and saturates to the 8-bit range.
inline std::uint8_t round_to_u8(double v) {
  const double r = std::round(v);
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

namespace detail {

struct BilinearTap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

// Half-pixel-center source coordinate for each destination index.
inline std::vector<BilinearTap> bilinear_taps(std::size_t src, std::size_t dst) {
  std::vector<BilinearTap> taps(dst);
  const double last = static_cast<double>(src - 1);
  for (std::size_t i = 0; i < dst; ++i) {
    double c = (static_cast<double>(i) + 0.5) * static_cast<double>(src) / static_cast<double>(dst) - 0.5;
    c = std::clamp(c, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(c));
    taps[i] = {lo, std::min(lo + 1, src - 1), c - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace detail

/**
 * Bilinear resize with half-pixel-center alignment (edge samples clamped).
 * Output intensities are rounded half away from zero. A resize to the source
 * dimensions returns a byte copy.
 */
inline Panel resize_panel(const Panel& p, std::size_t target_w, std::size_t target_h) {
  require(target_w > 0 && target_h > 0, "resize target dimensions must be positive");
  if (target_w == p.width() && target_h == p.height()) return p;

  const auto xs = detail::bilinear_taps(p.width(), target_w);
  const auto ys = detail::bilinear_taps(p.height(), target_h);
  std::vector<std::uint8_t> out(target_w * target_h);
  for (std::size_t y = 0; y < target_h; ++y) {
    const auto& ty = ys[y];
    for (std::size_t x = 0; x < target_w; ++x) {
      const auto& tx = xs[x];
      const double p00 = p.at(tx.lo, ty.lo);
      const double p01 = p.at(tx.hi, ty.lo);
      const double p10 = p.at(tx.lo, ty.hi);
      const double p11 = p.at(tx.hi, ty.hi);
      const double top = (1.0 - tx.frac) * p00 + tx.frac * p01;
      const double bottom = (1.0 - tx.frac) * p10 + tx.frac * p11;
      out[y * target_w + x] = round_to_u8((1.0 - ty.frac) * top + ty.frac * bottom);
    }
  }
  return Panel(target_w, target_h, std::move(out));
}

/// Resizes every panel of a sample, keeping labels and tags.
inline RpmSample resize_sample(const RpmSample& s, std::size_t target_w, std::size_t target_h) {
  RpmSample out = s;
  for (auto* group : {&out.context, &out.candidates})
    for (auto& p : *group) p = resize_panel(p, target_w, target_h);
  return out;
}

}  // namespace rpmaug
