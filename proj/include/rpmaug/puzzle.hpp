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
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rpmaug/archive.hpp"
#include "rpmaug/domain.hpp"
#include "rpmaug/error.hpp"
#include "rpmaug/random.hpp"

namespace rpmaug::puzzle {

/**
 * Desk-scale generator of 3x3 attribute/rule puzzles.
 *
 * Every panel is made of one or two components. A component carries a shape
 * type, a size, a fill color and, for grid layouts, an occupancy mask over the
 * grid slots (Number is the mask population, Position the mask itself; they
 * form one attribute, "layout"). Each (component, attribute) pair is governed
 * by one row-wise rule. Rendering is hard-edged so every panel uses only
 * intensities from {0, 255} and the fill palette.
 */

enum class Attribute { kLayout, kType, kSize, kColor };

inline constexpr std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::kLayout: return "layout";
    case Attribute::kType: return "type";
    case Attribute::kSize: return "size";
    case Attribute::kColor: return "color";
  }
  return "?";
}

enum class Shape { kTriangle, kSquare, kPentagon, kHexagon, kCircle };

inline constexpr int kTypeCount = 5;
inline constexpr int kSizeCount = 5;
inline constexpr int kColorCount = 6;
/// Fill intensities by color index; index 0 is an unfilled (white) shape.
inline constexpr std::array<std::uint8_t, kColorCount> kPalette = {255, 224, 192, 160, 128, 96};
inline constexpr std::uint8_t kBackground = 255;
inline constexpr std::uint8_t kOutline = 0;
/// Entity radius as a fraction of half its cell, by size index.
inline constexpr std::array<double, kSizeCount> kSizeScale = {0.4, 0.5, 0.6, 0.7, 0.8};
inline constexpr int kMaxRetries = 64;

enum class Layout { kSingle, kGrid2x2, kGrid3x3 };

inline constexpr int slot_count(Layout l) {
  return l == Layout::kGrid2x2 ? 4 : l == Layout::kGrid3x3 ? 9 : 1;
}

/// Symbolic description of one component of a panel.
struct AttributeVector {
  int type_idx = 0;
  int size_idx = 0;
  int color_idx = 0;
  int number_idx = 0;              // entity count - 1; grids only
  std::uint16_t position_mask = 0;  // occupied slots; grids only

  friend bool operator==(const AttributeVector&, const AttributeVector&) = default;
};

/// All components of one panel.
struct PanelSymbol {
  std::vector<AttributeVector> components;
  friend bool operator==(const PanelSymbol&, const PanelSymbol&) = default;
};

/// Fractional rectangle inside the panel.
struct Region {
  double x0, y0, x1, y1;
};

struct ComponentLayout {
  Layout layout;
  Region region;
};

inline std::vector<ComponentLayout> component_layouts(PuzzleConfiguration c) {
  constexpr Region kFull{0.0, 0.0, 1.0, 1.0};
  switch (c) {
    case PuzzleConfiguration::kCenter:
      return {{Layout::kSingle, kFull}};
    case PuzzleConfiguration::kGrid2x2:
      return {{Layout::kGrid2x2, kFull}};
    case PuzzleConfiguration::kGrid3x3:
      return {{Layout::kGrid3x3, kFull}};
    case PuzzleConfiguration::kLeftRight:
      return {{Layout::kSingle, {0.0, 0.0, 0.5, 1.0}}, {Layout::kSingle, {0.5, 0.0, 1.0, 1.0}}};
    case PuzzleConfiguration::kUpDown:
      return {{Layout::kSingle, {0.0, 0.0, 1.0, 0.5}}, {Layout::kSingle, {0.0, 0.5, 1.0, 1.0}}};
    case PuzzleConfiguration::kOutInCenter:
      return {{Layout::kSingle, kFull}, {Layout::kSingle, {0.33, 0.33, 0.67, 0.67}}};
    case PuzzleConfiguration::kOutInGrid:
      return {{Layout::kSingle, kFull}, {Layout::kGrid2x2, {0.27, 0.27, 0.73, 0.73}}};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Attribute slots and value domains

/// A governed (component, attribute) pair.
struct Slot {
  std::size_t component;
  Attribute attribute;
  friend bool operator==(const Slot&, const Slot&) = default;
};

inline std::vector<Slot> governed_slots(PuzzleConfiguration c) {
  std::vector<Slot> slots;
  const auto layouts = component_layouts(c);
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    if (layouts[i].layout != Layout::kSingle) slots.push_back({i, Attribute::kLayout});
    for (auto a : {Attribute::kType, Attribute::kSize, Attribute::kColor}) slots.push_back({i, a});
  }
  return slots;
}

/// Closed integer range of rule values. Layout rules act on the entity count.
struct ValueDomain {
  int lo;
  int hi;
  bool contains(int v) const { return v >= lo && v <= hi; }
  int size() const { return hi - lo + 1; }
};

inline ValueDomain value_domain(Attribute a, Layout layout) {
  switch (a) {
    case Attribute::kLayout: return {1, slot_count(layout)};
    case Attribute::kType: return {0, kTypeCount - 1};
    case Attribute::kSize: return {0, kSizeCount - 1};
    case Attribute::kColor: return {0, kColorCount - 1};
  }
  return {0, 0};
}

/// Rule value of an attribute (entity count for layout).
inline int rule_value(const AttributeVector& av, Attribute a) {
  switch (a) {
    case Attribute::kLayout: return av.number_idx + 1;
    case Attribute::kType: return av.type_idx;
    case Attribute::kSize: return av.size_idx;
    case Attribute::kColor: return av.color_idx;
  }
  return 0;
}

/// Value used for attribute comparisons (the full mask for layout).
inline int attribute_key(const AttributeVector& av, Attribute a) {
  return a == Attribute::kLayout ? static_cast<int>(av.position_mask) : rule_value(av, a);
}

/// Number of governed attributes in which two panels differ.
inline int attribute_distance(const PanelSymbol& a, const PanelSymbol& b,
                              const std::vector<Slot>& slots) {
  int d = 0;
  for (const auto& s : slots)
    if (attribute_key(a.components.at(s.component), s.attribute) !=
        attribute_key(b.components.at(s.component), s.attribute))
      ++d;
  return d;
}

// ---------------------------------------------------------------------------
// Rules

enum class RuleKind { kConstant, kProgressive, kArithmetic, kDistributeThree };

inline constexpr std::string_view to_string(RuleKind k) {
  switch (k) {
    case RuleKind::kConstant: return "constant";
    case RuleKind::kProgressive: return "progressive";
    case RuleKind::kArithmetic: return "arithmetic";
    case RuleKind::kDistributeThree: return "distribute_three";
  }
  return "?";
}

struct Rule {
  RuleKind kind = RuleKind::kConstant;
  int step = 0;               // progressive: one of -2, -1, +1, +2
  int sign = 1;               // arithmetic: +1 or -1
  std::array<int, 3> triple{};  // distribute-three values
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct GovernedRule {
  Slot slot;
  Rule rule;
  friend bool operator==(const GovernedRule&, const GovernedRule&) = default;
};

struct RuleSpec {
  std::vector<GovernedRule> rules;
  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

inline std::vector<RuleKind> admissible_rules(Attribute a) {
  if (a == Attribute::kType)
    return {RuleKind::kConstant, RuleKind::kProgressive, RuleKind::kDistributeThree};
  return {RuleKind::kConstant, RuleKind::kProgressive, RuleKind::kArithmetic,
          RuleKind::kDistributeThree};
}

inline Rule sample_rule(Attribute a, ValueDomain d, Rng& rng) {
  const auto kinds = admissible_rules(a);
  Rule r;
  r.kind = kinds[rng.below(kinds.size())];
  switch (r.kind) {
    case RuleKind::kConstant:
      break;
    case RuleKind::kProgressive: {
      std::vector<int> steps;
      for (int s : {-2, -1, 1, 2})
        if (2 * std::abs(s) <= d.hi - d.lo) steps.push_back(s);
      r.step = steps[rng.below(steps.size())];
      break;
    }
    case RuleKind::kArithmetic:
      r.sign = rng.below(2) == 0 ? 1 : -1;
      break;
    case RuleKind::kDistributeThree: {
      std::vector<int> values;
      for (int v = d.lo; v <= d.hi; ++v) values.push_back(v);
      for (std::size_t i = 0; i < 3; ++i) {
        const auto j = i + rng.below(values.size() - i);
        std::swap(values[i], values[j]);
        r.triple[i] = values[i];
      }
      break;
    }
  }
  return r;
}

/// One rule per governed attribute, drawn uniformly from the admissible set.
inline RuleSpec sample_rule_set(PuzzleConfiguration config, Rng& rng) {
  RuleSpec spec;
  const auto layouts = component_layouts(config);
  for (const auto& slot : governed_slots(config)) {
    const auto d = value_domain(slot.attribute, layouts[slot.component].layout);
    spec.rules.push_back({slot, sample_rule(slot.attribute, d, rng)});
  }
  return spec;
}

/**
 * Completes a row from its leading value(s).
 *
 *   constant          v, v, v
 *   progressive       v, v + step, v + 2 step
 *   arithmetic        a, b, a + sign * b
 *   distribute-three  rotation `row` of the rule's triple (leading values ignored)
 *
 * Throws kDomainOverflow if any value leaves the domain.
 */
inline std::array<int, 3> apply_rule(const Rule& rule, int first, int second, ValueDomain d,
                                     int row = 0) {
  std::array<int, 3> out{};
  switch (rule.kind) {
    case RuleKind::kConstant:
      out = {first, first, first};
      break;
    case RuleKind::kProgressive:
      out = {first, first + rule.step, first + 2 * rule.step};
      break;
    case RuleKind::kArithmetic:
      out = {first, second, first + rule.sign * second};
      break;
    case RuleKind::kDistributeThree:
      for (int i = 0; i < 3; ++i) out[i] = rule.triple[(row + i) % 3];
      break;
  }
  for (int v : out)
    if (!d.contains(v))
      fail(ErrorCode::kDomainOverflow, "rule " + std::string(to_string(rule.kind)) +
                                           " produced " + std::to_string(v) + " outside [" +
                                           std::to_string(d.lo) + ", " + std::to_string(d.hi) + "]");
  return out;
}

/// True if a completed row obeys the rule.
inline bool row_satisfies(const Rule& rule, const std::array<int, 3>& row, ValueDomain d,
                          int row_index) {
  try {
    return apply_rule(rule, row[0], row[1], d, row_index) == row;
  } catch (const Error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Symbolic puzzles

using SymbolicGrid = std::array<std::array<PanelSymbol, 3>, 3>;

enum class NegativeStyle { kRaven, kIRaven };

inline constexpr std::string_view to_string(NegativeStyle s) {
  return s == NegativeStyle::kRaven ? "raven" : "iraven";
}

struct SymbolicSample {
  PuzzleConfiguration config = PuzzleConfiguration::kCenter;
  NegativeStyle style = NegativeStyle::kRaven;
  RuleSpec rules;
  SymbolicGrid grid;
  std::vector<PanelSymbol> candidates;  // shuffled; candidates[target] == grid[2][2]
  int target = 0;

  const PanelSymbol& correct() const { return grid[2][2]; }
};

namespace detail {

inline std::uint16_t random_mask(int population, int slots, Rng& rng) {
  std::array<int, 9> order{};
  for (int i = 0; i < slots; ++i) order[i] = i;
  std::uint16_t mask = 0;
  for (int i = 0; i < population; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(slots - i)));
    std::swap(order[i], order[j]);
    mask |= static_cast<std::uint16_t>(1u << order[i]);
  }
  return mask;
}

inline void set_rule_value(AttributeVector& av, Attribute a, int v) {
  switch (a) {
    case Attribute::kLayout: av.number_idx = v - 1; break;
    case Attribute::kType: av.type_idx = v; break;
    case Attribute::kSize: av.size_idx = v; break;
    case Attribute::kColor: av.color_idx = v; break;
  }
}

inline std::array<int, 3> sample_row(const Rule& rule, ValueDomain d, int row, Rng& rng) {
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const int first = rng.range(d.lo, d.hi);
    const int second = rng.range(d.lo, d.hi);
    try {
      return apply_rule(rule, first, second, d, row);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDomainOverflow) throw;
    }
  }
  fail(ErrorCode::kGenerationExhausted, "no in-domain row for rule " +
                                            std::string(to_string(rule.kind)));
}

/// Replaces the value of one slot with a uniformly drawn different value.
inline void shift_attribute(PanelSymbol& p, const Slot& s, Layout layout, Rng& rng) {
  auto& av = p.components.at(s.component);
  if (s.attribute == Attribute::kLayout) {
    const int slots = slot_count(layout);
    const auto full = (1 << slots) - 1;  // non-empty masks are 1..full
    auto m = static_cast<int>(rng.range(1, full - 1));
    if (m >= av.position_mask) ++m;
    av.position_mask = static_cast<std::uint16_t>(m);
    av.number_idx = std::popcount(av.position_mask) - 1;
    return;
  }
  const auto d = value_domain(s.attribute, layout);
  const int current = rule_value(av, s.attribute);
  int v = rng.range(d.lo, d.hi - 1);
  if (v >= current) ++v;
  set_rule_value(av, s.attribute, v);
}

}  // namespace detail

/// Fills the 3x3 grid row by row so every row obeys every rule.
inline SymbolicGrid fill_grid(PuzzleConfiguration config, const RuleSpec& spec, Rng& rng) {
  const auto layouts = component_layouts(config);
  SymbolicGrid grid;
  for (auto& row : grid)
    for (auto& cell : row) cell.components.assign(layouts.size(), AttributeVector{});

  for (int r = 0; r < 3; ++r) {
    for (const auto& gr : spec.rules) {
      const auto layout = layouts[gr.slot.component].layout;
      const auto d = value_domain(gr.slot.attribute, layout);
      const auto values = detail::sample_row(gr.rule, d, r, rng);
      for (int c = 0; c < 3; ++c)
        detail::set_rule_value(grid[r][c].components[gr.slot.component], gr.slot.attribute,
                               values[c]);
      if (gr.slot.attribute != Attribute::kLayout) continue;
      // A constant count keeps the same positions across the row.
      const int slots = slot_count(layout);
      std::uint16_t shared = detail::random_mask(values[0], slots, rng);
      for (int c = 0; c < 3; ++c) {
        auto& av = grid[r][c].components[gr.slot.component];
        av.position_mask = gr.rule.kind == RuleKind::kConstant
                               ? shared
                               : detail::random_mask(values[c], slots, rng);
      }
    }
  }
  return grid;
}

/// Post-hoc check that every row of `grid` satisfies `spec`.
inline bool grid_satisfies(PuzzleConfiguration config, const RuleSpec& spec,
                           const SymbolicGrid& grid) {
  const auto layouts = component_layouts(config);
  for (int r = 0; r < 3; ++r) {
    for (const auto& gr : spec.rules) {
      const auto layout = layouts[gr.slot.component].layout;
      std::array<int, 3> row{};
      for (int c = 0; c < 3; ++c) {
        const auto& av = grid[r][c].components.at(gr.slot.component);
        row[c] = rule_value(av, gr.slot.attribute);
        if (gr.slot.attribute == Attribute::kLayout &&
            std::popcount(av.position_mask) != av.number_idx + 1)
          return false;
      }
      if (!row_satisfies(gr.rule, row, value_domain(gr.slot.attribute, layout), r)) return false;
      if (gr.slot.attribute == Attribute::kLayout && gr.rule.kind == RuleKind::kConstant) {
        const auto& cells = grid[r];
        const auto m = cells[0].components[gr.slot.component].position_mask;
        for (int c = 1; c < 3; ++c)
          if (cells[c].components[gr.slot.component].position_mask != m) return false;
      }
    }
  }
  return true;
}

/**
 * Seven negatives, each differing from `correct` in exactly one attribute,
 * with the new value uniform over the rest of that attribute's domain. All
 * eight candidates are pairwise distinct.
 */
inline std::vector<PanelSymbol> gen_negatives_raven(PuzzleConfiguration config,
                                                    const PanelSymbol& correct, Rng& rng) {
  const auto slots = governed_slots(config);
  const auto layouts = component_layouts(config);
  std::vector<PanelSymbol> out;
  for (std::size_t k = 0; k < kCandidateCount - 1; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
      const Slot& s = slots[rng.below(slots.size())];
      PanelSymbol neg = correct;
      detail::shift_attribute(neg, s, layouts[s.component].layout, rng);
      if (neg != correct && std::find(out.begin(), out.end(), neg) == out.end()) {
        out.push_back(std::move(neg));
        placed = true;
      }
    }
    if (!placed) fail(ErrorCode::kGenerationExhausted, "cannot find distinct negatives");
  }
  return out;
}

/**
 * Bisection-tree negatives: three distinct attributes are drawn; at level k
 * every node branches into an unchanged child and a child whose attribute k
 * takes a new value. The eight leaves are the candidate set; the leaf that was
 * never changed equals `correct` and is dropped, leaving seven negatives in
 * leaf order.
 */
inline std::vector<PanelSymbol> gen_negatives_iraven(PuzzleConfiguration config,
                                                     const PanelSymbol& correct, Rng& rng) {
  auto slots = governed_slots(config);
  if (slots.size() < 3)
    fail(ErrorCode::kGenerationExhausted, "bisection tree needs three governed attributes");
  const auto layouts = component_layouts(config);
  for (std::size_t i = 0; i < 3; ++i) std::swap(slots[i], slots[i + rng.below(slots.size() - i)]);

  std::array<PanelSymbol, 3> permuted;  // correct with level-k attribute changed
  for (std::size_t k = 0; k < 3; ++k) {
    permuted[k] = correct;
    detail::shift_attribute(permuted[k], slots[k], layouts[slots[k].component].layout, rng);
  }

  std::vector<PanelSymbol> out;
  for (unsigned leaf = 1; leaf < 8; ++leaf) {
    PanelSymbol p = correct;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!(leaf & (1u << k))) continue;
      const auto& s = slots[k];
      auto& dst = p.components[s.component];
      const auto& src = permuted[k].components[s.component];
      if (s.attribute == Attribute::kLayout) {
        dst.position_mask = src.position_mask;
        dst.number_idx = src.number_idx;
      } else {
        detail::set_rule_value(dst, s.attribute, rule_value(src, s.attribute));
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline SymbolicSample generate_symbolic(PuzzleConfiguration config, NegativeStyle style, Rng& rng) {
  SymbolicSample s;
  s.config = config;
  s.style = style;
  s.rules = sample_rule_set(config, rng);
  s.grid = fill_grid(config, s.rules, rng);
  auto negatives = style == NegativeStyle::kRaven ? gen_negatives_raven(config, s.correct(), rng)
                                                  : gen_negatives_iraven(config, s.correct(), rng);
  std::vector<std::size_t> order(kCandidateCount);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  s.candidates.resize(kCandidateCount);
  for (std::size_t pos = 0; pos < kCandidateCount; ++pos) {
    const std::size_t src = order[pos];  // 0 is the correct answer
    if (src == 0) {
      s.candidates[pos] = s.correct();
      s.target = static_cast<int>(pos);
    } else {
      s.candidates[pos] = negatives[src - 1];
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

struct Entity {
  double cx, cy, radius;
  Shape shape;
  std::uint8_t fill;
  int sides = 0;  // 0 for circles
  double apothem = 0.0;
  std::array<std::array<double, 2>, 6> normals{};

  Entity(double x, double y, double r, Shape sh, std::uint8_t f)
      : cx(x), cy(y), radius(r), shape(sh), fill(f) {
    if (shape == Shape::kCircle) return;
    sides = static_cast<int>(shape) + 3;
    apothem = radius * std::cos(std::numbers::pi / sides);
    for (int j = 0; j < sides; ++j) {
      const double angle = -std::numbers::pi / 2 + (j + 0.5) * 2.0 * std::numbers::pi / sides;
      normals[j] = {std::cos(angle), std::sin(angle)};
    }
  }
};

// Inside test for a regular polygon (vertex pointing up) or a circle,
// shrunk inward by `inset` pixels.
inline bool inside(const Entity& e, double px, double py, double inset) {
  const double dx = px - e.cx;
  const double dy = py - e.cy;
  if (e.sides == 0) {
    const double r = e.radius - inset;
    return r > 0.0 && dx * dx + dy * dy <= r * r;
  }
  const double limit = e.apothem - inset;
  if (limit <= 0.0) return false;
  for (int j = 0; j < e.sides; ++j)
    if (dx * e.normals[j][0] + dy * e.normals[j][1] > limit) return false;
  return true;
}

inline void draw(Panel& panel, const Entity& e) {
  const double thickness = std::max(1.0, 0.12 * e.radius);
  const auto w = static_cast<double>(panel.width());
  const auto h = static_cast<double>(panel.height());
  const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(e.cx - e.radius - 1)));
  const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(e.cy - e.radius - 1)));
  const auto x1 = static_cast<std::size_t>(std::min(w, std::ceil(e.cx + e.radius + 1)));
  const auto y1 = static_cast<std::size_t>(std::min(h, std::ceil(e.cy + e.radius + 1)));
  for (std::size_t y = y0; y < y1; ++y) {
    for (std::size_t x = x0; x < x1; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      if (!inside(e, px, py, 0.0)) continue;
      panel.at(x, y) = inside(e, px, py, thickness) ? e.fill : kOutline;
    }
  }
}

inline std::vector<Entity> entities(const PanelSymbol& symbol, PuzzleConfiguration config,
                                    std::size_t w, std::size_t h) {
  const auto layouts = component_layouts(config);
  require(symbol.components.size() == layouts.size(),
          "panel symbol has the wrong number of components for its configuration");
  std::vector<Entity> out;
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    const auto& av = symbol.components[i];
    const auto& cl = layouts[i];
    const int n = cl.layout == Layout::kGrid3x3 ? 3 : cl.layout == Layout::kGrid2x2 ? 2 : 1;
    const std::uint16_t mask = cl.layout == Layout::kSingle ? 1 : av.position_mask;
    const double rx0 = cl.region.x0 * static_cast<double>(w);
    const double ry0 = cl.region.y0 * static_cast<double>(h);
    const double cw = (cl.region.x1 - cl.region.x0) * static_cast<double>(w) / n;
    const double ch = (cl.region.y1 - cl.region.y0) * static_cast<double>(h) / n;
    for (int slot = 0; slot < n * n; ++slot) {
      if (!(mask & (1u << slot))) continue;
      const double cx = rx0 + (slot % n + 0.5) * cw;
      const double cy = ry0 + (slot / n + 0.5) * ch;
      const double radius = 0.5 * std::min(cw, ch) * kSizeScale.at(av.size_idx);
      out.emplace_back(cx, cy, radius, static_cast<Shape>(av.type_idx), kPalette.at(av.color_idx));
    }
  }
  return out;
}

}  // namespace detail

/// Hard-edged raster of a panel: white background, black outlines, palette fills.
inline Panel render_panel(const PanelSymbol& symbol, PuzzleConfiguration config, std::size_t w,
                          std::size_t h) {
  Panel panel(w, h, kBackground);
  for (const auto& e : detail::entities(symbol, config, w, h)) detail::draw(panel, e);
  return panel;
}

/// Pixels painted with a fill color (interior of some entity, outline excluded).
inline std::vector<bool> fill_mask(const PanelSymbol& symbol, PuzzleConfiguration config,
                                   std::size_t w, std::size_t h) {
  // Later entities paint over earlier ones, matching render_panel.
  std::vector<bool> mask(w * h, false);
  for (const auto& e : detail::entities(symbol, config, w, h)) {
    const double thickness = std::max(1.0, 0.12 * e.radius);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double px = static_cast<double>(x) + 0.5;
        const double py = static_cast<double>(y) + 0.5;
        if (detail::inside(e, px, py, 0.0)) mask[y * w + x] = detail::inside(e, px, py, thickness);
      }
  }
  return mask;
}

/// Every intensity a rendered panel may contain.
inline std::vector<std::uint8_t> render_value_set() {
  std::vector<std::uint8_t> v(kPalette.begin(), kPalette.end());
  v.push_back(kOutline);
  v.push_back(kBackground);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// Annotation and full samples

inline nlohmann::json to_json(const AttributeVector& av) {
  return {{"type", av.type_idx},
          {"size", av.size_idx},
          {"color", av.color_idx},
          {"number", av.number_idx},
          {"position", av.position_mask}};
}

inline nlohmann::json to_json(const PanelSymbol& p) {
  auto arr = nlohmann::json::array();
  for (const auto& c : p.components) arr.push_back(to_json(c));
  return arr;
}

inline nlohmann::json to_json(const SymbolicSample& s) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& gr : s.rules.rules) {
    nlohmann::json r = {{"component", gr.slot.component},
                        {"attribute", to_string(gr.slot.attribute)},
                        {"rule", to_string(gr.rule.kind)}};
    if (gr.rule.kind == RuleKind::kProgressive) r["step"] = gr.rule.step;
    if (gr.rule.kind == RuleKind::kArithmetic) r["sign"] = gr.rule.sign;
    if (gr.rule.kind == RuleKind::kDistributeThree) r["triple"] = gr.rule.triple;
    rules.push_back(std::move(r));
  }
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& row : s.grid)
    for (const auto& cell : row) grid.push_back(to_json(cell));
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : s.candidates) candidates.push_back(to_json(c));
  return {{"config", config_flag(s.config)}, {"style", to_string(s.style)},
          {"rules", std::move(rules)},       {"grid", std::move(grid)},
          {"candidates", std::move(candidates)}, {"target", s.target}};
}

struct GeneratedSample {
  RpmSample sample;
  SymbolicSample symbolic;
  AuxBlobs annotations;  // the symbolic description as an archive member
};

/// Renders a symbolic puzzle. The ninth grid cell is withheld from the context.
inline RpmSample render_sample(const SymbolicSample& s, std::size_t w, std::size_t h) {
  RpmSample out;
  out.config = s.config;
  out.target = s.target;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (r < 2 || c < 2) out.context.push_back(render_panel(s.grid[r][c], s.config, w, h));
  for (const auto& cand : s.candidates) out.candidates.push_back(render_panel(cand, s.config, w, h));
  return out;
}

/**
 * Complete puzzle: rules, grid, candidates, shuffled target, rendered panels.
 * Attempts whose rendering collapses two distinct answers into identical
 * pixels are redrawn, at most kMaxRetries times.
 */
inline GeneratedSample generate_sample(PuzzleConfiguration config, NegativeStyle style,
                                       std::size_t w, std::size_t h, Rng& rng) {
  require(w > 0 && h > 0, "panel dimensions must be positive");
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    SymbolicSample symbolic;
    try {
      symbolic = generate_symbolic(config, style, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kGenerationExhausted && e.code() != ErrorCode::kDomainOverflow)
        throw;
      continue;
    }
    RpmSample sample = render_sample(symbolic, w, h);
    if (!validate_sample(sample).empty()) continue;
    AuxBlobs aux;
    aux.emplace(std::string(kSymbolicMember), encode_text_member(to_json(symbolic).dump()));
    return {std::move(sample), std::move(symbolic), std::move(aux)};
  }
  fail(ErrorCode::kGenerationExhausted,
       "no valid sample after " + std::to_string(kMaxRetries) + " attempts");
}

}  // namespace rpmaug::puzzle
