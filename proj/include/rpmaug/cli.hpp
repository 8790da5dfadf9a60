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
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rpmaug/analysis.hpp"
#include "rpmaug/archive.hpp"
#include "rpmaug/error.hpp"
#include "rpmaug/morph.hpp"
#include "rpmaug/pipeline.hpp"
#include "rpmaug/puzzle.hpp"

namespace rpmaug::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

enum class Subcommand { kGenerate, kAugment, kValidate, kStats, kProject, kResize };
enum class OutputFormat { kText, kJson };

inline constexpr std::string_view to_string(Subcommand c) {
  switch (c) {
    case Subcommand::kGenerate: return "generate";
    case Subcommand::kAugment: return "augment";
    case Subcommand::kValidate: return "validate";
    case Subcommand::kStats: return "stats";
    case Subcommand::kProject: return "project";
    case Subcommand::kResize: return "resize";
  }
  return "?";
}

struct Invocation {
  Subcommand command = Subcommand::kStats;
  fs::path in;
  fs::path out;
  std::optional<fs::path> against;
  fs::path features;
  std::optional<fs::path> labels;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool deflate = false;
  OutputFormat format = OutputFormat::kText;

  // generate
  std::vector<PuzzleConfiguration> configs;
  std::size_t count = 0;
  puzzle::NegativeStyle style = puzzle::NegativeStyle::kRaven;
  std::array<unsigned, 3> split_ratio{6, 2, 2};

  // augment
  MixRecipe recipe;
  std::vector<Split> splits{Split::kTrain};
  bool force_splits = false;

  // project
  bool standardize = false;

  // generate / resize
  std::size_t width = 160;
  std::size_t height = 160;
};

/// Command-line misuse. `remedy` is a one-line hint shown after the message.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, std::string remedy)
      : std::runtime_error(what), remedy_(std::move(remedy)) {}
  const std::string& remedy() const noexcept { return remedy_; }

 private:
  std::string remedy_;
};

/// Thrown by parse_invocation for --help; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::optional<std::size_t> parse_positive(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) return std::nullopt;
  return v;
}

/// "WxH", or a bare "N" for a square size when `square_ok` is set.
inline std::optional<std::pair<std::size_t, std::size_t>> parse_size(std::string_view s, bool square_ok) {
  const auto x = s.find('x');
  if (x == std::string_view::npos) {
    if (!square_ok) return std::nullopt;
    if (auto n = parse_positive(s)) return std::make_pair(*n, *n);
    return std::nullopt;
  }
  const auto w = parse_positive(s.substr(0, x));
  const auto h = parse_positive(s.substr(x + 1));
  if (!w || !h) return std::nullopt;
  return std::make_pair(*w, *h);
}

inline std::optional<std::array<unsigned, 3>> parse_ratio(std::string_view s) {
  std::array<unsigned, 3> r{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto colon = s.find(':');
    if ((i < 2) == (colon == std::string_view::npos)) return std::nullopt;
    const auto part = s.substr(0, colon);
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), r[i]);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) return std::nullopt;
    if (colon != std::string_view::npos) s.remove_prefix(colon + 1);
  }
  if (r[0] + r[1] + r[2] == 0) return std::nullopt;
  return r;
}

inline std::string help_hint(std::string_view sub) {
  return sub.empty() ? "run 'rpmaug --help' for usage" : "run 'rpmaug " + std::string(sub) + " --help' for usage";
}

}  // namespace detail

/**
 * Strict parse of the arguments following the program name. Throws
 * UsageError on anything unknown, missing or out of range.
 */
inline Invocation parse_invocation(const std::vector<std::string>& args) {
  Invocation inv;
  CLI::App app{"Augmentation toolkit for Raven-style matrix puzzles", "rpmaug"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_flag_value, style = "raven", size, ratio = "6:2:2", op, collision = "keep-original",
                                 format = "text";
  std::vector<std::string> split_names{"train"};

  const auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", inv.jobs, "Worker threads (never changes output bytes)")
        ->check(CLI::Range(1u, 1024u));
  };

  std::vector<std::string> config_choices;
  for (const auto& n : kConfigurationNames) config_choices.emplace_back(n.flag);
  config_choices.emplace_back("all");

  auto* gen = app.add_subcommand("generate", "Write a synthetic puzzle dataset");
  gen->add_option("--config", config_flag_value, "Configuration or 'all'")
      ->required()
      ->check(CLI::IsMember(config_choices));
  gen->add_option("--count", inv.count, "Samples per configuration")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", inv.seed, "Random seed")->default_val(0);
  gen->add_option("--style", style, "Negative construction")->check(CLI::IsMember({"raven", "iraven"}));
  gen->add_option("--size", size, "Panel size WxH (default 160x160)");
  gen->add_option("--split-ratio", ratio, "train:val:test assignment by sample id (default 6:2:2)");
  gen->add_option("--out", inv.out, "Output directory")->required();
  gen->add_flag("--deflate", inv.deflate, "Deflate archive members");
  add_jobs(gen);

  auto* aug = app.add_subcommand("augment", "Add one mixed sample per original");
  aug->add_option("--in", inv.in, "Input dataset directory")->required();
  aug->add_option("--out", inv.out, "Output directory")->required();
  aug->add_option("--op", op, "Mixing operator")->required()->check(CLI::IsMember({"or", "and", "vanilla"}));
  aug->add_option("--alpha", inv.recipe.alpha, "Beta(alpha, alpha) shape for vanilla")
      ->check(CLI::PositiveNumber);
  aug->add_option("--seed", inv.seed, "Random seed")->default_val(0);
  aug->add_option("--collision", collision, "Duplicate-answer policy")
      ->check(CLI::IsMember({"keep-original", "keep-mixed"}));
  aug->add_option("--splits", split_names, "Comma-separated splits to augment")
      ->delimiter(',')
      ->check(CLI::IsMember({"train", "val", "test"}));
  aug->add_flag("--force-splits", inv.force_splits, "Allow augmenting val/test");
  aug->add_flag("--deflate", inv.deflate, "Deflate archive members");
  add_jobs(aug);

  auto* val = app.add_subcommand("validate", "Check sample invariants and closure");
  val->add_option("--in", inv.in, "Dataset directory")->required();
  val->add_option("--against", inv.against, "Directory holding the originals");
  val->add_option("--format", format, "Summary format")->check(CLI::IsMember({"text", "json"}));
  add_jobs(val);

  auto* st = app.add_subcommand("stats", "Count samples by configuration, split, target and provenance");
  st->add_option("--in", inv.in, "Dataset directory")->required();
  st->add_option("--format", format, "Summary format")->check(CLI::IsMember({"text", "json"}));
  add_jobs(st);

  auto* proj = app.add_subcommand("project", "Project feature vectors onto two principal components");
  proj->add_option("--features", inv.features, "Comma-separated feature rows")->required();
  proj->add_option("--out", inv.out, "Scatter output file")->required();
  proj->add_flag("--standardize", inv.standardize, "Z-score every feature column first");
  proj->add_option("--labels", inv.labels, "One label per line, when the features carry none");

  auto* rs = app.add_subcommand("resize", "Resize every panel of a dataset");
  rs->add_option("--in", inv.in, "Input dataset directory")->required();
  rs->add_option("--out", inv.out, "Output directory")->required();
  rs->add_option("--size", size, "80, 224 or WxH")->required();
  add_jobs(rs);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    std::string sub;
    for (auto* s : app.get_subcommands()) sub = s->get_name();
    for (auto* s : {gen, aug, val, st, proj, rs})
      if (s->parsed()) sub = s->get_name();
    throw UsageError(e.what(), detail::help_hint(sub));
  }
  for (auto* s : {gen, aug, val, st, proj, rs})
    if (s->parsed() && s->get_help_ptr() && s->get_help_ptr()->count() > 0) throw HelpRequested(s->help());

  const std::string sub = app.get_subcommands().front()->get_name();
  const auto usage = [&](const std::string& what) { return UsageError(what, detail::help_hint(sub)); };
  for (auto c : {Subcommand::kGenerate, Subcommand::kAugment, Subcommand::kValidate, Subcommand::kStats,
                 Subcommand::kProject, Subcommand::kResize})
    if (to_string(c) == sub) inv.command = c;
  inv.format = format == "json" ? OutputFormat::kJson : OutputFormat::kText;

  switch (inv.command) {
    case Subcommand::kGenerate: {
      if (config_flag_value == "all")
        inv.configs.assign(kAllConfigurations.begin(), kAllConfigurations.end());
      else
        inv.configs = {*config_from_flag(config_flag_value)};
      inv.style = style == "iraven" ? puzzle::NegativeStyle::kIRaven : puzzle::NegativeStyle::kRaven;
      if (!size.empty()) {
        const auto wh = detail::parse_size(size, false);
        if (!wh) throw usage("--size: expected WxH with positive integers, got '" + size + "'");
        std::tie(inv.width, inv.height) = *wh;
      }
      const auto r = detail::parse_ratio(ratio);
      if (!r) throw usage("--split-ratio: expected TRAIN:VAL:TEST non-negative integers, got '" + ratio + "'");
      inv.split_ratio = *r;
      break;
    }
    case Subcommand::kAugment: {
      inv.recipe.kind = op == "or" ? MixKind::kOr : op == "and" ? MixKind::kAnd : MixKind::kVanilla;
      inv.recipe.collision =
          collision == "keep-mixed" ? CollisionPolicy::kKeepMixed : CollisionPolicy::kKeepOriginal;
      inv.recipe.seed = inv.seed;
      inv.splits.clear();
      for (auto s : {Split::kTrain, Split::kVal, Split::kTest})
        if (std::find(split_names.begin(), split_names.end(), to_string(s)) != split_names.end())
          inv.splits.push_back(s);
      const bool touches_eval = std::any_of(inv.splits.begin(), inv.splits.end(),
                                            [](Split s) { return s != Split::kTrain; });
      if (touches_eval && !inv.force_splits)
        throw UsageError("--splits: val and test are never augmented by default",
                         "add --force-splits to augment them anyway");
      break;
    }
    case Subcommand::kResize: {
      const auto wh = detail::parse_size(size, true);
      if (!wh) throw usage("--size: expected 80, 224 or WxH, got '" + size + "'");
      std::tie(inv.width, inv.height) = *wh;
      break;
    }
    default:
      break;
  }
  return inv;
}

namespace detail {

using Json = nlohmann::ordered_json;

inline Json split_counts(const std::array<std::size_t, 3>& counts) {
  Json j = Json::object();
  for (auto s : {Split::kTrain, Split::kVal, Split::kTest})
    j[std::string(to_string(s))] = counts[static_cast<std::size_t>(s)];
  return j;
}

/// "a.b: value" lines for nested objects; arrays print space-separated.
inline void write_text(std::ostream& os, const Json& j, const std::string& prefix = {}) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) write_text(os, v, prefix.empty() ? k : prefix + "." + k);
    return;
  }
  os << prefix << ":";
  if (j.is_array()) {
    for (const auto& v : j) os << ' ' << (v.is_string() ? v.get<std::string>() : v.dump());
  } else {
    os << ' ' << (j.is_string() ? j.get<std::string>() : j.dump());
  }
  os << '\n';
}

inline void emit(std::ostream& os, const Json& j, OutputFormat f) {
  if (f == OutputFormat::kJson)
    os << j.dump(2) << '\n';
  else
    write_text(os, j);
}

inline Json closure_json(const ClosureReport& r) {
  Json j;
  j["samples_checked"] = r.samples_checked;
  j["closure_violations"] = r.closure_violations;
  j["degenerate_candidates"] = r.degenerate_candidates;
  j["value_set_before"] = r.value_set_before;
  j["value_set_after"] = r.value_set_after;
  j["value_set_closed"] = r.value_set_closed();
  return j;
}

inline std::vector<std::string> read_lines(const fs::path& path) {
  const auto bytes = read_file(path);
  std::vector<std::string> out;
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = rpmaug::detail::trim(text.substr(0, nl));
    if (!line.empty()) out.emplace_back(line);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  return out;
}

inline int run_generate(const Invocation& inv, std::ostream& os) {
  GenerateOptions opt;
  opt.configs = inv.configs;
  opt.count = inv.count;
  opt.seed = inv.seed;
  opt.style = inv.style;
  opt.width = inv.width;
  opt.height = inv.height;
  opt.split_ratio = inv.split_ratio;
  opt.jobs = inv.jobs;
  opt.compression = inv.deflate ? zip::Compression::kDeflate : zip::Compression::kStored;
  const auto s = generate_dataset(inv.out, opt);

  Json j;
  j["command"] = "generate";
  j["style"] = to_string(inv.style);
  j["seed"] = inv.seed;
  j["width"] = inv.width;
  j["height"] = inv.height;
  auto& configs = j["configurations"] = Json::array();
  for (auto c : inv.configs) configs.push_back(config_flag(c));
  j["total"] = s.total;
  j["splits"] = split_counts(s.per_split);
  emit(os, j, OutputFormat::kJson);
  return kExitOk;
}

inline int run_augment(const Invocation& inv, std::ostream& os) {
  AugmentOptions opt;
  opt.recipe = inv.recipe;
  opt.splits = inv.splits;
  opt.jobs = inv.jobs;
  opt.compression = inv.deflate ? zip::Compression::kDeflate : zip::Compression::kStored;
  const auto s = augment_dataset(inv.in, inv.out, opt);

  Json j;
  j["command"] = "augment";
  j["op"] = to_string(inv.recipe.kind);
  j["alpha"] = inv.recipe.alpha;
  j["seed"] = inv.recipe.seed;
  j["collision"] = to_string(inv.recipe.collision);
  auto& splits = j["splits"] = Json::object();
  for (auto sp : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto i = static_cast<std::size_t>(sp);
    Json e;
    e["original"] = s.originals[i];
    e["synthetic"] = s.synthetic[i];
    e["total"] = s.total(sp);
    splits[std::string(to_string(sp))] = e;
  }
  j["restored"] = s.restored;
  j["degenerate"] = s.degenerate;
  j["skipped_files"] = s.skipped_files;
  emit(os, j, OutputFormat::kJson);
  return kExitOk;
}

inline int run_validate(const Invocation& inv, std::ostream& os) {
  const auto s = validate_dataset(inv.in, inv.against, inv.jobs);
  Json j;
  j["command"] = "validate";
  j["status"] = s.ok() ? "ok" : "failed";
  j["samples"] = s.samples;
  j["invalid_samples"] = s.invalid_samples;
  j["violations"] = Json::object();
  for (const auto& [code, n] : s.violations) j["violations"][code] = n;
  j["paired"] = s.paired;
  j["unpaired"] = s.unpaired;
  j["closure_violations"] = s.morphological.closure_violations;
  j["morphological"] = closure_json(s.morphological);
  j["vanilla"] = closure_json(s.vanilla);
  j["skipped_files"] = s.skipped_files;
  emit(os, j, inv.format);
  return s.ok() ? kExitOk : kExitDomain;
}

inline int run_stats(const Invocation& inv, std::ostream& os) {
  const auto s = stats_dataset(inv.in, inv.jobs);
  Json j;
  j["command"] = "stats";
  const Json body = s.stats.to_json();
  for (const auto& [k, v] : body.items()) j[k] = v;
  j["skipped_files"] = s.skipped_files;
  emit(os, j, inv.format);
  return kExitOk;
}

inline int run_project(const Invocation& inv, std::ostream& os) {
  const auto bytes = read_file(inv.features);
  auto table = parse_feature_table(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  if (inv.labels) {
    if (!table.labels.empty())
      throw UsageError("--labels given but the feature file already has a label column",
                       "drop either --labels or the label column");
    table.labels = read_lines(*inv.labels);
  }
  if (table.labels.empty())
    throw UsageError("no scatter labels: the feature file has no label column",
                     "append a label column or pass --labels FILE");
  FeatureMatrix x = inv.standardize ? standardize(table.features) : table.features;
  const auto model = pca_fit(x, 2);
  export_scatter(pca_project(model, x), table.labels, inv.out);

  Json j;
  j["command"] = "project";
  j["rows"] = x.rows;
  j["dims"] = x.cols;
  j["standardized"] = inv.standardize;
  j["explained_variance"] = model.explained_variance;
  j["out"] = inv.out.generic_string();
  emit(os, j, OutputFormat::kJson);
  return kExitOk;
}

inline int run_resize(const Invocation& inv, std::ostream& os) {
  const auto s = resize_dataset(inv.in, inv.out, inv.width, inv.height, inv.jobs);
  Json j;
  j["command"] = "resize";
  j["width"] = inv.width;
  j["height"] = inv.height;
  j["samples"] = s.samples;
  j["duplicates"] = s.duplicates;
  emit(os, j, OutputFormat::kJson);
  return kExitOk;
}

}  // namespace detail

/// Exit status for a library error raised while executing a command.
inline int exit_code_for(const Error& e) {
  if (e.is_format_error() || e.code() == ErrorCode::kIo) return kExitIo;
  if (e.code() == ErrorCode::kInvalidArgument) return kExitUsage;
  return kExitDomain;
}

/// Runs a parsed invocation; the summary goes to `out`, diagnostics to `err`.
inline int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    switch (inv.command) {
      case Subcommand::kGenerate: return detail::run_generate(inv, out);
      case Subcommand::kAugment: return detail::run_augment(inv, out);
      case Subcommand::kValidate: return detail::run_validate(inv, out);
      case Subcommand::kStats: return detail::run_stats(inv, out);
      case Subcommand::kProject: return detail::run_project(inv, out);
      case Subcommand::kResize: return detail::run_resize(inv, out);
    }
  } catch (const UsageError& e) {
    err << "rpmaug " << to_string(inv.command) << ": " << e.what() << " (" << e.remedy() << ")\n";
    return kExitUsage;
  } catch (const InvalidSampleError& e) {
    err << "rpmaug " << to_string(inv.command) << ": invalid input sample: " << e.what() << '\n';
    return kExitDomain;
  } catch (const Error& e) {
    err << "rpmaug " << to_string(inv.command) << ": " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "rpmaug " << to_string(inv.command) << ": IO: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

/// Parses and executes; the whole program behind main().
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Invocation inv;
  try {
    inv = parse_invocation(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "rpmaug: " << e.what() << " (" << e.remedy() << ")\n";
    return kExitUsage;
  }
  return execute(inv, out, err);
}

}  // namespace rpmaug::cli
