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

#include <sstream>

#include "rpmaug/cli.hpp"
#include "test_support.hpp"

namespace rpmaug::cli {
namespace {

using testing::TempDir;
using testing::tree_bytes;
using Json = nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> generate_args(const fs::path& out, const std::string& count = "4") {
  return {"generate", "--config", "all", "--count", count, "--seed", "3", "--size", "32x32", "--out", out.string()};
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

TEST(ParseInvocation, AugmentDefaults) {
  const auto inv = parse_invocation({"augment", "--in", "d1", "--out", "d2", "--op", "or"});
  EXPECT_EQ(inv.command, Subcommand::kAugment);
  EXPECT_EQ(inv.in, fs::path("d1"));
  EXPECT_EQ(inv.out, fs::path("d2"));
  EXPECT_EQ(inv.recipe.kind, MixKind::kOr);
  EXPECT_EQ(inv.recipe.seed, 0u);
  EXPECT_EQ(inv.recipe.alpha, 1.0);
  EXPECT_EQ(inv.recipe.collision, CollisionPolicy::kKeepOriginal);
  EXPECT_EQ(inv.splits, std::vector<Split>{Split::kTrain});
  EXPECT_EQ(inv.jobs, 1u);
}

TEST(ParseInvocation, UnknownOperatorIsUsageError) {
  EXPECT_THROW(parse_invocation({"augment", "--in", "d1", "--out", "d2", "--op", "xor"}), UsageError);
  const auto r = cli({"augment", "--in", "d1", "--out", "d2", "--op", "xor"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_NE(r.err.find("--help"), std::string::npos);
}

TEST(ParseInvocation, GenerateExample) {
  const auto inv = parse_invocation(
      {"generate", "--config", "center", "--count", "200", "--seed", "7", "--style", "iraven", "--out", "d"});
  EXPECT_EQ(inv.command, Subcommand::kGenerate);
  EXPECT_EQ(inv.configs, std::vector<PuzzleConfiguration>{PuzzleConfiguration::kCenter});
  EXPECT_EQ(inv.count, 200u);
  EXPECT_EQ(inv.seed, 7u);
  EXPECT_EQ(inv.style, puzzle::NegativeStyle::kIRaven);
  EXPECT_EQ(inv.width, 160u);
  EXPECT_EQ(inv.height, 160u);
  EXPECT_EQ(inv.split_ratio, (std::array<unsigned, 3>{6, 2, 2}));
}

TEST(ParseInvocation, GenerateAllAndSizes) {
  const auto inv = parse_invocation(
      {"generate", "--config", "all", "--count", "1", "--size", "40x30", "--split-ratio", "4:1:1", "--out", "d"});
  EXPECT_EQ(inv.configs.size(), 7u);
  EXPECT_EQ(inv.width, 40u);
  EXPECT_EQ(inv.height, 30u);
  EXPECT_EQ(inv.split_ratio, (std::array<unsigned, 3>{4, 1, 1}));
  EXPECT_THROW(parse_invocation({"generate", "--config", "all", "--count", "1", "--size", "80", "--out", "d"}),
               UsageError);
  EXPECT_THROW(parse_invocation({"generate", "--config", "all", "--count", "1", "--split-ratio", "0:0:0",
                                 "--out", "d"}),
               UsageError);
}

TEST(ParseInvocation, StrictFlags) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {},
           {"frobnicate"},
           {"stats", "--in", "d", "--verbose"},
           {"stats"},
           {"generate", "--config", "hexagon", "--count", "1", "--out", "d"},
           {"generate", "--config", "center", "--count", "0", "--out", "d"},
           {"generate", "--config", "center", "--out", "d"},
           {"augment", "--in", "a", "--out", "b", "--op", "or", "--alpha", "-1"},
           {"augment", "--in", "a", "--out", "b", "--op", "or", "--collision", "drop"},
           {"augment", "--in", "a", "--out", "b", "--op", "or", "--jobs", "0"},
           {"validate", "--in", "d", "--format", "xml"},
           {"resize", "--in", "a", "--out", "b", "--size", "0x5"},
           {"project", "--features", "f"}}) {
    EXPECT_THROW(parse_invocation(args), UsageError) << ::testing::PrintToString(args);
    EXPECT_EQ(cli(args).code, kExitUsage) << ::testing::PrintToString(args);
  }
}

TEST(ParseInvocation, EvaluationSplitsNeedForce) {
  EXPECT_THROW(parse_invocation({"augment", "--in", "a", "--out", "b", "--op", "and", "--splits", "train,val"}),
               UsageError);
  const auto inv = parse_invocation(
      {"augment", "--in", "a", "--out", "b", "--op", "and", "--splits", "test,train", "--force-splits"});
  EXPECT_EQ(inv.splits, (std::vector<Split>{Split::kTrain, Split::kTest}));
}

TEST(ParseInvocation, VanillaRecipeFlags) {
  const auto inv = parse_invocation({"augment", "--in", "a", "--out", "b", "--op", "vanilla", "--alpha", "0.4",
                                     "--seed", "11", "--collision", "keep-mixed", "--jobs", "4"});
  EXPECT_EQ(inv.recipe.kind, MixKind::kVanilla);
  EXPECT_EQ(inv.recipe.alpha, 0.4);
  EXPECT_EQ(inv.recipe.seed, 11u);
  EXPECT_EQ(inv.recipe.collision, CollisionPolicy::kKeepMixed);
  EXPECT_EQ(inv.jobs, 4u);
}

TEST(ParseInvocation, ResizeSizes) {
  auto inv = parse_invocation({"resize", "--in", "a", "--out", "b", "--size", "80"});
  EXPECT_EQ(inv.width, 80u);
  EXPECT_EQ(inv.height, 80u);
  inv = parse_invocation({"resize", "--in", "a", "--out", "b", "--size", "224"});
  EXPECT_EQ(inv.width, 224u);
  inv = parse_invocation({"resize", "--in", "a", "--out", "b", "--size", "64x48"});
  EXPECT_EQ(inv.width, 64u);
  EXPECT_EQ(inv.height, 48u);
}

TEST(ParseInvocation, ValidateAndStatsFormats) {
  auto inv = parse_invocation({"validate", "--in", "a", "--against", "b", "--format", "json"});
  EXPECT_EQ(inv.command, Subcommand::kValidate);
  ASSERT_TRUE(inv.against.has_value());
  EXPECT_EQ(*inv.against, fs::path("b"));
  EXPECT_EQ(inv.format, OutputFormat::kJson);
  inv = parse_invocation({"stats", "--in", "a"});
  EXPECT_EQ(inv.format, OutputFormat::kText);
  EXPECT_FALSE(inv.against.has_value());
}

TEST(Run, HelpExitsZero) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("augment"), std::string::npos);
  const auto sub = cli({"augment", "--help"});
  EXPECT_EQ(sub.code, kExitOk);
  EXPECT_NE(sub.out.find("--collision"), std::string::npos);
}

TEST(Execute, GenerateWritesStandardLayout) {
  TempDir dir("cli_gen");
  const auto r = cli(generate_args(dir / "d", "10"));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["total"], 70);
  EXPECT_EQ(j["splits"]["train"], 42);
  EXPECT_EQ(j["splits"]["val"], 14);
  EXPECT_EQ(j["splits"]["test"], 14);
  const auto scan = scan_dataset(dir / "d");
  EXPECT_EQ(scan.entries.size(), 70u);
  EXPECT_EQ(scan.warnings, 0u);
  for (auto c : kAllConfigurations)
    EXPECT_TRUE(fs::is_directory(dir.path() / "d" / std::string(config_directory(c)))) << config_flag(c);
  const auto archive = read_sample_archive(scan.entries[0].path);
  EXPECT_TRUE(validate_sample(archive.sample).empty());
  EXPECT_EQ(archive.sample.context[0].width(), 32u);
  EXPECT_TRUE(archive.aux.count(std::string(kSymbolicMember)));
}

TEST(Execute, SplitAccountingAfterAugment) {
  TempDir dir("cli_split");
  ASSERT_EQ(cli({"generate", "--config", "center", "--count", "300", "--split-ratio", "4:1:1", "--size", "16x16",
                 "--out", (dir / "d").string()})
                .code,
            kExitOk);
  const auto aug = cli({"augment", "--in", (dir / "d").string(), "--out", (dir / "a").string(), "--op", "or"});
  ASSERT_EQ(aug.code, kExitOk) << aug.err;
  const auto a = aug.json();
  EXPECT_EQ(a["splits"]["train"]["original"], 200);
  EXPECT_EQ(a["splits"]["train"]["synthetic"], 200);
  EXPECT_EQ(a["splits"]["train"]["total"], 400);
  EXPECT_EQ(a["splits"]["val"]["total"], 50);
  EXPECT_EQ(a["splits"]["test"]["total"], 50);

  const auto st = cli({"stats", "--in", (dir / "a").string(), "--format", "json"});
  ASSERT_EQ(st.code, kExitOk) << st.err;
  const auto s = st.json();
  EXPECT_EQ(s["splits"]["train"], 400);
  EXPECT_EQ(s["splits"]["val"], 50);
  EXPECT_EQ(s["splits"]["test"], 50);
  EXPECT_EQ(s["split_provenance"]["train"]["original"], 200);
  EXPECT_EQ(s["split_provenance"]["train"]["cam_or"], 200);
  EXPECT_EQ(s["split_provenance"]["val"]["cam_or"], 0);
  EXPECT_EQ(s["split_provenance"]["test"]["cam_or"], 0);
}

TEST(Execute, AugmentedArchivesCarryProvenance) {
  TempDir dir("cli_prov");
  ASSERT_EQ(cli(generate_args(dir / "d", "2")).code, kExitOk);
  ASSERT_EQ(cli({"augment", "--in", (dir / "d").string(), "--out", (dir / "a").string(), "--op", "and"}).code,
            kExitOk);
  std::size_t augmented = 0;
  for (const auto& e : scan_dataset(dir / "a").entries) {
    const auto archive = read_sample_archive(e.path);
    if (!is_augmented_id(e.id)) {
      EXPECT_EQ(archive.sample.provenance, Provenance::kOriginal);
      EXPECT_EQ(read_file(e.path), read_file(dir.path() / "d" / e.relative));
      continue;
    }
    ++augmented;
    EXPECT_EQ(e.split, Split::kTrain);
    EXPECT_EQ(archive.sample.provenance, Provenance::kCamAnd);
    const auto meta = Json::parse(decode_text_member(archive.aux.at(std::string(kAugmentationMember))));
    EXPECT_EQ(meta["op"], "and");
  }
  EXPECT_EQ(augmented, 14u);
}

TEST(Execute, ValidateAugmentedSet) {
  TempDir dir("cli_val");
  ASSERT_EQ(cli(generate_args(dir / "d")).code, kExitOk);
  ASSERT_EQ(cli({"augment", "--in", (dir / "d").string(), "--out", (dir / "a").string(), "--op", "or"}).code,
            kExitOk);
  const auto r = cli({"validate", "--in", (dir / "a").string(), "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["closure_violations"], 0);
  EXPECT_EQ(j["unpaired"], 0);
  EXPECT_GT(j["paired"].get<int>(), 0);

  const auto against = cli({"validate", "--in", (dir / "a").string(), "--against", (dir / "d").string()});
  EXPECT_EQ(against.code, kExitOk) << against.out;
  EXPECT_NE(against.out.find("status: ok"), std::string::npos);
}

TEST(Execute, VanillaClosureViolationsAreReported) {
  TempDir dir("cli_van");
  ASSERT_EQ(cli(generate_args(dir / "d")).code, kExitOk);
  ASSERT_EQ(cli({"augment", "--in", (dir / "d").string(), "--out", (dir / "v").string(), "--op", "vanilla"}).code,
            kExitOk);
  const auto r = cli({"validate", "--in", (dir / "v").string(), "--format", "json"});
  const auto j = r.json();
  EXPECT_GT(j["vanilla"]["closure_violations"].get<int>(), 0);
  EXPECT_EQ(j["morphological"]["closure_violations"], 0);
}

TEST(Execute, ExitCodesPartitionOutcomes) {
  TempDir dir("cli_exit");
  EXPECT_EQ(cli({"stats", "--in", (dir / "missing").string()}).code, kExitIo);
  EXPECT_EQ(cli({"validate", "--in", (dir / "missing").string()}).code, kExitIo);
  EXPECT_EQ(cli({"augment", "--in", (dir / "missing").string(), "--out", (dir / "o").string(), "--op", "or"}).code,
            kExitIo);
  EXPECT_EQ(cli({"project", "--features", (dir / "missing.csv").string(), "--out", (dir / "o.csv").string()}).code,
            kExitIo);

  const auto center = dir.path() / "bad" / "center_single";
  fs::create_directories(center);
  write_text(center / "RAVEN_0_train.npz", "not a zip archive");
  EXPECT_EQ(cli({"stats", "--in", (dir / "bad").string()}).code, kExitIo);

  Rng rng(1);
  auto s = testing::random_sample(8, 8, 2, rng);
  s.candidates[5] = s.candidates[2];
  write_sample_archive(s, {}, dir.path() / "dup" / "center_single" / "RAVEN_0_train.npz",
                       {zip::Compression::kStored, {}, true});
  const auto r = cli({"validate", "--in", (dir / "dup").string(), "--format", "json"});
  EXPECT_EQ(r.code, kExitDomain);
  EXPECT_EQ(r.json()["status"], "failed");
  EXPECT_EQ(r.json()["invalid_samples"], 1);

  EXPECT_EQ(cli({"augment", "--in", (dir / "dup").string(), "--out", (dir / "dup2").string(), "--op", "or"}).code,
            kExitDomain);
  EXPECT_EQ(cli({"augment", "--in", (dir / "dup").string(), "--out", (dir / "dup" / "x").string(), "--op", "or"})
                .code,
            kExitUsage);
}

TEST(Execute, JobsNeverChangeOutputBytes) {
  TempDir dir("cli_jobs");
  ASSERT_EQ(cli(generate_args(dir / "d")).code, kExitOk);
  auto g8 = generate_args(dir / "d8");
  g8.insert(g8.end(), {"--jobs", "8"});
  ASSERT_EQ(cli(g8).code, kExitOk);
  EXPECT_EQ(tree_bytes(dir / "d"), tree_bytes(dir / "d8"));

  for (const std::string op : {"or", "vanilla"}) {
    const auto base = std::vector<std::string>{"augment", "--in", (dir / "d").string(), "--op", op, "--seed", "5"};
    auto j1 = base, j8 = base;
    j1.insert(j1.end(), {"--out", (dir / ("a1" + op)).string(), "--jobs", "1"});
    j8.insert(j8.end(), {"--out", (dir / ("a8" + op)).string(), "--jobs", "8"});
    ASSERT_EQ(cli(j1).code, kExitOk);
    ASSERT_EQ(cli(j8).code, kExitOk);
    EXPECT_EQ(tree_bytes(dir / ("a1" + op)), tree_bytes(dir / ("a8" + op))) << op;
  }
}

TEST(Execute, RepeatedRunsAreBitIdentical) {
  TempDir a("cli_rep_a"), b("cli_rep_b");
  ASSERT_EQ(cli(generate_args(a / "d")).code, kExitOk);
  ASSERT_EQ(cli(generate_args(b / "d")).code, kExitOk);
  EXPECT_EQ(tree_bytes(a / "d"), tree_bytes(b / "d"));
  auto deflate = generate_args(a / "z");
  deflate.push_back("--deflate");
  ASSERT_EQ(cli(deflate).code, kExitOk);
  const auto plain = scan_dataset(a / "d");
  const auto packed = scan_dataset(a / "z");
  ASSERT_EQ(plain.entries.size(), packed.entries.size());
  for (std::size_t i = 0; i < plain.entries.size(); ++i)
    EXPECT_EQ(read_sample_archive(plain.entries[i].path).sample, read_sample_archive(packed.entries[i].path).sample);
}

TEST(Execute, InputTreeIsNeverModified) {
  TempDir dir("cli_ro");
  ASSERT_EQ(cli(generate_args(dir / "d")).code, kExitOk);
  const auto before = tree_bytes(dir / "d");
  const auto in = (dir / "d").string();
  EXPECT_EQ(cli({"augment", "--in", in, "--out", (dir / "a").string(), "--op", "vanilla", "--jobs", "3"}).code, 0);
  EXPECT_EQ(cli({"validate", "--in", in}).code, kExitOk);
  EXPECT_EQ(cli({"validate", "--in", (dir / "a").string(), "--against", in}).code, kExitOk);
  EXPECT_EQ(cli({"stats", "--in", in}).code, kExitOk);
  EXPECT_EQ(cli({"resize", "--in", in, "--out", (dir / "r").string(), "--size", "80"}).code, kExitOk);
  EXPECT_EQ(tree_bytes(dir / "d"), before);
}

TEST(Execute, StatsTextAndJsonAgree) {
  TempDir dir("cli_stats");
  ASSERT_EQ(cli(generate_args(dir / "d", "2")).code, kExitOk);
  const auto text = cli({"stats", "--in", (dir / "d").string()});
  const auto json = cli({"stats", "--in", (dir / "d").string(), "--format", "json"});
  ASSERT_EQ(text.code, kExitOk);
  const auto j = json.json();
  EXPECT_EQ(j["total"], 14);
  EXPECT_EQ(j["configurations"]["grid3"], 2);
  EXPECT_NE(text.out.find("total: 14\n"), std::string::npos);
  EXPECT_NE(text.out.find("configurations.grid3: 2\n"), std::string::npos);
  EXPECT_THROW(Json::parse(text.out), Json::parse_error);
  const auto ordered = nlohmann::ordered_json::parse(json.out);
  std::vector<std::string> keys;
  for (const auto& [k, v] : ordered.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"command", "total", "configurations", "splits", "target_histogram",
                                            "provenance", "split_provenance", "skipped_files"}));
}

TEST(Execute, ResizeWritesTargetSize) {
  TempDir dir("cli_resize");
  ASSERT_EQ(cli(generate_args(dir / "d", "1")).code, kExitOk);
  const auto r = cli({"resize", "--in", (dir / "d").string(), "--out", (dir / "r").string(), "--size", "20x12"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.json()["samples"], 7);
  for (const auto& e : scan_dataset(dir / "r").entries) {
    const auto s = read_sample_archive(e.path).sample;
    EXPECT_EQ(s.context[0].width(), 20u);
    EXPECT_EQ(s.candidates[7].height(), 12u);
    const auto src = read_sample_archive(dir.path() / "d" / e.relative).sample;
    EXPECT_EQ(s.target, src.target);
    EXPECT_EQ(s.correct(), resize_panel(src.correct(), 20, 12));
  }
}

TEST(Execute, ProjectWritesScatter) {
  TempDir dir("cli_project");
  write_text(dir / "f.csv", "1,2,0.5,correct\n2,4.5,1,negative_original\n3,6,0,negative_synthetic\n0,1,2,correct\n");
  const auto r = cli({"project", "--features", (dir / "f.csv").string(), "--out", (dir / "s.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.json()["rows"], 4);
  const auto bytes = read_file(dir / "s.csv");
  const std::string text(bytes.begin(), bytes.end());
  EXPECT_EQ(text.rfind("x,y,label\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);

  write_text(dir / "plain.csv", "1,2\n2,5\n3,1\n");
  write_text(dir / "labels.txt", "correct\nnegative_original\nnegative_synthetic\n");
  EXPECT_EQ(cli({"project", "--features", (dir / "plain.csv").string(), "--out", (dir / "p.csv").string(),
                 "--labels", (dir / "labels.txt").string(), "--standardize"})
                .code,
            kExitOk);
  EXPECT_EQ(cli({"project", "--features", (dir / "plain.csv").string(), "--out", (dir / "p.csv").string()}).code,
            kExitUsage);
  write_text(dir / "flat.csv", "1,1,correct\n1,1,correct\n");
  EXPECT_EQ(cli({"project", "--features", (dir / "flat.csv").string(), "--out", (dir / "q.csv").string()}).code,
            kExitDomain);
}

}  // namespace
}  // namespace rpmaug::cli
