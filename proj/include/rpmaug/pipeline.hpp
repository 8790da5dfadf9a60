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
#include <atomic>
#include <bitset>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rpmaug/analysis.hpp"
#include "rpmaug/archive.hpp"
#include "rpmaug/domain.hpp"
#include "rpmaug/morph.hpp"
#include "rpmaug/puzzle.hpp"

namespace rpmaug {

/**
 * Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items must be
 * independent; results are whatever fn writes to its own slot. If any item
 * throws, the exception of the lowest failing index is rethrown after all
 * workers have stopped.
 */
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<std::size_t> failed_at;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failed_at || i < *failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
        stop.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline constexpr std::string_view kAugmentedSuffix = "_aug";

inline bool is_augmented_id(std::string_view id) { return id.ends_with(kAugmentedSuffix); }

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::vector<PuzzleConfiguration> configs{PuzzleConfiguration::kCenter};
  std::size_t count = 0;  // per configuration
  std::uint64_t seed = 0;
  puzzle::NegativeStyle style = puzzle::NegativeStyle::kRaven;
  std::size_t width = 160;
  std::size_t height = 160;
  std::array<unsigned, 3> split_ratio{6, 2, 2};  // train:val:test by id
  unsigned jobs = 1;
  zip::Compression compression = zip::Compression::kStored;
};

struct GenerateSummary {
  std::array<std::size_t, 3> per_split{};
  std::size_t total = 0;
};

/// Split of the `index`-th sample of a configuration under a train:val:test ratio.
inline Split split_for_index(std::size_t index, const std::array<unsigned, 3>& ratio) {
  const std::size_t period = ratio[0] + ratio[1] + ratio[2];
  require(period > 0, "split ratio must not be all zero");
  const std::size_t r = index % period;
  if (r < ratio[0]) return Split::kTrain;
  if (r < ratio[0] + ratio[1]) return Split::kVal;
  return Split::kTest;
}

/// Sample `index` of configuration `config`, reproducible from (seed, config, index).
inline puzzle::GeneratedSample generate_indexed(PuzzleConfiguration config, std::size_t index,
                                                const GenerateOptions& opt) {
  const auto ordinal = (static_cast<std::uint64_t>(config) << 32) | static_cast<std::uint64_t>(index);
  Rng rng = Rng::substream(opt.seed, ordinal);
  return puzzle::generate_sample(config, opt.style, opt.width, opt.height, rng);
}

inline GenerateSummary generate_dataset(const fs::path& out_dir, const GenerateOptions& opt) {
  struct Job {
    PuzzleConfiguration config;
    std::size_t index;
  };
  std::vector<Job> work;
  for (auto c : opt.configs)
    for (std::size_t i = 0; i < opt.count; ++i) work.push_back({c, i});

  parallel_for(work.size(), opt.jobs, [&](std::size_t k) {
    const auto& job = work[k];
    auto g = generate_indexed(job.config, job.index, opt);
    const Split split = split_for_index(job.index, opt.split_ratio);
    const fs::path path = out_dir / std::string(config_directory(job.config)) /
                          archive_file_name(std::to_string(job.index), split);
    write_sample_archive(g.sample, g.annotations, path, {opt.compression, {}, false});
  });

  GenerateSummary s;
  for (const auto& job : work) ++s.per_split[static_cast<std::size_t>(split_for_index(job.index, opt.split_ratio))];
  s.total = work.size();
  return s;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentOptions {
  MixRecipe recipe;
  std::vector<Split> splits{Split::kTrain};
  unsigned jobs = 1;
  zip::Compression compression = zip::Compression::kStored;
};

struct AugmentSummary {
  std::array<std::size_t, 3> originals{};  // per split, copied unchanged
  std::array<std::size_t, 3> synthetic{};  // per split, newly written
  std::size_t restored = 0;                // collisions resolved by keep-original
  std::size_t degenerate = 0;              // collisions kept by keep-mixed
  std::size_t skipped_files = 0;           // unrecognized files in the input tree

  std::size_t total(Split s) const {
    return originals[static_cast<std::size_t>(s)] + synthetic[static_cast<std::size_t>(s)];
  }
};

inline nlohmann::ordered_json augmentation_meta(const MixOutcome& m, const MixRecipe& r,
                                                const std::string& source, std::uint64_t ordinal) {
  nlohmann::ordered_json j;
  j["provenance"] = to_string(m.sample.provenance);
  j["source"] = source;
  j["op"] = to_string(r.kind);
  if (r.kind == MixKind::kVanilla) {
    j["alpha"] = r.alpha;
    j["seed"] = r.seed;
    j["ordinal"] = ordinal;
  }
  j["collision"] = to_string(r.collision);
  j["soft_labels"] = m.soft_labels;
  j["degenerate"] = m.degenerate;
  j["restored"] = m.restored;
  return j;
}

namespace detail {

inline void copy_bytes(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_directories(to.parent_path(), ec);
  fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
  if (ec) fail(ErrorCode::kIo, "cannot copy '" + from.string() + "' to '" + to.string() + "': " + ec.message());
}

inline bool same_or_nested(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  const auto ca = fs::weakly_canonical(a, ec);
  const auto cb = fs::weakly_canonical(b, ec);
  auto [ia, ib] = std::mismatch(ca.begin(), ca.end(), cb.begin(), cb.end());
  return ia == ca.end() || ib == cb.end();
}

}  // namespace detail

/**
 * Copies every archive under `in` to `out` and, for each original in the
 * selected splits, writes one mixed sample as RAVEN_<id>_aug_<split>.npz next
 * to it. The sample ordinal (position among selected originals in scan order)
 * seeds any randomness, so the output does not depend on `jobs`.
 */
inline AugmentSummary augment_dataset(const fs::path& in, const fs::path& out,
                                      const AugmentOptions& opt) {
  require(!detail::same_or_nested(in, out), "output directory must not overlap the input directory");
  const auto scan = scan_dataset(in);
  std::vector<const DatasetEntry*> selected;
  for (const auto& e : scan.entries)
    if (!is_augmented_id(e.id) &&
        std::find(opt.splits.begin(), opt.splits.end(), e.split) != opt.splits.end())
      selected.push_back(&e);

  AugmentSummary summary;
  summary.skipped_files = scan.warnings;
  for (const auto& e : scan.entries) ++summary.originals[static_cast<std::size_t>(e.split)];

  parallel_for(scan.entries.size(), opt.jobs, [&](std::size_t i) {
    const auto& e = scan.entries[i];
    detail::copy_bytes(e.path, out / e.relative);
  });

  std::vector<std::size_t> restored(selected.size()), degenerate(selected.size());
  parallel_for(selected.size(), opt.jobs, [&](std::size_t k) {
    const auto& e = *selected[k];
    const auto archive = read_sample_archive(e.path);
    const auto mixed = augment_sample(archive.sample, opt.recipe, k);
    AuxBlobs aux = archive.aux;
    aux[std::string(kAugmentationMember)] = encode_text_member(
        augmentation_meta(mixed, opt.recipe, e.path.filename().string(), k).dump());
    const fs::path path = out / std::string(config_directory(e.config)) /
                          archive_file_name(e.id + std::string(kAugmentedSuffix), e.split);
    write_sample_archive(mixed.sample, aux, path, {opt.compression, {}, true});
    restored[k] = mixed.restored.size();
    degenerate[k] = mixed.degenerate.size();
  });

  for (std::size_t k = 0; k < selected.size(); ++k) {
    ++summary.synthetic[static_cast<std::size_t>(selected[k]->split)];
    summary.restored += restored[k];
    summary.degenerate += degenerate[k];
  }
  return summary;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateSummary {
  std::size_t samples = 0;
  std::size_t invalid_samples = 0;
  std::map<std::string, std::size_t> violations;  // by violation code
  std::size_t paired = 0;                          // augmented samples matched to an original
  std::size_t unpaired = 0;                        // augmented samples without an original
  ClosureReport morphological;                     // cam_or / cam_and samples
  ClosureReport vanilla;                           // reported, never a failure
  std::size_t skipped_files = 0;

  bool ok() const {
    return invalid_samples == 0 && unpaired == 0 && morphological.closure_violations == 0 &&
           morphological.value_set_closed();
  }
};

namespace detail {

inline void accumulate(ClosureReport& into, const ClosureReport& r) {
  into.samples_checked += r.samples_checked;
  into.closure_violations += r.closure_violations;
  into.degenerate_candidates += r.degenerate_candidates;
}

}  // namespace detail

/**
 * Validates every archive under `in`. Augmented samples are paired with their
 * originals, looked up under `against` (or `in` when absent) by stripping the
 * _aug suffix, and checked for closure.
 */
inline ValidateSummary validate_dataset(const fs::path& in, const std::optional<fs::path>& against,
                                        unsigned jobs = 1) {
  const auto scan = scan_dataset(in);
  const fs::path originals_root = against.value_or(in);
  struct Result {
    ValidationReport report;
    std::optional<Provenance> provenance;  // set for paired augmented samples
    ClosureReport closure;
    std::bitset<256> before, after;
    bool unpaired = false;
  };
  std::vector<Result> results(scan.entries.size());

  parallel_for(scan.entries.size(), jobs, [&](std::size_t i) {
    const auto& e = scan.entries[i];
    auto& r = results[i];
    const auto archive = read_sample_archive(e.path);
    r.report = validate_sample(archive.sample);
    if (!is_augmented_id(e.id) && archive.sample.provenance == Provenance::kOriginal) return;
    const std::string base = is_augmented_id(e.id) ? e.id.substr(0, e.id.size() - kAugmentedSuffix.size()) : e.id;
    const fs::path orig_path = originals_root / std::string(config_directory(e.config)) /
                               archive_file_name(base, e.split);
    std::error_code ec;
    if (!fs::is_regular_file(orig_path, ec)) {
      r.unpaired = true;
      return;
    }
    const auto original = read_sample_archive(orig_path);
    r.provenance = archive.sample.provenance;
    r.closure = check_closure_sample(original.sample, archive.sample);
    detail::collect_values(original.sample, r.before);
    detail::collect_values(archive.sample, r.after);
  });

  ValidateSummary s;
  s.skipped_files = scan.warnings;
  std::bitset<256> mb, ma, vb, va;
  for (const auto& r : results) {
    ++s.samples;
    if (!r.report.empty()) ++s.invalid_samples;
    for (const auto& v : r.report) ++s.violations[std::string(to_string(v.code))];
    if (r.unpaired) ++s.unpaired;
    if (!r.provenance) continue;
    ++s.paired;
    if (*r.provenance == Provenance::kVanilla) {
      detail::accumulate(s.vanilla, r.closure);
      vb |= r.before;
      va |= r.after;
    } else {
      detail::accumulate(s.morphological, r.closure);
      mb |= r.before;
      ma |= r.after;
    }
  }
  s.morphological.value_set_before = detail::to_sorted(mb);
  s.morphological.value_set_after = detail::to_sorted(ma);
  s.vanilla.value_set_before = detail::to_sorted(vb);
  s.vanilla.value_set_after = detail::to_sorted(va);
  return s;
}

// ---------------------------------------------------------------------------
// stats / resize

struct DirectoryStats {
  DatasetStats stats;
  std::size_t skipped_files = 0;
};

inline DirectoryStats stats_dataset(const fs::path& in, unsigned jobs = 1) {
  const auto scan = scan_dataset(in);
  std::vector<RpmSample> samples(scan.entries.size());
  parallel_for(scan.entries.size(), jobs, [&](std::size_t i) {
    samples[i] = read_sample_archive(scan.entries[i].path).sample;
  });
  DirectoryStats out;
  out.skipped_files = scan.warnings;
  for (std::size_t i = 0; i < samples.size(); ++i) out.stats.add(samples[i], scan.entries[i].split);
  return out;
}

struct ResizeSummary {
  std::size_t samples = 0;
  std::size_t duplicates = 0;  // samples where resizing merged a negative into the answer
};

inline ResizeSummary resize_dataset(const fs::path& in, const fs::path& out, std::size_t width,
                                    std::size_t height, unsigned jobs = 1) {
  require(!detail::same_or_nested(in, out), "output directory must not overlap the input directory");
  const auto scan = scan_dataset(in);
  std::vector<char> dup(scan.entries.size(), 0);
  parallel_for(scan.entries.size(), jobs, [&](std::size_t i) {
    const auto& e = scan.entries[i];
    const auto archive = read_sample_archive(e.path);
    const auto resized = resize_sample(archive.sample, width, height);
    dup[i] = contains(validate_sample(resized), ViolationCode::kDuplicateCorrect);
    write_sample_archive(resized, archive.aux, out / e.relative, {zip::Compression::kStored, {}, true});
  });
  return {scan.entries.size(),
          static_cast<std::size_t>(std::count(dup.begin(), dup.end(), 1))};
}

}  // namespace rpmaug
