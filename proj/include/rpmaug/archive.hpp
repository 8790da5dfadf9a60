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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "rpmaug/domain.hpp"
#include "rpmaug/error.hpp"
#include "rpmaug/npy.hpp"
#include "rpmaug/zip.hpp"

namespace rpmaug {

namespace fs = std::filesystem;

/// Opaque archive members keyed by their full member name ("meta_matrix.npy").
using AuxBlobs = std::map<std::string, std::vector<std::uint8_t>>;

/// Member holding augmentation bookkeeping as a uint8 array of JSON text.
inline constexpr std::string_view kAugmentationMember = "augmentation.npy";
/// Member holding generator annotations as a uint8 array of JSON text.
inline constexpr std::string_view kSymbolicMember = "symbolic.npy";

struct MemberNames {
  std::string image = "image";
  std::string target = "target";
};

struct WriteOptions {
  zip::Compression compression = zip::Compression::kStored;
  MemberNames names;
  /// Permit DUPLICATE_CORRECT (collision policy keep-mixed flags, not drops).
  bool allow_duplicate_correct = false;
};

struct SampleArchive {
  RpmSample sample;
  AuxBlobs aux;
};

// ---------------------------------------------------------------------------
// File helpers

inline std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  const auto size = in.tellg();
  if (size < 0) fail(ErrorCode::kIo, "cannot size '" + path.string() + "'");
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (in.gcount() != size) fail(ErrorCode::kIo, "read failed on '" + path.string() + "'");
  return bytes;
}

inline void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed on '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Text members

inline std::vector<std::uint8_t> encode_text_member(std::string_view text) {
  const std::vector<std::uint8_t> payload(text.begin(), text.end());
  return npy::write_array({std::string(npy::kDtypeU8), false, {payload.size()}}, payload);
}

inline std::string decode_text_member(std::span<const std::uint8_t> bytes) {
  const auto arr = npy::read_array(bytes);
  if (arr.header.descr != npy::kDtypeU8 || arr.header.shape.size() != 1)
    fail(ErrorCode::kWrongShape, "text member must be a 1-D uint8 array");
  return std::string(arr.payload.begin(), arr.payload.end());
}

// ---------------------------------------------------------------------------
// Sample archives

/**
 * Decodes a 16-panel container: image[0..7] are the context panels and
 * image[8..15] the candidates. Members other than image/target are returned
 * untouched in `aux`.
 */
inline SampleArchive decode_sample_archive(std::span<const std::uint8_t> bytes,
                                           PuzzleConfiguration config = PuzzleConfiguration::kCenter,
                                           const MemberNames& names = {}) {
  const std::string image_member = names.image + ".npy";
  const std::string target_member = names.target + ".npy";
  auto entries = zip::read(bytes);
  std::optional<npy::ArrayView> image, target;
  SampleArchive out;
  for (auto& e : entries) {
    if (e.name == image_member)
      image = npy::view_array(e.data);
    else if (e.name == target_member)
      target = npy::view_array(e.data);
  }
  if (!image) fail(ErrorCode::kMissingMember, "archive has no '" + image_member + "'");
  if (!target) fail(ErrorCode::kMissingMember, "archive has no '" + target_member + "'");

  const auto& ih = image->header;
  if (ih.fortran_order)
    fail(ErrorCode::kFortranOrder, "image array is Fortran-ordered; C order is required");
  if (ih.descr != npy::kDtypeU8)
    fail(ErrorCode::kUnsupportedDtype, "image dtype must be |u1, found " + ih.descr);
  if (ih.shape.size() != 3 || ih.shape[0] != kContextCount + kCandidateCount ||
      ih.shape[1] == 0 || ih.shape[2] == 0)
    fail(ErrorCode::kWrongShape, "image shape must be (16, H, W), found " + npy::shape_repr(ih.shape));

  const auto& th = target->header;
  if (th.descr != npy::kDtypeI64 || npy::element_count(th.shape) != 1)
    fail(ErrorCode::kWrongShape, "target must be a single <i8 value");
  const std::int64_t t = npy::decode_i64(target->payload);
  if (t < 0 || t >= static_cast<std::int64_t>(kCandidateCount))
    fail(ErrorCode::kTargetOutOfRange, "target " + std::to_string(t) + " outside [0, 8)");

  const auto h = static_cast<std::size_t>(ih.shape[1]);
  const auto w = static_cast<std::size_t>(ih.shape[2]);
  const std::size_t plane = w * h;
  auto& s = out.sample;
  for (std::size_t i = 0; i < kContextCount + kCandidateCount; ++i) {
    const auto first = image->payload.begin() + static_cast<std::ptrdiff_t>(i * plane);
    Panel p(w, h, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(plane)));
    (i < kContextCount ? s.context : s.candidates).push_back(std::move(p));
  }
  s.target = static_cast<int>(t);
  s.config = config;
  for (auto& e : entries)
    if (e.name != image_member && e.name != target_member) out.aux.emplace(std::move(e.name), std::move(e.data));
  s.provenance = Provenance::kOriginal;
  if (auto it = out.aux.find(std::string(kAugmentationMember)); it != out.aux.end()) {
    const auto meta = nlohmann::json::parse(decode_text_member(it->second), nullptr, false);
    if (meta.is_object() && meta.contains("provenance") && meta["provenance"].is_string())
      if (auto p = provenance_from_string(meta["provenance"].get<std::string>())) s.provenance = *p;
  }
  return out;
}

inline std::vector<std::uint8_t> encode_sample_archive(const RpmSample& s,
                                                       const AuxBlobs& aux = {},
                                                       const WriteOptions& opts = {}) {
  auto report = validate_sample(s);
  if (opts.allow_duplicate_correct)
    std::erase_if(report, [](const Violation& v) { return v.code == ViolationCode::kDuplicateCorrect; });
  if (!report.empty()) {
    std::string what = "refusing to write invalid sample:";
    for (const auto& v : report) what += " " + std::string(to_string(v.code));
    fail(ErrorCode::kInvalidArgument, what);
  }
  const std::size_t w = s.context.front().width();
  const std::size_t h = s.context.front().height();
  std::vector<std::uint8_t> pixels;
  pixels.reserve(16 * w * h);
  for (const auto* group : {&s.context, &s.candidates})
    for (const auto& p : *group) pixels.insert(pixels.end(), p.pixels().begin(), p.pixels().end());

  std::vector<zip::Entry> entries;
  const auto& names = opts.names;
  entries.push_back({names.image + ".npy",
                     npy::write_array({std::string(npy::kDtypeU8), false, {16, h, w}}, pixels)});
  entries.push_back({names.target + ".npy",
                     npy::write_array({std::string(npy::kDtypeI64), false, {}},
                                      npy::encode_i64(s.target))});
  for (const auto& [name, blob] : aux) {
    require(name != entries[0].name && name != entries[1].name,
            "auxiliary member '" + name + "' collides with a sample member");
    entries.push_back({name, blob});
  }
  return zip::write(entries, opts.compression);
}

/// Configuration implied by the archive's parent directory, if recognized.
inline std::optional<PuzzleConfiguration> config_from_path(const fs::path& path) {
  return config_from_directory(path.parent_path().filename().string());
}

inline SampleArchive read_sample_archive(const fs::path& path, const MemberNames& names = {}) {
  const auto config = config_from_path(path).value_or(PuzzleConfiguration::kCenter);
  return decode_sample_archive(read_file(path), config, names);
}

inline void write_sample_archive(const RpmSample& s, const AuxBlobs& aux, const fs::path& path,
                                 const WriteOptions& opts = {}) {
  write_file(path, encode_sample_archive(s, aux, opts));
}

// ---------------------------------------------------------------------------
// Dataset layout: <root>/<config_dir>/RAVEN_<id>_<split>.npz

struct DatasetEntry {
  fs::path path;
  std::string relative;  // generic-format path below the root
  PuzzleConfiguration config;
  Split split;
  std::string id;
};

struct ScanResult {
  std::vector<DatasetEntry> entries;
  std::size_t warnings = 0;
};

inline std::string archive_file_name(std::string_view id, Split split) {
  return "RAVEN_" + std::string(id) + "_" + std::string(to_string(split)) + ".npz";
}

/// Parses "RAVEN_<id>_<split>.npz"; the id may itself contain underscores.
inline std::optional<std::pair<std::string, Split>> parse_archive_name(const std::string& name) {
  static const std::regex kName(R"(RAVEN_(.+)_(train|val|test)\.npz)");
  std::smatch m;
  if (!std::regex_match(name, m, kName)) return std::nullopt;
  return std::make_pair(m[1].str(), *split_from_string(m[2].str()));
}

/**
 * Lists archives in lexicographic order of their relative paths. Files that do
 * not follow the layout are skipped and counted in `warnings`. An empty
 * `splits` accepts every split.
 */
inline ScanResult scan_dataset(const fs::path& root, const std::vector<Split>& splits = {}) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    fail(ErrorCode::kIo, "'" + root.string() + "' is not a readable directory");
  ScanResult out;
  fs::recursive_directory_iterator it(root, ec), end;
  if (ec) fail(ErrorCode::kIo, "cannot read '" + root.string() + "': " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) fail(ErrorCode::kIo, "cannot read '" + root.string() + "': " + ec.message());
    if (!it->is_regular_file()) continue;
    const fs::path rel = fs::relative(it->path(), root);
    const auto parsed = parse_archive_name(it->path().filename().string());
    const auto config = config_from_path(rel);
    if (!parsed || !config || std::distance(rel.begin(), rel.end()) != 2) {
      ++out.warnings;
      continue;
    }
    if (!splits.empty() && std::find(splits.begin(), splits.end(), parsed->second) == splits.end())
      continue;
    out.entries.push_back({it->path(), rel.generic_string(), *config, parsed->second, parsed->first});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.relative < b.relative; });
  return out;
}

}  // namespace rpmaug
