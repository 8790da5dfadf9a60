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

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rpmaug/error.hpp"

namespace rpmaug::zip {

/**
 * Minimal zip container for array archives.
 *
 * The writer emits classic (non-zip64) archives with a fixed DOS timestamp
 * (1980-01-01 00:00:00), no extra fields and members in caller order, so equal
 * input always yields equal bytes. The reader locates members through the
 * central directory, understands zip64 size/offset records (numpy writes
 * them), and handles stored and deflated members. Checksums are verified.
 */

struct Entry {
  std::string name;
  std::vector<std::uint8_t> data;
};

enum class Compression { kStored, kDeflate };

namespace detail {

inline constexpr std::uint32_t kLocalSig = 0x04034b50;
inline constexpr std::uint32_t kCentralSig = 0x02014b50;
inline constexpr std::uint32_t kEndSig = 0x06054b50;
inline constexpr std::uint32_t kZip64EndSig = 0x06064b50;
inline constexpr std::uint32_t kZip64LocatorSig = 0x07064b50;
inline constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
inline constexpr std::uint16_t kDosTime = 0;
inline constexpr std::uint16_t kMethodStored = 0;
inline constexpr std::uint16_t kMethodDeflate = 8;

inline void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Cursor {
 public:
  Cursor(std::span<const std::uint8_t> bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  std::uint64_t get(int width) {
    if (pos_ + static_cast<std::size_t>(width) > bytes_.size())
      fail(ErrorCode::kBadZip, "record extends past end of archive");
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > bytes_.size()) fail(ErrorCode::kBadZip, "record extends past end of archive");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < data.size()) {
    const auto chunk = static_cast<uInt>(
        std::min<std::size_t>(data.size() - off, std::numeric_limits<uInt>::max()));
    crc = ::crc32(crc, data.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::vector<std::uint8_t> deflate_raw(std::span<const std::uint8_t> data) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    fail(ErrorCode::kIo, "deflateInit2 failed");
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(data.size())));
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = ::deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail(ErrorCode::kIo, "deflate did not finish");
  return out;
}

inline std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> data,
                                             std::uint64_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) fail(ErrorCode::kBadZip, "inflateInit2 failed");
  std::vector<std::uint8_t> out(expected);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = ::inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected)
    fail(ErrorCode::kBadZip, "corrupt deflate stream");
  return out;
}

}  // namespace detail

inline std::vector<std::uint8_t> write(const std::vector<Entry>& entries,
                                       Compression compression = Compression::kStored) {
  using namespace detail;
  struct Record {
    std::uint32_t crc;
    std::uint32_t csize;
    std::uint32_t usize;
    std::uint32_t offset;
    std::uint16_t method;
  };
  constexpr std::uint64_t kLimit = 0xffffffffULL;

  std::vector<std::uint8_t> out;
  std::vector<Record> records;
  if (compression == Compression::kStored) {
    std::size_t total = 22;
    for (const auto& e : entries) total += 76 + 2 * e.name.size() + e.data.size();
    out.reserve(total);
  }
  for (const auto& e : entries) {
    require(!e.name.empty() && e.name.size() <= 0xffff, "zip member name length");
    std::vector<std::uint8_t> deflated;
    std::span<const std::uint8_t> body = e.data;
    std::uint16_t method = kMethodStored;
    if (compression == Compression::kDeflate) {
      deflated = deflate_raw(e.data);
      body = deflated;
      method = kMethodDeflate;
    }
    if (e.data.size() > kLimit || body.size() > kLimit || out.size() > kLimit)
      fail(ErrorCode::kIo, "archive exceeds 4 GiB; zip64 output is not supported");
    const Record r{crc32_of(e.data), static_cast<std::uint32_t>(body.size()),
                   static_cast<std::uint32_t>(e.data.size()),
                   static_cast<std::uint32_t>(out.size()), method};
    records.push_back(r);

    put32(out, kLocalSig);
    put16(out, 20);  // version needed
    put16(out, 0);   // flags
    put16(out, r.method);
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, r.crc);
    put32(out, r.csize);
    put32(out, r.usize);
    put16(out, static_cast<std::uint16_t>(e.name.size()));
    put16(out, 0);  // extra length
    out.insert(out.end(), e.name.begin(), e.name.end());
    out.insert(out.end(), body.begin(), body.end());
  }

  const std::size_t cd_offset = out.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto& r = records[i];
    put32(out, kCentralSig);
    put16(out, 20);  // version made by
    put16(out, 20);  // version needed
    put16(out, 0);
    put16(out, r.method);
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, r.crc);
    put32(out, r.csize);
    put32(out, r.usize);
    put16(out, static_cast<std::uint16_t>(e.name.size()));
    put16(out, 0);  // extra
    put16(out, 0);  // comment
    put16(out, 0);  // disk
    put16(out, 0);  // internal attributes
    put32(out, 0);  // external attributes
    put32(out, r.offset);
    out.insert(out.end(), e.name.begin(), e.name.end());
  }
  const std::size_t cd_size = out.size() - cd_offset;
  if (entries.size() > 0xffff || out.size() > kLimit)
    fail(ErrorCode::kIo, "archive exceeds classic zip limits");

  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(cd_size));
  put32(out, static_cast<std::uint32_t>(cd_offset));
  put16(out, 0);  // comment length
  return out;
}

/// Reads every member in central-directory order.
inline std::vector<Entry> read(std::span<const std::uint8_t> bytes) {
  using namespace detail;
  constexpr std::size_t kEndSize = 22;
  if (bytes.size() < kEndSize) fail(ErrorCode::kBadZip, "too short for a zip archive");

  // The end record sits before an optional comment of at most 65535 bytes.
  std::size_t end_pos = std::string::npos;
  const std::size_t lowest = bytes.size() > kEndSize + 0xffff ? bytes.size() - kEndSize - 0xffff : 0;
  for (std::size_t p = bytes.size() - kEndSize + 1; p-- > lowest;) {
    if (Cursor(bytes, p).u32() == kEndSig) {
      end_pos = p;
      break;
    }
  }
  if (end_pos == std::string::npos) fail(ErrorCode::kBadZip, "end of central directory not found");

  Cursor end(bytes, end_pos + 4);
  end.u16();
  end.u16();
  end.u16();
  std::uint64_t count = end.u16();
  std::uint64_t cd_size = end.u32();
  std::uint64_t cd_offset = end.u32();

  if ((count == 0xffff || cd_size == 0xffffffff || cd_offset == 0xffffffff) && end_pos >= 20) {
    Cursor loc(bytes, end_pos - 20);
    if (loc.u32() == kZip64LocatorSig) {
      loc.u32();
      Cursor z64(bytes, loc.u64());
      if (z64.u32() != kZip64EndSig) fail(ErrorCode::kBadZip, "bad zip64 end record");
      z64.u64();  // record size
      z64.u16();
      z64.u16();
      z64.u32();
      z64.u32();
      z64.u64();
      count = z64.u64();
      cd_size = z64.u64();
      cd_offset = z64.u64();
    }
  }
  if (cd_offset + cd_size > bytes.size()) fail(ErrorCode::kBadZip, "central directory out of range");

  std::vector<Entry> entries;
  Cursor cd(bytes, cd_offset);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (cd.u32() != kCentralSig) fail(ErrorCode::kBadZip, "bad central directory signature");
    cd.u16();
    cd.u16();
    const std::uint16_t flags = cd.u16();
    const std::uint16_t method = cd.u16();
    cd.u16();
    cd.u16();
    const std::uint32_t crc = cd.u32();
    std::uint64_t csize = cd.u32();
    std::uint64_t usize = cd.u32();
    const std::uint16_t name_len = cd.u16();
    const std::uint16_t extra_len = cd.u16();
    const std::uint16_t comment_len = cd.u16();
    cd.u16();
    cd.u16();
    cd.u32();
    std::uint64_t offset = cd.u32();
    const auto name = cd.take(name_len);
    const auto extra = cd.take(extra_len);
    cd.take(comment_len);

    // zip64 extended information: only fields saturated in the fixed record.
    for (Cursor x(extra, 0); x.pos() + 4 <= extra.size();) {
      const std::uint16_t id = x.u16();
      const std::uint16_t len = x.u16();
      const std::size_t stop = x.pos() + len;
      if (id == 0x0001) {
        if (usize == 0xffffffff) usize = x.u64();
        if (csize == 0xffffffff) csize = x.u64();
        if (offset == 0xffffffff) offset = x.u64();
      }
      if (stop > extra.size()) fail(ErrorCode::kBadZip, "extra field out of range");
      x = Cursor(extra, stop);
    }

    if (flags & 0x1) fail(ErrorCode::kBadZip, "encrypted members are not supported");
    Cursor local(bytes, offset);
    if (local.u32() != kLocalSig) fail(ErrorCode::kBadZip, "bad local header signature");
    local.take(22);
    const std::uint16_t lname = local.u16();
    const std::uint16_t lextra = local.u16();
    local.take(lname);
    local.take(lextra);
    const auto body = local.take(csize);

    Entry e{std::string(name.begin(), name.end()), {}};
    if (method == kMethodStored) {
      if (csize != usize) fail(ErrorCode::kBadZip, "stored member size mismatch");
      e.data.assign(body.begin(), body.end());
    } else if (method == kMethodDeflate) {
      e.data = inflate_raw(body, usize);
    } else {
      fail(ErrorCode::kBadZip, "unsupported compression method " + std::to_string(method));
    }
    if (crc32_of(e.data) != crc)
      fail(ErrorCode::kBadZip, "checksum mismatch in member '" + e.name + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace rpmaug::zip
