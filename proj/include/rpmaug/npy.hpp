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
#include <cctype>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpmaug/error.hpp"

namespace rpmaug::npy {

/**
 * Single-array (.npy) container.
 *
 *   bytes 0..5   0x93 'N' 'U' 'M' 'P' 'Y'
 *   bytes 6..7   major, minor version
 *   v1.0         uint16 LE header length, v2.0 uint32 LE header length
 *   header       ASCII dict literal {'descr': .., 'fortran_order': .., 'shape': (..), }
 *                space padded and newline terminated
 *   payload      elements in C order
 *
 * The writer always emits version 1.0 with the same padding numpy >= 1.23
 * uses (room for the leading axis to grow to 21 digits, then alignment of the
 * whole preamble to 64 bytes), so its output is byte-identical to np.save.
 */

inline constexpr std::string_view kDtypeU8 = "|u1";
inline constexpr std::string_view kDtypeI64 = "<i8";
inline constexpr std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
inline constexpr std::size_t kAlignment = 64;
inline constexpr std::size_t kGrowthAxisDigits = 21;

struct ArrayHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::uint64_t> shape;

  friend bool operator==(const ArrayHeader&, const ArrayHeader&) = default;
};

struct Array {
  ArrayHeader header;
  std::vector<std::uint8_t> payload;
};

/// Parsed header plus a view of the payload inside the source bytes.
struct ArrayView {
  ArrayHeader header;
  std::span<const std::uint8_t> payload;
};

inline std::size_t element_size(std::string_view descr) {
  if (descr == kDtypeU8) return 1;
  if (descr == kDtypeI64) return 8;
  fail(ErrorCode::kUnsupportedDtype, "unsupported dtype '" + std::string(descr) + "'");
}

/// Product of the shape; throws if it does not fit in 64 bits.
inline std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d)
      fail(ErrorCode::kMalformedHeader, "shape product overflows 64 bits");
    n *= d;
  }
  return n;
}

inline std::string shape_repr(const std::vector<std::uint64_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

inline std::string header_text(const ArrayHeader& h) {
  std::string text = "{'descr': '" + h.descr + "', 'fortran_order': " +
                     (h.fortran_order ? "True" : "False") +
                     ", 'shape': " + shape_repr(h.shape) + ", }";
  if (!h.shape.empty()) {
    const auto growth_dim = h.fortran_order ? h.shape.back() : h.shape.front();
    const auto digits = std::to_string(growth_dim).size();
    if (digits < kGrowthAxisDigits) text.append(kGrowthAxisDigits - digits, ' ');
  }
  // magic(6) + version(2) + length(2) + text + '\n'
  const std::size_t preamble = 10 + text.size() + 1;
  const std::size_t pad = (kAlignment - preamble % kAlignment) % kAlignment;
  text.append(pad, ' ');
  text.push_back('\n');
  return text;
}

inline std::vector<std::uint8_t> write_array(const ArrayHeader& header,
                                             std::span<const std::uint8_t> payload) {
  const std::size_t esize = element_size(header.descr);
  const std::uint64_t count = element_count(header.shape);
  if (count > std::numeric_limits<std::uint64_t>::max() / esize ||
      payload.size() != count * esize)
    fail(ErrorCode::kSizeMismatch, "payload has " + std::to_string(payload.size()) +
                                       " bytes, shape requires " +
                                       std::to_string(count * esize));
  const std::string text = header_text(header);
  if (text.size() > 0xffff)
    fail(ErrorCode::kMalformedHeader, "header too long for format version 1.0");

  std::vector<std::uint8_t> out(10 + text.size() + payload.size());
  auto it = std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
  *it++ = 1;
  *it++ = 0;
  *it++ = static_cast<std::uint8_t>(text.size() & 0xff);
  *it++ = static_cast<std::uint8_t>(text.size() >> 8);
  it = std::copy(text.begin(), text.end(), it);
  std::copy(payload.begin(), payload.end(), it);
  return out;
}

namespace detail {

// Recursive-descent reader for the Python literal subset used by headers.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  ArrayHeader parse() {
    ArrayHeader h;
    bool seen_descr = false, seen_order = false, seen_shape = false;
    expect('{');
    for (;;) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = string_literal();
      expect(':');
      if (key == "descr") {
        h.descr = string_literal();
        seen_descr = true;
      } else if (key == "fortran_order") {
        h.fortran_order = boolean();
        seen_order = true;
      } else if (key == "shape") {
        h.shape = tuple();
        seen_shape = true;
      } else {
        error("unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      break;
    }
    skip_ws();
    if (pos_ != text_.size()) error("trailing characters after dictionary");
    if (!(seen_descr && seen_order && seen_shape)) error("missing required key");
    return h;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::kMalformedHeader, what + " at offset " + std::to_string(pos_));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string string_literal() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') error("expected string literal");
    const auto end = text_.find(quote, pos_ + 1);
    if (end == std::string_view::npos) error("unterminated string literal");
    std::string s(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return s;
  }

  bool boolean() {
    skip_ws();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    error("expected True or False");
  }

  std::uint64_t integer() {
    skip_ws();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) error("expected dimension");
    std::uint64_t v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      const auto digit = static_cast<std::uint64_t>(peek() - '0');
      if (v > (std::numeric_limits<std::uint64_t>::max() - digit) / 10)
        error("dimension overflows 64 bits");
      v = v * 10 + digit;
      ++pos_;
    }
    if (peek() == 'L') ++pos_;  // Python 2 long suffix
    return v;
  }

  std::vector<std::uint64_t> tuple() {
    std::vector<std::uint64_t> dims;
    expect('(');
    for (;;) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      dims.push_back(integer());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(')');
      return dims;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ArrayHeader parse_header(std::string_view text) {
  return detail::HeaderParser(text).parse();
}

/**
 * Inverse of write_array. Accepts versions 1.0 and 2.0 and any header padding.
 * Errors: kBadMagic, kUnsupportedVersion, kMalformedHeader, kUnsupportedDtype,
 * kTruncated (fewer payload bytes than the shape needs), kSizeMismatch
 * (trailing bytes).
 */
inline ArrayView view_array(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    fail(ErrorCode::kBadMagic, "not a single-array file");
  if (bytes.size() < 8) fail(ErrorCode::kTruncated, "missing version bytes");
  const std::uint8_t major = bytes[6];
  const std::uint8_t minor = bytes[7];
  if ((major != 1 && major != 2) || minor != 0)
    fail(ErrorCode::kUnsupportedVersion,
         "version " + std::to_string(major) + "." + std::to_string(minor));

  const std::size_t len_bytes = major == 1 ? 2 : 4;
  if (bytes.size() < 8 + len_bytes) fail(ErrorCode::kTruncated, "missing header length");
  std::size_t header_len = 0;
  for (std::size_t i = 0; i < len_bytes; ++i)
    header_len |= static_cast<std::size_t>(bytes[8 + i]) << (8 * i);
  const std::size_t data_start = 8 + len_bytes + header_len;
  if (bytes.size() < data_start) fail(ErrorCode::kTruncated, "header extends past end of data");

  const auto* text_begin = reinterpret_cast<const char*>(bytes.data() + 8 + len_bytes);
  ArrayView arr{parse_header(std::string_view(text_begin, header_len)), {}};

  const std::size_t esize = element_size(arr.header.descr);
  const std::uint64_t count = element_count(arr.header.shape);
  if (count > std::numeric_limits<std::uint64_t>::max() / esize)
    fail(ErrorCode::kMalformedHeader, "payload size overflows 64 bits");
  const std::uint64_t need = count * esize;
  const std::uint64_t have = bytes.size() - data_start;
  if (have < need)
    fail(ErrorCode::kTruncated, "payload has " + std::to_string(have) + " bytes, shape requires " +
                                    std::to_string(need));
  if (have > need)
    fail(ErrorCode::kSizeMismatch, std::to_string(have - need) + " trailing bytes after payload");
  arr.payload = bytes.subspan(data_start);
  return arr;
}

inline Array read_array(std::span<const std::uint8_t> bytes) {
  auto view = view_array(bytes);
  return {std::move(view.header), {view.payload.begin(), view.payload.end()}};
}

/// Little-endian int64 scalar helpers for label arrays.
inline std::vector<std::uint8_t> encode_i64(std::int64_t v) {
  std::vector<std::uint8_t> b(8);
  const auto u = static_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(u >> (8 * i));
  return b;
}

inline std::int64_t decode_i64(std::span<const std::uint8_t> b) {
  require(b.size() >= 8, "decode_i64 needs 8 bytes");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<std::int64_t>(u);
}

}  // namespace rpmaug::npy
