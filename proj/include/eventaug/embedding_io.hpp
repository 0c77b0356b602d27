// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// SEDEMB01 embedding file layout (all integers little-endian):
//
//   bytes 0..7    magic "SEDEMB01"
//   u32           rows
//   u32           dim
//   rows times:   u32 byte length, then that many UTF-8 bytes (row id)
//   rows*dim      IEEE-754 binary32, row-major
//
// A 0-row file is exactly the 16-byte header.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "eventaug/core.hpp"
#include "eventaug/error.hpp"

namespace eventaug {

inline constexpr std::string_view kEmbeddingMagic = "SEDEMB01";

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

inline std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError(std::string(what) + " exceeds 32-bit range");
  }
  return static_cast<std::uint32_t>(v);
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string(), "read failed");
  return bytes;
}

/// Write to a sibling temp file, then rename over the target.
inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError(path.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path.string(), "rename failed: " + ec.message());
}

/// Bounds-checked little-endian reader over an in-memory buffer.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

  const unsigned char* take(std::size_t n, const char* what) {
    if (remaining() < n) throw TruncatedError(std::string("truncated ") + what, n, remaining());
    auto p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += n;
    return p;
  }
  std::uint32_t u32(const char* what) { return get_u32(take(4, what)); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Serialize to the SEDEMB01 byte layout. Rejects non-finite values.
inline std::string encode_embeddings(const EmbeddingMatrix& m) {
  m.validate();
  std::string out;
  out.reserve(16 + m.rows() * (8 + 4 * m.dim()));
  out.append(kEmbeddingMagic);
  detail::put_u32(out, detail::checked_u32(m.rows(), "row count"));
  detail::put_u32(out, detail::checked_u32(m.dim(), "dimension"));
  for (const auto& id : m.ids()) {
    detail::put_u32(out, detail::checked_u32(id.size(), "id length"));
    out.append(id);
  }
  for (float v : m.data()) detail::put_f32(out, v);
  return out;
}

inline EmbeddingMatrix decode_embeddings(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (bytes.size() < kEmbeddingMagic.size() ||
      bytes.substr(0, kEmbeddingMagic.size()) != kEmbeddingMagic) {
    throw FormatError("bad magic: expected \"" + std::string(kEmbeddingMagic) + "\"");
  }
  in.take(kEmbeddingMagic.size(), "magic");
  const std::uint32_t rows = in.u32("header");
  const std::uint32_t dim = in.u32("header");
  std::vector<std::string> ids;
  ids.reserve(rows);
  for (std::uint32_t r = 0; r < rows; ++r) {
    const std::uint32_t len = in.u32("id table");
    auto p = in.take(len, "id table");
    ids.emplace_back(reinterpret_cast<const char*>(p), len);
  }
  const std::size_t count = static_cast<std::size_t>(rows) * dim;
  const std::size_t payload = count * 4;
  if (in.remaining() < payload) {
    throw TruncatedError("truncated embedding payload", payload, in.remaining());
  }
  if (in.remaining() > payload) {
    throw FormatError("trailing bytes after embedding payload (" +
                      std::to_string(in.remaining() - payload) + ")");
  }
  auto p = in.take(payload, "payload");
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = detail::get_f32(p + 4 * i);
    if (!std::isfinite(data[i])) {
      throw NonFiniteError("non-finite payload value at row " + std::to_string(i / dim) +
                           ", column " + std::to_string(i % dim));
    }
  }
  EmbeddingMatrix m(dim, std::move(ids), std::move(data));
  m.validate();
  return m;
}

inline void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_embeddings(m));
}

inline EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  try {
    return decode_embeddings(bytes);
  } catch (const TruncatedError&) {
    throw;
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace eventaug
