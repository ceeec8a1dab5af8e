#pragma once

// Little-endian encoding helpers shared by the three file formats, plus
// write-temp-then-rename for atomic output.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dsmhn/error.hpp"

namespace dsmhn::io {

class Writer {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  const std::vector<char>& buffer() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::vector<char> buf_;
};

/// Reads from an in-memory file image; every short read is a FormatError
/// carrying the byte offset.
class Reader {
 public:
  Reader(std::vector<char> data, std::string what)
      : data_(std::move(data)), what_(std::move(what)) {}

  void expect_magic(std::string_view magic);
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  /// Throws unless at least n more bytes exist.
  void require(std::size_t n, std::string_view field) const;
  void expect_end() const;

  [[noreturn]] void fail(const std::string& msg) const;

 private:
  std::uint64_t get(int n);
  std::vector<char> data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path);

/// Writes to path + ".tmp" and renames over path.
void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& data);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace dsmhn::io
