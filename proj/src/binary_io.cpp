#include "dsmhn/binary_io.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

namespace dsmhn::io {

void Reader::expect_magic(std::string_view magic) {
  require(magic.size(), "magic");
  const std::string_view got(data_.data() + pos_, magic.size());
  if (got != magic)
    fail("bad magic, expected \"" + std::string(magic) + "\"");
  pos_ += magic.size();
}

void Reader::require(std::size_t n, std::string_view field) const {
  if (remaining() < n)
    fail("truncated while reading " + std::string(field) + " (need " +
         std::to_string(n) + " bytes, have " + std::to_string(remaining()) + ")");
}

void Reader::expect_end() const {
  if (remaining() != 0)
    fail(std::to_string(remaining()) + " trailing bytes");
}

void Reader::fail(const std::string& msg) const {
  throw FormatError(what_ + ": " + msg + " at byte offset " + std::to_string(pos_));
}

std::uint64_t Reader::get(int n) {
  require(static_cast<std::size_t>(n), "field");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
  pos_ += static_cast<std::size_t>(n);
  return v;
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError("cannot rename into " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

}  // namespace dsmhn::io
