#include "dsmhn/codes.hpp"

#include <bit>

#include "dsmhn/binary_io.hpp"
#include "dsmhn/error.hpp"

namespace dsmhn {

namespace {

std::uint64_t tail_mask(std::size_t bits) {
  const std::size_t used = bits % 64;
  return used == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << used) - 1;
}

}  // namespace

BinaryCodes::BinaryCodes(std::size_t bits, std::size_t count)
    : bits_(bits), count_(count), words_(count * words_for(bits), 0) {
  if (bits == 0) throw ShapeError("code length must be at least 1");
}

BinaryCodes::BinaryCodes(std::size_t bits, std::size_t count, std::vector<std::uint64_t> words)
    : bits_(bits), count_(count), words_(std::move(words)) {
  if (bits == 0) throw ShapeError("code length must be at least 1");
  const std::size_t wpc = words_for(bits);
  if (words_.size() != count * wpc)
    throw ShapeError("expected " + std::to_string(count * wpc) + " code words, got " +
                     std::to_string(words_.size()));
  const std::uint64_t mask = tail_mask(bits);
  for (std::size_t k = 0; k < count; ++k)
    if ((words_[k * wpc + wpc - 1] & ~mask) != 0)
      throw FormatError("item " + std::to_string(k) + " has padding bits set");
}

int BinaryCodes::at(std::size_t k, std::size_t b) const {
  const std::uint64_t w = words_[k * words_per_code() + b / 64];
  return ((w >> (b % 64)) & 1U) != 0 ? 1 : -1;
}

void BinaryCodes::set(std::size_t k, std::size_t b, bool positive) {
  std::uint64_t& w = words_[k * words_per_code() + b / 64];
  const std::uint64_t bit = std::uint64_t{1} << (b % 64);
  w = positive ? (w | bit) : (w & ~bit);
}

Matrix BinaryCodes::unpack() const {
  Matrix m(bits_, count_);
  for (std::size_t k = 0; k < count_; ++k)
    for (std::size_t b = 0; b < bits_; ++b) m(b, k) = at(k, b);
  return m;
}

int label_similarity(std::span<const double> g_i, std::span<const double> g_j) {
  if (g_i.size() != g_j.size())
    throw ShapeError("label length mismatch: " + std::to_string(g_i.size()) + " vs " +
                     std::to_string(g_j.size()));
  double dot = 0.0;
  for (std::size_t c = 0; c < g_i.size(); ++c) dot += g_i[c] * g_j[c];
  return dot > 0.0 ? 1 : -1;
}

BinaryCodes quantize(const Matrix& z) {
  BinaryCodes codes(z.rows(), z.cols());
  for (std::size_t b = 0; b < z.rows(); ++b) {
    const auto row = z.row(b);
    for (std::size_t k = 0; k < z.cols(); ++k)
      if (row[k] >= 0.0) codes.set(k, b, true);
  }
  return codes;
}

std::size_t hamming(const BinaryCodes& a, std::size_t ia, const BinaryCodes& b, std::size_t ib) {
  if (a.bits() != b.bits())
    throw ShapeError("code length mismatch: " + std::to_string(a.bits()) + " vs " +
                     std::to_string(b.bits()));
  const auto ca = a.code(ia);
  const auto cb = b.code(ib);
  std::size_t d = 0;
  for (std::size_t w = 0; w < ca.size(); ++w) d += static_cast<std::size_t>(std::popcount(ca[w] ^ cb[w]));
  return d;
}

double inner_product_sim(const BinaryCodes& a, std::size_t ia, const BinaryCodes& b,
                         std::size_t ib) {
  const auto L = static_cast<double>(a.bits());
  return (L - 2.0 * static_cast<double>(hamming(a, ia, b, ib))) / L;
}

void save_codes(const std::filesystem::path& path, const BinaryCodes& codes) {
  io::Writer w;
  w.bytes("DSMB");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(codes.bits()));
  w.u64(codes.count());
  for (std::uint64_t word : codes.words()) w.u64(word);
  io::write_file_atomic(path, w.buffer());
}

BinaryCodes load_codes(const std::filesystem::path& path) {
  io::Reader r(io::read_file(path), "code file " + path.string());
  r.expect_magic("DSMB");
  const std::uint32_t version = r.u32();
  if (version != 1) r.fail("unsupported version " + std::to_string(version));
  const std::uint32_t bits = r.u32();
  if (bits == 0) r.fail("zero code length");
  const std::uint64_t n = r.u64();
  const std::size_t total = static_cast<std::size_t>(n) * BinaryCodes::words_for(bits);
  if (r.remaining() / 8 < total) r.require(total * 8, "code words");
  std::vector<std::uint64_t> words(total);
  for (auto& w : words) w = r.u64();
  r.expect_end();
  return BinaryCodes(bits, static_cast<std::size_t>(n), std::move(words));
}

}  // namespace dsmhn
