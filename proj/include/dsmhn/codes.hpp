#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dsmhn/numerics.hpp"

namespace dsmhn {

/// Bit-packed ±1 codes. Bit b of item k is bit (b mod 64) of word
/// k·words_per_code() + b/64; +1 is stored as 1, −1 as 0. Unused high bits of
/// each item's last word are always zero, so distance kernels never mask.
class BinaryCodes {
 public:
  BinaryCodes() = default;
  BinaryCodes(std::size_t bits, std::size_t count);
  /// Takes ownership of packed words; throws ShapeError on a bad length and
  /// FormatError if any padding bit is set.
  BinaryCodes(std::size_t bits, std::size_t count, std::vector<std::uint64_t> words);

  static std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

  std::size_t bits() const { return bits_; }
  std::size_t count() const { return count_; }
  std::size_t words_per_code() const { return words_for(bits_); }

  std::span<const std::uint64_t> code(std::size_t k) const {
    return {words_.data() + k * words_per_code(), words_per_code()};
  }
  const std::vector<std::uint64_t>& words() const { return words_; }

  /// ±1 value of bit b of item k.
  int at(std::size_t k, std::size_t b) const;
  void set(std::size_t k, std::size_t b, bool positive);

  /// Dense L × n matrix of ±1.
  Matrix unpack() const;

  bool operator==(const BinaryCodes&) const = default;

 private:
  std::size_t bits_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> words_;
};

/// +1 if the two multi-hot label vectors share a class, −1 otherwise.
int label_similarity(std::span<const double> g_i, std::span<const double> g_j);

/// Elementwise sign of an L × n matrix of relaxed codes, with sign(0) = +1.
BinaryCodes quantize(const Matrix& z);

/// Number of differing bits between item ia of a and item ib of b.
std::size_t hamming(const BinaryCodes& a, std::size_t ia, const BinaryCodes& b, std::size_t ib);

/// (L − 2·hamming) / L
double inner_product_sim(const BinaryCodes& a, std::size_t ia, const BinaryCodes& b,
                         std::size_t ib);

/// Code file ("DSMB", version 1).
void save_codes(const std::filesystem::path& path, const BinaryCodes& codes);
BinaryCodes load_codes(const std::filesystem::path& path);

}  // namespace dsmhn
