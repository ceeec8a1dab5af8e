#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dsmhn/codes.hpp"
#include "dsmhn/error.hpp"
#include "oracles.hpp"

using namespace dsmhn;
namespace fs = std::filesystem;

TEST(LabelSimilarity, Examples) {
  EXPECT_EQ(label_similarity(Vector{1, 0, 1}, Vector{0, 0, 1}), 1);
  EXPECT_EQ(label_similarity(Vector{1, 0}, Vector{0, 1}), -1);
  EXPECT_EQ(label_similarity(Vector{0, 1, 1}, Vector{0, 1, 1}), 1);
  EXPECT_THROW(label_similarity(Vector{1, 0}, Vector{1}), ShapeError);
}

TEST(LabelSimilarity, SymmetricAndSigned) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    Vector a(5), b(5);
    for (double& v : a) v = rng.uniform() < 0.3;
    for (double& v : b) v = rng.uniform() < 0.3;
    const int s = label_similarity(a, b);
    EXPECT_TRUE(s == 1 || s == -1);
    EXPECT_EQ(s, label_similarity(b, a));
  }
}

TEST(Quantize, ZeroMapsToPlusOne) {
  const BinaryCodes c = quantize(Matrix(5, 3, 0.0));
  EXPECT_EQ(c.unpack(), Matrix(5, 3, 1.0));
}

TEST(Quantize, SignsAreKeptAndMatchDenseSign) {
  Rng rng(2);
  Matrix signs(7, 4);
  for (double& v : signs.data()) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
  EXPECT_EQ(quantize(signs).unpack(), signs);

  Matrix z(70, 9);
  for (double& v : z.data()) v = rng.uniform(-1, 1);
  const Matrix u = quantize(z).unpack();
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < z.cols(); ++c) EXPECT_EQ(u(r, c), z(r, c) >= 0 ? 1.0 : -1.0);
}

TEST(Packing, RoundTripAndPaddingAcrossLengths) {
  Rng rng(3);
  for (std::size_t bits : {1u, 8u, 16u, 32u, 48u, 63u, 64u, 65u, 128u}) {
    Matrix z(bits, 11);
    for (double& v : z.data()) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const BinaryCodes c = quantize(z);
    EXPECT_EQ(c.words_per_code(), (bits + 63) / 64);
    EXPECT_EQ(c.unpack(), z) << bits;
    const std::size_t tail = bits % 64;
    if (tail != 0)
      for (std::size_t k = 0; k < c.count(); ++k)
        EXPECT_EQ(c.code(k).back() >> tail, 0u) << bits;
    EXPECT_EQ(BinaryCodes(bits, 11, c.words()), c);
  }
}

TEST(Packing, LsbFirstLayout) {
  BinaryCodes c(70, 1);
  c.set(0, 0, true);
  c.set(0, 65, true);
  EXPECT_EQ(c.words()[0], 1u);
  EXPECT_EQ(c.words()[1], 2u);
}

TEST(Packing, SetPaddingBitIsRejected) {
  EXPECT_THROW(BinaryCodes(48, 1, {std::uint64_t{1} << 50}), FormatError);
  EXPECT_THROW(BinaryCodes(48, 2, {0}), ShapeError);
}

TEST(Hamming, Examples) {
  const Matrix ones(8, 1, 1.0);
  const BinaryCodes p = quantize(ones), n = quantize(Matrix(8, 1, -1.0));
  EXPECT_EQ(hamming(p, 0, p, 0), 0u);
  EXPECT_EQ(hamming(p, 0, n, 0), 8u);
  const BinaryCodes a = quantize(Matrix{{1}, {1}, {-1}, {-1}});
  const BinaryCodes b = quantize(Matrix(4, 1, 1.0));
  EXPECT_EQ(hamming(a, 0, b, 0), 2u);
  EXPECT_EQ(inner_product_sim(a, 0, b, 0), 0.0);
  EXPECT_EQ(inner_product_sim(p, 0, p, 0), 1.0);
  EXPECT_EQ(inner_product_sim(p, 0, n, 0), -1.0);
  EXPECT_THROW(hamming(a, 0, p, 0), ShapeError);
}

TEST(Hamming, MatchesDenseOracleAndIsAMetric) {
  Rng rng(4);
  for (std::size_t bits : {8u, 48u, 65u, 128u}) {
    const BinaryCodes c = oracle::random_codes(bits, 60, rng);
    for (int t = 0; t < 300; ++t) {
      const std::size_t i = rng.index(60), j = rng.index(60), k = rng.index(60);
      const auto a = oracle::dense(c, i), b = oracle::dense(c, j);
      const std::size_t h = hamming(c, i, c, j);
      EXPECT_EQ(h, static_cast<std::size_t>(oracle::dense_hamming(a, b)));
      EXPECT_EQ(inner_product_sim(c, i, c, j),
                static_cast<double>(oracle::dense_dot(a, b)) / static_cast<double>(bits));
      EXPECT_EQ(h, hamming(c, j, c, i));
      EXPECT_EQ(h == 0, a == b);
      EXPECT_LE(h, hamming(c, i, c, k) + hamming(c, k, c, j));
      const double cs = inner_product_sim(c, i, c, j);
      EXPECT_NEAR(2.0 * static_cast<double>(h), static_cast<double>(bits) * (1.0 - cs), 1e-9);
    }
  }
}

TEST(CodeFile, RoundTripAndLayout) {
  Rng rng(5);
  const BinaryCodes c = oracle::random_codes(48, 9, rng);
  const fs::path path = fs::temp_directory_path() / "dsmhn_codes_roundtrip.dsmb";
  save_codes(path, c);
  EXPECT_EQ(load_codes(path), c);
  EXPECT_EQ(fs::file_size(path), 4u + 4u + 4u + 8u + 9u * 8u);
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "DSMB");
  fs::remove(path);
}

TEST(CodeFile, BadMagicAndTruncation) {
  Rng rng(6);
  const fs::path path = fs::temp_directory_path() / "dsmhn_codes_bad.dsmb";
  save_codes(path, oracle::random_codes(16, 3, rng));
  fs::resize_file(path, fs::file_size(path) - 1);
  EXPECT_THROW(load_codes(path), FormatError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "XXXX";
  }
  try {
    load_codes(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("DSMB"), std::string::npos) << e.what();
  }
  fs::remove(path);
}
