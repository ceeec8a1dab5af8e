#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dsmhn/error.hpp"
#include "dsmhn/numerics.hpp"

using namespace dsmhn;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

Matrix triple_loop(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      c(i, j) = s;
    }
  return c;
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
  EXPECT_EQ(matmul(a, Matrix::identity(2)), a);
}

TEST(Matmul, HandArithmetic) {
  const Matrix c = matmul(Matrix{{1, 2}}, Matrix{{3}, {4}});
  ASSERT_EQ(c.rows(), 1u);
  ASSERT_EQ(c.cols(), 1u);
  EXPECT_EQ(c(0, 0), 11.0);
}

TEST(Matmul, MatchesTripleLoop) {
  Rng rng(3);
  const Matrix a = random_matrix(5, 7, rng);
  const Matrix b = random_matrix(7, 3, rng);
  const Matrix c = matmul(a, b);
  const Matrix ref = triple_loop(a, b);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], ref.data()[i], 1e-14);
}

TEST(Matmul, TransposedVariantsMatchExplicitTranspose) {
  Rng rng(4);
  for (std::size_t m : {1u, 3u, 4u, 9u}) {
    const Matrix a = random_matrix(6, m, rng);
    const Matrix b = random_matrix(6, 5, rng);
    const Matrix ref = triple_loop(transpose(a), b);
    const Matrix c = matmul_at_b(a, b);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], ref.data()[i], 1e-14);

    const Matrix d = random_matrix(m, 6, rng);
    const Matrix e = random_matrix(7, 6, rng);
    const Matrix ref2 = triple_loop(d, transpose(e));
    const Matrix f = matmul_a_bt(d, e);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f.data()[i], ref2.data()[i], 1e-14);
  }
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Activation, ValuesAtZero) {
  const Matrix z(2, 3, 0.0);
  EXPECT_EQ(apply_activation(z, Activation::Tanh), Matrix(2, 3, 0.0));
  EXPECT_EQ(apply_activation(z, Activation::Sigmoid), Matrix(2, 3, 0.5));
  EXPECT_EQ(apply_activation(Matrix{{-1, 2}}, Activation::ReLU), (Matrix{{0, 2}}));
  EXPECT_EQ(activate_grad(0.0, Activation::Tanh), 1.0);
  EXPECT_EQ(activate_grad(0.0, Activation::Sigmoid), 0.25);
  EXPECT_EQ(activate_grad(0.0, Activation::ReLU), 0.0);
}

TEST(Activation, TanhDerivativeMatchesCentralDifference) {
  const double x = 0.7, h = 1e-5;
  const double fd = (std::tanh(x + h) - std::tanh(x - h)) / (2 * h);
  EXPECT_LT(std::abs(activate_grad(x, Activation::Tanh) - fd) / std::abs(fd), 1e-6);
}

TEST(Activation, DerivativesMatchFiniteDifferencesAtRandomPoints) {
  Rng rng(11);
  const double h = 1e-5;
  for (Activation a : {Activation::Identity, Activation::ReLU, Activation::Tanh, Activation::Sigmoid}) {
    for (int t = 0; t < 100000; ++t) {
      const double x = rng.uniform(-6.0, 6.0);
      if (a == Activation::ReLU && std::abs(x) < 1e-4) continue;
      const double fd = (activate(x + h, a) - activate(x - h, a)) / (2 * h);
      const double an = activate_grad(x, a);
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-300});
      if (an == 0.0 && fd == 0.0) continue;
      ASSERT_LT(std::abs(an - fd) / denom, 1e-6) << to_string(a) << " at " << x;
    }
  }
}

TEST(Xavier, DeterministicAndBounded) {
  Rng a(5), b(5);
  const Matrix w1 = xavier_init(100, 100, a);
  EXPECT_EQ(w1, xavier_init(100, 100, b));
  const double bound = std::sqrt(6.0 / 200.0);
  for (double v : w1.data()) EXPECT_LE(std::abs(v), bound);
}

TEST(Xavier, ZeroDimensionIsShapeError) {
  Rng rng(1);
  EXPECT_THROW(xavier_init(0, 4, rng), ShapeError);
  EXPECT_THROW(xavier_init(4, 0, rng), ShapeError);
}

TEST(FiniteDiff, Quadratic) {
  const auto f = [](const Vector& t) { return 0.5 * (t[0] * t[0] + t[1] * t[1]); };
  const Vector g = finite_diff_grad(f, {1.0, 2.0});
  EXPECT_NEAR(g[0], 1.0, 1e-8);
  EXPECT_NEAR(g[1], 2.0, 1e-8);
}

TEST(FiniteDiff, Constant) {
  const Vector g = finite_diff_grad([](const Vector&) { return 3.0; }, {1.0, -2.0, 0.5});
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDiff, ExactOnRandomQuadratics) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), c = rng.uniform(-2, 2);
    const double d = rng.uniform(-2, 2), e = rng.uniform(-2, 2);
    const auto f = [&](const Vector& x) {
      return a * x[0] * x[0] + b * x[0] * x[1] + c * x[1] * x[1] + d * x[0] + e;
    };
    const Vector x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vector g = finite_diff_grad(f, x);
    EXPECT_NEAR(g[0], 2 * a * x[0] + b * x[1] + d, 1e-8);
    EXPECT_NEAR(g[1], b * x[0] + 2 * c * x[1], 1e-8);
  }
}

TEST(FiniteDiff, NonFiniteIsNumericError) {
  const auto f = [](const Vector& t) {
    return t[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : t[0];
  };
  EXPECT_THROW(finite_diff_grad(f, {0.5}), NumericError);
}

TEST(Helpers, BroadcastRowSumsHadamardAxpy) {
  Matrix m{{1, 2}, {3, 4}};
  add_column_broadcast(m, Vector{10, 20});
  EXPECT_EQ(m, (Matrix{{11, 12}, {23, 24}}));
  EXPECT_EQ(row_sums(m), (Vector{23, 47}));
  EXPECT_EQ(hadamard(Matrix{{1, 2}}, Matrix{{3, 4}}), (Matrix{{3, 8}}));
  Matrix a{{1, 1}};
  axpy(a, 2.0, Matrix{{1, -1}});
  EXPECT_EQ(a, (Matrix{{3, -1}}));
}
