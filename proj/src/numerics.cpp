#include "dsmhn/numerics.hpp"

#include <cmath>
#include <sstream>

#include "dsmhn/error.hpp"
#include "dsmhn/kernels.hpp"

namespace dsmhn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + shape_string());
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_;
  return os.str();
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "unknown";
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() +
                     " vs " + b.shape_string());
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " +
                     b.shape_string());
  Matrix c(a.rows(), b.cols());
  kernels::omp::gemm(a.rows(), a.cols(), b.cols(), a.data().data(),
                     b.data().data(), c.data().data());
  return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_at_b: cannot multiply transpose of " +
                     a.shape_string() + " by " + b.shape_string());
  Matrix c(a.cols(), b.cols());
  kernels::omp::gemm_at_b(a.cols(), a.rows(), b.cols(), a.data().data(),
                          b.data().data(), c.data().data());
  return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_a_bt: cannot multiply " + a.shape_string() +
                     " by transpose of " + b.shape_string());
  Matrix c(a.rows(), b.rows());
  kernels::omp::gemm_a_bt(a.rows(), a.cols(), b.rows(), a.data().data(),
                          b.data().data(), c.data().data());
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

void add_column_broadcast(Matrix& m, std::span<const double> v) {
  if (v.size() != m.rows())
    throw ShapeError("bias length " + std::to_string(v.size()) +
                     " does not match " + m.shape_string());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (double& x : m.row(r)) x += v[r];
}

Vector row_sums(const Matrix& m) {
  Vector s(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (double x : m.row(r)) s[r] += x;
  return s;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
  return c;
}

void axpy(Matrix& a, double scale, const Matrix& b) {
  require_same_shape(a, b, "axpy");
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += scale * b.data()[i];
}

double activate(double x, Activation a) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Sigmoid:
      // Split on sign so exp never overflows.
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      {
        const double e = std::exp(x);
        return e / (1.0 + e);
      }
  }
  return x;
}

double activate_grad(double x, Activation a) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      const double s = activate(x, Activation::Sigmoid);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

Matrix apply_activation(const Matrix& m, Activation a) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = activate(m.data()[i], a);
  return out;
}

Matrix activation_grad(const Matrix& m, Activation a) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i)
    out.data()[i] = activate_grad(m.data()[i], a);
  return out;
}

Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0)
    throw ShapeError("xavier_init: zero dimension " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform(-bound, bound);
  return m;
}

bool all_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& theta, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  Vector probe = theta;
  Vector grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    probe[k] = theta[k] + h;
    const double up = f(probe);
    probe[k] = theta[k] - h;
    const double down = f(probe);
    probe[k] = theta[k];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_diff_grad: objective not finite at component " +
                         std::to_string(k));
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace dsmhn
