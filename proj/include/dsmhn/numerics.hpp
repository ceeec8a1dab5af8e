#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "dsmhn/rng.hpp"

namespace dsmhn {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  Vector column(std::size_t c) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { Identity, ReLU, Tanh, Sigmoid };

std::string to_string(Activation a);

// Products. All three run the OpenMP kernels; see kernels.hpp for the serial
// reference versions.
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

/// Adds v[r] to every entry of row r.
void add_column_broadcast(Matrix& m, std::span<const double> v);
/// Sum of each row.
Vector row_sums(const Matrix& m);
/// Elementwise a ⊙ b.
Matrix hadamard(const Matrix& a, const Matrix& b);
/// a += scale * b.
void axpy(Matrix& a, double scale, const Matrix& b);

double activate(double x, Activation a);
/// Derivative at pre-activation x. ReLU'(0) = 0.
double activate_grad(double x, Activation a);

Matrix apply_activation(const Matrix& m, Activation a);
Matrix activation_grad(const Matrix& m, Activation a);

/// Uniform on ±sqrt(6 / (rows + cols)).
Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

bool all_finite(std::span<const double> values);

/// Central differences: component k = (f(θ + h e_k) − f(θ − h e_k)) / 2h.
/// Throws NumericError if f returns a non-finite value.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& theta, double h = 1e-5);

}  // namespace dsmhn
