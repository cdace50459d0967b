#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "swmrac/errors.hpp"

namespace swmrac {

// Simulation scalar. The DREM extension matrix is routinely conditioned at
// 1e12 and worse right after a filter reset, so the default build carries the
// whole closed loop in x87 extended precision.
#if defined(SWMRAC_EXTENDED_PRECISION)
using real = long double;
#else
using real = double;
#endif

using Vector = std::vector<real>;

// Dense row-major matrix. Sizes in this library are tiny (at most a few tens
// of rows), so everything is value-semantic and heap-backed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, real fill = 0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Row-major entries; the count must equal rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<real> entries);
  Matrix(std::size_t rows, std::size_t cols, std::vector<real> entries);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<real>> rows);
  static Matrix column(std::span<const real> v);
  static Matrix diagonal(std::span<const real> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  real operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<real> data() { return data_; }
  std::span<const real> data() const { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);
  Vector row(std::size_t r) const;
  Vector col(std::size_t c) const;

  real frobenius_norm() const;
  real max_abs() const;
  bool all_finite() const;
  void fill(real v);

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(real s);
  Matrix& operator/=(real s);
  // this += s * o
  Matrix& add_scaled(const Matrix& o, real s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

  std::string to_string(int precision = 6) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<real> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Matrix a, real s);
Matrix operator*(real s, Matrix a);
Matrix operator/(Matrix a, real s);
Vector operator*(const Matrix& a, std::span<const real> v);

// Vector helpers.
real dot(std::span<const real> a, std::span<const real> b);
real norm(std::span<const real> v);
real norm_sq(std::span<const real> v);
Matrix outer(std::span<const real> a, std::span<const real> b);
Vector concat(std::initializer_list<std::span<const real>> parts);
Vector add(std::span<const real> a, std::span<const real> b);
Vector sub(std::span<const real> a, std::span<const real> b);
Vector scale(std::span<const real> a, real s);
// y += s * x
void axpy(std::span<real> y, std::span<const real> x, real s);
bool all_finite(std::span<const real> v);

// vec() in row-major order: entry (i, j) lands at i * cols + j.
Vector flatten(const Matrix& m);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace swmrac
