#include "swmrac/matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace swmrac {

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<real> entries)
    : rows_(rows), cols_(cols), data_(entries) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: " + std::to_string(entries.size()) + " entries for " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<real> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: " + std::to_string(data_.size()) + " entries for " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<real>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<real> entries;
  entries.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Matrix::from_rows: ragged rows");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(entries));
}

Matrix Matrix::column(std::span<const real> v) {
  return Matrix(v.size(), 1, std::vector<real>(v.begin(), v.end()));
}

Matrix Matrix::diagonal(std::span<const real> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("Matrix::block out of range");
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
    throw DimensionError("Matrix::set_block out of range");
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Vector Matrix::row(std::size_t r) const {
  return Vector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

Vector Matrix::col(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
  return v;
}

real Matrix::frobenius_norm() const { return norm(data_); }

real Matrix::max_abs() const {
  real m = 0;
  for (real v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const { return swmrac::all_finite(data_); }

void Matrix::fill(real v) { std::fill(data_.begin(), data_.end(), v); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(real s) {
  for (real& v : data_) v *= s;
  return *this;
}

Matrix& Matrix::operator/=(real s) {
  for (real& v : data_) v /= s;
  return *this;
}

Matrix& Matrix::add_scaled(const Matrix& o, real s) {
  require_same_shape(*this, o, "add_scaled");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
  return *this;
}

std::string Matrix::to_string(int precision) const {
  std::ostringstream os;
  os.precision(precision);
  os << "[";
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < cols_; ++j) os << (j ? ", " : "") << static_cast<double>((*this)(i, j));
  }
  os << "]";
  return os.str();
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= real{-1}; }
Matrix operator*(Matrix a, real s) { return a *= s; }
Matrix operator*(real s, Matrix a) { return a *= s; }
Matrix operator/(Matrix a, real s) { return a /= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matrix product: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const real aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const real> v) {
  if (a.cols() != v.size()) {
    throw DimensionError("matrix-vector product: " + std::to_string(a.cols()) + " columns vs " +
                         std::to_string(v.size()) + " entries");
  }
  Vector y(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    real s = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    y[i] = s;
  }
  return y;
}

real dot(std::span<const real> a, std::span<const real> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

real norm_sq(std::span<const real> v) { return dot(v, v); }
real norm(std::span<const real> v) { return std::sqrt(norm_sq(v)); }

Matrix outer(std::span<const real> a, std::span<const real> b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

Vector concat(std::initializer_list<std::span<const real>> parts) {
  Vector out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Vector add(std::span<const real> a, std::span<const real> b) {
  if (a.size() != b.size()) throw DimensionError("add: length mismatch");
  Vector y(a.begin(), a.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

Vector sub(std::span<const real> a, std::span<const real> b) {
  if (a.size() != b.size()) throw DimensionError("sub: length mismatch");
  Vector y(a.begin(), a.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b[i];
  return y;
}

Vector scale(std::span<const real> a, real s) {
  Vector y(a.begin(), a.end());
  for (real& v : y) v *= s;
  return y;
}

void axpy(std::span<real> y, std::span<const real> x, real s) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

bool all_finite(std::span<const real> v) {
  return std::all_of(v.begin(), v.end(), [](real x) { return std::isfinite(x); });
}

Vector flatten(const Matrix& m) { return Vector(m.data().begin(), m.data().end()); }

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

namespace {

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Matrix with row `skip_r` and column `skip_c` removed.
Matrix minor_of(const Matrix& m, std::size_t skip_r, std::size_t skip_c) {
  const std::size_t n = m.rows();
  Matrix out(n - 1, n - 1);
  for (std::size_t i = 0, oi = 0; i < n; ++i) {
    if (i == skip_r) continue;
    for (std::size_t j = 0, oj = 0; j < n; ++j) {
      if (j == skip_c) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

real cofactor_det(const Matrix& m) {
  switch (m.rows()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default: {
      real s = 0;
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (m(0, j) == 0) continue;
        const real c = cofactor_det(minor_of(m, 0, j));
        s += ((j % 2) ? -1 : 1) * m(0, j) * c;
      }
      return s;
    }
  }
}

real det_unchecked(const Matrix& m) {
  if (m.rows() <= kCofactorMaxDim) return cofactor_det(m);
  return lu_decompose(m).determinant();
}

Matrix adjugate_by_minors(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const real c = det_unchecked(minor_of(m, i, j));
      adj(j, i) = ((i + j) % 2 ? -c : c);
    }
  return adj;
}

// P M Q = L U with complete pivoting, so only the trailing pivot can be tiny.
// adj(M) = sign * Q adj(U) L^{-1} P, with adj(U) = det(U) U^{-1} formed by a
// back substitution that never divides by the last pivot.
Matrix adjugate_complete_pivoting(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix a = m;
  std::vector<std::size_t> rp(n), cp(n);
  std::iota(rp.begin(), rp.end(), std::size_t{0});
  std::iota(cp.begin(), cp.end(), std::size_t{0});
  real sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pi = k, pj = k;
    real best = -1;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          pi = i;
          pj = j;
        }
    if (pi != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pi, j));
      std::swap(rp[k], rp[pi]);
      sign = -sign;
    }
    if (pj != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, pj));
      std::swap(cp[k], cp[pj]);
      sign = -sign;
    }
    if (a(k, k) == 0) break;  // remaining block is exactly zero
    for (std::size_t i = k + 1; i < n; ++i) {
      const real f = a(i, k) / a(k, k);
      a(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }

  // Rank deficiency of two or more: every (n-1)-minor vanishes.
  std::size_t zeros = 0;
  for (std::size_t k = 0; k < n; ++k) zeros += a(k, k) == 0;
  if (zeros >= 2) return Matrix(n, n);

  // adj(U) column by column: y = det(U) U^{-1} e_j.
  Matrix adj_u(n, n);
  std::vector<real> prefix(n + 1, 1);  // prefix[i] = u_00 ... u_{i-1,i-1}
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * a(i, i);
  for (std::size_t j = 0; j < n; ++j) {
    // Rows below j: zero. Row j: product of all other pivots.
    real others = prefix[j];
    for (std::size_t k = j + 1; k < n; ++k) others *= a(k, k);
    adj_u(j, j) = others;
    for (std::size_t ii = j; ii-- > 0;) {
      real acc = 0;
      for (std::size_t k = ii + 1; k <= j; ++k) acc -= a(ii, k) * adj_u(k, j);
      adj_u(ii, j) = acc / a(ii, ii);
    }
  }
  // adj(L) = L^{-1}: forward substitution on the unit lower factor.
  Matrix linv = Matrix::identity(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) {
      real acc = 0;
      for (std::size_t k = j; k < i; ++k) acc -= a(i, k) * linv(k, j);
      linv(i, j) = acc;
    }
  const Matrix core = adj_u * linv;  // adj(P M Q) up to the sign
  Matrix adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adj(cp[i], rp[j]) = sign * core(i, j);
  return adj;
}

}  // namespace

LuDecomposition lu_decompose(const Matrix& m) {
  require_square(m, "lu_decompose");
  const std::size_t n = m.rows();
  LuDecomposition d;
  d.lu = m;
  d.perm.resize(n);
  std::iota(d.perm.begin(), d.perm.end(), std::size_t{0});
  Matrix& a = d.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    real best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(d.perm[k], d.perm[p]);
      d.sign = -d.sign;
    }
    if (a(k, k) == 0) {
      d.singular = true;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const real f = a(i, k) / a(k, k);
      a(i, k) = f;
      if (f == 0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return d;
}

real LuDecomposition::determinant() const {
  if (singular) return 0;
  real d = sign;
  for (std::size_t i = 0; i < lu.rows(); ++i) d *= lu(i, i);
  return d;
}

real LuDecomposition::pivot_ratio() const {
  if (singular) return 0;
  real lo = std::numeric_limits<real>::infinity();
  real hi = 0;
  for (std::size_t i = 0; i < lu.rows(); ++i) {
    lo = std::min(lo, std::abs(lu(i, i)));
    hi = std::max(hi, std::abs(lu(i, i)));
  }
  return hi == 0 ? 0 : lo / hi;
}

Matrix LuDecomposition::solve(const Matrix& rhs) const {
  const std::size_t n = lu.rows();
  if (rhs.rows() != n) throw DimensionError("LuDecomposition::solve: rhs row count");
  if (singular) throw SingularMatrixError("LuDecomposition::solve: singular matrix", 0.0L);
  Matrix x(n, rhs.cols());
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      real s = rhs(perm[i], c);
      for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * x(j, c);
      x(i, c) = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      real s = x(i, c);
      for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * x(j, c);
      x(i, c) = s / lu(i, i);
    }
  }
  return x;
}

real det(const Matrix& m) {
  require_square(m, "det");
  return det_unchecked(m);
}

Matrix adjugate(const Matrix& m) {
  require_square(m, "adjugate");
  const std::size_t n = m.rows();
  if (n == 1) return Matrix(1, 1, {real{1}});
  if (n == 2) return Matrix(2, 2, {m(1, 1), -m(0, 1), -m(1, 0), m(0, 0)});
  if (n <= kCofactorMaxDim) return adjugate_by_minors(m);
  return adjugate_complete_pivoting(m);
}

Matrix invert(const Matrix& m, real rel_threshold) {
  require_square(m, "invert");
  const real d = det_unchecked(m);
  const real scale = std::pow(m.frobenius_norm(), static_cast<real>(m.rows()));
  if (!(std::abs(d) > rel_threshold * scale) || d == 0) {
    throw SingularMatrixError("invert: matrix is singular to working precision (det = " +
                                  std::to_string(static_cast<double>(d)) + ")",
                              d);
  }
  if (m.rows() <= kCofactorMaxDim) return adjugate(m) / d;
  return lu_decompose(m).solve(Matrix::identity(m.rows()));
}

std::vector<real> sym_eigenvalues(const Matrix& s, real sym_tol) {
  require_square(s, "sym_eigenvalues");
  const std::size_t n = s.rows();
  const real fro = s.frobenius_norm();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > sym_tol * fro) {
        throw ContractViolation("sym_eigenvalues: input is not symmetric (|a_ij - a_ji| = " +
                                std::to_string(static_cast<double>(std::abs(s(i, j) - s(j, i)))) +
                                ")");
      }

  Matrix a = s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = (s(i, j) + s(j, i)) / 2;

  // Cyclic Jacobi with the relative rotation threshold, which preserves the
  // small eigenvalues of graded Gram matrices to high relative accuracy.
  const real eps = std::numeric_limits<real>::epsilon();
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const real apq = a(p, q);
        if (apq == 0) continue;
        if (std::abs(apq) <= eps * std::sqrt(std::abs(a(p, p) * a(q, q)))) {
          a(p, q) = a(q, p) = 0;
          continue;
        }
        rotated = true;
        const real theta = (a(q, q) - a(p, p)) / (2 * apq);
        const real t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const real c = 1 / std::sqrt(t * t + 1);
        const real sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const real akp = a(k, p);
          const real akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const real apk = a(p, k);
          const real aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0;
      }
    if (!rotated) break;
  }
  std::vector<real> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

EigenExtremes sym_eig_extremes(const Matrix& s, real sym_tol) {
  const auto ev = sym_eigenvalues(s, sym_tol);
  return {ev.front(), ev.back()};
}

std::vector<real> characteristic_polynomial(const Matrix& m) {
  require_square(m, "characteristic_polynomial");
  const std::size_t n = m.rows();
  std::vector<real> c(n + 1, 0);
  c[0] = 1;
  // M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k) / k
  Matrix mk(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix next = m * mk;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[k - 1];
    mk = std::move(next);
    const Matrix amk = m * mk;
    real tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += amk(i, i);
    c[k] = -tr / static_cast<real>(k);
  }
  return c;
}

bool is_hurwitz(const Matrix& m) {
  const auto c = characteristic_polynomial(m);
  const std::size_t n = c.size() - 1;
  for (real ci : c)
    if (!(ci > 0)) return false;
  if (n <= 2) return true;

  // Routh array, first column must stay strictly positive.
  std::vector<real> prev, cur;
  for (std::size_t k = 0; k <= n; k += 2) prev.push_back(c[k]);
  for (std::size_t k = 1; k <= n; k += 2) cur.push_back(c[k]);
  const real tiny = 1e-14L * std::abs(c[n]);
  for (std::size_t row = 2; row <= n; ++row) {
    if (!(cur.front() > tiny)) return false;
    std::vector<real> next;
    for (std::size_t k = 0; k + 1 < prev.size(); ++k) {
      const real b = k + 1 < cur.size() ? cur[k + 1] : 0;
      next.push_back((cur.front() * prev[k + 1] - prev.front() * b) / cur.front());
    }
    if (next.empty()) break;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur.front() > 0;
}

}  // namespace swmrac
