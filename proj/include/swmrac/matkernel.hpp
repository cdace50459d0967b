#pragma once

#include <vector>

#include "swmrac/matrix.hpp"

namespace swmrac {

// Exact-formula kernels for the small dense matrices of the controller.
//
// Cofactor expansion is used up to dimension 4; beyond that determinants go
// through LU with partial pivoting. Near-singular inputs produce a determinant
// whose magnitude is at rounding level, but its sign is not meaningful.

inline constexpr std::size_t kCofactorMaxDim = 4;

struct LuDecomposition {
  Matrix lu;                      // unit-lower L below the diagonal, U on and above
  std::vector<std::size_t> perm;  // row i of LU is row perm[i] of the input
  int sign = 1;                   // parity of perm
  bool singular = false;          // an exactly-zero pivot was met

  real determinant() const;
  // Smallest over largest |pivot|; 0 when singular.
  real pivot_ratio() const;
  Matrix solve(const Matrix& rhs) const;
};

LuDecomposition lu_decompose(const Matrix& m);

real det(const Matrix& m);

// Transpose of the cofactor matrix, adj(M) M = M adj(M) = det(M) I.
// adj of a 1x1 matrix is [[1]].
// Cofactors up to dim 4; beyond that a completely pivoted LU factorization
// in which the smallest pivot is never a divisor, so rank-deficient inputs
// are handled without special cases.
Matrix adjugate(const Matrix& m);

// adj(M) / det(M). Throws SingularMatrixError when
// |det(M)| <= rel_threshold * ||M||_F^n.
Matrix invert(const Matrix& m, real rel_threshold = 1e-12L);

struct EigenExtremes {
  real min;
  real max;
};

// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Rejects inputs whose asymmetry exceeds sym_tol relative to ||S||_F.
std::vector<real> sym_eigenvalues(const Matrix& s, real sym_tol = 1e-9L);
EigenExtremes sym_eig_extremes(const Matrix& s, real sym_tol = 1e-9L);

// Coefficients c[0..n] of det(lambda I - M) = sum c[k] lambda^(n-k), c[0] = 1,
// by the Faddeev-LeVerrier recursion.
std::vector<real> characteristic_polynomial(const Matrix& m);

// Routh-Hurwitz test on the characteristic polynomial.
bool is_hurwitz(const Matrix& m);

}  // namespace swmrac
