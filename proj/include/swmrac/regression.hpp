#pragma once

#include <limits>

#include "swmrac/dynamics.hpp"
#include "swmrac/matrix.hpp"

namespace swmrac {

struct Dims {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t p = 0;

  std::size_t theta_rows() const { return n + m + p; }
  std::size_t q() const { return n + m + p + 1; }
};

struct ZSlices {
  Matrix z_A;   // n x n
  Matrix z_B;   // n x m
  Matrix z_Bt;  // n x p
};

// Column blocks [0, n), [n, n+m), [n+m, n+m+p) of z^T. The last row of z
// (the initial-condition channel) is dropped.
ZSlices slice_z(const Matrix& z, const Dims& d);

struct Regression {
  Matrix Y;  // (n+m+p) x m
  real Omega = 0;
};

// Omega = det(z_B^T z_B); with M = adj(z_B^T z_B) z_B^T,
// Y = [ (M (Delta A_ref - z_A))^T ; (M Delta B_ref)^T ; (M z_Bt)^T ].
Regression build_regression(const Matrix& z_A, const Matrix& z_B, const Matrix& z_Bt, real Delta,
                            const ReferenceModelSpec& rm);

// Y / Omega together with log(Omega), evaluated on (z, Delta) rescaled by a
// common factor. Y / Omega is invariant under that rescaling while Omega
// itself scales by s^{2m}, so the quotient stays accurate even when Omega
// is far below the representable range.
struct RegressionTarget {
  Matrix theta_est;  // Y / Omega, zero when Omega vanishes
  real log_Omega = -std::numeric_limits<real>::infinity();
  bool degenerate = true;  // Omega == 0 after rescaling
};

RegressionTarget regression_target(const Matrix& z, real Delta, const Dims& d,
                                   const ReferenceModelSpec& rm);

}  // namespace swmrac
