#include "swmrac/regression.hpp"

#include <cmath>
#include <limits>

#include "swmrac/matkernel.hpp"

namespace swmrac {

ZSlices slice_z(const Matrix& z, const Dims& d) {
  if (z.rows() != d.q() || z.cols() != d.n) {
    throw DimensionError("slice_z: z is " + std::to_string(z.rows()) + "x" +
                         std::to_string(z.cols()) + ", expected " + std::to_string(d.q()) + "x" +
                         std::to_string(d.n));
  }
  const Matrix zt = z.transpose();
  return {zt.block(0, 0, d.n, d.n), zt.block(0, d.n, d.n, d.m), zt.block(0, d.n + d.m, d.n, d.p)};
}

Regression build_regression(const Matrix& z_A, const Matrix& z_B, const Matrix& z_Bt, real Delta,
                            const ReferenceModelSpec& rm) {
  const std::size_t n = z_B.rows();
  const std::size_t m = z_B.cols();
  const std::size_t p = z_Bt.cols();
  if (z_A.rows() != n || z_A.cols() != n || z_Bt.rows() != n || rm.A_ref.rows() != n ||
      rm.B_ref.cols() != m) {
    throw DimensionError("build_regression: inconsistent block shapes");
  }
  const Matrix zbt = z_B.transpose();
  const Matrix gram = zbt * z_B;
  const Matrix M = adjugate(gram) * zbt;  // m x n

  Regression r;
  r.Omega = det(gram);
  r.Y = Matrix(n + m + p, m);
  r.Y.set_block(0, 0, (M * (Delta * rm.A_ref - z_A)).transpose());
  r.Y.set_block(n, 0, (M * (Delta * rm.B_ref)).transpose());
  r.Y.set_block(n + m, 0, (M * z_Bt).transpose());
  return r;
}

RegressionTarget regression_target(const Matrix& z, real Delta, const Dims& d,
                                   const ReferenceModelSpec& rm) {
  RegressionTarget out;
  out.theta_est = Matrix(d.theta_rows(), d.m);
  const real s = std::max(std::abs(Delta), z.max_abs());
  if (!(s > 0) || !std::isfinite(s)) return out;

  const ZSlices sl = slice_z(z / s, d);
  const Regression reg = build_regression(sl.z_A, sl.z_B, sl.z_Bt, Delta / s, rm);
  if (!(reg.Omega > 0)) return out;

  out.degenerate = false;
  out.theta_est = reg.Y / reg.Omega;
  out.log_Omega = std::log(reg.Omega) + static_cast<real>(2 * d.m) * std::log(s);
  return out;
}

}  // namespace swmrac
