#include "swmrac/adaptation.hpp"

namespace swmrac {

void AdaptationGains::validate() const {
  if (!(rho >= 0) || !std::isfinite(rho)) throw DomainError("adaptation: rho must be >= 0");
  if (!(gamma0 >= 1) || !std::isfinite(gamma0)) throw DomainError("adaptation: gamma0 must be >= 1");
  if (!(gamma1 >= 0) || !std::isfinite(gamma1)) throw DomainError("adaptation: gamma1 must be >= 0");
}

real gain(real Omega, std::span<const real> omega, const AdaptationGains& g) {
  if (Omega < 0) throw DomainError("gain: Omega must be non-negative");
  if (Omega <= g.rho || Omega == 0) return 0;
  return (g.gamma0 * norm_sq(omega) + g.gamma1) / (Omega * Omega);
}

Matrix theta_derivative(const Matrix& theta_hat, const Matrix& Y, real Omega, real gamma) {
  require_same_shape(theta_hat, Y, "theta_derivative");
  Matrix d(theta_hat.rows(), theta_hat.cols());
  if (gamma == 0) return d;
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j)
      d(i, j) = -gamma * Omega * (Omega * theta_hat(i, j) - Y(i, j));
  return d;
}

Matrix theta_derivative_stable(const Matrix& theta_hat, const Matrix& theta_est, real log_Omega,
                               std::span<const real> omega, const AdaptationGains& g) {
  require_same_shape(theta_hat, theta_est, "theta_derivative_stable");
  Matrix d(theta_hat.rows(), theta_hat.cols());
  if (!above_dead_zone(log_Omega, g.rho)) return d;
  const real rate = g.gamma0 * norm_sq(omega) + g.gamma1;
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) = -rate * (theta_hat(i, j) - theta_est(i, j));
  return d;
}

}  // namespace swmrac
