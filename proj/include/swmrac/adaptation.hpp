#pragma once

#include <cmath>

#include "swmrac/matrix.hpp"

namespace swmrac {

struct AdaptationGains {
  real rho = 0;  // dead-zone level on Omega
  real gamma0 = 1;
  real gamma1 = 1;

  void validate() const;
};

// gamma = 0 if Omega <= rho, else (gamma0 |omega|^2 + gamma1) / Omega^2.
// lambda_max(omega omega^T) is taken as |omega|^2.
real gain(real Omega, std::span<const real> omega, const AdaptationGains& g);

// Written form -gamma Omega (Omega theta_hat - Y); exactly zero for gamma = 0.
Matrix theta_derivative(const Matrix& theta_hat, const Matrix& Y, real Omega, real gamma);

// Dead-zone test carried out on log(Omega) so that it stays meaningful when
// Omega underflows.
inline bool above_dead_zone(real log_Omega, real rho) {
  return rho > 0 ? log_Omega > std::log(rho) : std::isfinite(log_Omega);
}

// Effective-rate form used by the integrator:
// -(gamma0 |omega|^2 + gamma1) (theta_hat - theta_est), theta_est = Y / Omega,
// and zero inside the dead zone.
Matrix theta_derivative_stable(const Matrix& theta_hat, const Matrix& theta_est, real log_Omega,
                               std::span<const real> omega, const AdaptationGains& g);

}  // namespace swmrac
