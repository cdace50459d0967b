#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swmrac/adaptation.hpp"
#include "swmrac/errors.hpp"

using namespace swmrac;

TEST(Gain, HandComputedValues) {
  const AdaptationGains g{0.5L, 1, 1};
  // (1 * 4 + 1) / 2^2
  EXPECT_EQ(gain(2, Vector{2, 0}, g), 1.25L);
  EXPECT_EQ(gain(0.5L, Vector{2, 0}, g), 0);  // Omega == rho is inside the dead zone
  EXPECT_EQ(gain(0.1L, Vector{2, 0}, g), 0);
  EXPECT_THROW(gain(-1, Vector{1}, g), DomainError);
}

TEST(Gain, ZeroRhoStillFreezesAtZeroOmega) {
  EXPECT_EQ(gain(0, Vector{1, 1}, AdaptationGains{0, 1, 1}), 0);
}

// gamma * Omega^2 = gamma0 |omega|^2 + gamma1 whenever Omega > rho.
TEST(Gain, EffectiveRateIdentity) {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(-3, 3);
  const AdaptationGains gains{1e-6L, 2, 0.5L};
  for (int t = 0; t < 1000; ++t) {
    Vector w(6);
    for (real& v : w) v = u(g);
    const real Omega = std::pow(10.0L, u(g));
    const real rate = gain(Omega, w, gains) * Omega * Omega;
    ASSERT_NEAR(static_cast<double>(rate / (2 * norm_sq(w) + 0.5L)), 1.0, 1e-15);
  }
}

TEST(GainsValidation, Limits) {
  EXPECT_THROW((AdaptationGains{-1, 1, 1}).validate(), DomainError);
  EXPECT_THROW((AdaptationGains{0, 0.5L, 1}).validate(), DomainError);
  EXPECT_THROW((AdaptationGains{0, 1, -1}).validate(), DomainError);
  EXPECT_NO_THROW((AdaptationGains{0, 1, 0}).validate());
}

TEST(ThetaDerivative, DeadZoneIsBitExactZero) {
  const Matrix th = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix Y = Matrix::from_rows({{9, 9}, {9, 9}});
  const Matrix d = theta_derivative(th, Y, 1e-310L, 0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(d(i, j), 0);
  const Matrix ds = theta_derivative_stable(th, Y, std::log(1e-20L), Vector{1, 1}, AdaptationGains{1e-10L, 1, 1});
  EXPECT_EQ(ds.max_abs(), 0);
}

TEST(ThetaDerivative, WrittenAndStableFormsAgree) {
  std::mt19937_64 g(10);
  std::uniform_real_distribution<double> u(-1, 1);
  const AdaptationGains gains{1e-8L, 1, 1};
  for (int t = 0; t < 500; ++t) {
    Matrix th(6, 2), est(6, 2);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        th(i, j) = u(g);
        est(i, j) = u(g);
      }
    Vector w(6);
    for (real& v : w) v = u(g);
    const real Omega = std::pow(10.0L, 3 * u(g));
    const Matrix Y = Omega * est;
    const Matrix a = theta_derivative(th, Y, Omega, gain(Omega, w, gains));
    const Matrix b = theta_derivative_stable(th, est, std::log(Omega), w, gains);
    ASSERT_LE(static_cast<double>((a - b).max_abs()), 1e-12 * (1 + static_cast<double>(b.max_abs())));
  }
}

// Inside the active zone each component of theta_hat - theta_est decays.
TEST(ThetaDerivative, DrivesEstimateTowardTarget) {
  const Matrix th = Matrix::from_rows({{2, -1}});
  const Matrix est = Matrix::from_rows({{0, 0}});
  const Matrix d = theta_derivative_stable(th, est, 0, Vector{1}, AdaptationGains{0.5L, 1, 1});
  EXPECT_EQ(d(0, 0), -4);
  EXPECT_EQ(d(0, 1), 2);
}

TEST(DeadZone, LogDomainTest) {
  EXPECT_TRUE(above_dead_zone(std::log(1e-3L), 1e-4L));
  EXPECT_FALSE(above_dead_zone(std::log(1e-5L), 1e-4L));
  EXPECT_TRUE(above_dead_zone(-2000, 0));  // Omega ~ e^-2000 is still positive
  EXPECT_FALSE(above_dead_zone(-INFINITY, 0));
  EXPECT_TRUE(above_dead_zone(-600, 1e-300L));
  EXPECT_FALSE(above_dead_zone(-700, 1e-300L));
}

TEST(ThetaDerivative, ShapeMismatchRejected) {
  EXPECT_THROW(theta_derivative(Matrix(2, 2), Matrix(2, 3), 1, 1), DimensionError);
}
