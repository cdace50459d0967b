#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swmrac/engine.hpp"
#include "swmrac/errors.hpp"
#include "swmrac/matkernel.hpp"
#include "swmrac/metrics.hpp"

using namespace swmrac;

namespace {

Vector random_vector(std::mt19937_64& g, std::size_t n, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (real& x : v) x = u(g);
  return v;
}

}  // namespace

TEST(NormalizedSignals, ResetInstantValues) {
  const FilterBankState s = FilterBankState::zero(2, 2, 2, 0.7L);
  const Gains g{10, 5};
  const NormalizedSignals sig = normalized_signals(s, Vector{3, -4}, 0.7L, g);
  ASSERT_EQ(sig.phi_bar_n.size(), 7u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(sig.phi_bar_n[i], 0);
  EXPECT_EQ(sig.phi_bar_n[6], 0.5L);
  EXPECT_EQ(sig.ns, 0.5L);
  EXPECT_EQ(sig.z_bar_n[0], 1.5L);
  EXPECT_EQ(sig.z_bar_n[1], -2);
}

// |phi_bar_n| = |phi_bar| / (1 + |phi_bar|^2) <= 1/2.
TEST(NormalizedSignals, NormBoundedByOneHalf) {
  std::mt19937_64 g(1);
  const Gains gains{10, 5};
  for (int t = 0; t < 2000; ++t) {
    FilterBankState s = FilterBankState::zero(2, 2, 2, 0);
    const double scale = std::pow(10.0, (t % 13) - 6);
    s.phi_bar = random_vector(g, 6, -scale, scale);
    s.decay = random_vector(g, 1, 0, 1)[0];
    const NormalizedSignals sig = normalized_signals(s, Vector{0, 0}, 1, gains);
    ASSERT_LE(norm(sig.phi_bar_n), 0.5L + 1e-18L);
  }
}

TEST(NormalizedSignals, RejectsTimeBeforeReset) {
  const FilterBankState s = FilterBankState::zero(2, 2, 2, 1);
  EXPECT_THROW(normalized_signals(s, Vector{0, 0}, 0.5L, Gains{}), TemporalOrderError);
  EXPECT_THROW(normalized_signals(s, Vector{0}, 1, Gains{}), DimensionError);
}

TEST(FilterDerivatives, ShapesSymmetryAndForgetting) {
  std::mt19937_64 g(2);
  FilterBankState s = FilterBankState::zero(2, 2, 2, 0);
  s.phi_bar = random_vector(g, 6);
  s.decay = 0.3L;
  const Gains gains{10, 5};
  const Vector Phi = random_vector(g, 6);
  const Vector x = random_vector(g, 2);
  const FilterDerivatives d0 = filter_derivatives(s, Phi, x, 0, gains);
  const FilterDerivatives d1 = filter_derivatives(s, Phi, x, 0.2L, gains);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(d0.phi_bar[i], -10 * s.phi_bar[i] + Phi[i]);
  EXPECT_EQ(d0.decay, -3);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      EXPECT_EQ(d0.omega_ext(i, j), d0.omega_ext(j, i));
      EXPECT_NEAR(static_cast<double>(d1.omega_ext(i, j)),
                  static_cast<double>(d0.omega_ext(i, j)) * std::exp(-1.0), 1e-16);
    }
  EXPECT_THROW(filter_derivatives(s, Vector{1, 2}, x, 0, gains), DimensionError);
}

TEST(FilterReset, ZeroesEverythingAndMovesInstant) {
  FilterBankState s = FilterBankState::zero(2, 2, 2, 0);
  s.phi_bar.assign(6, 1);
  s.decay = 0.1L;
  s.omega_ext.fill(3);
  s.upsilon.fill(4);
  const FilterBankState r = reset(s, 2);
  EXPECT_EQ(r.t_hat, 2);
  EXPECT_EQ(r.decay, 1);
  EXPECT_EQ(r.omega_ext.max_abs(), 0);
  EXPECT_EQ(r.upsilon.max_abs(), 0);
  EXPECT_EQ(norm(r.phi_bar), 0);
  EXPECT_THROW(reset(r, 1), TemporalOrderError);
}

// With upsilon = W theta_bar, adj(W) upsilon = det(W) theta_bar for any
// symmetric W, including the badly scaled ones the equilibration targets.
TEST(Drem, AdjugateMixingRecoversScaledParameters) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 200; ++t) {
    FilterBankState s = FilterBankState::zero(2, 2, 2, 0);
    const std::size_t q = 7;
    Matrix theta_bar(q, 2);
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < 2; ++j) theta_bar(i, j) = random_vector(g, 1)[0];
    Vector channel_scale(q);
    for (std::size_t i = 0; i < q; ++i) channel_scale[i] = std::pow(10.0L, -static_cast<int>(i % 4) * (t % 3));
    for (int k = 0; k < 12; ++k) {
      Vector phi = random_vector(g, q);
      for (std::size_t i = 0; i < q; ++i) phi[i] *= channel_scale[i];
      s.omega_ext = s.omega_ext + outer(phi, phi);
    }
    s.upsilon = s.omega_ext * theta_bar;
    const DremOutputs o = drem_outputs(s);
    EXPECT_NEAR(static_cast<double>(o.Delta / det(s.omega_ext)), 1.0, 1e-9);
    const Matrix expected = o.Delta * theta_bar;
    ASSERT_LE((o.z - expected).frobenius_norm(), 1e-9L * expected.frobenius_norm()) << "case " << t;
  }
}

TEST(Equilibrate, UnitDiagonalAndRcond) {
  const Matrix S = Matrix::from_rows({{4, 2}, {2, 9}});
  Vector d;
  const Matrix C = equilibrate(S, &d);
  EXPECT_EQ(C(0, 0), 1);
  EXPECT_EQ(C(1, 1), 1);
  EXPECT_NEAR(static_cast<double>(C(0, 1)), 1.0 / 3.0, 1e-18);
  EXPECT_EQ(d[0], 2);
  EXPECT_EQ(d[1], 3);
  // Eigenvalues of [[1, 1/3], [1/3, 1]] are 2/3 and 4/3.
  EXPECT_NEAR(static_cast<double>(equilibrated_rcond(S)), 0.5, 1e-15);
  EXPECT_EQ(equilibrated_rcond(Matrix(3, 3)), 0);
  EXPECT_NEAR(static_cast<double>(equilibrated_rcond(Matrix::from_rows({{1e-30L, 0}, {0, 1e30L}}))), 1, 1e-15);
}

// x - l x_bar = A x_bar + B u_bar + B theta_unc^T Psi_bar + exp(-l (t - t_hat)) x(t_hat)
// along any trajectory of the plant, checked on a fine RK4 integration.
TEST(FilterRegression, LinearRegressionHoldsAlongTrajectory) {
  const Scenario sc = canonical_scenario();
  const PlantSegment& seg = sc.plant.segments[0];
  const real l = 10;
  const std::size_t n = 2;
  // y = [x (2), x_bar (2), u_bar (2), psi_bar (2), decay]
  auto u_of = [](real t) { return Vector{std::sin(3 * t), std::cos(t)}; };
  auto f = [&](real t, const FlatState& y) {
    const Vector x{y.v[0], y.v[1]};
    const Vector u = u_of(t);
    const Vector psi = sc.plant.basis.eval(x);
    const Vector dx = plant_derivative(x, u, seg, sc.plant.basis);
    FlatState d{Vector(9)};
    for (std::size_t i = 0; i < n; ++i) {
      d.v[i] = dx[i];
      d.v[2 + i] = -l * y.v[2 + i] + x[i];
      d.v[4 + i] = -l * y.v[4 + i] + u[i];
      d.v[6 + i] = -l * y.v[6 + i] + psi[i];
    }
    d.v[8] = -l * y.v[8];
    return d;
  };
  FlatState y{Vector(9, 0)};
  y.v[0] = -1;
  y.v[8] = 1;
  const real h = 1e-4L;
  const Matrix theta_bar = extended_truth(seg, Vector{-1, 0});
  for (int k = 0; k < 5000; ++k) {
    y = rk4(f, k * h, y, h);
    if ((k + 1) % 500 != 0) continue;
    const Vector phi{y.v[2], y.v[3], y.v[4], y.v[5], y.v[6], y.v[7], y.v[8]};
    const Vector rhs = theta_bar.transpose() * phi;
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_NEAR(static_cast<double>(y.v[i] - l * y.v[2 + i]), static_cast<double>(rhs[i]), 1e-12)
          << "t = " << static_cast<double>((k + 1) * h);
  }
}

TEST(GainsValidation, RejectsNonPositive) {
  EXPECT_THROW((Gains{0, 5}).validate(), DomainError);
  EXPECT_THROW((Gains{10, -1}).validate(), DomainError);
  EXPECT_NO_THROW((Gains{10, 5}).validate());
}
