#include "swmrac/parameterization.hpp"

#include <algorithm>
#include <cmath>

#include "swmrac/matkernel.hpp"

namespace swmrac {

void Gains::validate() const {
  if (!(l > 0) || !std::isfinite(l)) throw DomainError("gains: l must be positive");
  if (!(sigma > 0) || !std::isfinite(sigma)) throw DomainError("gains: sigma must be positive");
}

FilterBankState FilterBankState::zero(std::size_t n, std::size_t m, std::size_t p, real t_hat) {
  const std::size_t q = n + m + p + 1;
  return {Vector(n + m + p, 0), 1, Matrix(q, q), Matrix(q, n), t_hat};
}

NormalizedSignals normalized_signals(const FilterBankState& s, std::span<const real> x, real t,
                                     const Gains& g) {
  if (t < s.t_hat) {
    throw TemporalOrderError("normalized_signals: t = " + std::to_string(static_cast<double>(t)) +
                             " precedes the reset instant " +
                             std::to_string(static_cast<double>(s.t_hat)));
  }
  const std::size_t n = s.n();
  if (x.size() != n) throw DimensionError("normalized_signals: x length mismatch");

  NormalizedSignals out;
  out.phi_bar_n.assign(s.phi_bar.begin(), s.phi_bar.end());
  out.phi_bar_n.push_back(s.decay);
  out.ns = 1 / (1 + norm_sq(out.phi_bar_n));
  for (real& v : out.phi_bar_n) v *= out.ns;

  out.z_bar_n.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.z_bar_n[i] = out.ns * (x[i] - g.l * s.phi_bar[i]);
  return out;
}

FilterDerivatives filter_derivatives(const FilterBankState& s, std::span<const real> Phi,
                                     std::span<const real> x, real t, const Gains& g) {
  if (Phi.size() != s.phi_bar.size()) throw DimensionError("filter_derivatives: Phi length mismatch");
  const NormalizedSignals sig = normalized_signals(s, x, t, g);
  const real w = std::exp(-g.sigma * (t - s.t_hat));

  FilterDerivatives d;
  d.phi_bar.resize(Phi.size());
  for (std::size_t i = 0; i < Phi.size(); ++i) d.phi_bar[i] = -g.l * s.phi_bar[i] + Phi[i];
  d.decay = -g.l * s.decay;

  // w * (a_i a_j) keeps the increment exactly symmetric.
  const std::size_t q = s.q();
  const std::size_t n = s.n();
  d.omega_ext = Matrix(q, q);
  d.upsilon = Matrix(q, n);
  for (std::size_t i = 0; i < q; ++i) {
    const real ai = sig.phi_bar_n[i];
    for (std::size_t j = 0; j < q; ++j) d.omega_ext(i, j) = w * (ai * sig.phi_bar_n[j]);
    for (std::size_t j = 0; j < n; ++j) d.upsilon(i, j) = w * (ai * sig.z_bar_n[j]);
  }
  return d;
}

FilterBankState reset(const FilterBankState& s, real t_hat_new) {
  if (t_hat_new < s.t_hat) {
    throw TemporalOrderError("reset: new instant " + std::to_string(static_cast<double>(t_hat_new)) +
                             " precedes " + std::to_string(static_cast<double>(s.t_hat)));
  }
  FilterBankState r = s;
  std::fill(r.phi_bar.begin(), r.phi_bar.end(), real{0});
  r.decay = 1;
  r.omega_ext.fill(0);
  r.upsilon.fill(0);
  r.t_hat = t_hat_new;
  return r;
}

Matrix equilibrate(const Matrix& S, Vector* scale) {
  if (!S.is_square()) throw DimensionError("equilibrate: square input required");
  const std::size_t q = S.rows();
  Vector d(q, 1);
  for (std::size_t i = 0; i < q; ++i)
    if (S(i, i) > 0) d[i] = std::sqrt(S(i, i));
  Matrix C(q, q);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) C(i, j) = S(i, j) / d[i] / d[j];
  if (scale) *scale = std::move(d);
  return C;
}

real equilibrated_rcond(const Matrix& S) {
  const auto ev = sym_eig_extremes(equilibrate(S), 1e-6L);
  if (!(ev.max > 0)) return 0;
  return std::max(ev.min, real{0}) / ev.max;
}

DremOutputs drem_outputs(const FilterBankState& s) {
  // adj(D C D) = det(D)^2 D^{-1} adj(C) D^{-1}, det(D C D) = det(D)^2 det(C).
  Vector d;
  const Matrix C = equilibrate(s.omega_ext, &d);
  const std::size_t q = C.rows();
  real d2 = 1;
  for (real v : d) d2 *= v * v;
  Matrix adj = adjugate(C);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) adj(i, j) *= d2 / d[i] / d[j];
  DremOutputs out;
  out.z = adj * s.upsilon;
  out.Delta = d2 * det(C);
  out.adj_norm = adj.frobenius_norm();
  return out;
}

}  // namespace swmrac
