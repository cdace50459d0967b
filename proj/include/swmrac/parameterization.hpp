#pragma once

#include "swmrac/matrix.hpp"

namespace swmrac {

// Filter gains: l of the state filters, sigma of the forgetting weight in the
// extension integrals.
struct Gains {
  real l = 10;
  real sigma = 5;

  void validate() const;
};

// Resettable filters and the two extension integrals. `omega_ext` is the
// q x q Gram-type extension matrix (q = n+m+p+1) and `upsilon` the q x n
// mixing integral; both restart from zero at `t_hat`.
struct FilterBankState {
  Vector phi_bar;    // n+m+p
  // Initial-condition channel exp(-l (t - t_hat)), carried as a filter state
  // so the integrator treats it exactly like the other filter outputs.
  real decay = 1;
  Matrix omega_ext;  // q x q
  Matrix upsilon;    // q x n
  real t_hat = 0;

  static FilterBankState zero(std::size_t n, std::size_t m, std::size_t p, real t_hat);

  std::size_t n() const { return upsilon.cols(); }
  std::size_t q() const { return omega_ext.rows(); }
};

struct NormalizedSignals {
  Vector phi_bar_n;  // q
  Vector z_bar_n;    // n
  real ns = 0;       // 1 / (1 + |phi_bar|^2)
};

// phi_bar = [Phi_bar; decay], z_bar = x - l x_bar, both scaled by ns.
// Throws TemporalOrderError for t < t_hat.
NormalizedSignals normalized_signals(const FilterBankState& s, std::span<const real> x, real t,
                                     const Gains& g);

struct FilterDerivatives {
  Vector phi_bar;
  real decay = 0;
  Matrix omega_ext;
  Matrix upsilon;
};

// Phi = [x; u; Psi(x)] drives the state filters.
FilterDerivatives filter_derivatives(const FilterBankState& s, std::span<const real> Phi,
                                     std::span<const real> x, real t, const Gains& g);

FilterBankState reset(const FilterBankState& s, real t_hat_new);

struct DremOutputs {
  Matrix z;  // adj(omega_ext) * upsilon
  real Delta = 0;
  real adj_norm = 0;  // |adj(omega_ext)|_F
};

// The extension matrix is evaluated through its symmetric equilibration
// omega_ext = D C D, D = diag(omega_ext)^{1/2}: det and adj of C are formed
// and scaled back. The filter channels differ in magnitude by many orders,
// and C is far better conditioned than omega_ext itself.
DremOutputs drem_outputs(const FilterBankState& s);

// D^{-1} S D^{-1} with D = diag(S)^{1/2}; zero diagonal entries are left
// unscaled. `scale` receives D's diagonal when non-null.
Matrix equilibrate(const Matrix& S, Vector* scale = nullptr);

// lambda_min / lambda_max of the equilibrated matrix (0 for an indefinite
// or zero input).
real equilibrated_rcond(const Matrix& S);

}  // namespace swmrac
