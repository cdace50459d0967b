#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "swmrac/engine.hpp"

namespace swmrac {

// Sample range [begin, end) of a telemetry table.
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool empty() const { return end <= begin; }
  std::size_t size() const { return empty() ? 0 : end - begin; }
};

// One inter-switch window [t_switch, t_next) of a run. `t_hat` is the first
// filter reset inside the window (t0 for the first window, t_switch when the
// detector never reset there).
struct SwitchWindow {
  std::size_t index = 0;  // plant segment
  double t_switch = 0;
  double t_next = 0;
  double t_hat = 0;
  bool reset_seen = false;
  Vector x_at_t_hat;  // state at t_hat, for the initial-condition row of z
  SampleRange samples;
};

std::vector<SwitchWindow> switch_windows(const RunResult& run, const Scenario& sc);

// First sample at or after t_from where log(Omega) > log(rho) holds for
// `consecutive` samples in a row; the active range runs from there to the
// window end.
std::optional<SampleRange> active_range(const TelemetryTable& tab, const SampleRange& window,
                                        double t_from, real rho, std::size_t consecutive = 10);

// Samples with t in [t_from, t_to).
SampleRange time_range(const TelemetryTable& tab, double t_from, double t_to);

struct DecayFit {
  real c1 = 0;
  real c2 = std::numeric_limits<real>::infinity();  // sentinel for all-zero xi
  std::size_t samples = 0;
};

// Least-squares fit of log|xi| = log c1 - c2 (t - t_start) over the samples
// with |xi| > 0. Throws DomainError with fewer than 10 such samples unless
// every |xi| is zero.
DecayFit fit_decay(std::span<const double> t, std::span<const double> xi);
DecayFit fit_decay(const TelemetryTable& tab, const SampleRange& r);

// Largest ratio xi / (c1 exp(-c2 (t - t_start))) over the range.
real envelope_excess(const TelemetryTable& tab, const SampleRange& r, const DecayFit& fit);

struct MonotonicityReport {
  std::size_t violations = 0;
  real max_increase = 0;
  std::optional<double> first_violation_t;
  std::vector<std::size_t> per_component;
};

// Step-to-step increases of |theta_hat_k - theta_k| beyond `slack`.
MonotonicityReport check_monotonicity(const TelemetryTable& tab, const SampleRange& r,
                                      const Matrix& true_theta, real slack = 1e-9L);

// max |Y - Omega theta| / (1 + Omega |theta|) with Y = Omega * theta_est,
// evaluated from log(Omega) so that Omega below the double range is kept.
real regression_residual(const TelemetryTable& tab, const SampleRange& r, const Matrix& true_theta);

// Single-snapshot form of the same quantity.
real regression_residual(const Matrix& Y, real Omega, const Matrix& true_theta);

// lambda_min of the trapezoidal Gram integral of phi_bar_n over the range.
real fe_level(const TelemetryTable& tab, const SampleRange& r);
real fe_level(std::span<const double> t, const std::vector<std::vector<double>>& phi);

struct OmegaBounds {
  real log_lb = std::numeric_limits<real>::infinity();
  real log_ub = -std::numeric_limits<real>::infinity();
};
OmegaBounds omega_bounds(const TelemetryTable& tab, const SampleRange& r);

// Stacked true parameters [A^T; B^T; theta_unc B^T; x(t_hat)^T], q x n, so
// that z = Delta * theta_bar on a window without switches.
Matrix extended_truth(const PlantSegment& seg, std::span<const real> x_at_t_hat);

struct IdentityReport {
  real eps_ratio = 0;     // max |eps| / (1e-8 (1 + max |z|))
  real z_rel_error = 0;   // max |z - Delta theta_bar| / |Delta theta_bar|
  real omega_rel_error = 0;  // max |Omega / (Delta^{2m} det(B^T B)) - 1|
  std::size_t samples = 0;  // samples the z and Omega identities were evaluated on
  std::size_t skipped = 0;  // samples below min_rcond
};

// The eps bound is checked on every sample. The z and Omega identities are
// checked where the equilibrated extension matrix has rcond >= min_rcond:
// below that, Delta and z are dominated by rounding.
IdentityReport check_identities(const TelemetryTable& tab, const SampleRange& r,
                                const PlantSegment& seg, std::span<const real> x_at_t_hat,
                                real min_rcond = 0);

struct WindowReport {
  std::size_t index = 0;
  double t_begin = 0;  // window bounds
  double t_end = 0;
  double t_hat = 0;
  std::optional<double> detection_delay;  // t_hat - t_switch
  std::optional<double> t_active;
  DecayFit decay;
  real xi_start = 0;
  real xi_end = 0;
  real envelope = 0;
  MonotonicityReport monotonicity;
  real residual = 0;  // on [t_hat + 10h, t_next)
  real residual_delay = 0;  // on [t_switch, t_hat), reported only
  OmegaBounds omega;
  real fe_alpha = 0;
  IdentityReport identities;
  bool omega_nonnegative = true;
  bool omega_stays_above_rho = false;
};

// `identity_min_rcond` is passed to check_identities, `monotonicity_slack`
// to check_monotonicity.
std::vector<WindowReport> window_reports(const RunResult& run, const Scenario& sc,
                                         real identity_min_rcond = 1e-12L,
                                         real monotonicity_slack = 1e-9L);

}  // namespace swmrac
