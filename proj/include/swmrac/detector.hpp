#pragma once

#include <optional>

#include "swmrac/matrix.hpp"

namespace swmrac {

// eps = Delta * phi_bar_n z_bar_n^T - phi_bar_n phi_bar_n^T z, q x n.
// Vanishes identically while the plant parameters stay constant since the
// last filter reset.
Matrix indicator(real Delta, std::span<const real> phi_bar_n, std::span<const real> z_bar_n,
                 const Matrix& z);

// Magnitude the two terms of the indicator would have without cancellation:
// |phi_bar_n|^2 |adj(omega_ext)|_F |upsilon|_F + |Delta| |phi_bar_n| |z_bar_n|.
// Dividing |eps| by it gives a scale-free switch statistic.
real indicator_scale(real Delta, std::span<const real> phi_bar_n, std::span<const real> z_bar_n,
                     real adj_norm, real upsilon_norm);

struct DetectorState {
  real t_up = 0;                     // time of the last trigger (initially t0)
  int i = 1;                         // switch-estimate counter
  std::optional<real> pending_reset; // scheduled filter reset instant
  real eps_threshold = 0;
  real delta_pr = 0.1;
  bool immediate_reset = false;      // reset at the trigger instant instead of t + delta_pr
  bool enabled = true;
  std::optional<real> last_t;

  static DetectorState initial(real t0, real eps_threshold, real delta_pr);
};

struct DetectorAction {
  bool schedule_reset = false;
  real t_hat = 0;
};

struct DetectorStep {
  DetectorState state;
  DetectorAction action;
};

// One sample of the detection rule: if t - t_up >= delta_pr and the statistic
// exceeds the threshold, schedule a reset at t + delta_pr, set t_up = t and
// advance i. Throws TemporalOrderError when t decreases across calls.
DetectorStep detector_step(DetectorState d, real statistic, real t);

}  // namespace swmrac
