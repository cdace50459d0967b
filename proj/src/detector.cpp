#include "swmrac/detector.hpp"

#include <cmath>

namespace swmrac {

Matrix indicator(real Delta, std::span<const real> phi_bar_n, std::span<const real> z_bar_n,
                 const Matrix& z) {
  const std::size_t q = phi_bar_n.size();
  const std::size_t n = z_bar_n.size();
  if (z.rows() != q || z.cols() != n) {
    throw DimensionError("indicator: z is " + std::to_string(z.rows()) + "x" +
                         std::to_string(z.cols()) + ", expected " + std::to_string(q) + "x" +
                         std::to_string(n));
  }
  // phi_bar_n^T z first, so the rank-1 product is never formed.
  Vector pz(n, 0);
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < n; ++j) pz[j] += phi_bar_n[k] * z(k, j);

  Matrix eps(q, n);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < n; ++j)
      eps(i, j) = phi_bar_n[i] * (Delta * z_bar_n[j] - pz[j]);
  return eps;
}

real indicator_scale(real Delta, std::span<const real> phi_bar_n, std::span<const real> z_bar_n,
                     real adj_norm, real upsilon_norm) {
  return norm_sq(phi_bar_n) * adj_norm * upsilon_norm +
         std::abs(Delta) * norm(phi_bar_n) * norm(z_bar_n);
}

DetectorState DetectorState::initial(real t0, real eps_threshold, real delta_pr) {
  DetectorState d;
  d.t_up = t0;
  d.eps_threshold = eps_threshold;
  d.delta_pr = delta_pr;
  return d;
}

DetectorStep detector_step(DetectorState d, real statistic, real t) {
  if (d.last_t && t < *d.last_t) {
    throw TemporalOrderError("detector_step: t = " + std::to_string(static_cast<double>(t)) +
                             " after " + std::to_string(static_cast<double>(*d.last_t)));
  }
  d.last_t = t;
  DetectorAction action;
  if (d.enabled && t - d.t_up >= d.delta_pr && statistic > d.eps_threshold) {
    action.schedule_reset = true;
    action.t_hat = d.immediate_reset ? t : t + d.delta_pr;
    d.pending_reset = action.t_hat;
    d.t_up = t;
    ++d.i;
  }
  return {d, action};
}

}  // namespace swmrac
