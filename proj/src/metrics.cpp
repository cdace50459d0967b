#include "swmrac/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "swmrac/matkernel.hpp"

namespace swmrac {

SampleRange time_range(const TelemetryTable& tab, double t_from, double t_to) {
  SampleRange r;
  std::size_t lo = 0, hi = tab.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (tab.t(mid) < t_from) lo = mid + 1; else hi = mid;
  }
  r.begin = lo;
  r.end = lo;
  while (r.end < tab.size() && tab.t(r.end) < t_to) ++r.end;
  return r;
}

std::vector<SwitchWindow> switch_windows(const RunResult& run, const Scenario& sc) {
  const TelemetryTable& tab = run.telemetry;
  const auto& segs = sc.plant.segments;
  const double t_last = tab.size() ? tab.t(tab.size() - 1) : static_cast<double>(sc.t0());
  std::vector<SwitchWindow> out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    SwitchWindow w;
    w.index = i;
    w.t_switch = static_cast<double>(segs[i].t_start);
    if (w.t_switch > t_last) break;
    // The last sample of the run belongs to the final window.
    w.t_next = i + 1 < segs.size() ? static_cast<double>(segs[i + 1].t_start)
                                   : std::nextafter(t_last, 1e300);
    w.t_hat = w.t_switch;
    w.x_at_t_hat = sc.plant.x0;
    if (i > 0) {
      const auto it = std::find_if(run.resets.begin(), run.resets.end(), [&](const ResetEvent& e) {
        return e.t_hat >= segs[i].t_start && e.t_hat < (i + 1 < segs.size() ? segs[i + 1].t_start
                                                                              : sc.integrator.t_end + 1);
      });
      if (it != run.resets.end()) {
        w.t_hat = static_cast<double>(it->t_hat);
        w.x_at_t_hat = it->x_at_reset;
        w.reset_seen = true;
      } else {
        // Without a reset the filters keep integrating from the run start.
        w.x_at_t_hat.clear();
      }
    }
    w.samples = time_range(tab, w.t_switch, w.t_next);
    out.push_back(std::move(w));
  }
  return out;
}

std::optional<SampleRange> active_range(const TelemetryTable& tab, const SampleRange& window,
                                        double t_from, real rho, std::size_t consecutive) {
  const real log_rho = rho > 0 ? std::log(rho) : -std::numeric_limits<real>::infinity();
  std::size_t run = 0;
  for (std::size_t k = window.begin; k < window.end; ++k) {
    if (tab.t(k) < t_from) continue;
    const real lo = tab.log_Omega(k);
    run = (lo > log_rho && std::isfinite(lo)) ? run + 1 : 0;
    if (run == std::max<std::size_t>(consecutive, 1)) return SampleRange{k + 1 - run, window.end};
  }
  return std::nullopt;
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> xi) {
  if (t.size() != xi.size()) throw DimensionError("fit_decay: t and xi lengths differ");
  DecayFit fit;
  if (t.empty() || std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0; })) return fit;

  const real t0 = t.front();
  real st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(xi[k] > 0)) continue;
    const real tk = t[k] - t0;
    const real yk = std::log(static_cast<real>(xi[k]));
    st += tk;
    sy += yk;
    stt += tk * tk;
    sty += tk * yk;
    ++n;
  }
  if (n < 10) throw DomainError("fit_decay: need at least 10 samples with |xi| > 0");
  const real nn = static_cast<real>(n);
  const real den = nn * stt - st * st;
  const real slope = den != 0 ? (nn * sty - st * sy) / den : 0;
  const real icept = (sy - slope * st) / nn;
  fit.c1 = std::exp(icept);
  fit.c2 = -slope;
  fit.samples = n;
  return fit;
}

DecayFit fit_decay(const TelemetryTable& tab, const SampleRange& r) {
  std::vector<double> t, xi;
  t.reserve(r.size());
  xi.reserve(r.size());
  for (std::size_t k = r.begin; k < r.end; ++k) {
    t.push_back(tab.t(k));
    xi.push_back(tab.xi_norm(k));
  }
  return fit_decay(t, xi);
}

real envelope_excess(const TelemetryTable& tab, const SampleRange& r, const DecayFit& fit) {
  if (r.empty() || !(fit.c1 > 0) || !std::isfinite(fit.c2)) return 0;
  const real t0 = tab.t(r.begin);
  real worst = 0;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    const real env = fit.c1 * std::exp(-fit.c2 * (tab.t(k) - t0));
    worst = std::max(worst, static_cast<real>(tab.xi_norm(k)) / env);
  }
  return worst;
}

MonotonicityReport check_monotonicity(const TelemetryTable& tab, const SampleRange& r,
                                      const Matrix& true_theta, real slack) {
  MonotonicityReport rep;
  rep.per_component.assign(true_theta.size(), 0);
  if (tab.theta_size() != true_theta.size())
    throw DimensionError("check_monotonicity: ground truth does not match theta_hat");
  const auto truth = true_theta.data();
  for (std::size_t k = r.begin + 1; k < r.end; ++k) {
    const auto prev = tab.theta_hat(k - 1);
    const auto cur = tab.theta_hat(k);
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const real inc = std::abs(cur[j] - truth[j]) - std::abs(prev[j] - truth[j]);
      if (inc > slack) {
        ++rep.violations;
        ++rep.per_component[j];
        rep.max_increase = std::max(rep.max_increase, inc);
        if (!rep.first_violation_t) rep.first_violation_t = tab.t(k);
      }
    }
  }
  return rep;
}

real regression_residual(const Matrix& Y, real Omega, const Matrix& true_theta) {
  require_same_shape(Y, true_theta, "regression_residual");
  const Matrix diff = Y - Omega * true_theta;
  return diff.frobenius_norm() / (1 + Omega * true_theta.frobenius_norm());
}

real regression_residual(const TelemetryTable& tab, const SampleRange& r, const Matrix& true_theta) {
  if (tab.theta_size() != true_theta.size())
    throw DimensionError("regression_residual: ground truth does not match theta_hat");
  const real theta_norm = true_theta.frobenius_norm();
  const auto truth = true_theta.data();
  real worst = 0;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    const real lo = tab.log_Omega(k);
    if (!std::isfinite(lo)) continue;  // Omega = 0 gives Y = 0: residual 0
    const real Omega = std::exp(lo);
    const auto est = tab.theta_est(k);
    real s = 0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const real e = est[j] - truth[j];
      s += e * e;
    }
    worst = std::max(worst, Omega * std::sqrt(s) / (1 + Omega * theta_norm));
  }
  return worst;
}

real fe_level(std::span<const double> t, const std::vector<std::vector<double>>& phi) {
  if (t.size() != phi.size()) throw DimensionError("fe_level: t and phi lengths differ");
  if (t.size() < 2) return 0;
  const std::size_t q = phi.front().size();
  Matrix G(q, q);
  for (std::size_t k = 1; k < t.size(); ++k) {
    const real dt = t[k] - t[k - 1];
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j)
        G(i, j) += dt / 2 *
                   (static_cast<real>(phi[k - 1][i]) * phi[k - 1][j] +
                    static_cast<real>(phi[k][i]) * phi[k][j]);
  }
  return std::max<real>(0, sym_eig_extremes(G).min);
}

real fe_level(const TelemetryTable& tab, const SampleRange& r) {
  std::vector<double> t;
  std::vector<std::vector<double>> phi;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    t.push_back(tab.t(k));
    const auto p = tab.phi_bar_n(k);
    phi.emplace_back(p.begin(), p.end());
  }
  return fe_level(t, phi);
}

OmegaBounds omega_bounds(const TelemetryTable& tab, const SampleRange& r) {
  OmegaBounds b;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    b.log_lb = std::min<real>(b.log_lb, tab.log_Omega(k));
    b.log_ub = std::max<real>(b.log_ub, tab.log_Omega(k));
  }
  return b;
}

Matrix extended_truth(const PlantSegment& seg, std::span<const real> x_at_t_hat) {
  const std::size_t n = seg.A.rows();
  const std::size_t m = seg.B.cols();
  const std::size_t p = seg.theta_unc.rows();
  if (x_at_t_hat.size() != n) throw DimensionError("extended_truth: x(t_hat) length mismatch");
  Matrix tb(n + m + p + 1, n);
  tb.set_block(0, 0, seg.A.transpose());
  tb.set_block(n, 0, seg.B.transpose());
  tb.set_block(n + m, 0, seg.theta_unc * seg.B.transpose());
  for (std::size_t j = 0; j < n; ++j) tb(n + m + p, j) = x_at_t_hat[j];
  return tb;
}

IdentityReport check_identities(const TelemetryTable& tab, const SampleRange& r,
                                const PlantSegment& seg, std::span<const real> x_at_t_hat,
                                real min_rcond) {
  IdentityReport rep;
  const Dims& d = tab.dims();
  const Matrix tb = extended_truth(seg, x_at_t_hat);
  const real log_det_btb = std::log(det(seg.B.transpose() * seg.B));

  real max_z = 0;
  for (std::size_t k = r.begin; k < r.end; ++k) max_z = std::max<real>(max_z, tab.z_norm(k));
  const real eps_bound = 1e-8L * (1 + max_z);

  for (std::size_t k = r.begin; k < r.end; ++k) {
    rep.eps_ratio = std::max<real>(rep.eps_ratio, tab.eps_norm(k) / eps_bound);

    const real Delta = tab.Delta(k);
    if (min_rcond > 0 && !(tab.rcond(k) >= min_rcond)) {
      ++rep.skipped;
      continue;
    }
    ++rep.samples;
    if (Delta == 0) continue;
    const auto z = tab.z(k);
    real num = 0, den = 0;
    for (std::size_t i = 0; i < tb.rows(); ++i)
      for (std::size_t j = 0; j < tb.cols(); ++j) {
        const real ref = Delta * tb(i, j);
        const real e = z[i * d.n + j] - ref;
        num += e * e;
        den += ref * ref;
      }
    if (den > 0) rep.z_rel_error = std::max(rep.z_rel_error, std::sqrt(num / den));

    const real lo = tab.log_Omega(k);
    if (std::isfinite(lo)) {
      const real expected = static_cast<real>(2 * d.m) * std::log(std::abs(Delta)) + log_det_btb;
      rep.omega_rel_error = std::max(rep.omega_rel_error, std::abs(std::expm1(lo - expected)));
    } else {
      rep.omega_rel_error = std::numeric_limits<real>::infinity();
    }
  }
  return rep;
}

std::vector<WindowReport> window_reports(const RunResult& run, const Scenario& sc,
                                         real identity_min_rcond, real monotonicity_slack) {
  const TelemetryTable& tab = run.telemetry;
  const real h = sc.integrator.h;
  std::vector<WindowReport> out;
  for (const SwitchWindow& w : switch_windows(run, sc)) {
    WindowReport rep;
    rep.index = w.index;
    rep.t_begin = w.t_switch;
    rep.t_end = std::min(w.t_next, tab.size() ? tab.t(tab.size() - 1) : w.t_next);
    rep.t_hat = w.t_hat;
    if (w.reset_seen) rep.detection_delay = w.t_hat - w.t_switch;

    const Matrix& truth = run.ideal.at(w.index).theta;
    for (std::size_t k = w.samples.begin; k < w.samples.end; ++k)
      if (!(tab.Omega(k) >= 0)) rep.omega_nonnegative = false;

    const SampleRange settled =
        time_range(tab, static_cast<double>(w.t_hat + 10 * h), w.t_next);
    rep.residual = regression_residual(tab, settled, truth);
    if (w.reset_seen)
      rep.residual_delay = regression_residual(tab, time_range(tab, w.t_switch, w.t_hat), truth);
    if (!w.x_at_t_hat.empty())
      rep.identities = check_identities(tab, settled, sc.plant.segments[w.index], w.x_at_t_hat,
                                       identity_min_rcond);

    const auto active = active_range(tab, w.samples, w.t_hat, run.rho);
    if (active) {
      rep.t_active = tab.t(active->begin);
      rep.omega = omega_bounds(tab, *active);
      const real log_rho = run.rho > 0 ? std::log(run.rho) : -std::numeric_limits<real>::infinity();
      rep.omega_stays_above_rho = rep.omega.log_lb > log_rho;
      rep.monotonicity = check_monotonicity(tab, *active, truth, monotonicity_slack);
      rep.xi_start = tab.xi_norm(active->begin);
      rep.xi_end = tab.xi_norm(active->end - 1);
      if (active->size() >= 10) {
        rep.decay = fit_decay(tab, *active);
        rep.envelope = envelope_excess(tab, *active, rep.decay);
      }
      rep.fe_alpha = fe_level(tab, *active);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace swmrac
