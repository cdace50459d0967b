#include "swmrac/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "swmrac/matkernel.hpp"

namespace swmrac {

// ---------------------------------------------------------------------------
// Telemetry storage

TelemetryTable::TelemetryTable(const Dims& d) : dims_(d) {}

void TelemetryTable::reserve(std::size_t rows) {
  t_.reserve(rows);
  x_.reserve(rows * dims_.n);
  x_ref_.reserve(rows * dims_.n);
  u_.reserve(rows * dims_.m);
  theta_.reserve(rows * theta_size());
  z_.reserve(rows * dims_.q() * dims_.n);
  theta_est_.reserve(rows * theta_size());
  phi_.reserve(rows * dims_.q());
  scal_.reserve(rows);
}

void TelemetryTable::append(const Row& r) {
  auto put = [](std::vector<double>& dst, const std::vector<double>& src, std::size_t w,
                const char* what) {
    if (src.size() != w) throw DimensionError(std::string("telemetry: column ") + what);
    dst.insert(dst.end(), src.begin(), src.end());
  };
  if (!t_.empty() && !(r.t > t_.back()))
    throw TemporalOrderError("telemetry: time must increase strictly");
  t_.push_back(r.t);
  put(x_, r.x, dims_.n, "x");
  put(x_ref_, r.x_ref, dims_.n, "x_ref");
  put(u_, r.u, dims_.m, "u");
  put(theta_, r.theta_hat, theta_size(), "theta_hat");
  put(z_, r.z, dims_.q() * dims_.n, "z");
  put(theta_est_, r.theta_est, theta_size(), "theta_est");
  put(phi_, r.phi_bar_n, dims_.q(), "phi_bar_n");
  scal_.push_back({r.Omega, r.log_Omega, r.Delta, r.z_norm, r.eps_norm, r.eps_stat, r.eref_norm,
                   r.thetatilde_norm, r.xi_norm, r.t_hat, r.rcond, r.seg, r.ihat, r.reset_flag, r.trigger,
                   r.adapting});
}

// ---------------------------------------------------------------------------
// Scenario

void Scenario::validate() const {
  plant.validate();
  reference.validate();
  filters.validate();
  adaptation.validate();
  const Dims d = dims();
  if (reference.A_ref.rows() != d.n || reference.B_ref.cols() != d.m)
    throw DimensionError("scenario: reference model does not match the plant dimensions");
  if (reference.x0_ref.size() != d.n) throw DimensionError("scenario: x0_ref length mismatch");
  if (theta0.rows() != d.theta_rows() || theta0.cols() != d.m)
    throw DimensionError("scenario: theta0 must be " + std::to_string(d.theta_rows()) + "x" +
                         std::to_string(d.m));
  if (!theta0.all_finite()) throw DomainError("scenario: theta0 has non-finite entries");
  if (!(delta_pr > 0)) throw DomainError("scenario: delta_pr must be positive");
  if (!(integrator.h > 0)) throw DomainError("scenario: step size must be positive");
  if (!(integrator.t_end > t0())) throw DomainError("scenario: t_end must exceed the start time");
  if (!(integrator.x_max > 0)) throw DomainError("scenario: x_max must be positive");
  if (std::isnan(detector.threshold)) throw DomainError("scenario: detector threshold is NaN");
  for (const auto& seg : plant.segments) ideal_parameters(seg, reference);
}

// ---------------------------------------------------------------------------
// Closed loop

namespace {

struct Layout {
  Dims d;
  std::size_t x, x_ref, phi_bar, decay, omega_ext, upsilon, theta, size;

  explicit Layout(const Dims& dims) : d(dims) {
    const std::size_t q = d.q();
    x = 0;
    x_ref = x + d.n;
    phi_bar = x_ref + d.n;
    decay = phi_bar + d.theta_rows();
    omega_ext = decay + 1;
    upsilon = omega_ext + q * q;
    theta = upsilon + q * d.n;
    size = theta + d.theta_rows() * d.m;
  }

  std::span<const real> x_of(const Vector& y) const { return {y.data() + x, d.n}; }
  std::span<const real> x_ref_of(const Vector& y) const { return {y.data() + x_ref, d.n}; }

  FilterBankState filters_of(const Vector& y, real t_hat) const {
    const std::size_t q = d.q();
    FilterBankState s;
    s.phi_bar.assign(y.begin() + static_cast<std::ptrdiff_t>(phi_bar),
                     y.begin() + static_cast<std::ptrdiff_t>(decay));
    s.decay = y[decay];
    s.omega_ext = Matrix(q, q, Vector(y.begin() + static_cast<std::ptrdiff_t>(omega_ext),
                                      y.begin() + static_cast<std::ptrdiff_t>(upsilon)));
    s.upsilon = Matrix(q, d.n, Vector(y.begin() + static_cast<std::ptrdiff_t>(upsilon),
                                      y.begin() + static_cast<std::ptrdiff_t>(theta)));
    s.t_hat = t_hat;
    return s;
  }

  Matrix theta_of(const Vector& y) const {
    return Matrix(d.theta_rows(), d.m, Vector(y.begin() + static_cast<std::ptrdiff_t>(theta),
                                              y.begin() + static_cast<std::ptrdiff_t>(size)));
  }

  void reset_filters(Vector& y) const {
    std::fill(y.begin() + static_cast<std::ptrdiff_t>(phi_bar),
              y.begin() + static_cast<std::ptrdiff_t>(theta), real{0});
    y[decay] = 1;
  }
};

// Controller-side signals at one (t, y).
struct Signals {
  Vector r, omega, u, Phi;
  FilterBankState filters;
  Matrix theta_hat;
};

Signals controller_signals(const Scenario& sc, const Layout& L, real t, const Vector& y,
                           real t_hat) {
  Signals s;
  const auto x = L.x_of(y);
  s.r = sc.reference.reference(t);
  s.omega = control_regressor(x, s.r, sc.plant.basis);
  s.theta_hat = L.theta_of(y);
  s.u = control_law(s.theta_hat, s.omega);
  const Vector psi = sc.plant.basis.eval(x);
  s.Phi = concat({x, s.u, psi});
  s.filters = L.filters_of(y, t_hat);
  return s;
}

Vector to_double_vec(std::span<const real> v) { return Vector(v.begin(), v.end()); }

std::vector<double> to_doubles(std::span<const real> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
  return out;
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const StepObserver& observer) {
  const auto wall_start = std::chrono::steady_clock::now();
  sc.validate();

  const Dims d = sc.dims();
  const Layout L(d);
  const real h = sc.integrator.h;
  const real t0 = sc.t0();
  const real t_end = sc.integrator.t_end;
  // Event instants closer than this to a grid point are merged into it.
  const real snap = h * 1e-6L;

  RunResult res;
  res.rho = sc.adaptation.rho;
  for (const auto& seg : sc.plant.segments) res.ideal.push_back(ideal_parameters(seg, sc.reference));
  res.telemetry = TelemetryTable(d);
  res.telemetry.reserve(static_cast<std::size_t>(std::ceil((t_end - t0) / h)) + 16);

  Vector y(L.size, 0);
  std::copy(sc.plant.x0.begin(), sc.plant.x0.end(), y.begin() + static_cast<std::ptrdiff_t>(L.x));
  std::copy(sc.reference.x0_ref.begin(), sc.reference.x0_ref.end(),
            y.begin() + static_cast<std::ptrdiff_t>(L.x_ref));
  std::copy(sc.theta0.data().begin(), sc.theta0.data().end(),
            y.begin() + static_cast<std::ptrdiff_t>(L.theta));
  y[L.decay] = 1;
  Vector carry(L.size, 0);  // low-order parts of y

  real t_hat = t0;
  DetectorState detector = DetectorState::initial(t0, sc.detector.threshold, sc.delta_pr);
  detector.enabled = sc.detector.enabled;
  detector.immediate_reset = sc.detector.immediate_reset;
  const bool auto_threshold =
      sc.detector.statistic == DetectorOptions::Statistic::Absolute && sc.detector.threshold < 0;
  real max_z = 0;
  real pending_trigger_time = 0;
  // Both flags are evaluated at a sample and held over the next step.
  bool detector_ready = sc.detector.rcond_gate <= 0;
  bool adapt_ready = sc.adaptation_rcond_guard <= 0;

  auto rhs = [&](std::size_t seg_idx) {
    const PlantSegment& seg = sc.plant.segments[seg_idx];
    return [&, seg_ptr = &seg](real t, const FlatState& st) {
      const Vector& v = st.v;
      const Signals s = controller_signals(sc, L, t, v, t_hat);
      const auto x = L.x_of(v);
      FlatState out{Vector(L.size, 0)};
      Vector& dy = out.v;

      const Vector dx = plant_derivative(x, s.u, *seg_ptr, sc.plant.basis);
      const Vector dxr = ref_model_derivative(L.x_ref_of(v), s.r, sc.reference);
      const FilterDerivatives fd = filter_derivatives(s.filters, s.Phi, x, t, sc.filters);
      std::copy(dx.begin(), dx.end(), dy.begin() + static_cast<std::ptrdiff_t>(L.x));
      std::copy(dxr.begin(), dxr.end(), dy.begin() + static_cast<std::ptrdiff_t>(L.x_ref));
      std::copy(fd.phi_bar.begin(), fd.phi_bar.end(),
                dy.begin() + static_cast<std::ptrdiff_t>(L.phi_bar));
      dy[L.decay] = fd.decay;
      std::copy(fd.omega_ext.data().begin(), fd.omega_ext.data().end(),
                dy.begin() + static_cast<std::ptrdiff_t>(L.omega_ext));
      std::copy(fd.upsilon.data().begin(), fd.upsilon.data().end(),
                dy.begin() + static_cast<std::ptrdiff_t>(L.upsilon));

      const DremOutputs drem = drem_outputs(s.filters);
      const RegressionTarget tgt = regression_target(drem.z, drem.Delta, d, sc.reference);
      if (adapt_ready) {
        const Matrix dth = theta_derivative_stable(s.theta_hat, tgt.theta_est, tgt.log_Omega,
                                                   s.omega, sc.adaptation);
        std::copy(dth.data().begin(), dth.data().end(),
                  dy.begin() + static_cast<std::ptrdiff_t>(L.theta));
      }
      return out;
    };
  };

  auto check_state = [&](real t) {
    const auto x = L.x_of(y);
    const real xn = norm(x);
    if (!all_finite(y) || !(xn <= sc.integrator.x_max)) {
      throw FiniteEscapeError("state norm " + std::to_string(static_cast<double>(xn)) +
                                  " exceeded x_max at t = " + std::to_string(static_cast<double>(t)),
                              static_cast<double>(t), static_cast<double>(xn));
    }
  };

  auto apply_reset = [&](real t) {
    L.reset_filters(y);
    L.reset_filters(carry);
    carry[L.decay] = 0;
    t_hat = t;
    const auto x = L.x_of(y);
    res.resets.push_back({pending_trigger_time, t, to_double_vec(x)});
    detector.pending_reset.reset();
  };

  // Builds the telemetry row at the current (t, y) and runs the detector.
  auto sample = [&](real t, bool reset_now) {
    TelemetryTable::Row row;
    row.reset_flag = reset_now;

    Signals s = controller_signals(sc, L, t, y, t_hat);
    const auto x = L.x_of(y);
    const auto xr = L.x_ref_of(y);
    NormalizedSignals ns = normalized_signals(s.filters, x, t, sc.filters);
    const DremOutputs drem = drem_outputs(s.filters);
    const Matrix& z = drem.z;
    const real Delta = drem.Delta;
    const Matrix eps = indicator(Delta, ns.phi_bar_n, ns.z_bar_n, z);
    const real eps_norm = eps.frobenius_norm();
    const real scale = indicator_scale(Delta, ns.phi_bar_n, ns.z_bar_n, drem.adj_norm,
                                       s.filters.upsilon.frobenius_norm());
    const real stat_rel = scale > 0 ? eps_norm / scale : 0;
    max_z = std::max(max_z, z.frobenius_norm());
    if (auto_threshold) detector.eps_threshold = 1e-8L * (1 + max_z);

    const real rc = equilibrated_rcond(s.filters.omega_ext);
    detector_ready = sc.detector.rcond_gate <= 0 || rc >= sc.detector.rcond_gate;
    adapt_ready = sc.adaptation_rcond_guard <= 0 || rc >= sc.adaptation_rcond_guard;
    const real stat =
        sc.detector.statistic == DetectorOptions::Statistic::Relative ? stat_rel : eps_norm;
    const bool gated = (t - t_hat < sc.detector.post_reset_holdoff) || !detector_ready;
    if (!gated && !detector.pending_reset) {
      const DetectorStep step = detector_step(detector, stat, t);
      detector = step.state;
      if (step.action.schedule_reset) {
        row.trigger = true;
        res.triggers.push_back(t);
        pending_trigger_time = t;
      }
    } else {
      detector.last_t = t;
    }

    const RegressionTarget tgt = regression_target(z, Delta, d, sc.reference);
    const std::size_t seg_idx = active_segment(t, sc.plant);
    const Matrix& truth = res.ideal[seg_idx].theta;
    const Matrix tt = s.theta_hat - truth;
    const Vector eref = sub(x, xr);

    row.t = static_cast<double>(t);
    row.x = to_doubles(x);
    row.x_ref = to_doubles(xr);
    row.u = to_doubles(s.u);
    row.theta_hat = to_doubles(s.theta_hat.data());
    row.z = to_doubles(z.data());
    row.theta_est = to_doubles(tgt.theta_est.data());
    row.phi_bar_n = to_doubles(ns.phi_bar_n);
    row.log_Omega = static_cast<double>(tgt.log_Omega);
    row.Omega = tgt.degenerate ? 0.0 : static_cast<double>(std::exp(tgt.log_Omega));
    row.Delta = static_cast<double>(Delta);
    row.z_norm = static_cast<double>(z.frobenius_norm());
    row.eps_norm = static_cast<double>(eps_norm);
    row.eps_stat = static_cast<double>(stat);
    row.eref_norm = static_cast<double>(norm(eref));
    row.thetatilde_norm = static_cast<double>(tt.frobenius_norm());
    row.xi_norm = static_cast<double>(std::sqrt(norm_sq(eref) + norm_sq(tt.data())));
    row.t_hat = static_cast<double>(t_hat);
    row.seg = static_cast<int>(seg_idx);
    row.ihat = detector.i;
    row.adapting = adapt_ready && above_dead_zone(tgt.log_Omega, sc.adaptation.rho);
    row.rcond = static_cast<double>(rc);
    return row;
  };

  // Initial sample.
  {
    TelemetryTable::Row row = sample(t0, false);
    res.telemetry.append(row);
    if (observer && !observer(row)) {
      res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
      return res;
    }
  }

  real t = t0;
  std::size_t k = 0;  // index of the last grid point passed
  std::size_t next_switch = 1;
  while (t < t_end - snap) {
    real target = t0 + static_cast<real>(k + 1) * h;
    bool on_grid = true;
    std::optional<real> event;
    if (next_switch < sc.plant.segments.size()) event = sc.plant.segments[next_switch].t_start;
    if (detector.pending_reset && (!event || *detector.pending_reset < *event)) event = detector.pending_reset;
    if (t_end < target) {
      target = t_end;
      on_grid = false;
    }
    if (event && *event < target + snap) {
      if (*event < target - snap) on_grid = false;
      target = std::max(*event, t);
    }
    if (!(target > t)) target = t + snap;  // degenerate event at the current instant

    const std::size_t seg_idx = active_segment(t, sc.plant);
    const FlatState dy = rk4_increment(rhs(seg_idx), t, FlatState{y}, target - t);
    // Compensated accumulation: the filter integrals must stay mutually
    // consistent to well below one rounding unit per step.
    for (std::size_t i = 0; i < y.size(); ++i) {
      const real inc = dy.v[i] + carry[i];
      const real sum = y[i] + inc;
      carry[i] = inc - (sum - y[i]);
      y[i] = sum;
    }
    t = target;
    if (on_grid) ++k;
    ++res.steps;

    while (next_switch < sc.plant.segments.size() &&
           std::abs(sc.plant.segments[next_switch].t_start - t) <= snap) {
      t = sc.plant.segments[next_switch].t_start;
      ++next_switch;
    }
    check_state(t);

    bool reset_now = false;
    if (detector.pending_reset && *detector.pending_reset <= t + snap) {
      t = std::max(t, *detector.pending_reset);
      apply_reset(t);
      reset_now = true;
    }
    TelemetryTable::Row row = sample(t, reset_now);
    if (detector.pending_reset && *detector.pending_reset <= t) {
      // Immediate reset: applied at the trigger sample itself.
      apply_reset(t);
      row = sample(t, true);
      row.trigger = true;
    }
    res.telemetry.append(row);
    if (observer && !observer(row)) break;
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return res;
}

// ---------------------------------------------------------------------------

real calibrate_rho(const Scenario& sc, real window, real factor) {
  if (!(window > 0) || !(factor > 0)) throw DomainError("calibrate_rho: window and factor must be positive");
  Scenario dry = sc;
  dry.detector.enabled = false;
  dry.adaptation.rho = std::numeric_limits<real>::max();
  dry.integrator.t_end = std::min(sc.integrator.t_end, sc.t0() + window);
  real max_log = -std::numeric_limits<real>::infinity();
  run_scenario(dry, [&](const TelemetryTable::Row& r) {
    max_log = std::max(max_log, static_cast<real>(r.log_Omega));
    return true;
  });
  if (!std::isfinite(max_log)) return 0;
  return std::exp(max_log) * factor;
}

Scenario canonical_scenario() {
  Scenario sc;
  const Matrix A0 = Matrix::from_rows({{1, 1}, {-1, -1}});
  const Matrix B0 = Matrix::from_rows({{0.8L, 0.8L}, {0, 0.8L}});
  const Matrix v0 = Matrix::from_rows({{0.2L, 0}, {0, -0.1L}});
  const Matrix A1 = Matrix::from_rows({{-1, -1}, {1, 1}});
  const Matrix B1 = Matrix::from_rows({{0.8L, -0.8L}, {0, -0.8L}});
  const Matrix v1 = Matrix::from_rows({{-0.2L, 0}, {0, 0.1L}});

  sc.plant.segments = {{A0, B0, v0, 0}, {A1, B1, v1, 5}, {A0, B0, v0, 10}};
  sc.plant.x0 = {-1, 0};
  sc.plant.basis = BasisSpec::tanh(2);

  sc.reference.A_ref = Matrix::from_rows({{0, 1}, {-4, -2}});
  sc.reference.B_ref = Matrix::from_rows({{4, 0}, {0, 4}});
  sc.reference.x0_ref = {0, 0};
  sc.reference.r = {ReferenceChannel::constant(1), ReferenceChannel::exp_decay(1, 1, -1)};

  sc.filters = {10, 5};
  sc.adaptation = {1e-300L, 1, 1};
  sc.delta_pr = 0.1L;
  sc.integrator = {1e-4L, 15, 1e6L};

  sc.theta0 = Matrix(6, 2);
  sc.theta0(2, 0) = 1;
  sc.theta0(3, 1) = 1;
  return sc;
}

}  // namespace swmrac
