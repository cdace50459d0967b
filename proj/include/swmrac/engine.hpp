#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "swmrac/adaptation.hpp"
#include "swmrac/detector.hpp"
#include "swmrac/dynamics.hpp"
#include "swmrac/parameterization.hpp"
#include "swmrac/regression.hpp"

namespace swmrac {

// Classical four-stage Runge-Kutta step for y' = f(t, y) on any state type
// with y + s * dy.
template <class State, class Rhs>
State rk4(const Rhs& f, real t, const State& y, real h) {
  const State k1 = f(t, y);
  const State k2 = f(t + h / 2, y + (h / 2) * k1);
  const State k3 = f(t + h / 2, y + (h / 2) * k2);
  const State k4 = f(t + h, y + h * k3);
  return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// RK4 increment y(t + h) - y(t), for callers that accumulate it themselves.
template <class State, class Rhs>
State rk4_increment(const Rhs& f, real t, const State& y, real h) {
  const State k1 = f(t, y);
  const State k2 = f(t + h / 2, y + (h / 2) * k1);
  const State k3 = f(t + h / 2, y + (h / 2) * k2);
  const State k4 = f(t + h, y + h * k3);
  return (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Flat state vector with element-wise arithmetic for the integrator.
struct FlatState {
  Vector v;

  friend FlatState operator+(FlatState a, const FlatState& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
    return a;
  }
  friend FlatState operator*(real s, FlatState a) {
    for (real& x : a.v) x *= s;
    return a;
  }
};

struct DetectorOptions {
  enum class Statistic {
    Absolute,  // |eps|_F
    Relative,  // |eps|_F / indicator_scale(...)
  };

  bool enabled = true;
  bool immediate_reset = false;
  Statistic statistic = Statistic::Relative;
  // Absolute statistic with threshold < 0 means 1e-8 * (1 + running max |z|).
  real threshold = 1e-13L;
  // Samples closer than this to the last filter reset are not tested.
  real post_reset_holdoff = 0;
  // Samples are tested only while lambda_min / lambda_max of the equilibrated
  // extension matrix is at least this value. 0 disables the gate.
  real rcond_gate = 1e-13L;
};

struct IntegratorOptions {
  real h = 1e-4L;
  real t_end = 15;
  real x_max = 1e6L;
};

struct Scenario {
  SwitchedPlantSpec plant;
  ReferenceModelSpec reference;
  Gains filters;
  AdaptationGains adaptation;
  real delta_pr = 0.1L;
  DetectorOptions detector;
  IntegratorOptions integrator;
  Matrix theta0;  // (n+m+p) x m initial estimate
  // Same test as DetectorOptions::rcond_gate, applied to the adaptive law.
  // 0 disables it.
  real adaptation_rcond_guard = 0;

  Dims dims() const { return {plant.n(), plant.m(), plant.p()}; }
  real t0() const { return plant.segments.front().t_start; }
  // Structural checks of every module, plus Assumption 1 for each segment.
  void validate() const;
};

// Per-step telemetry in flat double storage. Vector-valued columns are laid
// out contiguously per row.
class TelemetryTable {
 public:
  TelemetryTable() = default;
  explicit TelemetryTable(const Dims& d);

  struct Row {
    double t = 0;
    std::vector<double> x, x_ref, u, theta_hat, z, theta_est, phi_bar_n;
    double Omega = 0, log_Omega = 0, Delta = 0, z_norm = 0;
    double eps_norm = 0, eps_stat = 0;
    double eref_norm = 0, thetatilde_norm = 0, xi_norm = 0;
    double t_hat = 0;
    int seg = 0, ihat = 1;
    bool reset_flag = false, trigger = false, adapting = false;
    // lambda_min / lambda_max of the equilibrated extension matrix.
    double rcond = 0;
  };

  void append(const Row& r);
  std::size_t size() const { return t_.size(); }
  const Dims& dims() const { return dims_; }
  void reserve(std::size_t rows);

  double t(std::size_t k) const { return t_[k]; }
  std::span<const double> x(std::size_t k) const { return slice(x_, k, dims_.n); }
  std::span<const double> x_ref(std::size_t k) const { return slice(x_ref_, k, dims_.n); }
  std::span<const double> u(std::size_t k) const { return slice(u_, k, dims_.m); }
  // Row-major (n+m+p) x m.
  std::span<const double> theta_hat(std::size_t k) const { return slice(theta_, k, theta_size()); }
  // Row-major q x n.
  std::span<const double> z(std::size_t k) const { return slice(z_, k, dims_.q() * dims_.n); }
  // Y / Omega, row-major (n+m+p) x m.
  std::span<const double> theta_est(std::size_t k) const { return slice(theta_est_, k, theta_size()); }
  std::span<const double> phi_bar_n(std::size_t k) const { return slice(phi_, k, dims_.q()); }

  double Omega(std::size_t k) const { return scal_[k].Omega; }
  double log_Omega(std::size_t k) const { return scal_[k].log_Omega; }
  double Delta(std::size_t k) const { return scal_[k].Delta; }
  double z_norm(std::size_t k) const { return scal_[k].z_norm; }
  double eps_norm(std::size_t k) const { return scal_[k].eps_norm; }
  double eps_stat(std::size_t k) const { return scal_[k].eps_stat; }
  double eref_norm(std::size_t k) const { return scal_[k].eref_norm; }
  double thetatilde_norm(std::size_t k) const { return scal_[k].thetatilde_norm; }
  double xi_norm(std::size_t k) const { return scal_[k].xi_norm; }
  double t_hat(std::size_t k) const { return scal_[k].t_hat; }
  int seg(std::size_t k) const { return scal_[k].seg; }
  int ihat(std::size_t k) const { return scal_[k].ihat; }
  bool reset_flag(std::size_t k) const { return scal_[k].reset_flag; }
  bool trigger(std::size_t k) const { return scal_[k].trigger; }
  bool adapting(std::size_t k) const { return scal_[k].adapting; }
  double rcond(std::size_t k) const { return scal_[k].rcond; }

  std::size_t theta_size() const { return dims_.theta_rows() * dims_.m; }

 private:
  struct Scalars {
    double Omega, log_Omega, Delta, z_norm, eps_norm, eps_stat, eref_norm, thetatilde_norm,
        xi_norm, t_hat, rcond;
    int seg, ihat;
    bool reset_flag, trigger, adapting;
  };

  static std::span<const double> slice(const std::vector<double>& v, std::size_t k,
                                       std::size_t w) {
    return {v.data() + k * w, w};
  }

  Dims dims_;
  std::vector<double> t_, x_, x_ref_, u_, theta_, z_, theta_est_, phi_;
  std::vector<Scalars> scal_;
};

struct ResetEvent {
  real trigger_time = 0;  // detector trigger that scheduled it
  real t_hat = 0;
  Vector x_at_reset;
};

struct RunResult {
  TelemetryTable telemetry;
  std::vector<real> triggers;
  std::vector<ResetEvent> resets;
  std::vector<IdealParameters> ideal;  // one per plant segment
  real rho = 0;
  std::size_t steps = 0;
  double wall_seconds = 0;
};

// Called on every recorded sample; return false to stop the run early.
using StepObserver = std::function<bool(const TelemetryTable::Row&)>;

// Integrates the closed loop from t0 to t_end. Step boundaries land exactly
// on switch instants and scheduled reset instants. Throws FiniteEscapeError
// when |x| exceeds x_max or the state stops being finite.
RunResult run_scenario(const Scenario& sc, const StepObserver& observer = {});

// Dry calibration of the dead-zone level: the scenario is run with the
// detector off and adaptation frozen (rho = +inf) over [t0, t0 + window], and
// rho = factor * max Omega over that run. Returns 0 when Omega never leaves 0.
real calibrate_rho(const Scenario& sc, real window = 2, real factor = 1e-3L);

// Canonical two-switch scenario: three segments switching at 5 s and 10 s,
// componentwise tanh basis, l = 10, sigma = 5, delta_pr = 0.1, rho = 1e-300.
Scenario canonical_scenario();

}  // namespace swmrac
