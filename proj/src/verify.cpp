#include "swmrac/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace swmrac {

namespace {

std::string sci(long double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3Le", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string log10_str(long double log_e) {
  if (!std::isfinite(log_e)) return log_e < 0 ? "0" : "inf";
  return "1e" + fixed(static_cast<double>(log_e / std::log(10.0L)), 2);
}

}  // namespace

RunOutcome execute(const ScenarioConfig& cfg) {
  RunOutcome out;
  out.scenario = resolve_scenario(cfg);
  try {
    out.result = run_scenario(out.scenario);
  } catch (const FiniteEscapeError& e) {
    out.escape_time = e.time();
    out.escape_message = e.what();
  }
  return out;
}

bool VerifyReport::passed() const {
  if (aborted) return false;
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

VerifyReport verify_run(const ScenarioConfig& cfg, const RunOutcome& run) {
  VerifyReport rep;
  rep.name = cfg.name;
  if (!run.result) {
    rep.aborted = true;
    rep.exit_code = kExitFiniteEscape;
    rep.checks.push_back({"finite escape", false, run.escape_message});
    return rep;
  }
  const Scenario& sc = run.scenario;
  const RunResult& res = *run.result;
  const VerifyThresholds& th = cfg.verify;
  const real h = sc.integrator.h;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  // Detection.
  const std::size_t switches = sc.plant.segments.size() - 1;
  const std::size_t expected = th.expected_triggers.value_or(switches);
  add("trigger count", res.triggers.size() == expected,
      std::to_string(res.triggers.size()) + " triggers, expected " + std::to_string(expected));
  if (expected == switches && res.triggers.size() == switches) {
    bool timing = true, spacing = true;
    std::ostringstream d;
    for (std::size_t i = 0; i < switches; ++i) {
      const real ts = sc.plant.segments[i + 1].t_start;
      const real tr = res.triggers[i];
      timing = timing && tr >= ts - h * 1e-6L && tr <= ts + th.trigger_tolerance_steps * h + h * 1e-6L;
      if (i < res.resets.size()) {
        const real want = sc.detector.immediate_reset ? tr : tr + sc.delta_pr;
        spacing = spacing && std::abs(res.resets[i].t_hat - want) <= h * 1e-6L;
      } else {
        spacing = false;
      }
      d << (i ? "; " : "") << "switch " << fixed(static_cast<double>(ts)) << " -> trigger "
        << fixed(static_cast<double>(tr)) << ", reset "
        << (i < res.resets.size() ? fixed(static_cast<double>(res.resets[i].t_hat)) : "none");
    }
    add("trigger timing", timing, d.str());
    add("reset instants", spacing, sc.detector.immediate_reset ? "reset at trigger" : "reset at trigger + delta_pr");
  }
  add("runtime", res.wall_seconds < th.max_runtime_s, "limit " + fixed(static_cast<double>(th.max_runtime_s), 0) + " s");

  rep.windows = window_reports(res, sc, th.identity_min_rcond, th.monotonicity_slack);
  for (const WindowReport& w : rep.windows) {
    const std::string tag = "window " + std::to_string(w.index) + ": ";
    add(tag + "Omega >= 0", w.omega_nonnegative, "");
    add(tag + "Omega above rho", w.t_active.has_value() && w.omega_stays_above_rho,
        w.t_active ? "active from t = " + fixed(*w.t_active) + ", min Omega " + log10_str(w.omega.log_lb)
                   : "never above rho for 10 steps");
    add(tag + "regression residual", w.residual <= th.residual_max, sci(w.residual));
    if (!w.t_active) continue;
    add(tag + "monotonicity", w.monotonicity.violations == 0,
        std::to_string(w.monotonicity.violations) + " violations, max increase " +
            sci(w.monotonicity.max_increase));
    const real ratio = w.xi_start > 0 ? w.xi_end / w.xi_start : 0;
    add(tag + "decay rate", w.decay.c2 > th.c2_min, "c2 = " + sci(w.decay.c2));
    add(tag + "xi reduction", ratio <= th.xi_ratio_max, "end/start = " + sci(ratio));
    if (w.identities.samples + w.identities.skipped > 0) {
      add(tag + "eps bound", w.identities.eps_ratio <= 1, "|eps| / bound = " + sci(w.identities.eps_ratio));
      const std::string on = " on " + std::to_string(w.identities.samples) + " samples";
      add(tag + "z = Delta theta_bar", w.identities.z_rel_error <= th.identity_rel,
          sci(w.identities.z_rel_error) + on);
      add(tag + "Omega identity", w.identities.omega_rel_error <= th.identity_rel,
          sci(w.identities.omega_rel_error) + on);
    }
  }
  rep.exit_code = rep.passed() ? kExitOk : kExitVerifyFailed;
  return rep;
}

std::string VerifyReport::text() const {
  std::ostringstream o;
  o << "scenario " << name << "\n";
  for (const WindowReport& w : windows) {
    o << "window " << w.index << "  [" << fixed(w.t_begin) << ", " << fixed(w.t_end) << ")"
      << "  t_hat " << fixed(w.t_hat);
    if (w.detection_delay) o << "  delay " << fixed(*w.detection_delay);
    o << "\n";
    if (w.t_active) {
      o << "  active from " << fixed(*w.t_active) << "  c1 " << sci(w.decay.c1) << "  c2 " << sci(w.decay.c2)
        << "  |xi| " << sci(w.xi_start) << " -> " << sci(w.xi_end) << "\n";
      o << "  monotonicity violations " << w.monotonicity.violations << " (max " << sci(w.monotonicity.max_increase)
        << ")  Omega in [" << log10_str(w.omega.log_lb) << ", " << log10_str(w.omega.log_ub) << "]"
        << "  FE level " << sci(w.fe_alpha) << "\n";
    } else {
      o << "  never active\n";
    }
    o << "  residual " << sci(w.residual);
    if (w.detection_delay) o << "  (detection delay " << sci(w.residual_delay) << ")";
    o << "\n";
  }
  for (const Check& c : checks)
    o << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
  o << (aborted ? "ABORTED" : passed() ? "ALL PASS" : "FAILED") << "\n";
  return o.str();
}

}  // namespace swmrac
