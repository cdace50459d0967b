#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "swmrac/engine.hpp"

namespace swmrac {

struct OutputOptions {
  std::string csv;             // empty: caller decides
  std::size_t decimation = 1;  // keep every k-th telemetry row
  bool svg = false;
  std::string svg_dir;
};

// Pass/fail limits applied by `verify`.
struct VerifyThresholds {
  std::optional<std::size_t> expected_triggers;  // default: one per switch
  real trigger_tolerance_steps = 5;  // trigger in [t_switch, t_switch + k h]
  real max_runtime_s = 30;
  real residual_max = 1e-3L;
  real monotonicity_slack = 1e-9L;
  real c2_min = 0.1L;
  real xi_ratio_max = 0.05L;
  real identity_rel = 1e-6L;
  // z and Omega identities are evaluated where rcond of the equilibrated
  // extension matrix is at least this (rounding error ~ 1e-19 / rcond).
  real identity_min_rcond = 1e-12L;
};

struct ScenarioConfig {
  std::string name;
  Scenario scenario;
  // rho_auto: rho = factor * max Omega of a dry run over the first `window`
  // seconds (detector off, adaptation frozen).
  bool rho_auto = false;
  real rho_auto_factor = 1e-3L;
  real rho_auto_window = 2;
  OutputOptions output;
  VerifyThresholds verify;
};

// JSON text to a validated configuration. Every failure is a ConfigError
// whose path() names the offending key (e.g. "plant.segments[1].B").
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& file);

// The scenario to simulate, with rho resolved when rho_auto is set.
Scenario resolve_scenario(const ScenarioConfig& cfg);

}  // namespace swmrac
