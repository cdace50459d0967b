#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swmrac/config.hpp"
#include "swmrac/metrics.hpp"

namespace swmrac {

// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitFiniteEscape = 2, kExitVerifyFailed = 3 };

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOutcome {
  Scenario scenario;  // with rho resolved
  std::optional<RunResult> result;
  std::optional<double> escape_time;  // set when the run aborted
  std::string escape_message;
};

// Resolves rho and runs the scenario; a finite escape is captured rather
// than thrown.
RunOutcome execute(const ScenarioConfig& cfg);

struct VerifyReport {
  std::string name;
  std::vector<WindowReport> windows;
  std::vector<Check> checks;
  bool aborted = false;
  int exit_code = kExitOk;

  bool passed() const;
  // Deterministic text: no wall-clock figures.
  std::string text() const;
};

VerifyReport verify_run(const ScenarioConfig& cfg, const RunOutcome& run);

}  // namespace swmrac
