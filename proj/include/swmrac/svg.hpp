#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "swmrac/engine.hpp"

namespace swmrac {

struct SvgSeries {
  std::string title;
  std::string y_label;
  std::vector<double> t, y;
  std::vector<double> markers;  // vertical lines, e.g. reset instants
  bool log_scale = false;       // y already holds log10 values when set
};

// Single-panel line plot as a standalone SVG document.
std::string render_svg(const SvgSeries& s, int width = 800, int height = 360);

// Writes eref.svg (|e_ref|), thetatilde.svg (|vec theta_tilde|) and
// omega.svg (log10 Omega) into `dir`, with reset markers. Returns the paths.
std::vector<std::filesystem::path> write_run_plots(const std::filesystem::path& dir,
                                                   const RunResult& run);

}  // namespace swmrac
