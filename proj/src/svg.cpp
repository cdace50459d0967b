#include "swmrac/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace swmrac {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const SvgSeries& s, int width, int height) {
  if (s.t.size() != s.y.size()) throw DimensionError("render_svg: t and y lengths differ");
  const double left = 70, right = 20, top = 30, bottom = 40;
  const double pw = width - left - right, ph = height - top - bottom;

  double t0 = 0, t1 = 1, y0 = 0, y1 = 1;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < s.y.size(); ++k)
    if (std::isfinite(s.y[k])) idx.push_back(k);
  if (!idx.empty()) {
    t0 = s.t[idx.front()];
    t1 = s.t[idx.back()];
    const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end(),
                                              [&](std::size_t a, std::size_t b) { return s.y[a] < s.y[b]; });
    y0 = s.y[*lo];
    y1 = s.y[*hi];
  }
  if (!(t1 > t0)) t1 = t0 + 1;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto X = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
  auto Y = [&](double y) { return top + (1 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left << "\" y=\"18\" font-size=\"14\">" << escape(s.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double ty = y0 + (y1 - y0) * i / 4, tt = t0 + (t1 - t0) * i / 4;
    o << "<text x=\"" << left - 6 << "\" y=\"" << Y(ty) + 4 << "\" text-anchor=\"end\">"
      << (s.log_scale ? "1e" + fmt(ty) : fmt(ty)) << "</text>\n";
    o << "<text x=\"" << X(tt) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << fmt(tt)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 6 << "\" text-anchor=\"middle\">t [s]</text>\n";
  o << "<text x=\"14\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 14 " << top + ph / 2
    << ")\" text-anchor=\"middle\">" << escape(s.y_label) << "</text>\n";
  for (double m : s.markers) {
    if (m < t0 || m > t1) continue;
    o << "<line x1=\"" << X(m) << "\" x2=\"" << X(m) << "\" y1=\"" << top << "\" y2=\"" << top + ph
      << "\" stroke=\"red\" stroke-dasharray=\"4 3\"/>\n";
  }
  // At most ~2000 vertices.
  const std::size_t stride = std::max<std::size_t>(1, idx.size() / 2000);
  o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < idx.size(); i += stride)
    o << fmt(X(s.t[idx[i]])) << ',' << fmt(Y(s.y[idx[i]])) << ' ';
  o << "\"/>\n</svg>\n";
  return o.str();
}

std::vector<std::filesystem::path> write_run_plots(const std::filesystem::path& dir,
                                                   const RunResult& run) {
  std::filesystem::create_directories(dir);
  const TelemetryTable& tab = run.telemetry;
  std::vector<double> resets;
  for (const auto& r : run.resets) resets.push_back(static_cast<double>(r.t_hat));

  SvgSeries eref{"Reference tracking error", "|e_ref|", {}, {}, resets, false};
  SvgSeries tt{"Parameter error", "|vec theta_tilde|", {}, {}, resets, false};
  SvgSeries om{"Scalar regressor", "Omega", {}, {}, resets, true};
  for (std::size_t k = 0; k < tab.size(); ++k) {
    eref.t.push_back(tab.t(k));
    eref.y.push_back(tab.eref_norm(k));
    tt.t.push_back(tab.t(k));
    tt.y.push_back(tab.thetatilde_norm(k));
    om.t.push_back(tab.t(k));
    om.y.push_back(tab.log_Omega(k) / std::log(10.0));
  }
  std::vector<std::filesystem::path> out;
  for (const auto* s : {&eref, &tt, &om}) {
    const auto name = s == &eref ? "eref.svg" : s == &tt ? "thetatilde.svg" : "omega.svg";
    const auto path = dir / name;
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << render_svg(*s);
    out.push_back(path);
  }
  return out;
}

}  // namespace swmrac
