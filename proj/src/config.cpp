#include "swmrac/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swmrac/matkernel.hpp"

namespace swmrac {

namespace {

// Floating-point literals are parsed straight into long double, so "0.1"
// in a file matches 0.1L in code.
using json = nlohmann::basic_json<std::map, std::vector, std::string, bool, std::int64_t,
                                  std::uint64_t, long double>;

// Cursor into the document that remembers its own key path.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_, msg); }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Node at(const char* key) const {
    if (!j_->is_object()) fail("expected an object");
    const auto it = j_->find(key);
    if (it == j_->end()) throw ConfigError(join(key), "missing required key");
    return {*it, join(key)};
  }

  std::optional<Node> opt(const char* key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  Node operator[](std::size_t i) const {
    if (!j_->is_array()) fail("expected an array");
    if (i >= j_->size()) fail("index " + std::to_string(i) + " out of range");
    return {(*j_)[i], path_ + "[" + std::to_string(i) + "]"};
  }

  // Numbers may also be given as strings, which admits "inf" and exponents
  // beyond the double range (e.g. "1e-400").
  real number() const {
    if (j_->is_number()) return j_->get<real>();
    if (j_->is_string()) {
      const std::string s = j_->get<std::string>();
      char* end = nullptr;
      errno = 0;
      const real v = std::strtold(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0' || std::isnan(v)) fail("not a number: \"" + s + "\"");
      return v;
    }
    fail("expected a number");
  }

  std::size_t count() const {
    if (!j_->is_number_integer() && !j_->is_number_unsigned()) fail("expected a non-negative integer");
    const auto v = j_->get<long long>();
    if (v < 0) fail("expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  Vector vector() const {
    Vector v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*this)[i].number();
    return v;
  }

  // Row-major list of rows.
  Matrix matrix() const {
    const std::size_t r = size();
    if (r == 0) fail("matrix must have at least one row");
    const std::size_t c = (*this)[0].size();
    if (c == 0) fail("matrix rows must be non-empty");
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      const Node row = (*this)[i];
      if (row.size() != c) row.fail("row has " + std::to_string(row.size()) + " entries, expected " +
                                    std::to_string(c));
      for (std::size_t j = 0; j < c; ++j) m(i, j) = row[j].number();
    }
    return m;
  }

 private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
};

real number_or(const Node& parent, const char* key, real fallback) {
  const auto n = parent.opt(key);
  return n ? n->number() : fallback;
}

void require_shape(const Node& n, const Matrix& m, std::size_t r, std::size_t c) {
  if (m.rows() != r || m.cols() != c)
    n.fail("expected " + std::to_string(r) + "x" + std::to_string(c) + ", got " +
           std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

BasisSpec parse_basis(const Node& b, std::size_t n) {
  const std::string kind = b.at("kind").string();
  BasisSpec spec;
  if (kind == "tanh") {
    spec = BasisSpec::tanh(n, number_or(b, "gain", 1));
  } else if (kind == "monomials") {
    spec = BasisSpec::monomials(n, b.at("degree").count());
  } else if (kind == "sinusoid") {
    spec = BasisSpec::sinusoid(n, number_or(b, "frequency", 1));
  } else if (kind == "table") {
    const Vector k = b.at("knots").vector();
    const Vector v = b.at("values").vector();
    spec = BasisSpec::table(n, {k.begin(), k.end()}, {v.begin(), v.end()});
  } else {
    b.at("kind").fail("unknown basis kind \"" + kind + "\"");
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    b.fail(e.what());
  }
  return spec;
}

ReferenceChannel parse_channel(const Node& c) {
  const std::string kind = c.at("kind").string();
  ReferenceChannel ch;
  if (kind == "constant") {
    ch = ReferenceChannel::constant(c.at("value").number());
  } else if (kind == "exp_decay") {
    ch = ReferenceChannel::exp_decay(c.at("a").number(), c.at("b").number(), number_or(c, "c", 0));
  } else if (kind == "sinusoid") {
    ch = ReferenceChannel::sinusoid(c.at("amplitude").number(), c.at("frequency").number(),
                                    number_or(c, "phase", 0), number_or(c, "offset", 0));
  } else if (kind == "piecewise_constant") {
    const Vector t = c.at("times").vector();
    const Vector l = c.at("levels").vector();
    ch = ReferenceChannel::piecewise_constant({t.begin(), t.end()}, {l.begin(), l.end()});
  } else {
    c.at("kind").fail("unknown reference kind \"" + kind + "\"");
  }
  try {
    ch.validate();
  } catch (const Error& e) {
    c.fail(e.what());
  }
  return ch;
}

DetectorOptions::Statistic parse_statistic(const Node& s) {
  const std::string v = s.string();
  if (v == "relative") return DetectorOptions::Statistic::Relative;
  if (v == "absolute") return DetectorOptions::Statistic::Absolute;
  s.fail("expected \"relative\" or \"absolute\"");
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("syntax error: ") + e.what());
  }
  const Node root(doc, "");
  if (!doc.is_object()) root.fail("top level must be an object");

  ScenarioConfig cfg;
  Scenario& sc = cfg.scenario;
  if (const auto n = root.opt("name")) cfg.name = n->string();

  // Plant.
  const Node plant = root.at("plant");
  sc.plant.x0 = plant.at("x0").vector();
  const std::size_t n = sc.plant.x0.size();
  if (n == 0) plant.at("x0").fail("state dimension must be positive");
  sc.plant.basis = parse_basis(root.at("basis"), n);
  const std::size_t p = sc.plant.basis.dim();

  const Node segs = plant.at("segments");
  if (segs.size() == 0) segs.fail("at least one segment is required");
  std::size_t m = 0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Node s = segs[i];
    PlantSegment seg;
    seg.t_start = s.at("t_start").number();
    seg.A = s.at("A").matrix();
    require_shape(s.at("A"), seg.A, n, n);
    seg.B = s.at("B").matrix();
    if (i == 0) m = seg.B.cols();
    require_shape(s.at("B"), seg.B, n, m);
    seg.theta_unc = s.at("theta_unc").matrix();
    require_shape(s.at("theta_unc"), seg.theta_unc, p, m);
    if (i > 0 && !(seg.t_start > sc.plant.segments.back().t_start))
      s.at("t_start").fail("switch instants must increase strictly");
    sc.plant.segments.push_back(std::move(seg));
  }

  // Reference model.
  const Node rm = root.at("reference_model");
  sc.reference.A_ref = rm.at("A_ref").matrix();
  require_shape(rm.at("A_ref"), sc.reference.A_ref, n, n);
  if (!is_hurwitz(sc.reference.A_ref)) rm.at("A_ref").fail("A_ref is not Hurwitz");
  sc.reference.B_ref = rm.at("B_ref").matrix();
  require_shape(rm.at("B_ref"), sc.reference.B_ref, n, m);
  sc.reference.x0_ref = rm.has("x0_ref") ? rm.at("x0_ref").vector() : Vector(n, 0);
  if (sc.reference.x0_ref.size() != n) rm.at("x0_ref").fail("expected " + std::to_string(n) + " entries");
  const Node r = rm.at("r");
  if (r.size() != m) r.fail("expected " + std::to_string(m) + " channels, one per input");
  for (std::size_t i = 0; i < m; ++i) sc.reference.r.push_back(parse_channel(r[i]));

  for (std::size_t i = 0; i < sc.plant.segments.size(); ++i) {
    try {
      ideal_parameters(sc.plant.segments[i], sc.reference);
    } catch (const Error& e) {
      throw ConfigError(segs[i].at("B").path(), std::string("matching conditions fail: ") + e.what());
    }
  }

  // Gains and detector.
  const Node gains = root.at("gains");
  sc.filters.l = number_or(gains, "l", sc.filters.l);
  sc.filters.sigma = number_or(gains, "sigma", sc.filters.sigma);
  sc.delta_pr = number_or(gains, "delta_pr", sc.delta_pr);
  sc.adaptation.gamma0 = number_or(gains, "gamma0", sc.adaptation.gamma0);
  sc.adaptation.gamma1 = number_or(gains, "gamma1", sc.adaptation.gamma1);
  const bool has_rho = gains.has("rho"), has_auto = gains.has("rho_auto");
  if (has_rho == has_auto) gains.fail("exactly one of \"rho\" and \"rho_auto\" is required");
  if (has_rho) {
    sc.adaptation.rho = gains.at("rho").number();
  } else {
    const Node a = gains.at("rho_auto");
    cfg.rho_auto = true;
    if (a.raw().is_object()) {
      cfg.rho_auto_factor = number_or(a, "factor", cfg.rho_auto_factor);
      cfg.rho_auto_window = number_or(a, "window", cfg.rho_auto_window);
    } else if (!a.boolean()) {
      a.fail("rho_auto must be true or an object");
    }
  }
  sc.detector.threshold = number_or(gains, "eps_threshold", sc.detector.threshold);
  if (const auto det = root.opt("detector")) {
    if (const auto v = det->opt("enabled")) sc.detector.enabled = v->boolean();
    if (const auto v = det->opt("immediate_reset")) sc.detector.immediate_reset = v->boolean();
    if (const auto v = det->opt("statistic")) sc.detector.statistic = parse_statistic(*v);
    sc.detector.rcond_gate = number_or(*det, "rcond_gate", sc.detector.rcond_gate);
    sc.detector.post_reset_holdoff = number_or(*det, "holdoff", sc.detector.post_reset_holdoff);
  }
  sc.adaptation_rcond_guard = number_or(gains, "adaptation_rcond_guard", sc.adaptation_rcond_guard);
  try {
    sc.filters.validate();
    if (!cfg.rho_auto) sc.adaptation.validate();
  } catch (const Error& e) {
    gains.fail(e.what());
  }

  // Integrator.
  if (const auto in = root.opt("integrator")) {
    sc.integrator.h = number_or(*in, "h", sc.integrator.h);
    sc.integrator.t_end = number_or(*in, "t_end", sc.integrator.t_end);
    sc.integrator.x_max = number_or(*in, "x_max", sc.integrator.x_max);
  }

  // Initial estimate: [0; I; 0] unless given.
  if (const auto th = root.opt("theta0")) {
    sc.theta0 = th->matrix();
    require_shape(*th, sc.theta0, n + m + p, m);
  } else {
    sc.theta0 = Matrix(n + m + p, m);
    for (std::size_t i = 0; i < m; ++i) sc.theta0(n + i, i) = 1;
  }

  if (const auto out = root.opt("output")) {
    if (const auto v = out->opt("csv")) cfg.output.csv = v->string();
    if (const auto v = out->opt("decimation")) {
      cfg.output.decimation = v->count();
      if (cfg.output.decimation == 0) v->fail("decimation must be at least 1");
    }
    if (const auto v = out->opt("svg")) cfg.output.svg = v->boolean();
    if (const auto v = out->opt("svg_dir")) cfg.output.svg_dir = v->string();
  }

  if (const auto ver = root.opt("verify")) {
    VerifyThresholds& t = cfg.verify;
    if (const auto v = ver->opt("expected_triggers")) t.expected_triggers = v->count();
    t.trigger_tolerance_steps = number_or(*ver, "trigger_tolerance_steps", t.trigger_tolerance_steps);
    t.max_runtime_s = number_or(*ver, "max_runtime_s", t.max_runtime_s);
    t.residual_max = number_or(*ver, "residual_max", t.residual_max);
    t.monotonicity_slack = number_or(*ver, "monotonicity_slack", t.monotonicity_slack);
    t.c2_min = number_or(*ver, "c2_min", t.c2_min);
    t.xi_ratio_max = number_or(*ver, "xi_ratio_max", t.xi_ratio_max);
    t.identity_rel = number_or(*ver, "identity_rel", t.identity_rel);
    t.identity_min_rcond = number_or(*ver, "identity_min_rcond", t.identity_min_rcond);
  }

  // Remaining structural checks of every module.
  try {
    sc.validate();
  } catch (const Error& e) {
    throw ConfigError("", e.what());
  }
  if (cfg.rho_auto && !(cfg.rho_auto_factor > 0 && cfg.rho_auto_window > 0))
    gains.at("rho_auto").fail("factor and window must be positive");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("", "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ScenarioConfig cfg = parse_config(ss.str());
  if (cfg.name.empty()) cfg.name = file.stem().string();
  return cfg;
}

Scenario resolve_scenario(const ScenarioConfig& cfg) {
  Scenario sc = cfg.scenario;
  if (cfg.rho_auto) sc.adaptation.rho = calibrate_rho(sc, cfg.rho_auto_window, cfg.rho_auto_factor);
  return sc;
}

}  // namespace swmrac
