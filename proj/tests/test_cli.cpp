#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "swmrac/config.hpp"
#include "swmrac/csv.hpp"
#include "swmrac/errors.hpp"
#include "swmrac/svg.hpp"

using namespace swmrac;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json canonical_json() {
  std::ifstream in(fs::path(SWMRAC_CONFIG_DIR) / "canonical.json");
  return json::parse(in);
}

std::string parse_error_path(const json& j) {
  try {
    parse_config(j.dump());
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("swmrac_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

struct Process {
  int exit_code = -1;
  std::string out;
};

Process run_cli(const std::string& args) {
  const std::string cmd = std::string(SWMRAC_CLI) + " " + args + " 2>&1";
  Process p;
  FILE* f = ::popen(cmd.c_str(), "r");
  if (!f) return p;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), f)) p.out += buf.data();
  const int status = ::pclose(f);
  p.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / (name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

json short_config(double t_end) {
  json j = canonical_json();
  j["plant"]["segments"] = json::array({j["plant"]["segments"][0]});
  j["integrator"]["t_end"] = t_end;
  j["output"].erase("csv");
  return j;
}

}  // namespace

TEST(Config, CanonicalFileParses) {
  const ScenarioConfig cfg = load_config(fs::path(SWMRAC_CONFIG_DIR) / "canonical.json");
  const Dims d = cfg.scenario.dims();
  EXPECT_EQ(d.n, 2u);
  EXPECT_EQ(d.m, 2u);
  EXPECT_EQ(d.p, 2u);
  EXPECT_EQ(cfg.name, "canonical");
  EXPECT_EQ(cfg.scenario.plant.segments.size(), 3u);
  EXPECT_EQ(cfg.scenario.plant.segments[1].t_start, 5);
  EXPECT_EQ(cfg.scenario.adaptation.rho, 1e-300L);
  EXPECT_EQ(cfg.output.decimation, 10u);
  EXPECT_FALSE(cfg.rho_auto);
}

TEST(Config, MatchesBuiltInCanonicalScenario) {
  const Scenario a = load_config(fs::path(SWMRAC_CONFIG_DIR) / "canonical.json").scenario;
  const Scenario b = canonical_scenario();
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ((a.plant.segments[i].A - b.plant.segments[i].A).max_abs(), 0);
    EXPECT_EQ((a.plant.segments[i].B - b.plant.segments[i].B).max_abs(), 0);
    EXPECT_EQ((a.plant.segments[i].theta_unc - b.plant.segments[i].theta_unc).max_abs(), 0);
  }
  EXPECT_EQ((a.theta0 - b.theta0).max_abs(), 0);
  EXPECT_EQ(a.filters.l, b.filters.l);
  EXPECT_EQ(a.delta_pr, b.delta_pr);
}

TEST(Config, NonHurwitzReferenceRejectedWithPath) {
  json j = canonical_json();
  j["reference_model"]["A_ref"] = json::array({json::array({1, 0}), json::array({0, 1})});
  EXPECT_EQ(parse_error_path(j), "reference_model.A_ref");
}

TEST(Config, SingularInputMatrixRejectedWithPath) {
  json j = canonical_json();
  j["plant"]["segments"][1]["B"] = json::array({json::array({1, 1}), json::array({1, 1})});
  EXPECT_EQ(parse_error_path(j), "plant.segments[1].B");
}

TEST(Config, StructuralErrorsNameTheKey) {
  json j = canonical_json();
  j["plant"]["segments"][2]["t_start"] = 4;
  EXPECT_NE(parse_error_path(j).find("plant.segments[2]"), std::string::npos);

  j = canonical_json();
  j["gains"]["l"] = -1;
  EXPECT_EQ(parse_error_path(j), "gains");

  j = canonical_json();
  j["gains"]["sigma"] = "fast";
  EXPECT_EQ(parse_error_path(j), "gains.sigma");

  j = canonical_json();
  j["plant"]["x0"] = json::array({1, 2, 3});
  EXPECT_NE(parse_error_path(j), "<accepted>");

  j = canonical_json();
  j["gains"]["rho_auto"] = true;  // together with rho
  EXPECT_NE(parse_error_path(j), "<accepted>");
}

TEST(Config, SyntaxErrorIsConfigError) {
  EXPECT_THROW(parse_config("{\"plant\": "), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/file.json"), ConfigError);
}

TEST(Config, ExtendedRangeNumbersAsStrings) {
  json j = canonical_json();
  j["gains"]["rho"] = "1e-4000";
  j["gains"]["eps_threshold"] = "inf";
  const ScenarioConfig cfg = parse_config(j.dump());
  EXPECT_EQ(cfg.scenario.adaptation.rho, 1e-4000L);
  EXPECT_TRUE(std::isinf(cfg.scenario.detector.threshold));
}

TEST(Config, RhoAutoIsResolvedByDryRun) {
  json j = short_config(1);
  j["gains"].erase("rho");
  j["gains"]["rho_auto"] = {{"factor", 0.01}, {"window", 0.3}};
  const ScenarioConfig cfg = parse_config(j.dump());
  ASSERT_TRUE(cfg.rho_auto);
  const Scenario sc = resolve_scenario(cfg);
  EXPECT_EQ(sc.adaptation.rho, calibrate_rho(cfg.scenario, 0.3L, 0.01L));
  EXPECT_GT(sc.adaptation.rho, 0);
}

TEST(Csv, HeaderLayout) {
  const auto h = csv_header(Dims{2, 2, 2});
  ASSERT_EQ(h.size(), 1u + 2 + 2 + 2 + 12 + 9);
  EXPECT_EQ(h[0], "t");
  EXPECT_EQ(h[1], "x_1");
  EXPECT_EQ(h[3], "xref_1");
  EXPECT_EQ(h[5], "u_1");
  EXPECT_EQ(h[7], "that_1_1");
  EXPECT_EQ(h[8], "that_1_2");
  EXPECT_EQ(h[18], "that_6_2");
  EXPECT_EQ(h[19], "Omega");
  EXPECT_EQ(h.back(), "reset_flag");
}

TEST(Csv, RoundTripKeepsSeventeenDigits) {
  Scenario sc = canonical_scenario();
  sc.integrator.t_end = 0.05L;
  const RunResult run = run_scenario(sc);
  std::stringstream ss;
  write_csv(ss, run.telemetry, 1);
  const CsvData data = read_csv(ss);
  ASSERT_EQ(data.rows.size(), run.telemetry.size());
  const std::size_t cx = data.column("x_1");
  const std::size_t cth = data.column("that_3_1");
  const std::size_t com = data.column("Omega");
  for (std::size_t k = 0; k < run.telemetry.size(); ++k) {
    ASSERT_EQ(static_cast<double>(data.rows[k][0]), run.telemetry.t(k));
    ASSERT_EQ(static_cast<double>(data.rows[k][cx]), run.telemetry.x(k)[0]);
    ASSERT_EQ(static_cast<double>(data.rows[k][cth]), run.telemetry.theta_hat(k)[4]);
    const double lo = run.telemetry.log_Omega(k);
    if (std::isfinite(lo) && data.rows[k][com] > 0)
      ASSERT_NEAR(static_cast<double>(std::log(data.rows[k][com])), lo, 1e-12 * (1 + std::abs(lo)));
  }
  EXPECT_THROW(data.column("nope"), DomainError);
}

TEST(Csv, DecimationAndMalformedInput) {
  Scenario sc = canonical_scenario();
  sc.integrator.t_end = 0.01L;
  const RunResult run = run_scenario(sc);
  std::stringstream ss;
  write_csv(ss, run.telemetry, 10);
  const CsvData data = read_csv(ss);
  EXPECT_EQ(data.rows.size(), (run.telemetry.size() + 9) / 10);
  std::stringstream bad("a,b\n1,2,3\n");
  EXPECT_ANY_THROW(read_csv(bad));
}

TEST(Svg, RendersStandaloneDocument) {
  SvgSeries s;
  s.title = "test";
  s.y_label = "y";
  for (int k = 0; k < 5000; ++k) {
    s.t.push_back(k * 0.001);
    s.y.push_back(std::sin(k * 0.001));
  }
  s.markers = {1.5};
  const std::string doc = render_svg(s);
  EXPECT_EQ(doc.rfind("<svg", 0) == 0 || doc.find("<svg") != std::string::npos, true);
  EXPECT_NE(doc.find("</svg>"), std::string::npos);
  EXPECT_NE(doc.find("<polyline"), std::string::npos);
}

TEST(Cli, RunWritesCsvAndPlots) {
  TempDir dir;
  const fs::path cfg = write_json(dir.path(), "short", short_config(0.2));
  const fs::path csv = dir.path() / "out.csv";
  const Process p = run_cli("run --config " + cfg.string() + " --out " + csv.string() + " --svg " +
                            (dir.path() / "plots").string() + " --decimate 5");
  ASSERT_EQ(p.exit_code, 0) << p.out;
  std::ifstream in(csv);
  const CsvData data = read_csv(in);
  EXPECT_EQ(data.rows.size(), 401u);  // 2001 samples, every fifth
  EXPECT_TRUE(fs::exists(dir.path() / "plots" / "omega.svg"));
  EXPECT_TRUE(fs::exists(dir.path() / "plots" / "eref.svg"));
  EXPECT_FALSE(fs::exists(dir.path() / "out.csv.partial"));
}

TEST(Cli, ConfigErrorExitsWithOne) {
  TempDir dir;
  const fs::path csv = dir.path() / "broken.csv";
  const Process p = run_cli("run --config " + (fs::path(SWMRAC_CONFIG_DIR) / "broken.json").string() +
                            " --out " + csv.string());
  EXPECT_EQ(p.exit_code, 1) << p.out;
  EXPECT_FALSE(fs::exists(csv));
  EXPECT_EQ(run_cli("verify --config /nonexistent.json").exit_code, 1);
  EXPECT_NE(run_cli("frobnicate").exit_code, 0);
}

TEST(Cli, FiniteEscapeExitsWithTwoAndWritesNothing) {
  TempDir dir;
  const fs::path csv = dir.path() / "unstable.csv";
  const Process p = run_cli("run --config " + (fs::path(SWMRAC_CONFIG_DIR) / "unstable.json").string() +
                            " --out " + csv.string());
  EXPECT_EQ(p.exit_code, 2) << p.out;
  EXPECT_FALSE(fs::exists(csv));
}

TEST(Cli, VerifyReportIsDeterministic) {
  TempDir dir;
  const fs::path cfg = write_json(dir.path(), "short", short_config(0.3));
  const Process a = run_cli("verify --config " + cfg.string());
  const Process b = run_cli("verify --config " + cfg.string());
  EXPECT_TRUE(a.exit_code == 0 || a.exit_code == 3) << a.out;
  EXPECT_EQ(a.exit_code, b.exit_code);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("PASS"), std::string::npos);
}

TEST(Cli, SweepRunsEveryConfig) {
  TempDir in, out;
  write_json(in.path(), "a", short_config(0.1));
  write_json(in.path(), "b", short_config(0.15));
  std::ofstream(in.path() / "c.json") << "{";
  const Process p = run_cli("sweep --dir " + in.path().string() + " --out " + out.path().string() + " --jobs 2");
  EXPECT_EQ(p.exit_code, 3) << p.out;  // highest code among {verify failure, config error}
  EXPECT_TRUE(fs::exists(out.path() / "a.csv"));
  EXPECT_TRUE(fs::exists(out.path() / "b.csv"));
  ASSERT_TRUE(fs::exists(out.path() / "summary.txt"));
  std::ifstream s(out.path() / "summary.txt");
  const std::string text((std::istreambuf_iterator<char>(s)), std::istreambuf_iterator<char>());
  EXPECT_LT(text.find("== a "), text.find("== b "));
  EXPECT_LT(text.find("== b "), text.find("== c "));
  EXPECT_NE(text.find("== c (exit 1)"), std::string::npos) << text;
}
