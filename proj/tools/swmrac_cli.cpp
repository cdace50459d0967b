#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "swmrac/config.hpp"
#include "swmrac/csv.hpp"
#include "swmrac/svg.hpp"
#include "swmrac/verify.hpp"

namespace fs = std::filesystem;
using namespace swmrac;

namespace {

int cmd_run(const std::string& config, std::string out, const std::string& svg_dir,
            std::size_t decimate) {
  const ScenarioConfig cfg = load_config(config);
  if (out.empty()) out = cfg.output.csv;
  if (out.empty()) throw ConfigError("output.csv", "no CSV path given (--out or output.csv)");
  if (decimate == 0) decimate = cfg.output.decimation;

  const RunOutcome run = execute(cfg);
  if (!run.result) {
    std::cerr << "finite escape at t = " << *run.escape_time << ": " << run.escape_message << "\n";
    return kExitFiniteEscape;
  }
  write_csv_file(out, run.result->telemetry, decimate);
  fs::path dir = svg_dir;
  if (dir.empty() && cfg.output.svg)
    dir = cfg.output.svg_dir.empty() ? fs::path(out).parent_path() : fs::path(cfg.output.svg_dir);
  if (!svg_dir.empty() || cfg.output.svg) write_run_plots(dir.empty() ? fs::path(".") : dir, *run.result);

  const RunResult& r = *run.result;
  std::cout << cfg.name << ": " << r.steps << " steps, " << r.triggers.size() << " triggers, rho "
            << static_cast<double>(r.rho) << ", " << r.wall_seconds << " s\n";
  return kExitOk;
}

VerifyReport verify_one(const ScenarioConfig& cfg) { return verify_run(cfg, execute(cfg)); }

int cmd_verify(const std::string& config) {
  const ScenarioConfig cfg = load_config(config);
  const VerifyReport rep = verify_one(cfg);
  std::cout << rep.text();
  return rep.exit_code;
}

int cmd_sweep(const std::string& dir, const std::string& out_dir, unsigned jobs) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  fs::create_directories(out_dir);

  struct Slot {
    std::string name, text;
    int code = kExitOk;
  };
  std::vector<Slot> slots(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < files.size();) {
      Slot& s = slots[i];
      s.name = files[i].stem().string();
      try {
        const ScenarioConfig cfg = load_config(files[i]);
        const RunOutcome run = execute(cfg);
        if (run.result) write_csv_file(fs::path(out_dir) / (s.name + ".csv"), run.result->telemetry,
                                       cfg.output.decimation);
        const VerifyReport rep = verify_run(cfg, run);
        s.text = rep.text();
        s.code = rep.exit_code;
      } catch (const ConfigError& e) {
        s.text = std::string("config error: ") + e.what() + "\n";
        s.code = kExitConfig;
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(files.size(), 1))));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Reports merged in config-name order.
  int worst = kExitOk;
  std::ofstream summary(fs::path(out_dir) / "summary.txt");
  for (const Slot& s : slots) {
    summary << "== " << s.name << " (exit " << s.code << ")\n" << s.text;
    std::cout << s.name << ": exit " << s.code << "\n";
    worst = std::max(worst, s.code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched-plant adaptive control simulator"};
  app.require_subcommand(1);

  std::string config, out, svg, dir;
  std::size_t decimate = 0;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* run = app.add_subcommand("run", "Simulate a scenario and write telemetry CSV");
  run->add_option("--config", config, "Scenario JSON")->required();
  run->add_option("--out", out, "CSV output path");
  run->add_option("--svg", svg, "Directory for SVG plots");
  run->add_option("--decimate", decimate, "Keep every N-th row");

  auto* verify = app.add_subcommand("verify", "Simulate a scenario and check its properties");
  verify->add_option("--config", config, "Scenario JSON")->required();

  auto* sweep = app.add_subcommand("sweep", "Verify every *.json in a directory");
  sweep->add_option("--dir", dir, "Config directory")->required();
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Parallel workers");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out, svg, decimate);
    if (*verify) return cmd_verify(config);
    return cmd_sweep(dir, out, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
