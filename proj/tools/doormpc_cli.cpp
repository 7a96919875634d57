#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "doormpc/scenario_runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

doormpc::ScenarioConfig load_or_report(const std::string& path) {
  doormpc::ScenarioConfig cfg = doormpc::load_config(path);
  for (const std::string& d : cfg.defaults_applied)
    std::cerr << "default: " << d << '\n';
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Door-opening MPC simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "run_out";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool plots = false;
  bool timing = false;
  bool threaded = false;

  CLI::App* run = app.add_subcommand("run", "Run the closed-loop scenario");
  run->add_option("config", config_path, "Scenario YAML file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--format", format, "Log format")->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--seed", seed, "Disturbance seed");
  run->add_option("--duration", duration, "Simulated duration [s]");
  run->add_flag("--plots", plots, "Write SVG plots");
  run->add_flag("--timing", timing, "Write measured solve latency (logs no longer reproducible)");
  run->add_flag("--threaded", threaded, "Run planner and plant as two threads");

  CLI::App* check = app.add_subcommand("check", "Validate a scenario file");
  check->add_option("config", config_path, "Scenario YAML file")->required();

  CLI::App* bench = app.add_subcommand("bench", "Solver latency distribution");
  bench->add_option("config", config_path, "Scenario YAML file")->required();
  bench->add_option("--duration", duration, "Simulated duration [s]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  doormpc::ScenarioConfig cfg;
  try {
    cfg = load_or_report(config_path);
    if (seed) cfg.simulation.seed = *seed;
    if (duration) cfg.simulation.duration = *duration;
    if (threaded) cfg.simulation.threaded = true;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (*check) {
    std::cout << "ok: " << cfg.name << '\n';
    return kExitOk;
  }

  if (*bench) {
    const doormpc::BenchStats b = doormpc::bench_scenario(cfg);
    std::printf("ticks %d  degraded %d\n", b.ticks, b.degraded_ticks);
    std::printf("solve latency ms: median %.3f  p95 %.3f  max %.3f\n", b.median_ms,
                b.p95_ms, b.max_ms);
    return kExitOk;
  }

  const doormpc::RunLog log = doormpc::run_scenario(cfg);
  try {
    std::filesystem::create_directories(out_dir);
    doormpc::LogOptions opts;
    opts.format = format == "csv" ? doormpc::LogFormat::kCsv : doormpc::LogFormat::kJsonLines;
    opts.include_timing = timing;
    const std::string file = format == "csv" ? "run.csv" : "run.jsonl";
    doormpc::write_log(log, (std::filesystem::path(out_dir) / file).string(), opts);
    if (plots) doormpc::emit_plots(log, cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (!log.records.empty()) {
    const doormpc::TickRecord& last = log.records.back();
    std::printf("t = %.2f s  alpha = %.2f deg  yaw = %.2f deg  max constraint = %.3e\n",
                last.time, last.plant[3] * 180.0 / doormpc::kPi,
                last.plant[2] * 180.0 / doormpc::kPi, log.max_constraint());
  }
  if (log.aborted) {
    std::cerr << "aborted: " << log.abort_reason << '\n';
    return kExitAbort;
  }
  return kExitOk;
}
