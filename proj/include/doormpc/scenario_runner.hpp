#pragma once

#include <string>
#include <vector>

#include "doormpc/constraints.hpp"
#include "doormpc/scenario_config.hpp"

namespace doormpc {

/// One MPC tick of a closed-loop run.
struct TickRecord {
  double time{0.0};
  PlantState plant{PlantState::Zero()};
  PlannerState planner{PlannerState::Zero()};    // converted measurement
  PlannerState predicted{PlannerState::Zero()};  // planned next knot
  Setpoint setpoint;
  PlantInput input{PlantInput::Zero()};  // first controller output of the tick
  ConstraintVector constraints{ConstraintVector::Zero()};
  int iterations{0};
  int outer_iterations{0};
  double latency_ms{0.0};
  double violation{0.0};
  double cost{0.0};
  bool converged{false};
  bool degraded{false};
};

struct RunLog {
  std::vector<TickRecord> records;

  // Not serialized: statistics over every plant step.
  ConstraintVector max_constraints{ConstraintVector::Constant(-1e300)};
  int plant_steps{0};
  bool aborted{false};
  std::string abort_reason;
  std::vector<double> latencies_ms;

  double max_constraint() const { return max_constraints.maxCoeff(); }
};

/// Plant state at the door angle alpha0 with level attitude, zero rates and
/// the target arm pose.
PlantState initial_plant_state(const ScenarioConfig& cfg);

/// Runs the closed loop for cfg.simulation.duration. The plant is integrated
/// with RK4 at plant_dt and the tracking controller runs at every plant step;
/// the planner runs every mpc.dt. Records are written at each planner tick
/// (duration / dt + 1 of them). Divergence or loss of attachment stops the run
/// with `aborted` set.
RunLog run_scenario(const ScenarioConfig& cfg);

struct BenchStats {
  std::vector<double> latencies_ms;
  double median_ms{0.0};
  double p95_ms{0.0};
  double max_ms{0.0};
  int ticks{0};
  int degraded_ticks{0};
};

/// Closed-loop run reporting the solve-latency distribution.
BenchStats bench_scenario(const ScenarioConfig& cfg);

double percentile(std::vector<double> values, double q);

enum class LogFormat { kCsv, kJsonLines };

struct LogOptions {
  LogFormat format{LogFormat::kCsv};
  // When false the latency column is written as 0 so that logs are
  // byte-reproducible.
  bool include_timing{false};
};

/// Column names (with units) of the tabular log, in order.
std::vector<std::string> log_columns();

void write_log(const RunLog& log, const std::string& path, const LogOptions& opts);
std::string format_log(const RunLog& log, const LogOptions& opts);

/// Reads a log written by write_log; the format is taken from `format`.
RunLog read_log(const std::string& path, LogFormat format);
RunLog parse_log(const std::string& text, LogFormat format);

/// Writes one SVG per planner state plus xy_geometry.svg into out_dir.
/// Returns the file names written.
std::vector<std::string> emit_plots(const RunLog& log, const ScenarioConfig& cfg,
                                    const std::string& out_dir);

}  // namespace doormpc
