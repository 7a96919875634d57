#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doormpc/mpc_runtime.hpp"
#include "doormpc/types.hpp"

namespace doormpc {

struct SimulationSettings {
  double duration{30.0};  // s
  double plant_dt{1e-3};  // s, RK4 step; must divide the MPC period
  std::uint64_t seed{0};
  // Half-width of the uniform generalized-force disturbance (0 = nominal).
  double disturbance{0.0};
  double divergence_bound{1e6};
  double attachment_bound{0.05};  // m
  bool threaded{false};
};

struct ScenarioConfig {
  std::string name{"door_opening"};
  SystemModel model;
  PlannerConfig planner;
  TargetSpec target{TargetSpec::door_opening()};
  TrackingGains controller;
  SimulationSettings simulation;

  // "path = value" for every field that was not in the file.
  std::vector<std::string> defaults_applied;

  void validate() const;
};

/// Parse or validation failure. `field` is the dotted key; `line` is 1-based
/// (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& what);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Reads a YAML scenario file. Scalars accept plain numbers or multiples of
/// pi written as "pi/2", "-7pi/18", "3*pi/4".
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

/// Parses a scalar of the form accepted by load_config.
double parse_angle_expression(const std::string& text);

}  // namespace doormpc
