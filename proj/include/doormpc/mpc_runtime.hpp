#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "doormpc/ddp_solver.hpp"
#include "doormpc/types.hpp"

namespace doormpc {

/// What the vehicle can observe about itself.
struct Measurement {
  Vec3 position{Vec3::Zero()};  // world
  Vec3 velocity{Vec3::Zero()};  // world
  EulerZYX attitude;
  Vec3 body_rate{Vec3::Zero()};
  ArmConfig arm{ArmConfig::Zero()};
  ArmConfig arm_rate{ArmConfig::Zero()};
};

struct Setpoint {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  double yaw{0.0};
  ArmConfig arm_rate{ArmConfig::Zero()};
  PlannerState planned{PlannerState::Zero()};  // state the setpoint was built from
};

struct TargetSpec {
  PlannerState final_state{PlannerState::Zero()};
  double initial_alpha{0.5 * kPi};
  double initial_alpha_rate{0.0};

  /// x_f = [0 0 -7pi/18 pi/9 0 0 pi/2 -pi/2 0], door starting closed at pi/2.
  static TargetSpec door_opening();
};

struct PlannerConfig {
  double dt{0.05};
  int horizon{20};
  PlannerState running_weight{
      (PlannerState() << 5, 5, 3, 9, 8, 0.05, 0.1, 0.1, 0.1).finished()};
  PlannerState terminal_weight{running_weight};
  PlannerInput input_weight{
      (PlannerInput() << 0.1, 5, 5, 13.5, 10, 10, 10, 10).finished()};
  // Added to every constraint row inside the planner (c + margin <= 0).
  double constraint_margin{0.02};
  // Which planned knot becomes the emitted setpoint.
  int setpoint_index{1};
  double attachment_tolerance{0.05};
  SolverSettings solver;

  void validate() const;
};

/// Planning dynamics f_D wrapped for the solver.
class DoorPlannerDynamics final : public DiscreteDynamics {
 public:
  DoorPlannerDynamics(DoorGeometry door, double dt) : door_(door), dt_(dt) {}
  int state_dim() const override { return 9; }
  int input_dim() const override { return 8; }
  VectorXd step(const VectorXd& x, const VectorXd& u) const override;
  void linearize(const VectorXd& x, const VectorXd& u, MatrixXd& a,
                 MatrixXd& b) const override;

 private:
  DoorGeometry door_;
  double dt_;
};

/// The six collision rows, tightened by `margin`.
class DoorConstraintSet final : public StateConstraint {
 public:
  DoorConstraintSet(DoorGeometry door, ArmGeometry arm, double margin = 0.0)
      : door_(door), arm_(arm), margin_(margin) {}
  int size() const override;
  VectorXd values(const VectorXd& x) const override;
  void evaluate(const VectorXd& x, VectorXd& c, MatrixXd& jac) const override;

 private:
  DoorGeometry door_;
  ArmGeometry arm_;
  double margin_;
};

/// Builds the door-opening OCP: every knot tracks x_f, inputs track hover.
OcpProblem make_door_problem(const SystemModel& model,
                             const PlannerConfig& config,
                             const TargetSpec& target);

struct ConversionResult {
  PlannerState state{PlannerState::Zero()};
  double attachment_residual{0.0};
  bool attachment_warning{false};
};

/// The two alpha_dot formulas obtained from the x and y rows of the
/// differentiated attachment constraint.
struct AlphaRateBranches {
  double x_row{0.0};
  double y_row{0.0};
  double x_denominator{0.0};  // -D_V sin(alpha)
  double y_denominator{0.0};  // D_V cos(alpha)
};

AlphaRateBranches alpha_rate_branches(const Measurement& m, double alpha,
                                      const DoorGeometry& door,
                                      const ArmGeometry& arm);

/// |sin(alpha)| above this selects the x-row formula for alpha_dot.
inline constexpr double kAlphaRateBranchThreshold = 0.1;

/// Recovers the planner state from vehicle-side measurements.
ConversionResult convert_measurements(const Measurement& m,
                                      const DoorGeometry& door,
                                      const ArmGeometry& arm,
                                      double attachment_tolerance = 0.05);

/// Measurement implied by a plant state and the servo rate being applied.
Measurement measure_plant(const PlantState& x, const ArmConfig& arm_rate,
                          const SystemModel& model);

/// Plant state matching a planner state with the given Euler-angle rates.
PlantState plant_state_from(const PlannerState& xs,
                            const Vec3& euler_rates = Vec3::Zero());

/// Setpoint for a planned state and the input applied from it.
Setpoint setpoint_from(const PlannerState& x, const PlannerInput& u,
                       const DoorGeometry& door, const ArmGeometry& arm);

/// One setpoint per planned knot; the terminal knot reuses the last input.
std::vector<Setpoint> extract_setpoints(const Trajectory& states,
                                        const Trajectory& inputs,
                                        const DoorGeometry& door,
                                        const ArmGeometry& arm);

/// Input sequence shifted by one knot with the last input repeated, and
/// multipliers shifted the same way.
struct WarmStart {
  Trajectory inputs;
  Multipliers multipliers;
};
WarmStart shift_warm_start(const SolveResult& previous, double penalty);

struct TickResult {
  Setpoint setpoint;
  SolveResult solve;
  ConversionResult conversion;
  PlannerState predicted{PlannerState::Zero()};  // planned knot 1
  bool degraded{false};
  double latency_ms{0.0};
};

/// Receding-horizon planner. Owns the solver workspace; use one instance per
/// control task.
class MpcPlanner {
 public:
  MpcPlanner(SystemModel model, PlannerConfig config, TargetSpec target);

  /// Converts the measurement, solves warm-started from the previous tick and
  /// emits the setpoint. A non-converged solve re-uses the last good plan
  /// advanced by one knot and flags the tick as degraded.
  TickResult tick(const Measurement& m);

  /// Solve from `x0` with hover inputs and fresh multipliers.
  SolveResult solve_cold(const PlannerState& x0) const;

  const OcpProblem& problem() const { return problem_; }
  const PlannerConfig& config() const { return config_; }
  void reset();

 private:
  SystemModel model_;
  PlannerConfig config_;
  TargetSpec target_;
  OcpProblem problem_;
  DdpSolver solver_;
  std::optional<SolveResult> warm_;
  std::optional<SolveResult> last_good_;
  int stale_ticks_{0};
  Setpoint last_setpoint_;
};

struct TrackingGains {
  Vec3 kp_position{6.0, 6.0, 6.0};
  Vec3 kd_position{4.5, 4.5, 4.5};
  Vec3 kp_attitude{5.0, 5.0, 2.0};
  Vec3 kd_rate{0.6, 0.6, 0.4};
  double max_thrust{30.0};
  double max_arm_rate{1.0};

  void validate() const;
};

struct TrackingOutput {
  PlantInput input{PlantInput::Zero()};
  EulerZYX desired_attitude;
  Vec3 desired_force{Vec3::Zero()};
  bool thrust_saturated{false};
};

/// PD position loop producing a force, thrust as its projection on body z,
/// desired attitude from the force direction and the setpoint yaw, and a
/// proportional attitude / rate torque loop. Stand-in for the vehicle's
/// position controller.
TrackingOutput tracking_controller(const Setpoint& sp, const Measurement& m,
                                   const VehicleParams& vehicle,
                                   const TrackingGains& gains);
TrackingOutput tracking_controller(const Setpoint& sp, const PlantState& x,
                                   const SystemModel& model,
                                   const TrackingGains& gains,
                                   const ArmConfig& arm_rate = ArmConfig::Zero());

}  // namespace doormpc
