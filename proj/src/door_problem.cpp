#include <stdexcept>

#include "doormpc/constraints.hpp"
#include "doormpc/mpc_runtime.hpp"
#include "doormpc/simplified_model.hpp"

namespace doormpc {

void PlannerConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidParameter("mpc.dt", "must be positive");
  if (horizon < 1) throw InvalidParameter("mpc.horizon", "must be at least 1");
  if ((running_weight.array() < 0.0).any())
    throw InvalidParameter("mpc.Q", "weights must be non-negative");
  if ((terminal_weight.array() < 0.0).any())
    throw InvalidParameter("mpc.L", "weights must be non-negative");
  if ((input_weight.array() <= 0.0).any())
    throw InvalidParameter("mpc.R", "weights must be positive");
  if (constraint_margin < 0.0)
    throw InvalidParameter("mpc.constraint_margin", "must be non-negative");
  if (setpoint_index < 0 || setpoint_index > horizon)
    throw InvalidParameter("mpc.setpoint_index", "must lie in [0, horizon]");
  if (!(attachment_tolerance > 0.0))
    throw InvalidParameter("mpc.attachment_tolerance", "must be positive");
  solver.validate();
}

VectorXd DoorPlannerDynamics::step(const VectorXd& x, const VectorXd& u) const {
  return step_discrete(x, u, dt_, door_);
}

void DoorPlannerDynamics::linearize(const VectorXd& x, const VectorXd& u,
                                    MatrixXd& a, MatrixXd& b) const {
  const PlannerLinearization lin = doormpc::linearize(x, u, dt_, door_);
  a = lin.a;
  b = lin.b;
}

int DoorConstraintSet::size() const { return kNumConstraints; }

VectorXd DoorConstraintSet::values(const VectorXd& x) const {
  return constraint_values(x, door_, arm_).array() + margin_;
}

void DoorConstraintSet::evaluate(const VectorXd& x, VectorXd& c,
                                 MatrixXd& jac) const {
  const ConstraintStack s = stack(x, door_, arm_);
  c = s.values.array() + margin_;
  jac = s.jacobian;
}

OcpProblem make_door_problem(const SystemModel& model,
                             const PlannerConfig& config,
                             const TargetSpec& target) {
  model.validate();
  config.validate();
  OcpProblem p;
  p.horizon = config.horizon;
  p.dt = config.dt;
  p.dynamics = std::make_shared<DoorPlannerDynamics>(model.door, config.dt);
  p.running_state_weight = config.running_weight;
  p.running_input_weight = config.input_weight;
  p.terminal_state_weight = config.terminal_weight;
  p.state_reference.assign(config.horizon + 1, target.final_state);
  PlannerInput hover = PlannerInput::Zero();
  hover[planner_idx::kThrust] = model.vehicle.mass * model.vehicle.gravity;
  p.input_reference.assign(config.horizon, hover);
  p.constraints = std::make_shared<DoorConstraintSet>(
      model.door, model.arm, config.constraint_margin);
  p.validate();
  return p;
}

}  // namespace doormpc
