#include "doormpc/mpc_runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "doormpc/kinematics.hpp"

namespace doormpc {

TargetSpec TargetSpec::door_opening() {
  TargetSpec t;
  t.final_state << 0.0, 0.0, -7.0 * kPi / 18.0, kPi / 9.0, 0.0, 0.0,
      0.5 * kPi, -0.5 * kPi, 0.0;
  t.initial_alpha = 0.5 * kPi;
  t.initial_alpha_rate = 0.0;
  return t;
}

namespace {

// World-frame velocity of the end-effector tip.
Vec3 tip_velocity(const Measurement& m, const ArmGeometry& arm) {
  const Mat3 r = euler_to_rot(m.attitude);
  const Vec3 d = arm_fk(m.arm, arm).tip;
  const Vec3 d_dot = arm_fk_vel(m.arm, m.arm_rate, arm);
  return m.velocity + r * (m.body_rate.cross(d) + d_dot);
}

}  // namespace

AlphaRateBranches alpha_rate_branches(const Measurement& m, double alpha,
                                      const DoorGeometry& door,
                                      const ArmGeometry& arm) {
  const Vec3 v = tip_velocity(m, arm);
  AlphaRateBranches b;
  b.x_denominator = -door.dv * std::sin(alpha);
  b.y_denominator = door.dv * std::cos(alpha);
  b.x_row = v.x() / b.x_denominator;
  b.y_row = v.y() / b.y_denominator;
  return b;
}

ConversionResult convert_measurements(const Measurement& m,
                                      const DoorGeometry& door,
                                      const ArmGeometry& arm,
                                      double attachment_tolerance) {
  const Mat3 r = euler_to_rot(m.attitude);
  const Vec3 contact = m.position + r * arm_fk(m.arm, arm).tip;
  const Vec3 rel = contact - door.hinge_base;
  const double alpha = wrap_angle(std::atan2(rel.y(), rel.x()));

  const AlphaRateBranches b = alpha_rate_branches(m, alpha, door, arm);
  const double alpha_rate = std::abs(std::sin(alpha)) > kAlphaRateBranchThreshold
                                ? b.x_row
                                : b.y_row;

  ConversionResult out;
  const EulerZYX att = m.attitude.wrapped();
  out.state << att.roll, att.pitch, att.yaw, alpha, alpha_rate, m.arm;
  out.attachment_residual = (contact - door_contact_point(alpha, door)).norm();
  out.attachment_warning = out.attachment_residual > attachment_tolerance;
  return out;
}

Measurement measure_plant(const PlantState& x, const ArmConfig& arm_rate,
                          const SystemModel& model) {
  const Vec4 q = q_of(x);
  const Vec4 qd = qdot_of(x);
  const EulerZYX att = attitude_of(x);
  const ArmConfig h = arm_of(x);
  const ConfigJacobians j = jacobians(q, h, model.door, model.arm);
  Measurement m;
  m.attitude = att;
  m.arm = h;
  m.arm_rate = arm_rate;
  m.position = uam_position_from_door(q[3], att, h, model.door, model.arm);
  m.velocity = j.translational * qd -
               euler_to_rot(att) * arm_fk_vel(h, arm_rate, model.arm);
  m.body_rate = j.rotational * qd;
  return m;
}

PlantState plant_state_from(const PlannerState& xs, const Vec3& euler_rates) {
  PlantState x;
  x.segment<4>(plant_idx::kQ) = xs.head<4>();
  x.segment<3>(plant_idx::kQdot) = euler_rates;
  x[plant_idx::kQdot + 3] = xs[planner_idx::kAlphaRate];
  x.segment<4>(plant_idx::kArm) = arm_of(xs);
  return x;
}

Setpoint setpoint_from(const PlannerState& x, const PlannerInput& u,
                       const DoorGeometry& door, const ArmGeometry& arm) {
  const EulerZYX att = attitude_of(x);
  const ArmConfig h = arm_of(x);
  const ArmConfig h_dot = u.segment<4>(planner_idx::kArmRate);
  Vec4 q, qd;
  q << x.head<4>();
  qd.head<3>() = euler_rate_map(att) * u.segment<3>(planner_idx::kBodyRate);
  qd[3] = x[planner_idx::kAlphaRate];
  const ConfigJacobians j = jacobians(q, h, door, arm);

  Setpoint sp;
  sp.position = uam_position_from_door(q[3], att, h, door, arm);
  sp.velocity = j.translational * qd - euler_to_rot(att) * arm_fk_vel(h, h_dot, arm);
  sp.yaw = att.yaw;
  sp.arm_rate = h_dot;
  sp.planned = x;
  return sp;
}

std::vector<Setpoint> extract_setpoints(const Trajectory& states,
                                        const Trajectory& inputs,
                                        const DoorGeometry& door,
                                        const ArmGeometry& arm) {
  if (inputs.empty() || states.size() != inputs.size() + 1)
    throw std::invalid_argument("extract_setpoints: need N inputs and N+1 states");
  std::vector<Setpoint> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::size_t k = std::min(i, inputs.size() - 1);
    out.push_back(setpoint_from(states[i], inputs[k], door, arm));
  }
  return out;
}

WarmStart shift_warm_start(const SolveResult& previous, double penalty) {
  WarmStart w;
  const std::size_t n = previous.inputs.size();
  w.inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    w.inputs.push_back(previous.inputs[std::min(i + 1, n - 1)]);
  const Trajectory& lam = previous.multipliers.lambda;
  w.multipliers.penalty = penalty;
  w.multipliers.lambda.reserve(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    const std::size_t src = std::min(i + 1, lam.size() - 1);
    w.multipliers.lambda.push_back(i == 0 ? lam[0] : lam[src]);
  }
  return w;
}

MpcPlanner::MpcPlanner(SystemModel model, PlannerConfig config,
                       TargetSpec target)
    : model_(std::move(model)),
      config_(std::move(config)),
      target_(std::move(target)),
      problem_(make_door_problem(model_, config_, target_)),
      solver_(config_.solver) {}

void MpcPlanner::reset() {
  warm_.reset();
  last_good_.reset();
  stale_ticks_ = 0;
  last_setpoint_ = Setpoint{};
}

SolveResult MpcPlanner::solve_cold(const PlannerState& x0) const {
  return solver_.solve(problem_, x0, problem_.input_reference);
}

TickResult MpcPlanner::tick(const Measurement& m) {
  TickResult out;
  out.conversion = convert_measurements(m, model_.door, model_.arm,
                                        config_.attachment_tolerance);

  const auto t0 = std::chrono::steady_clock::now();
  if (warm_) {
    const WarmStart ws = shift_warm_start(*warm_, config_.solver.penalty_init);
    out.solve = solver_.solve(problem_, out.conversion.state, ws.inputs,
                              &ws.multipliers);
  } else {
    out.solve = solver_.solve(problem_, out.conversion.state,
                              problem_.input_reference);
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  warm_ = out.solve;

  const int n = problem_.horizon;
  if (out.solve.converged || !last_good_) {
    last_good_ = out.solve;
    stale_ticks_ = 0;
    out.degraded = !out.solve.converged;
  } else {
    ++stale_ticks_;
    out.degraded = true;
  }
  const SolveResult& plan = *last_good_;
  const int idx = std::min(config_.setpoint_index + stale_ticks_, n);
  const int pred = std::min(1 + stale_ticks_, n);
  out.predicted = plan.states[pred];
  try {
    out.setpoint = setpoint_from(plan.states[idx],
                                 plan.inputs[std::min(idx, n - 1)], model_.door,
                                 model_.arm);
    last_setpoint_ = out.setpoint;
  } catch (const SingularityError&) {
    out.setpoint = last_setpoint_;
    out.degraded = true;
  }
  return out;
}

void TrackingGains::validate() const {
  auto nonneg = [](const Vec3& v, const char* field) {
    if ((v.array() < 0.0).any()) throw InvalidParameter(field, "must be non-negative");
  };
  nonneg(kp_position, "controller.kp_position");
  nonneg(kd_position, "controller.kd_position");
  nonneg(kp_attitude, "controller.kp_attitude");
  nonneg(kd_rate, "controller.kd_rate");
  if (!(max_thrust > 0.0)) throw InvalidParameter("controller.max_thrust", "must be positive");
  if (!(max_arm_rate > 0.0))
    throw InvalidParameter("controller.max_arm_rate", "must be positive");
}

namespace {

Vec3 vee(const Mat3& s) { return {s(2, 1), s(0, 2), s(1, 0)}; }

}  // namespace

TrackingOutput tracking_controller(const Setpoint& sp, const Measurement& m,
                                   const VehicleParams& vehicle,
                                   const TrackingGains& gains) {
  const Vec3 e3 = Vec3::UnitZ();
  const Vec3 e = sp.position - m.position;
  const Vec3 e_dot = sp.velocity - m.velocity;
  const Vec3 force =
      vehicle.mass * (gains.kp_position.cwiseProduct(e) +
                      gains.kd_position.cwiseProduct(e_dot)) +
      vehicle.mass * vehicle.gravity * e3;

  const Mat3 r = euler_to_rot(m.attitude);
  TrackingOutput out;
  out.desired_force = force;
  double thrust = force.dot(r * e3);
  out.thrust_saturated = thrust < 0.0 || thrust > gains.max_thrust;
  thrust = std::clamp(thrust, 0.0, gains.max_thrust);

  const Vec3 b3 = force.norm() > 1e-9 ? Vec3(force.normalized()) : e3;
  const Vec3 heading(std::cos(sp.yaw), std::sin(sp.yaw), 0.0);
  Vec3 b2 = b3.cross(heading);
  if (b2.norm() < 1e-9) b2 = b3.cross(Vec3::UnitX());
  b2.normalize();
  const Vec3 b1 = b2.cross(b3);
  Mat3 rd;
  rd << b1, b2, b3;
  out.desired_attitude = rot_to_euler(rd);

  const Vec3 e_r = 0.5 * vee(rd.transpose() * r - r.transpose() * rd);
  const Vec3 torque = -gains.kp_attitude.cwiseProduct(e_r) -
                      gains.kd_rate.cwiseProduct(m.body_rate);

  out.input[plant_idx::kThrust] = thrust;
  out.input.segment<3>(plant_idx::kTorque) = torque;
  out.input.segment<4>(plant_idx::kArmRate) =
      sp.arm_rate.cwiseMax(-gains.max_arm_rate).cwiseMin(gains.max_arm_rate);
  return out;
}

TrackingOutput tracking_controller(const Setpoint& sp, const PlantState& x,
                                   const SystemModel& model,
                                   const TrackingGains& gains,
                                   const ArmConfig& arm_rate) {
  return tracking_controller(sp, measure_plant(x, arm_rate, model),
                             model.vehicle, gains);
}

}  // namespace doormpc
