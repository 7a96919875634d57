#include "doormpc/constraints.hpp"

#include "doormpc/kinematics.hpp"

namespace doormpc {

namespace {

constexpr double kJacobianStep = 1e-6;

}  // namespace

Vec3 self_collision(const ArmConfig& h, const ArmGeometry& arm) {
  const ArmPoints p = arm_fk(h, arm);
  return {p.servo3.z(), p.servo4.z(), p.tip.z()};
}

double door_clearance(const EulerZYX& attitude, const Vec3& tip, double alpha,
                      const DoorGeometry& door) {
  const Vec3 n_body = euler_to_rot(attitude).transpose() * door_normal(alpha);
  return door.vehicle_radius * n_body.head<2>().norm() - n_body.dot(tip);
}

double door_clearance(const EulerZYX& attitude, const ArmConfig& h,
                      double alpha, const DoorGeometry& door,
                      const ArmGeometry& arm) {
  return door_clearance(attitude, arm_fk(h, arm).tip, alpha, door);
}

Vec2 doorframe_clearance(const EulerZYX& attitude, const Vec3& tip,
                         double alpha, const DoorGeometry& door) {
  const double tip_world_y = (euler_to_rot(attitude) * tip).y();
  const double offset = door.dv * std::sin(alpha) - tip_world_y;
  return {door.vehicle_radius - offset,
          offset - (door.width - door.vehicle_radius)};
}

Vec2 doorframe_clearance(const EulerZYX& attitude, const ArmConfig& h,
                         double alpha, const DoorGeometry& door,
                         const ArmGeometry& arm) {
  return doorframe_clearance(attitude, arm_fk(h, arm).tip, alpha, door);
}

ConstraintVector constraint_values(const PlannerState& x,
                                   const DoorGeometry& door,
                                   const ArmGeometry& arm) {
  const EulerZYX att = attitude_of(x);
  const double alpha = x[planner_idx::kAlpha];
  const ArmPoints p = arm_fk(arm_of(x), arm);
  ConstraintVector c;
  c << p.servo3.z(), p.servo4.z(), p.tip.z(),
      door_clearance(att, p.tip, alpha, door),
      doorframe_clearance(att, p.tip, alpha, door);
  return c;
}

ConstraintStack stack(const PlannerState& x, const DoorGeometry& door,
                      const ArmGeometry& arm) {
  ConstraintStack s;
  s.values = constraint_values(x, door, arm);
  for (int k = 0; k < 9; ++k) {
    // Velocity does not enter any constraint.
    if (k == planner_idx::kAlphaRate) continue;
    PlannerState xp = x, xm = x;
    xp[k] += kJacobianStep;
    xm[k] -= kJacobianStep;
    s.jacobian.col(k) = (constraint_values(xp, door, arm) -
                         constraint_values(xm, door, arm)) /
                        (2.0 * kJacobianStep);
  }
  return s;
}

}  // namespace doormpc
