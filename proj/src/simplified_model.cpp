#include "doormpc/simplified_model.hpp"

#include <stdexcept>

#include "doormpc/kinematics.hpp"

namespace doormpc {

namespace pi = planner_idx;

namespace {

// n_D^T R e3 expanded for ZYX angles. Only alpha - yaw enters, which is the
// rotational symmetry about world z.
double normal_thrust_projection(const EulerZYX& e, double alpha) {
  const double rel = alpha - e.yaw;
  return std::sin(e.pitch) * std::cos(e.roll) * std::sin(rel) +
         std::sin(e.roll) * std::cos(rel);
}

}  // namespace

double door_torque_gain(const EulerZYX& attitude, double alpha,
                        const DoorGeometry& door) {
  return -(door.dv / door.inertia) * normal_thrust_projection(attitude, alpha);
}

Vec4 door_torque_gain_gradient(const EulerZYX& attitude, double alpha,
                               const DoorGeometry& door) {
  const double cf = std::cos(attitude.roll), sf = std::sin(attitude.roll);
  const double ct = std::cos(attitude.pitch), st = std::sin(attitude.pitch);
  const double rel = alpha - attitude.yaw;
  const double cr = std::cos(rel), sr = std::sin(rel);
  const double d_rel = st * cf * cr - sf * sr;
  Vec4 grad(-st * sf * sr + cf * cr, ct * cf * sr, -d_rel, d_rel);
  return -(door.dv / door.inertia) * grad;
}

PlannerState dyn_continuous(const PlannerState& x, const PlannerInput& u,
                            const DoorGeometry& door) {
  const EulerZYX att = attitude_of(x);
  PlannerState dx;
  dx.head<3>() = euler_rate_map(att) * u.segment<3>(pi::kBodyRate);
  dx[pi::kAlpha] = x[pi::kAlphaRate];
  dx[pi::kAlphaRate] =
      door_torque_gain(att, x[pi::kAlpha], door) * u[pi::kThrust];
  dx.segment<4>(pi::kArm) = u.segment<4>(pi::kArmRate);
  return dx;
}

PlannerState step_discrete(const PlannerState& x, const PlannerInput& u,
                           double dt, const DoorGeometry& door) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_discrete: dt must be > 0");
  PlannerState next = x + dt * dyn_continuous(x, u, door);
  for (int i : {pi::kRoll, pi::kPitch, pi::kYaw, pi::kAlpha}) {
    next[i] = wrap_angle(next[i]);
  }
  return next;
}

PlannerLinearization linearize(const PlannerState& x, const PlannerInput& u,
                               double dt, const DoorGeometry& door) {
  const EulerZYX att = attitude_of(x);
  const Mat3 w = euler_rate_map(att);
  const Vec3 omega = u.segment<3>(pi::kBodyRate);
  const double thrust = u[pi::kThrust];

  const double cf = std::cos(att.roll), sf = std::sin(att.roll);
  const double ct = std::cos(att.pitch), st = std::sin(att.pitch);
  // a = sf q + cf r, b = cf q - sf r; da/droll = b, db/droll = -a.
  const double a = sf * omega.y() + cf * omega.z();
  const double b = cf * omega.y() - sf * omega.z();
  Mat3 dw;
  dw << b * st / ct, a / (ct * ct), 0.0,
        -a, 0.0, 0.0,
        b / ct, a * st / (ct * ct), 0.0;

  PlannerLinearization lin;
  lin.a.setIdentity();
  lin.a.block<3, 3>(0, 0) += dt * dw;
  lin.a(pi::kAlpha, pi::kAlphaRate) += dt;
  const Vec4 dg = door_torque_gain_gradient(att, x[pi::kAlpha], door);
  lin.a.block<1, 4>(pi::kAlphaRate, 0) += dt * thrust * dg.transpose();

  lin.b.setZero();
  lin.b.block<3, 3>(0, pi::kBodyRate) = dt * w;
  lin.b(pi::kAlphaRate, pi::kThrust) =
      dt * door_torque_gain(att, x[pi::kAlpha], door);
  lin.b.block<4, 4>(pi::kArm, pi::kArmRate) = dt * Eigen::Matrix4d::Identity();
  return lin;
}

}  // namespace doormpc
