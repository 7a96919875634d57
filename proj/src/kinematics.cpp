#include "doormpc/kinematics.hpp"

#include <algorithm>
#include <string>

namespace doormpc {

namespace {

// Direction of a distal link whose accumulated pitch is `beta`, before the
// joint-1 yaw is applied. beta = 0 points straight down, beta = pi/2 along +x.
Vec3 link_direction(double beta) {
  return {std::sin(beta), 0.0, -std::cos(beta)};
}

Vec3 link_direction_derivative(double beta) {
  return {std::cos(beta), 0.0, std::sin(beta)};
}

Mat3 yaw_rotation(double psi) {
  return Eigen::AngleAxisd(psi, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace

Mat3 hat(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

Mat3 euler_to_rot(const EulerZYX& e) {
  const double cf = std::cos(e.roll), sf = std::sin(e.roll);
  const double ct = std::cos(e.pitch), st = std::sin(e.pitch);
  const double cp = std::cos(e.yaw), sp = std::sin(e.yaw);
  Mat3 r;
  r << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
       sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
       -st, ct * sf, ct * cf;
  return r;
}

Mat3 euler_rate_map(const EulerZYX& e) {
  if (std::abs(e.pitch) >= 0.5 * kPi - kEulerSingularityMargin) {
    throw SingularityError("euler_rate_map: pitch " + std::to_string(e.pitch) +
                           " rad is within the gimbal-lock margin");
  }
  const double cf = std::cos(e.roll), sf = std::sin(e.roll);
  const double ct = std::cos(e.pitch), tt = std::tan(e.pitch);
  Mat3 w;
  w << 1.0, sf * tt, cf * tt,
       0.0, cf, -sf,
       0.0, sf / ct, cf / ct;
  return w;
}

Mat3 euler_rate_map_inverse(const EulerZYX& e) {
  const double cf = std::cos(e.roll), sf = std::sin(e.roll);
  const double ct = std::cos(e.pitch), st = std::sin(e.pitch);
  Mat3 w;
  w << 1.0, 0.0, -st,
       0.0, cf, sf * ct,
       0.0, -sf, cf * ct;
  return w;
}

EulerZYX rot_to_euler(const Mat3& r) {
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  return {std::atan2(r(2, 1), r(2, 2)), std::asin(s),
          std::atan2(r(1, 0), r(0, 0))};
}

ArmPoints arm_fk(const ArmConfig& h, const ArmGeometry& arm) {
  const auto& l = arm.link_lengths;
  const Mat3 rz = yaw_rotation(h[0]);
  const double b2 = h[1];
  const double b3 = b2 + h[2];
  const double b4 = b3 + h[3];
  const Vec3 joint2 = arm.mount_offset + Vec3(0.0, 0.0, -l[0]);
  ArmPoints p;
  p.servo3 = joint2 + rz * (l[1] * link_direction(b2));
  p.servo4 = p.servo3 + rz * (l[2] * link_direction(b3));
  p.tip = p.servo4 + rz * (l[3] * link_direction(b4));
  return p;
}

Eigen::Matrix<double, 3, 4> arm_tip_jacobian(const ArmConfig& h,
                                             const ArmGeometry& arm) {
  const auto& l = arm.link_lengths;
  const Mat3 rz = yaw_rotation(h[0]);
  const double b2 = h[1];
  const double b3 = b2 + h[2];
  const double b4 = b3 + h[3];
  const Vec3 t4 = l[3] * link_direction_derivative(b4);
  const Vec3 t3 = l[2] * link_direction_derivative(b3) + t4;
  const Vec3 t2 = l[1] * link_direction_derivative(b2) + t3;
  const Vec3 reach = l[1] * link_direction(b2) + l[2] * link_direction(b3) +
                     l[3] * link_direction(b4);

  Eigen::Matrix<double, 3, 4> j;
  j.col(0) = Vec3::UnitZ().cross(rz * reach);
  j.col(1) = rz * t2;
  j.col(2) = rz * t3;
  j.col(3) = rz * t4;
  return j;
}

Vec3 arm_fk_vel(const ArmConfig& h, const ArmConfig& h_dot,
                const ArmGeometry& arm) {
  return arm_tip_jacobian(h, arm) * h_dot;
}

Vec3 door_contact_point(double alpha, const DoorGeometry& door) {
  return door.hinge_base + Vec3(door.dv * std::cos(alpha),
                                door.dv * std::sin(alpha), door.dh);
}

Vec3 door_normal(double alpha) {
  return {std::sin(alpha), -std::cos(alpha), 0.0};
}

Vec3 uam_position_from_door(double alpha, const EulerZYX& attitude,
                            const Vec3& tip, const DoorGeometry& door) {
  return door_contact_point(alpha, door) - euler_to_rot(attitude) * tip;
}

Vec3 uam_position_from_door(double alpha, const EulerZYX& attitude,
                            const ArmConfig& h, const DoorGeometry& door,
                            const ArmGeometry& arm) {
  return uam_position_from_door(alpha, attitude, arm_fk(h, arm).tip, door);
}

ConfigJacobians jacobians(const Vec4& q, const ArmConfig& h,
                          const DoorGeometry& door, const ArmGeometry& arm) {
  const EulerZYX att{q[0], q[1], q[2]};
  const double alpha = q[3];
  const Mat3 r = euler_to_rot(att);
  const Mat3 w_inv = euler_rate_map_inverse(att);
  const Vec3 tip = arm_fk(h, arm).tip;

  // d(R d)/dt = R (Omega x d) = -R hat(d) W^{-1} Phi_dot, and P = C(alpha) - R d.
  ConfigJacobians j;
  j.translational.leftCols<3>() = r * hat(tip) * w_inv;
  j.translational.col(3) =
      door.dv * Vec3(-std::sin(alpha), std::cos(alpha), 0.0);
  j.rotational.leftCols<3>() = w_inv;
  j.rotational.col(3).setZero();
  j.door << 0.0, 0.0, 0.0, 1.0;
  return j;
}

}  // namespace doormpc
