#pragma once

#include "doormpc/types.hpp"

namespace doormpc {

/// Minimum distance (rad) kept between |pitch| and pi/2 by euler_rate_map.
inline constexpr double kEulerSingularityMargin = 1e-3;

/// Skew-symmetric matrix with hat(a) * b = a x b.
Mat3 hat(const Vec3& a);

Mat3 euler_to_rot(const EulerZYX& e);

/// W(Phi) with Phi_dot = W * Omega (body rates). Throws SingularityError when
/// |pitch| >= pi/2 - kEulerSingularityMargin.
Mat3 euler_rate_map(const EulerZYX& e);

/// Inverse of W: Omega = W^{-1} * Phi_dot. Defined for every attitude.
Mat3 euler_rate_map_inverse(const EulerZYX& e);

/// Recovers ZYX angles from a rotation matrix (pitch in [-pi/2, pi/2]).
EulerZYX rot_to_euler(const Mat3& r);

/// Body-frame positions of servo 3, servo 4 and the end-effector tip,
/// all measured from O_B.
struct ArmPoints {
  Vec3 servo3;
  Vec3 servo4;
  Vec3 tip;
};

ArmPoints arm_fk(const ArmConfig& h, const ArmGeometry& arm);

/// d(tip)/dH, 3x4.
Eigen::Matrix<double, 3, 4> arm_tip_jacobian(const ArmConfig& h,
                                             const ArmGeometry& arm);

/// Body-frame tip velocity for servo rates h_dot.
Vec3 arm_fk_vel(const ArmConfig& h, const ArmConfig& h_dot,
                const ArmGeometry& arm);

/// World position of the contact point on the door, P_h + [D_V c, D_V s, D_H].
Vec3 door_contact_point(double alpha, const DoorGeometry& door);

/// Unit normal of the door surface pointing away from the vehicle.
Vec3 door_normal(double alpha);

/// Vehicle CoM position implied by the rigid end-effector attachment:
/// P = P_h + [D_V cos(alpha), D_V sin(alpha), D_H] - R(Phi) d.
Vec3 uam_position_from_door(double alpha, const EulerZYX& attitude,
                            const Vec3& tip, const DoorGeometry& door);
Vec3 uam_position_from_door(double alpha, const EulerZYX& attitude,
                            const ArmConfig& h, const DoorGeometry& door,
                            const ArmGeometry& arm);

/// Configuration-space Jacobians: P_dot = Jt q_dot - R d_dot,
/// Omega = Jr q_dot, alpha_dot = Ja q_dot.
struct ConfigJacobians {
  Eigen::Matrix<double, 3, 4> translational;
  Eigen::Matrix<double, 3, 4> rotational;
  Eigen::RowVector4d door;
};

ConfigJacobians jacobians(const Vec4& q, const ArmConfig& h,
                          const DoorGeometry& door, const ArmGeometry& arm);

}  // namespace doormpc
