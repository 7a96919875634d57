#pragma once

#include <array>
#include <string_view>

#include "doormpc/types.hpp"

namespace doormpc {

inline constexpr int kNumConstraints = 6;

using ConstraintVector = Eigen::Matrix<double, kNumConstraints, 1>;

/// Stacked state constraints c(x_s) <= 0 with their Jacobian.
struct ConstraintStack {
  static constexpr std::array<std::string_view, kNumConstraints> kLabels{
      "self_servo3_z", "self_servo4_z", "self_tip_z",
      "door_clearance", "frame_lower", "frame_upper"};

  ConstraintVector values{ConstraintVector::Zero()};
  Eigen::Matrix<double, kNumConstraints, 9> jacobian{
      Eigen::Matrix<double, kNumConstraints, 9>::Zero()};

  double max_value() const { return values.maxCoeff(); }
};

/// [S3_z, S4_z, d_z]: the arm must stay below the airframe.
Vec3 self_collision(const ArmConfig& h, const ArmGeometry& arm);

/// R_A * |(n_D^B)_xy| - (n_D^B)^T d with n_D^B = R^T n_D: the airframe disc
/// must stay on the vehicle side of the door plane.
double door_clearance(const EulerZYX& attitude, const ArmConfig& h,
                      double alpha, const DoorGeometry& door,
                      const ArmGeometry& arm);
double door_clearance(const EulerZYX& attitude, const Vec3& tip, double alpha,
                      const DoorGeometry& door);

/// With s = P_y - P_hy = D_V sin(alpha) - (R d)_y, returns
/// [R_A - s, s - (D_w - R_A)]: the disc stays inside the frame opening.
Vec2 doorframe_clearance(const EulerZYX& attitude, const ArmConfig& h,
                         double alpha, const DoorGeometry& door,
                         const ArmGeometry& arm);
Vec2 doorframe_clearance(const EulerZYX& attitude, const Vec3& tip,
                         double alpha, const DoorGeometry& door);

ConstraintVector constraint_values(const PlannerState& x,
                                   const DoorGeometry& door,
                                   const ArmGeometry& arm);

/// Values plus a central-difference Jacobian over x_s.
ConstraintStack stack(const PlannerState& x, const DoorGeometry& door,
                      const ArmGeometry& arm);

}  // namespace doormpc
