#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace doormpc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = std::numbers::pi;

/// Raised when the ZYX Euler-rate map is evaluated too close to gimbal lock.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a parameter set violates one of its invariants.
class InvalidParameter : public std::invalid_argument {
 public:
  InvalidParameter(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

/// ZYX Euler angles, R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct EulerZYX {
  double roll{0.0};
  double pitch{0.0};
  double yaw{0.0};

  static EulerZYX from_vector(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
  Vec3 as_vector() const { return {roll, pitch, yaw}; }
  EulerZYX wrapped() const {
    return {wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
  }
};

/// Servo angles eta_1..eta_4 of the arm.
using ArmConfig = Vec4;

/// Geometry of the four-joint arm hanging below the airframe.
///
/// Joint 1 turns about body z at `mount_offset`; link 1 drops straight down
/// from it to joint 2. Joints 2-4 pitch the distal links in the plane selected
/// by joint 1, with positive angles swinging the links toward body +x. The zero
/// pose has every link pointing straight down.
struct ArmGeometry {
  std::array<double, 4> link_lengths{0.077, 0.128, 0.124, 0.126};
  Vec3 mount_offset{0.30, 0.0, -0.05};
  std::array<std::pair<double, double>, 4> joint_limits{
      std::pair{-kPi, kPi}, std::pair{-kPi, kPi}, std::pair{-kPi, kPi},
      std::pair{-kPi, kPi}};

  bool within_limits(const ArmConfig& h) const {
    for (int i = 0; i < 4; ++i) {
      if (h[i] < joint_limits[i].first || h[i] > joint_limits[i].second) {
        return false;
      }
    }
    return true;
  }
  double total_length() const {
    return link_lengths[0] + link_lengths[1] + link_lengths[2] +
           link_lengths[3];
  }
  void validate() const;
};

/// Door, hinge and vehicle-footprint geometry.
struct DoorGeometry {
  Vec3 hinge_base{0.0, 0.0, 0.0};  // P_h, world frame
  double dv{0.8};                  // hinge axis to contact point, horizontal
  double dh{1.0};                  // hinge base to contact point, vertical
  double width{1.2};
  double height{1.6};
  double inertia{5.28};         // about the hinge axis, kg m^2
  double vehicle_radius{0.35};  // airframe radius including blades

  void validate() const;
};

struct VehicleParams {
  double mass{0.6};
  double gravity{9.81};
  Mat3 inertia{Vec3(0.01, 0.01, 0.018).asDiagonal()};

  void validate() const;
};

/// Everything the dynamics need to know about the hardware.
struct SystemModel {
  DoorGeometry door;
  ArmGeometry arm;
  VehicleParams vehicle;

  void validate() const {
    door.validate();
    arm.validate();
    vehicle.validate();
  }
};

/// Generalized coordinates q = [roll, pitch, yaw, alpha] with rates and the arm
/// pose that parameterizes them.
struct Configuration {
  Vec4 q{Vec4::Zero()};
  Vec4 qdot{Vec4::Zero()};
  ArmConfig arm{ArmConfig::Zero()};

  EulerZYX attitude() const { return {q[0], q[1], q[2]}; }
  double alpha() const { return q[3]; }
};

// Planner state x_s = [roll pitch yaw | alpha alpha_rate | eta1..eta4].
using PlannerState = Eigen::Matrix<double, 9, 1>;
// Planner input u_s = [thrust | body rate (3) | servo rate (4)].
using PlannerInput = Eigen::Matrix<double, 8, 1>;
// Plant state x = [roll pitch yaw alpha | rates of those (4) | eta1..eta4].
using PlantState = Eigen::Matrix<double, 12, 1>;
// Plant input u = [thrust | body torque (3) | servo rate (4)].
using PlantInput = Eigen::Matrix<double, 8, 1>;

namespace planner_idx {
inline constexpr int kRoll = 0;
inline constexpr int kPitch = 1;
inline constexpr int kYaw = 2;
inline constexpr int kAlpha = 3;
inline constexpr int kAlphaRate = 4;
inline constexpr int kArm = 5;

inline constexpr int kThrust = 0;
inline constexpr int kBodyRate = 1;
inline constexpr int kArmRate = 4;
}  // namespace planner_idx

namespace plant_idx {
inline constexpr int kQ = 0;
inline constexpr int kQdot = 4;
inline constexpr int kArm = 8;

inline constexpr int kThrust = 0;
inline constexpr int kTorque = 1;
inline constexpr int kArmRate = 4;
}  // namespace plant_idx

inline EulerZYX attitude_of(const PlannerState& x) {
  return {x[0], x[1], x[2]};
}
inline ArmConfig arm_of(const PlannerState& x) {
  return x.segment<4>(planner_idx::kArm);
}

inline EulerZYX attitude_of(const PlantState& x) { return {x[0], x[1], x[2]}; }
inline Vec4 q_of(const PlantState& x) { return x.segment<4>(plant_idx::kQ); }
inline Vec4 qdot_of(const PlantState& x) {
  return x.segment<4>(plant_idx::kQdot);
}
inline ArmConfig arm_of(const PlantState& x) {
  return x.segment<4>(plant_idx::kArm);
}

/// Planner view of a plant state (drops the attitude rates).
inline PlannerState planner_view(const PlantState& x) {
  PlannerState s;
  s << x[0], x[1], x[2], x[3], x[7], x.segment<4>(plant_idx::kArm);
  return s;
}

}  // namespace doormpc
