#include <random>

#include <gtest/gtest.h>

#include "doormpc/constraints.hpp"
#include "support/oracles.hpp"

namespace doormpc {
namespace {

const ArmConfig kReach(0.0, 0.5 * kPi, -0.5 * kPi, 0.0);

// Door-plane clearance of the airframe disc found by sampling its rim.
double sampled_door_clearance(const PlannerState& x, const DoorGeometry& door,
                              const ArmGeometry& arm) {
  const EulerZYX e = attitude_of(x);
  const Mat3 r = euler_to_rot(e);
  const Vec3 p = uam_position_from_door(x[3], e, arm_of(x), door, arm);
  const Vec3 contact = door_contact_point(x[3], door);
  const Vec3 n = door_normal(x[3]);
  double best = -1e9;
  for (int k = 0; k < 36000; ++k) {
    const double t = 2 * kPi * k / 36000.0;
    const Vec3 rim = p + r * (door.vehicle_radius * Vec3(std::cos(t), std::sin(t), 0.0));
    best = std::max(best, n.dot(rim - contact));
  }
  return best;
}

TEST(SelfCollision, SignConvention) {
  const ArmGeometry arm;
  EXPECT_LT(self_collision(ArmConfig::Zero(), arm).maxCoeff(), 0.0);
  EXPECT_LT(self_collision(kReach, arm).maxCoeff(), 0.0);
  // Folding the arm up above the airframe.
  EXPECT_GT(self_collision(ArmConfig(0, kPi, 0, 0), arm)[2], 0.0);
  EXPECT_LT((self_collision(kReach, arm) - Vec3(-0.127, -0.251, -0.377)).norm(), 1e-12);
}

TEST(DoorClearance, KnownValueAtStart) {
  const DoorGeometry door;
  const ArmGeometry arm;
  // Level, facing the door: 0.35 - 0.428.
  EXPECT_NEAR(door_clearance({0, 0, 0}, kReach, 0.5 * kPi, door, arm), -0.078, 1e-12);
  // Vehicle yawed so far that the disc swings through the door.
  EXPECT_GT(door_clearance({0, 0, 0.7}, kReach, 0.5 * kPi, door, arm), 0.0);
}

TEST(DoorClearance, MatchesSampledDisc) {
  const DoorGeometry door;
  const ArmGeometry arm;
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const PlannerState x = oracle::random_planner_state(rng);
    EXPECT_NEAR(constraint_values(x, door, arm)[3], sampled_door_clearance(x, door, arm), 1e-6);
  }
}

TEST(DoorFrame, LateralOffsetFromVehiclePosition) {
  const DoorGeometry door{Vec3(0.3, -0.4, 0.0)};
  const ArmGeometry arm;
  std::mt19937_64 rng(32);
  for (int i = 0; i < 200; ++i) {
    const PlannerState x = oracle::random_planner_state(rng);
    const Vec3 p = uam_position_from_door(x[3], attitude_of(x), arm_of(x), door, arm);
    const double s = p.y() - door.hinge_base.y();
    const Vec2 c = constraint_values(x, door, arm).tail<2>();
    EXPECT_NEAR(c[0], door.vehicle_radius - s, 1e-12);
    EXPECT_NEAR(c[1], s - (door.width - door.vehicle_radius), 1e-12);
  }
}

TEST(DoorFrame, InitialPoseInsideOpening) {
  const DoorGeometry door;
  const ArmGeometry arm;
  const Vec2 c = doorframe_clearance({0, 0, 0}, kReach, 0.5 * kPi, door, arm);
  EXPECT_NEAR(c[0], -0.45, 1e-12);
  EXPECT_NEAR(c[1], -0.05, 1e-12);
}

TEST(ConstraintStack, JacobianMatchesFiniteDifferences) {
  const DoorGeometry door;
  const ArmGeometry arm;
  std::mt19937_64 rng(33);
  for (int i = 0; i < 1000; ++i) {
    const PlannerState x = oracle::random_planner_state(rng);
    const ConstraintStack s = stack(x, door, arm);
    EXPECT_EQ(s.values, constraint_values(x, door, arm));
    EXPECT_EQ(s.jacobian.col(planner_idx::kAlphaRate).norm(), 0.0);
    // Independent step size so the comparison is not trivially identical.
    const auto fd = oracle::central_jacobian(
        [&](const VectorXd& y) -> VectorXd { return constraint_values(y, door, arm); }, x, 1e-5);
    // The door-clearance row has a kink where the door normal is vertical in
    // the body frame; the sampler never lands there.
    EXPECT_LT(oracle::rel_err(s.jacobian, fd), 1e-4) << "sample " << i;
  }
}

TEST(ConstraintStack, LabelsCoverEveryRow) {
  EXPECT_EQ(ConstraintStack::kLabels.size(), static_cast<std::size_t>(kNumConstraints));
  EXPECT_EQ(ConstraintStack::kLabels[3], "door_clearance");
}

}  // namespace
}  // namespace doormpc
