#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "doormpc/mpc_runtime.hpp"
#include "doormpc/simplified_model.hpp"
#include "support/oracles.hpp"

namespace doormpc {
namespace {

const ArmConfig kReach(0.0, 0.5 * kPi, -0.5 * kPi, 0.0);

Measurement synthetic(const PlannerState& xs, const Vec3& euler_rates, const ArmConfig& arm_rate,
                      const SystemModel& model) {
  return measure_plant(plant_state_from(xs, euler_rates), arm_rate, model);
}

TEST(Converter, RecoversDoorAngleAtStart) {
  const SystemModel model;
  PlannerState xs = PlannerState::Zero();
  xs[3] = 0.5 * kPi;
  xs.tail<4>() = kReach;
  Measurement m;
  m.arm = kReach;
  m.position = uam_position_from_door(0.5 * kPi, {}, kReach, model.door, model.arm);
  const ConversionResult c = convert_measurements(m, model.door, model.arm);
  EXPECT_NEAR(c.state[3], 0.5 * kPi, 1e-9);
  EXPECT_EQ(c.state[4], 0.0);
  EXPECT_FALSE(c.attachment_warning);
}

TEST(Converter, WarnsWhenDetached) {
  const SystemModel model;
  Measurement m = synthetic(TargetSpec::door_opening().final_state, Vec3::Zero(),
                            ArmConfig::Zero(), model);
  m.position.z() += 0.2;
  const ConversionResult c = convert_measurements(m, model.door, model.arm);
  EXPECT_TRUE(c.attachment_warning);
  EXPECT_NEAR(c.attachment_residual, 0.2, 1e-12);
}

TEST(Converter, RoundTripRecoversState) {
  const SystemModel model;
  std::mt19937_64 rng(51);
  for (int i = 0; i < 1000; ++i) {
    PlannerState xs = oracle::random_planner_state(rng);
    xs.head<2>() *= 0.5;
    const Vec3 rates = oracle::uniform_vec(rng, 3, -1, 1);
    const ArmConfig hd = oracle::uniform_vec(rng, 4, -1, 1);
    const ConversionResult c = convert_measurements(synthetic(xs, rates, hd, model), model.door,
                                                    model.arm);
    EXPECT_NEAR(wrap_angle(c.state[3] - xs[3]), 0.0, 1e-6);
    EXPECT_NEAR(c.state[4], xs[4], 1e-6);
    EXPECT_LT((c.state.head<3>() - attitude_of(xs).wrapped().as_vector()).norm(), 1e-12);
    EXPECT_EQ(c.state.tail<4>(), xs.tail<4>());
    EXPECT_LT(c.attachment_residual, 1e-9);
  }
}

TEST(Converter, StaticMeasurementHasNoDoorRate) {
  const SystemModel model;
  std::mt19937_64 rng(52);
  for (int i = 0; i < 50; ++i) {
    PlannerState xs = oracle::random_planner_state(rng);
    xs[4] = 0.0;
    const ConversionResult c = convert_measurements(
        synthetic(xs, Vec3::Zero(), ArmConfig::Zero(), model), model.door, model.arm);
    EXPECT_NEAR(c.state[4], 0.0, 1e-12);
  }
}

TEST(Converter, BothRateBranchesAgree) {
  const SystemModel model;
  std::mt19937_64 rng(53);
  int checked = 0;
  while (checked < 1000) {
    PlannerState xs = oracle::random_planner_state(rng);
    const double s = std::sin(xs[3]), c = std::cos(xs[3]);
    if (std::abs(s) <= 0.1 || std::abs(c) <= 0.1) continue;
    const Measurement m = synthetic(xs, oracle::uniform_vec(rng, 3, -1, 1),
                                    oracle::uniform_vec(rng, 4, -1, 1), model);
    const AlphaRateBranches b = alpha_rate_branches(m, xs[3], model.door, model.arm);
    EXPECT_NEAR(b.x_row, b.y_row, 1e-6);
    EXPECT_NEAR(b.x_row, xs[4], 1e-6);
    ++checked;
  }
}

TEST(Converter, NearZeroDoorAngleUsesOtherRow) {
  const SystemModel model;
  PlannerState xs = TargetSpec::door_opening().final_state;
  xs[3] = 0.02;
  xs[2] = xs[3] - 0.5 * kPi;
  xs[4] = -0.3;
  const ConversionResult c = convert_measurements(
      synthetic(xs, Vec3(0.1, -0.2, 0.05), ArmConfig(0.1, 0, 0, -0.1), model), model.door,
      model.arm);
  EXPECT_NEAR(c.state[4], -0.3, 1e-9);
}

TEST(Setpoints, StationaryPlanHoldsPosition) {
  const SystemModel model;
  const PlannerState x = TargetSpec::door_opening().final_state;
  const Trajectory xs(21, x);
  const Trajectory us(20, PlannerInput::Zero());
  const auto sps = extract_setpoints(xs, us, model.door, model.arm);
  ASSERT_EQ(sps.size(), 21u);
  for (const Setpoint& sp : sps) {
    EXPECT_EQ(sp.position, sps.front().position);
    EXPECT_LT(sp.velocity.norm(), 1e-15);
    EXPECT_DOUBLE_EQ(sp.yaw, x[2]);
  }
  EXPECT_THROW(extract_setpoints(xs, Trajectory{}, model.door, model.arm), std::invalid_argument);
}

TEST(Setpoints, VelocityMatchesDifferencedPositions) {
  // Level attitude with pure yaw rate, zero thrust and constant servo rates
  // keep every state rate constant, so the Euler knots lie on the exact path.
  const SystemModel model;
  const double dt = 0.05;
  PlannerState x = PlannerState::Zero();
  x << 0.0, 0.0, -0.3, 1.2, -0.2, 0.1, 1.4, -1.5, 0.1;
  PlannerInput u = PlannerInput::Zero();
  u << 0.0, 0.0, 0.0, -0.15, 0.2, -0.1, 0.1, 0.05;
  Trajectory xs{x}, us;
  for (int i = 0; i < 20; ++i) {
    us.push_back(u);
    xs.push_back(step_discrete(xs.back(), u, dt, model.door));
  }
  const auto sps = extract_setpoints(xs, us, model.door, model.arm);
  for (int i = 1; i < 20; ++i) {
    const Vec3 fd = (sps[i + 1].position - sps[i - 1].position) / (2 * dt);
    EXPECT_LT((fd - sps[i].velocity).norm() / sps[i].velocity.norm(), 1e-3) << "knot " << i;
  }
}

TEST(Setpoints, KinematicallyConsistent) {
  const SystemModel model;
  std::mt19937_64 rng(54);
  for (int i = 0; i < 200; ++i) {
    const PlannerState x = oracle::random_planner_state(rng);
    const Setpoint sp = setpoint_from(x, oracle::uniform_vec(rng, 8, -1, 1), model.door, model.arm);
    const Vec3 tip = sp.position + euler_to_rot(attitude_of(x)) * arm_fk(arm_of(x), model.arm).tip;
    EXPECT_LT((tip - door_contact_point(x[3], model.door)).norm(), 1e-9);
  }
}

TEST(Setpoints, MeasurementRoundTrip) {
  const SystemModel model;
  std::mt19937_64 rng(55);
  for (int i = 0; i < 200; ++i) {
    PlannerState x = oracle::random_planner_state(rng);
    x.head<2>() *= 0.5;
    const PlannerInput u = oracle::uniform_vec(rng, 8, -1, 1);
    const Setpoint sp = setpoint_from(x, u, model.door, model.arm);
    Measurement m;
    m.position = sp.position;
    m.velocity = sp.velocity;
    m.attitude = attitude_of(x);
    m.body_rate = u.segment<3>(1);
    m.arm = arm_of(x);
    m.arm_rate = sp.arm_rate;
    const ConversionResult c = convert_measurements(m, model.door, model.arm);
    EXPECT_NEAR(wrap_angle(c.state[3] - x[3]), 0.0, 1e-6);
    EXPECT_NEAR(c.state[4], x[4], 1e-6);
  }
}

TEST(WarmStart, ShiftsAndRepeatsLastInput) {
  SolveResult prev;
  for (int i = 0; i < 4; ++i) prev.inputs.push_back(VectorXd::Constant(2, i));
  for (int i = 0; i < 5; ++i) prev.multipliers.lambda.push_back(VectorXd::Constant(1, 10 + i));
  prev.multipliers.penalty = 1e4;
  const WarmStart w = shift_warm_start(prev, 1.0);
  ASSERT_EQ(w.inputs.size(), 4u);
  EXPECT_EQ(w.inputs[0][0], 1.0);
  EXPECT_EQ(w.inputs[2][0], 3.0);
  EXPECT_EQ(w.inputs[3][0], 3.0);
  EXPECT_EQ(w.multipliers.lambda[1][0], 12.0);
  EXPECT_EQ(w.multipliers.lambda[4][0], 14.0);
  EXPECT_EQ(w.multipliers.penalty, 1.0);
}

Measurement start_measurement(const SystemModel& model) {
  PlannerState xs = PlannerState::Zero();
  xs[3] = 0.5 * kPi;
  xs.tail<4>() = kReach;
  return synthetic(xs, Vec3::Zero(), ArmConfig::Zero(), model);
}

TEST(MpcTick, HoldsAtTarget) {
  const SystemModel model;
  MpcPlanner planner(model, PlannerConfig{}, TargetSpec::door_opening());
  const PlannerState xf = TargetSpec::door_opening().final_state;
  const TickResult t = planner.tick(synthetic(xf, Vec3::Zero(), ArmConfig::Zero(), model));
  EXPECT_FALSE(t.degraded);
  EXPECT_LT(t.setpoint.velocity.norm(), 1e-3);
  EXPECT_LT((t.setpoint.position -
             uam_position_from_door(xf[3], attitude_of(xf), arm_of(xf), model.door, model.arm))
                .norm(),
            1e-3);
}

TEST(MpcTick, DeterministicFromIdenticalMeasurements) {
  const SystemModel model;
  MpcPlanner a(model, PlannerConfig{}, TargetSpec::door_opening());
  MpcPlanner b(model, PlannerConfig{}, TargetSpec::door_opening());
  const Measurement m = start_measurement(model);
  const TickResult ta = a.tick(m), tb = b.tick(m);
  EXPECT_EQ(ta.setpoint.position, tb.setpoint.position);
  EXPECT_EQ(ta.setpoint.velocity, tb.setpoint.velocity);
  EXPECT_EQ(ta.setpoint.arm_rate, tb.setpoint.arm_rate);
}

TEST(MpcTick, DegradedModeReusesShiftedPlan) {
  const SystemModel model;
  PlannerConfig cfg;
  MpcPlanner planner(model, cfg, TargetSpec::door_opening());
  const Measurement m = start_measurement(model);
  const TickResult first = planner.tick(m);
  ASSERT_TRUE(first.solve.converged);

  // A starved solver on a fresh planner seeded with the same first plan.
  PlannerConfig starved = cfg;
  starved.solver.max_outer_iterations = 1;
  starved.solver.max_inner_iterations = 1;
  starved.solver.cost_tolerance = 0.0;
  MpcPlanner p2(model, starved, TargetSpec::door_opening());
  const TickResult t1 = p2.tick(m);
  EXPECT_TRUE(t1.degraded);  // nothing to fall back on, but flagged
  const TickResult t2 = p2.tick(m);
  ASSERT_FALSE(t2.solve.converged);
  EXPECT_TRUE(t2.degraded);
  const Setpoint expected =
      setpoint_from(t1.solve.states[2], t1.solve.inputs[2], model.door, model.arm);
  EXPECT_EQ(t2.setpoint.position, expected.position);
}

TEST(MpcTick, WarmStartCutsIterations) {
  SystemModel model;
  PlannerConfig cfg;
  MpcPlanner planner(model, cfg, TargetSpec::door_opening());
  // Replay planned states as measurements so every tick is warm-startable.
  Measurement m = start_measurement(model);
  std::vector<double> warm, cold;
  for (int k = 0; k < 60; ++k) {
    const TickResult t = planner.tick(m);
    const SolveResult c = planner.solve_cold(t.conversion.state);
    if (k > 0) {
      warm.push_back(t.solve.iterations);
      cold.push_back(c.iterations);
    }
    const PlannerState next = t.solve.states[1];
    const Vec3 rates = euler_rate_map(attitude_of(next)) * t.solve.inputs[1].segment<3>(1);
    m = synthetic(next, rates, t.solve.inputs[1].tail<4>(), model);
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  EXPECT_LE(median(warm), median(cold) / 3.0);
}

TEST(Tracking, HoverAtSetpoint) {
  const SystemModel model;
  const TrackingGains gains;
  Setpoint sp;
  Measurement m;
  m.position = sp.position = Vec3(0.1, 0.2, 1.0);
  m.attitude = {0, 0, 0.3};
  sp.yaw = 0.3;
  const TrackingOutput out = tracking_controller(sp, m, model.vehicle, gains);
  EXPECT_NEAR(out.input[0], model.vehicle.mass * model.vehicle.gravity, 1e-12);
  EXPECT_LT(out.input.segment<3>(1).norm(), 1e-12);
  EXPECT_FALSE(out.thrust_saturated);
}

TEST(Tracking, ForwardErrorPitchesNoseDown) {
  const SystemModel model;
  Setpoint sp;
  sp.position = Vec3(1.0, 0, 0);
  const TrackingOutput out = tracking_controller(sp, Measurement{}, model.vehicle, TrackingGains{});
  EXPECT_GT(out.desired_attitude.pitch, 0.0);
  EXPECT_NEAR(out.desired_attitude.roll, 0.0, 1e-12);
  EXPECT_GT(out.input[2], 0.0);  // torque about body y toward the new attitude
}

TEST(Tracking, SaturationAndRateLimit) {
  const SystemModel model;
  TrackingGains gains;
  gains.max_thrust = 3.0;
  gains.max_arm_rate = 0.5;
  Setpoint sp;
  sp.arm_rate = ArmConfig(2.0, -2.0, 0.1, 0.0);
  const TrackingOutput out = tracking_controller(sp, Measurement{}, model.vehicle, gains);
  EXPECT_TRUE(out.thrust_saturated);
  EXPECT_EQ(out.input[0], 3.0);
  EXPECT_EQ(out.input.tail<4>(), ArmConfig(0.5, -0.5, 0.1, 0.0));
}

TEST(Tracking, FreeFlightStepResponse) {
  const VehicleParams vehicle;
  const TrackingGains gains;
  for (int axis = 0; axis < 3; ++axis) {
    oracle::FreeFlightState s = oracle::FreeFlightState::Zero();
    Setpoint sp;
    sp.position[axis] = 1.0;
    const double dt = 1e-3;
    double peak = 0.0;
    double last_outside = 0.0;
    for (int k = 0; k < 6000; ++k) {
      Measurement m;
      m.position = s.segment<3>(0);
      m.velocity = s.segment<3>(3);
      m.attitude = {s[6], s[7], s[8]};
      m.body_rate = s.segment<3>(9);
      const TrackingOutput out = tracking_controller(sp, m, vehicle, gains);
      s = oracle::free_flight_step(s, out.input[0], out.input.segment<3>(1), vehicle, dt);
      const double y = s[axis];
      peak = std::max(peak, y);
      if (std::abs(y - 1.0) > 0.02) last_outside = (k + 1) * dt;
    }
    EXPECT_LE(last_outside, 3.0) << "axis " << axis;
    EXPECT_LE(peak, 1.2) << "axis " << axis;
  }
}

TEST(PlannerConfigValidation, RejectsBadValues) {
  PlannerConfig c;
  c.horizon = 0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = PlannerConfig{};
  c.input_weight[3] = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
}

}  // namespace
}  // namespace doormpc
