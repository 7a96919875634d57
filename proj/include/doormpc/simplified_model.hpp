#pragma once

#include "doormpc/types.hpp"

namespace doormpc {

/// Gain g(Phi, alpha) in alpha_ddot = g * f_t under the quasi-static
/// assumption: g = -(D_V / I_D) n_D(alpha)^T R(Phi) e3.
double door_torque_gain(const EulerZYX& attitude, double alpha,
                        const DoorGeometry& door);

/// Gradient of door_torque_gain with respect to (roll, pitch, yaw, alpha).
Vec4 door_torque_gain_gradient(const EulerZYX& attitude, double alpha,
                               const DoorGeometry& door);

/// Continuous planning dynamics: [W(Phi) Omega_d, alpha_dot, g f_t, H_dot_d].
PlannerState dyn_continuous(const PlannerState& x, const PlannerInput& u,
                            const DoorGeometry& door);

/// One explicit-Euler step of dyn_continuous. Euler angles and alpha are
/// wrapped to (-pi, pi].
PlannerState step_discrete(const PlannerState& x, const PlannerInput& u,
                           double dt, const DoorGeometry& door);

struct PlannerLinearization {
  Eigen::Matrix<double, 9, 9> a;
  Eigen::Matrix<double, 9, 8> b;
};

/// Analytic Jacobians of step_discrete (angle wrapping is treated as identity).
PlannerLinearization linearize(const PlannerState& x, const PlannerInput& u,
                               double dt, const DoorGeometry& door);

}  // namespace doormpc
