#pragma once

#include "doormpc/types.hpp"

namespace doormpc {

/// Step used for the central differences of M_q inside coriolis().
inline constexpr double kMassMatrixFdStep = 1e-6;
/// plant_deriv refuses to invert M_q above this condition number.
inline constexpr double kMaxMassMatrixCondition = 1e12;

/// M_q = Jt^T M_A Jt + Jr^T I_A Jr + Ja^T I_D Ja.
Mat4 mass_matrix(const Vec4& q, const ArmConfig& h, const SystemModel& model);

/// Coriolis matrix from Christoffel symbols of mass_matrix, so that
/// M_dot - 2C is skew-symmetric. The arm pose is held fixed.
Mat4 coriolis(const Vec4& q, const Vec4& qdot, const ArmConfig& h,
              const SystemModel& model);

/// G_q = dV/dq with V = m_A g P_z.
Vec4 gravity_vector(const Vec4& q, const ArmConfig& h,
                    const SystemModel& model);

/// Thrust along body z and the body torque mapped to q: Jt^T f R e3 + Jr^T T.
Vec4 generalized_forces(const Vec4& q, const ArmConfig& h,
                        const PlantInput& u, const SystemModel& model);

/// Full coupled equations of motion. `tau_ext` is an additive generalized
/// force (zero for the nominal plant). Throws SingularityError if M_q is
/// ill-conditioned.
PlantState plant_deriv(const PlantState& x, const PlantInput& u,
                       const SystemModel& model,
                       const Vec4& tau_ext = Vec4::Zero());

/// Classical RK4 step of plant_deriv with the input and tau_ext held; the
/// attitude and door angles are wrapped afterwards.
PlantState rk4_step(const PlantState& x, const PlantInput& u, double dt,
                    const SystemModel& model,
                    const Vec4& tau_ext = Vec4::Zero());

struct Energy {
  double kinetic{0.0};
  double potential{0.0};
  double total() const { return kinetic + potential; }
};

/// Kinetic energy of the vehicle and door (arm-rate terms dropped) and the
/// gravitational potential of the vehicle.
Energy energy(const Vec4& q, const Vec4& qdot, const ArmConfig& h,
              const SystemModel& model);

}  // namespace doormpc
