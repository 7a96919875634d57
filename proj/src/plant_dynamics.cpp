#include "doormpc/plant_dynamics.hpp"

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "doormpc/integrators.hpp"
#include "doormpc/kinematics.hpp"

namespace doormpc {

Mat4 mass_matrix(const Vec4& q, const ArmConfig& h, const SystemModel& model) {
  const ConfigJacobians j = jacobians(q, h, model.door, model.arm);
  Mat4 m = model.vehicle.mass * j.translational.transpose() * j.translational;
  m.noalias() +=
      j.rotational.transpose() * model.vehicle.inertia * j.rotational;
  m.noalias() += model.door.inertia * j.door.transpose() * j.door;
  return 0.5 * (m + m.transpose());
}

Mat4 coriolis(const Vec4& q, const Vec4& qdot, const ArmConfig& h,
              const SystemModel& model) {
  std::array<Mat4, 4> dm;
  for (int k = 0; k < 4; ++k) {
    Vec4 qp = q, qm = q;
    qp[k] += kMassMatrixFdStep;
    qm[k] -= kMassMatrixFdStep;
    dm[k] = (mass_matrix(qp, h, model) - mass_matrix(qm, h, model)) /
            (2.0 * kMassMatrixFdStep);
  }
  Mat4 c = Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double cij = 0.0;
      for (int k = 0; k < 4; ++k) {
        cij += 0.5 * (dm[k](i, j) + dm[j](i, k) - dm[i](j, k)) * qdot[k];
      }
      c(i, j) = cij;
    }
  }
  return c;
}

Vec4 gravity_vector(const Vec4& q, const ArmConfig& h,
                    const SystemModel& model) {
  const ConfigJacobians j = jacobians(q, h, model.door, model.arm);
  return model.vehicle.mass * model.vehicle.gravity *
         j.translational.row(2).transpose();
}

Vec4 generalized_forces(const Vec4& q, const ArmConfig& h,
                        const PlantInput& u, const SystemModel& model) {
  const ConfigJacobians j = jacobians(q, h, model.door, model.arm);
  const Mat3 r = euler_to_rot({q[0], q[1], q[2]});
  const Vec3 thrust = u[plant_idx::kThrust] * r.col(2);
  return j.translational.transpose() * thrust +
         j.rotational.transpose() * u.segment<3>(plant_idx::kTorque);
}

PlantState plant_deriv(const PlantState& x, const PlantInput& u,
                       const SystemModel& model, const Vec4& tau_ext) {
  const Vec4 q = q_of(x);
  const Vec4 qdot = qdot_of(x);
  const ArmConfig h = arm_of(x);

  const Mat4 m = mass_matrix(q, h, model);
  Eigen::SelfAdjointEigenSolver<Mat4> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxMassMatrixCondition) {
    throw SingularityError("plant_deriv: mass matrix condition " +
                           std::to_string(hi / lo) + " exceeds limit");
  }

  const Vec4 rhs = generalized_forces(q, h, u, model) + tau_ext -
                   coriolis(q, qdot, h, model) * qdot -
                   gravity_vector(q, h, model);

  PlantState dx;
  dx.segment<4>(plant_idx::kQ) = qdot;
  dx.segment<4>(plant_idx::kQdot) = m.llt().solve(rhs);
  dx.segment<4>(plant_idx::kArm) = u.segment<4>(plant_idx::kArmRate);
  return dx;
}

PlantState rk4_step(const PlantState& x, const PlantInput& u, double dt,
                    const SystemModel& model, const Vec4& tau_ext) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  PlantState next = rk4(x, dt, [&](const PlantState& s) {
    return plant_deriv(s, u, model, tau_ext);
  });
  for (int i = 0; i < 4; ++i) next[i] = wrap_angle(next[i]);
  return next;
}

Energy energy(const Vec4& q, const Vec4& qdot, const ArmConfig& h,
              const SystemModel& model) {
  const ConfigJacobians j = jacobians(q, h, model.door, model.arm);
  const Vec3 p_dot = j.translational * qdot;
  const Vec3 omega = j.rotational * qdot;
  const double alpha_dot = j.door * qdot;

  Energy e;
  e.kinetic = 0.5 * (model.vehicle.mass * p_dot.squaredNorm() +
                     omega.dot(model.vehicle.inertia * omega) +
                     model.door.inertia * alpha_dot * alpha_dot);
  const Vec3 p = uam_position_from_door(q[3], {q[0], q[1], q[2]}, h,
                                        model.door, model.arm);
  e.potential = model.vehicle.mass * model.vehicle.gravity * p.z();
  return e;
}

}  // namespace doormpc
