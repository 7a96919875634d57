#include "doormpc/types.hpp"

#include <Eigen/Eigenvalues>

namespace doormpc {

void ArmGeometry::validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(link_lengths[i] > 0.0)) {
      throw InvalidParameter("arm.link_lengths[" + std::to_string(i) + "]",
                             "link length must be positive");
    }
    if (!(joint_limits[i].first < joint_limits[i].second)) {
      throw InvalidParameter("arm.joint_limits[" + std::to_string(i) + "]",
                             "lower limit must be below upper limit");
    }
  }
  if (!mount_offset.allFinite()) {
    throw InvalidParameter("arm.mount_offset", "must be finite");
  }
}

void DoorGeometry::validate() const {
  if (!(dv > 0.0)) throw InvalidParameter("door.D_V", "must be positive");
  if (!(width > 0.0)) throw InvalidParameter("door.width", "must be positive");
  if (!(height > 0.0)) {
    throw InvalidParameter("door.height", "must be positive");
  }
  if (!(inertia > 0.0)) {
    throw InvalidParameter("door.inertia", "I_D must be positive");
  }
  if (!(vehicle_radius > 0.0 && vehicle_radius < 0.5 * width)) {
    throw InvalidParameter("door.vehicle_radius",
                           "R_A must lie in (0, width / 2)");
  }
  if (!hinge_base.allFinite() || !std::isfinite(dh)) {
    throw InvalidParameter("door.hinge_base", "must be finite");
  }
}

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw InvalidParameter("vehicle.m_A", "must be positive");
  if (!(gravity >= 0.0)) {
    throw InvalidParameter("vehicle.gravity", "must be non-negative");
  }
  if (!inertia.isApprox(inertia.transpose(), 1e-12)) {
    throw InvalidParameter("vehicle.inertia", "I_A must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidParameter("vehicle.inertia", "I_A must be positive definite");
  }
}

}  // namespace doormpc
