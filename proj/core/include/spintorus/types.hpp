#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace spintorus {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Point (p, x) of translational phase space.
struct PhasePoint {
  Vec3 p = Vec3::Zero();
  Vec3 x = Vec3::Zero();
};

/// Gradient of a phase-space function, split into momentum and position parts.
struct PhaseGradient {
  Vec3 d_p = Vec3::Zero();
  Vec3 d_x = Vec3::Zero();
};

/// Sign of the kinetic energy branch H^{+} / H^{-}.
enum class Branch { positive, negative };

inline double branch_sign(Branch b) { return b == Branch::positive ? 1.0 : -1.0; }

}  // namespace spintorus
