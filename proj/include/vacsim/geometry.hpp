#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "vacsim/units.hpp"

namespace vacsim {

using Vec3 = Eigen::Vector3d;

/// Unit vector for polar angle theta and azimuth phi (radians).
inline Vec3 unit_vector(double theta, double phi) {
  return {std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta)};
}

/// Transverse polarization pair for direction (theta, phi). (e1, e2, k) is a
/// right-handed triad; e1 is the image of e_x and e2 the image of e_y under the
/// rotation Rz(phi) Ry(theta) that takes e_z to k.
struct PolarizationBasis {
  Vec3 k;
  Vec3 e1;
  Vec3 e2;
};

inline PolarizationBasis polarization_basis(double theta, double phi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  return {Vec3{cp * st, sp * st, ct}, Vec3{cp * ct, sp * ct, -st}, Vec3{-sp, cp, 0.0}};
}

/// Polarization basis for an arbitrary nonzero direction vector.
inline PolarizationBasis polarization_basis(const Vec3& direction) {
  const Vec3 n = direction.normalized();
  const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  const double phi = std::atan2(n.y(), n.x());
  return polarization_basis(theta, phi);
}

/// Spherical angles (radians) of a vector; phi wrapped into [0, 2 pi).
struct SphericalAngles {
  double theta;
  double phi;
};

inline SphericalAngles to_angles(const Vec3& v) {
  const double r = v.norm();
  double theta = r > 0 ? std::acos(std::clamp(v.z() / r, -1.0, 1.0)) : 0.0;
  double phi = std::atan2(v.y(), v.x());
  if (phi < 0) phi += 2.0 * std::numbers::pi;
  if (phi >= 2.0 * std::numbers::pi) phi -= 2.0 * std::numbers::pi;
  return {theta, phi};
}

} // namespace vacsim
