#pragma once

#include <cstddef>
#include <span>

#include "walkup/core_types.hpp"

namespace walkup::kinematics {

/// Norms at or below this (normalized units) make an angle undefined.
inline constexpr double kEpsilon = 1e-9;

enum class Plane { Image2D, Full3D };

/// Displacement between two landmarks. dz stays 0 in the image plane.
struct Vec {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;

  friend bool operator==(const Vec&, const Vec&) = default;
};

[[nodiscard]] double dot(const Vec& u, const Vec& v);
[[nodiscard]] double norm(const Vec& v);

/// points[a] - points[b]. Throws MissingLandmark when either index is out of
/// range or its visibility is below min_visibility.
[[nodiscard]] Vec vector_between(std::span<const Landmark> points, std::size_t a, std::size_t b,
                                 Plane plane = Plane::Image2D, double min_visibility = 0.0);

/// Unsigned angle in degrees, clamped to [0,180]. Throws DegenerateVector.
[[nodiscard]] double angle_between(const Vec& u, const Vec& v);

/// Angle between u and the image x-axis in [0,90] degrees; ignores dz and sign.
[[nodiscard]] double angle_to_horizontal(const Vec& u);

[[nodiscard]] double distance(std::span<const Landmark> points, std::size_t a, std::size_t b,
                              Plane plane = Plane::Image2D, double min_visibility = 0.0);

}  // namespace walkup::kinematics
