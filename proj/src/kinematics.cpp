#include "walkup/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "walkup/errors.hpp"

namespace walkup::kinematics {

namespace {
constexpr double kDegPerRad = 180.0 / std::numbers::pi;

const Landmark& require(std::span<const Landmark> points, std::size_t i, double min_visibility) {
  if (i >= points.size() || points[i].visibility < min_visibility) throw MissingLandmark(i);
  return points[i];
}
}  // namespace

double dot(const Vec& u, const Vec& v) { return u.dx * v.dx + u.dy * v.dy + u.dz * v.dz; }

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec vector_between(std::span<const Landmark> points, std::size_t a, std::size_t b, Plane plane,
                   double min_visibility) {
  const Landmark& pa = require(points, a, min_visibility);
  const Landmark& pb = require(points, b, min_visibility);
  Vec v{pa.x - pb.x, pa.y - pb.y, 0.0};
  if (plane == Plane::Full3D) v.dz = pa.z - pb.z;
  return v;
}

double angle_between(const Vec& u, const Vec& v) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu <= kEpsilon || nv <= kEpsilon) throw DegenerateVector();
  const double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
  return std::clamp(std::acos(c) * kDegPerRad, 0.0, 180.0);
}

double angle_to_horizontal(const Vec& u) {
  if (std::hypot(u.dx, u.dy) <= kEpsilon) throw DegenerateVector();
  return std::atan2(std::abs(u.dy), std::abs(u.dx)) * kDegPerRad;
}

double distance(std::span<const Landmark> points, std::size_t a, std::size_t b, Plane plane,
                double min_visibility) {
  return norm(vector_between(points, a, b, plane, min_visibility));
}

}  // namespace walkup::kinematics
