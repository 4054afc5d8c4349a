// escat/geometry.hpp -- reference surfaces of revolution, rigid placements
// z + R * (r * p), and surface quadrature sampling.

#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "escat/core.hpp"

namespace escat {

enum class ShapeId { Ball, Peanut, Kite, Acorn, Ufo, Custom };

std::string shape_name(ShapeId id);
ShapeId shape_from_name(const std::string& name);

/// A closed profile curve s -> (x(s), y(s)), s in [0, 2pi], symmetric about
/// the x-axis. The reference surface is its upper half (y >= 0, s in [0, pi])
/// revolved about the profile x-axis and presented upright: the surface point
/// at (s, phi) is (y cos phi, y sin phi, x), so the symmetry axis is e_z.
/// All built-in profiles contain the origin.
struct ReferenceShape {
  ShapeId id = ShapeId::Custom;
  std::string name;
  std::function<std::array<double, 2>(double)> profile;
  std::function<std::array<double, 2>(double)> dprofile;  // d/ds of profile
  double circumradius = 0.0;  // max |surface point| over the reference pose
};

ReferenceShape make_shape(ShapeId id);
ReferenceShape make_shape(const std::string& name);

/// Upright surface point of the revolved profile.
Vector3 surface_point(const ReferenceShape& shape, double s, double phi);

/// Surface point in the direction with the given polar angle and azimuth
/// (reference pose). Requires the profile to be star-shaped about the origin.
Vector3 star_surface_point(const ReferenceShape& shape, double polar, double azimuth);

/// Near-uniform (Fibonacci spiral) point layout mapped radially onto the
/// reference surface.
std::vector<Vector3> fibonacci_surface_points(const ReferenceShape& shape, int n);

/// Rotation with Euler angles (theta, phi, psi), intrinsic Z-Y-Z:
/// R = Rz(theta) * Ry(phi) * Rz(psi). The box [0,2pi] x [0,2pi] x [0,pi]
/// covers SO(3).
Matrix3 euler_rotation(double theta, double phi, double psi);

/// Rigid placement with dilation: p -> position + R * (scale * p).
struct Placement {
  Vector3 position = Vector3::Zero();
  Vector3 euler = Vector3::Zero();  // (theta, phi, psi), radians
  double scale = 1.0;

  void validate() const;
  Matrix3 rotation() const { return euler_rotation(euler[0], euler[1], euler[2]); }
};

Vector3 apply_placement(const Placement& placement, const Vector3& p);

/// Quadrature sampling of a placed surface: Gauss-Legendre in the profile
/// parameter (nodes avoid the poles), uniform in the revolution angle, with
/// weights from the surface Jacobian and outward unit normals.
struct SurfaceSample {
  std::vector<Vector3> points;
  std::vector<Vector3> normals;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
  double area() const;
};

SurfaceSample sample_surface(const ReferenceShape& shape, const Placement& placement, int n_s,
                             int n_rev);

enum class SceneClass { Small, Extended, Multiscale };

std::string scene_class_name(SceneClass c);
SceneClass scene_class_from_name(const std::string& name);

struct SceneComponent {
  ReferenceShape shape;
  Placement placement;
};

struct Scene {
  std::vector<SceneComponent> components;
  SceneClass cls = SceneClass::Extended;
};

/// Minimum pairwise distance between component surfaces (coarse sampling);
/// +inf for scenes with fewer than two components.
double scene_min_separation(const Scene& scene);

/// Throws if any two component surfaces touch or overlap.
void validate_disjoint(const Scene& scene);

}  // namespace escat
