#include "escat/geometry.hpp"

#include <cmath>
#include <limits>

namespace escat {

std::string shape_name(ShapeId id) {
  switch (id) {
    case ShapeId::Ball: return "Ball";
    case ShapeId::Peanut: return "Peanut";
    case ShapeId::Kite: return "Kite";
    case ShapeId::Acorn: return "Acorn";
    case ShapeId::Ufo: return "UFO";
    case ShapeId::Custom: return "Custom";
  }
  return "Custom";
}

ShapeId shape_from_name(const std::string& name) {
  if (name == "Ball" || name == "B") return ShapeId::Ball;
  if (name == "Peanut" || name == "P") return ShapeId::Peanut;
  if (name == "Kite" || name == "K") return ShapeId::Kite;
  if (name == "Acorn" || name == "A") return ShapeId::Acorn;
  if (name == "UFO" || name == "Ufo" || name == "U") return ShapeId::Ufo;
  throw std::invalid_argument("unknown shape id: " + name);
}

namespace {

double circumradius_of(const ReferenceShape& s) {
  double r = 0.0;
  for (int i = 0; i <= 720; ++i) {
    const auto p = s.profile(pi * i / 720.0);
    r = std::max(r, std::hypot(p[0], p[1]));
  }
  return r;
}

// Polar profiles rho(s)*(cos s, sin s).
std::array<double, 2> polar_point(double rho, double s) {
  return {rho * std::cos(s), rho * std::sin(s)};
}
std::array<double, 2> polar_tangent(double rho, double drho, double s) {
  const double c = std::cos(s), n = std::sin(s);
  return {drho * c - rho * n, drho * n + rho * c};
}

}  // namespace

ReferenceShape make_shape(ShapeId id) {
  ReferenceShape s;
  s.id = id;
  s.name = shape_name(id);
  switch (id) {
    case ShapeId::Ball:
      s.profile = [](double t) { return std::array<double, 2>{std::cos(t), std::sin(t)}; };
      s.dprofile = [](double t) { return std::array<double, 2>{-std::sin(t), std::cos(t)}; };
      break;
    case ShapeId::Peanut:
      s.profile = [](double t) {
        const double rho = std::sqrt(3.0 * std::cos(t) * std::cos(t) + 1.0);
        return polar_point(rho, t);
      };
      s.dprofile = [](double t) {
        const double rho = std::sqrt(3.0 * std::cos(t) * std::cos(t) + 1.0);
        const double drho = -3.0 * std::cos(t) * std::sin(t) / rho;
        return polar_tangent(rho, drho, t);
      };
      break;
    case ShapeId::Kite:
      s.profile = [](double t) {
        return std::array<double, 2>{std::cos(t) + 0.65 * std::cos(2.0 * t) - 0.65,
                                     1.5 * std::sin(t)};
      };
      s.dprofile = [](double t) {
        return std::array<double, 2>{-std::sin(t) - 1.3 * std::sin(2.0 * t),
                                     1.5 * std::cos(t)};
      };
      break;
    case ShapeId::Acorn:
      s.profile = [](double t) {
        const double rho = 1.0 + std::cos(t) * std::cos(2.0 * t) / 3.0;
        return polar_point(rho, t);
      };
      s.dprofile = [](double t) {
        const double rho = 1.0 + std::cos(t) * std::cos(2.0 * t) / 3.0;
        const double drho =
            (-std::sin(t) * std::cos(2.0 * t) - 2.0 * std::cos(t) * std::sin(2.0 * t)) / 3.0;
        return polar_tangent(rho, drho, t);
      };
      break;
    case ShapeId::Ufo:
      s.profile = [](double t) {
        const double rho = 1.0 + 0.2 * std::cos(4.0 * t);
        return polar_point(rho, t);
      };
      s.dprofile = [](double t) {
        const double rho = 1.0 + 0.2 * std::cos(4.0 * t);
        const double drho = -0.8 * std::sin(4.0 * t);
        return polar_tangent(rho, drho, t);
      };
      break;
    case ShapeId::Custom:
      throw std::invalid_argument("make_shape: Custom requires an explicit profile");
  }
  s.circumradius = circumradius_of(s);
  return s;
}

ReferenceShape make_shape(const std::string& name) { return make_shape(shape_from_name(name)); }

Vector3 surface_point(const ReferenceShape& shape, double s, double phi) {
  const auto p = shape.profile(s);
  return Vector3(p[1] * std::cos(phi), p[1] * std::sin(phi), p[0]);
}

Vector3 star_surface_point(const ReferenceShape& shape, double polar, double azimuth) {
  // The profile angle atan2(y, x) increases monotonically from 0 to pi for
  // star-shaped profiles; bisect for the requested polar angle.
  double lo = 0.0, hi = pi;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto p = shape.profile(mid);
    (std::atan2(p[1], p[0]) < polar ? lo : hi) = mid;
  }
  const auto p = shape.profile(0.5 * (lo + hi));
  const double r = std::hypot(p[0], p[1]);
  const double st = std::sin(polar);
  return Vector3(r * st * std::cos(azimuth), r * st * std::sin(azimuth),
                 r * std::cos(polar));
}

std::vector<Vector3> fibonacci_surface_points(const ReferenceShape& shape, int n) {
  if (n < 1) throw std::invalid_argument("fibonacci_surface_points: n must be positive");
  std::vector<Vector3> out;
  out.reserve(n);
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double polar = std::acos(std::min(1.0, std::max(-1.0, z)));
    out.push_back(star_surface_point(shape, polar, golden * i));
  }
  return out;
}

Matrix3 euler_rotation(double theta, double phi, double psi) {
  const Eigen::AngleAxisd rz1(theta, Vector3::UnitZ());
  const Eigen::AngleAxisd ry(phi, Vector3::UnitY());
  const Eigen::AngleAxisd rz2(psi, Vector3::UnitZ());
  return (rz1 * ry * rz2).toRotationMatrix();
}

void Placement::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("Placement: scale must be positive");
  const double two_pi = 2.0 * pi + 1e-12;
  if (euler[0] < -1e-12 || euler[0] > two_pi || euler[1] < -1e-12 || euler[1] > two_pi ||
      euler[2] < -1e-12 || euler[2] > pi + 1e-12)
    throw std::invalid_argument("Placement: euler angles outside [0,2pi]x[0,2pi]x[0,pi]");
}

Vector3 apply_placement(const Placement& placement, const Vector3& p) {
  placement.validate();
  return placement.position + placement.rotation() * (placement.scale * p);
}

double SurfaceSample::area() const {
  double a = 0.0;
  for (double w : weights) a += w;
  return a;
}

SurfaceSample sample_surface(const ReferenceShape& shape, const Placement& placement, int n_s,
                             int n_rev) {
  if (n_s < 8 || n_rev < 8)
    throw std::invalid_argument("sample_surface: need n_s >= 8 and n_rev >= 8");
  placement.validate();

  std::vector<double> t, wt;
  gauss_legendre(n_s, t, wt);  // mapped to s in (0, pi)

  const Matrix3 rot = placement.rotation();
  const double r = placement.scale;
  const double dphi = 2.0 * pi / n_rev;

  SurfaceSample out;
  out.points.reserve(n_s * n_rev);
  out.normals.reserve(n_s * n_rev);
  out.weights.reserve(n_s * n_rev);

  for (int i = 0; i < n_s; ++i) {
    const double s = 0.5 * pi * (t[i] + 1.0);
    const double ws = 0.5 * pi * wt[i];
    const auto p = shape.profile(s);
    const auto dp = shape.dprofile(s);
    const double x = p[0], y = p[1];
    const double dx = dp[0], dy = dp[1];
    const double jac = y * std::hypot(dx, dy);
    for (int j = 0; j < n_rev; ++j) {
      const double phi = dphi * j;
      const double c = std::cos(phi), sn = std::sin(phi);
      const Vector3 pt(y * c, y * sn, x);
      // Cross product of the parametric tangents, up to the positive factor
      // y; orientation fixed outward against the centroid (origin).
      Vector3 nrm(-dx * c, -dx * sn, dy);
      nrm.normalize();
      if (nrm.dot(pt) < 0.0) nrm = -nrm;
      out.points.push_back(placement.position + rot * (r * pt));
      out.normals.push_back(rot * nrm);
      out.weights.push_back(ws * dphi * jac * r * r);
    }
  }
  return out;
}

std::string scene_class_name(SceneClass c) {
  switch (c) {
    case SceneClass::Small: return "small";
    case SceneClass::Extended: return "extended";
    case SceneClass::Multiscale: return "multiscale";
  }
  return "extended";
}

SceneClass scene_class_from_name(const std::string& name) {
  if (name == "small") return SceneClass::Small;
  if (name == "extended") return SceneClass::Extended;
  if (name == "multiscale") return SceneClass::Multiscale;
  throw std::invalid_argument("unknown scene class: " + name);
}

double scene_min_separation(const Scene& scene) {
  const int n = static_cast<int>(scene.components.size());
  if (n < 2) return std::numeric_limits<double>::infinity();
  std::vector<SurfaceSample> samples;
  samples.reserve(n);
  for (const auto& c : scene.components)
    samples.push_back(sample_surface(c.shape, c.placement, 16, 16));
  double dmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (const auto& pa : samples[a].points)
        for (const auto& pb : samples[b].points) dmin = std::min(dmin, (pa - pb).norm());
  return dmin;
}

void validate_disjoint(const Scene& scene) {
  const int n = static_cast<int>(scene.components.size());
  if (n < 2) return;
  // Coarse-sample distance plus a centroid containment guard.
  if (!(scene_min_separation(scene) > 0.0))
    throw std::invalid_argument("scene components overlap");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto& ca = scene.components[a];
      const auto& cb = scene.components[b];
      const double center_gap = (ca.placement.position - cb.placement.position).norm();
      if (center_gap <= cb.placement.scale * cb.shape.circumradius &&
          center_gap <= ca.placement.scale * ca.shape.circumradius)
        throw std::invalid_argument("scene components overlap (nested centers)");
    }
}

}  // namespace escat
