#include <doctest.h>

#include "escat/asymptotic.hpp"
#include "escat/forward.hpp"

using namespace escat;

namespace {
const Material material(2.0, 1.0);
const IncidentWave shear;
}  // namespace

TEST_CASE("polarization_tensor: unit ball is isotropic, with a frozen constant") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor c = polarization_tensor(ball, 1.0, material, 1024);
  const Complex tr = c.matrix.trace() / 3.0;
  CHECK(tr.imag() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(tr.real() > 0.0);
  // Symmetry forces c * I; the deviation measures the quadrature anisotropy.
  const double dev = (c.matrix - tr * Matrix3c::Identity()).norm() / c.matrix.norm();
  CHECK(dev < 1e-3);
  // Regression anchor computed by this solver at n_surface = 1024.
  CHECK(tr.real() == doctest::Approx(16.77041977).epsilon(1e-6));
}

TEST_CASE("polarization_tensor: degree-one homogeneity in the scale") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor a = polarization_tensor(ball, 0.1, material, 400);
  const PolarizationTensor b = polarization_tensor(ball, 0.2, material, 400);
  CHECK((b.matrix - 2.0 * a.matrix).norm() < 1e-6 * b.matrix.norm());
}

TEST_CASE("polarization_tensor: rotation equivariance for the peanut") {
  const ReferenceShape peanut = make_shape(ShapeId::Peanut);
  const Vector3 euler(0.9, 1.1, 0.4);
  Placement rotated_pose;
  rotated_pose.euler = euler;
  const Matrix3 R = euler_rotation(euler[0], euler[1], euler[2]);
  const PolarizationTensor base = polarization_tensor(peanut, 1.0, material, 576);
  const PolarizationTensor rotated =
      polarization_tensor_placed(peanut, rotated_pose, material, 576);
  const Matrix3c expect = R.cast<Complex>() * base.matrix * R.transpose().cast<Complex>();
  CHECK((rotated.matrix - expect).norm() / expect.norm() < 1e-3);
}

TEST_CASE("foldy_solve: single scatterer charge is -C u_in exactly") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor c = polarization_tensor(ball, 0.1, material, 400);
  const Vector3 z(0.4, -1.0, 2.0);
  const FoldySolution s = foldy_solve({z}, {c}, shear, material, 2.0);
  const Vector3c expect = -(c.matrix * incident_field(shear, material, z));
  CHECK((s.charges.col(0) - expect).norm() < 1e-12 * expect.norm());
  CHECK(s.residual < 1e-10);
}

TEST_CASE("foldy_solve: coupling decays like the inverse separation") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor c = polarization_tensor(ball, 0.1, material, 400);
  auto deviation_at = [&](double L) {
    const Vector3 z1(0, 0, -L / 2), z2(0, 0, L / 2);
    const FoldySolution s = foldy_solve({z1, z2}, {c, c}, shear, material, 2.0);
    const Vector3c isolated = -(c.matrix * incident_field(shear, material, z1));
    return (s.charges.col(0) - isolated).norm() / isolated.norm();
  };
  const double d5 = deviation_at(5.0);
  const double d20 = deviation_at(20.0);
  // The Kupradze coupling is O(1/L): quartering the coupling when the
  // separation quadruples, and small in absolute terms far apart.
  CHECK(d20 <= 0.3 * d5);
  CHECK(d20 < 0.02);
}

TEST_CASE("foldy_solve: zero incident amplitudes give zero charges") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor c = polarization_tensor(ball, 0.1, material, 400);
  const IncidentWave dark(Vector3(0, 0, 1), Vector3(1, 0, 0), Complex(0, 0), Complex(0, 0),
                          2.0);
  const FoldySolution s =
      foldy_solve({Vector3(0, 0, -3), Vector3(0, 0, 3)}, {c, c}, dark, material, 2.0);
  CHECK(s.charges.norm() == doctest::Approx(0.0));
}

TEST_CASE("foldy_solve: input validation") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor c = polarization_tensor(ball, 0.1, material, 400);
  CHECK_THROWS_AS(foldy_solve({Vector3::Zero(), Vector3::Zero()}, {c, c}, shear, material, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(foldy_solve({Vector3::Zero()}, {}, shear, material, 2.0),
                  std::invalid_argument);
}

TEST_CASE("asymptotic_farfield: single charge at the origin is purely radial in P") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor c = polarization_tensor(ball, 0.1, material, 400);
  const FoldySolution s = foldy_solve({Vector3::Zero()}, {c}, shear, material, 2.0);
  auto grid = shared_sphere_grid(12, 24);
  const FarField f = asymptotic_farfield(s, grid, material, 2.0);
  const auto [p, sfield] = split_ps(f);
  for (int n = 0; n < f.size(); ++n) {
    const Vector3c pv = p.values.col(n);
    // radial: parallel to the node direction
    const Vector3c tangent_part =
        pv - f.grid->nodes[n].cast<Complex>().dot(pv) * f.grid->nodes[n].cast<Complex>();
    CHECK(tangent_part.norm() < 1e-14);
  }
}

TEST_CASE("asymptotic_farfield: translation covariance reproduces the phase law") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  const PolarizationTensor c = polarization_tensor(ball, 0.1, material, 400);
  auto grid = shared_sphere_grid(16, 32);
  const Vector3 a(0.8, -0.4, 1.3);
  const std::vector<Vector3> base_z{Vector3(0, 0, -2.5), Vector3(1, 0.5, 2.5)};

  const FoldySolution s0 = foldy_solve(base_z, {c, c}, shear, material, 2.0);
  const FarField f0 = asymptotic_farfield(s0, grid, material, 2.0);

  std::vector<Vector3> shifted{base_z[0] + a, base_z[1] + a};
  const FoldySolution s1 = foldy_solve(shifted, {c, c}, shear, material, 2.0);
  const FarField f1 = asymptotic_farfield(s1, grid, material, 2.0);

  CHECK(rel_l2_error(translate_farfield(f0, a, Incidence::Shear), f1) < 1e-10);
}

TEST_CASE("asymptotic_farfield: cross-check against the full solver for a small ball") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  auto grid = shared_sphere_grid(24, 48);
  const double rho = 0.05;

  Scene scene;
  scene.components.push_back({ball, Placement{Vector3::Zero(), Vector3::Zero(), rho}});
  MfsConfig cfg{200, 600, 0.7, 1e-12, 1e-3};
  const FarField mfs =
      farfield_from_mfs(solve_mfs(scene, shear, material, cfg), grid, material, 2.0);

  const PolarizationTensor c = polarization_tensor(ball, rho, material, 400);
  const FoldySolution s = foldy_solve({Vector3::Zero()}, {c}, shear, material, 2.0);
  const FarField asym = asymptotic_farfield(s, grid, material, 2.0);

  // The leading-order error constant for the rigid ball at this material is
  // about 1.9 rho (measured 0.095 at rho = 0.05).
  const double err = rel_l2_error(asym, mfs);
  CHECK(err < 0.12);
  CHECK(err > 0.05);
}
