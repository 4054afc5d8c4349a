#include <doctest.h>

#include <random>

#include "escat/geometry.hpp"

using namespace escat;

TEST_CASE("make_shape: profile anchor points") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  CHECK(ball.profile(0.0)[0] == doctest::Approx(1.0));
  CHECK(ball.profile(0.0)[1] == doctest::Approx(0.0));

  const ReferenceShape kite = make_shape(ShapeId::Kite);
  CHECK(kite.profile(0.0)[0] == doctest::Approx(1.0));  // 1 + 0.65 - 0.65
  CHECK(kite.profile(0.0)[1] == doctest::Approx(0.0));

  const ReferenceShape peanut = make_shape(ShapeId::Peanut);
  CHECK(peanut.profile(pi / 2)[0] == doctest::Approx(0.0));
  CHECK(peanut.profile(pi / 2)[1] == doctest::Approx(1.0));  // sqrt(3*0 + 1)

  CHECK_THROWS_AS(make_shape("Torus"), std::invalid_argument);
}

TEST_CASE("make_shape: ball revolution is the unit sphere") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  for (double s : {0.3, 1.1, 2.2})
    for (double phi : {0.0, 1.0, 4.0})
      CHECK(surface_point(ball, s, phi).norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ball.circumradius == doctest::Approx(1.0));
}

TEST_CASE("euler_rotation: orthogonal with determinant one") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int t = 0; t < 20; ++t) {
    const Matrix3 R = euler_rotation(u(rng), u(rng), 0.5 * u(rng) / 2.0);
    CHECK((R * R.transpose() - Matrix3::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // The middle angle rotates about y.
  const Matrix3 Ry = euler_rotation(0.0, pi / 2, 0.0);
  CHECK((Ry * Vector3::UnitX() - (-Vector3::UnitZ())).norm() < 1e-14);
  CHECK((Ry * Vector3::UnitZ() - Vector3::UnitX()).norm() < 1e-14);
}

TEST_CASE("apply_placement: identity, translation, pure scaling") {
  Placement id;
  const Vector3 p(0.2, -0.4, 0.9);
  CHECK((apply_placement(id, p) - p).norm() < 1e-15);

  Placement shift;
  shift.position = Vector3(2, 0, 2);
  CHECK((apply_placement(shift, Vector3::Zero()) - Vector3(2, 0, 2)).norm() < 1e-15);

  Placement tiny;
  tiny.scale = 0.1;
  CHECK((apply_placement(tiny, p) - 0.1 * p).norm() < 1e-15);
}

TEST_CASE("apply_placement: rigid motion with exact distance dilation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Placement pl;
  pl.position = Vector3(1.5, -2.0, 0.3);
  pl.euler = Vector3(0.8, 2.1, 0.9);
  pl.scale = 0.37;
  for (int t = 0; t < 50; ++t) {
    const Vector3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    const double before = (a - b).norm();
    const double after = (apply_placement(pl, a) - apply_placement(pl, b)).norm();
    CHECK(std::abs(after - pl.scale * before) < 1e-12);
  }
}

TEST_CASE("placement validation") {
  Placement p;
  p.scale = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.scale = 1.0;
  p.euler = Vector3(0.0, 0.0, 2.0 * pi);  // psi beyond [0, pi]
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("sample_surface: unit ball quadrature and normals") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  Placement id;
  const SurfaceSample s = sample_surface(ball, id, 64, 64);
  CHECK(std::abs(s.area() - 4.0 * pi) < 1e-6);
  for (int k = 0; k < s.size(); ++k) {
    CHECK((s.normals[k] - s.points[k]).norm() < 1e-10);  // sphere normal is radial
    CHECK(std::abs(s.normals[k].norm() - 1.0) < 1e-12);
    CHECK(s.weights[k] > 0.0);
  }
}

TEST_CASE("sample_surface: area scales with the square of the dilation") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  Placement p;
  p.scale = 0.1;
  const SurfaceSample s = sample_surface(ball, p, 64, 64);
  CHECK(std::abs(s.area() - 4.0 * pi * 0.01) < 1e-8);
}

TEST_CASE("sample_surface: undersized grids rejected") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  CHECK_THROWS_AS(sample_surface(ball, Placement{}, 4, 64), std::invalid_argument);
  CHECK_THROWS_AS(sample_surface(ball, Placement{}, 64, 4), std::invalid_argument);
}

TEST_CASE("sample_surface: area converges at least linearly under refinement") {
  for (ShapeId id : {ShapeId::Ball, ShapeId::Peanut}) {
    const ReferenceShape shape = make_shape(id);
    const double ref = sample_surface(shape, Placement{}, 128, 128).area();
    double prev = -1.0;
    for (int n : {8, 16, 32}) {
      const double err = std::abs(sample_surface(shape, Placement{}, n, n).area() - ref);
      if (prev >= 0.0) CHECK(err <= 0.5 * prev + 1e-13);
      prev = err;
    }
  }
}

TEST_CASE("sample_surface: outward normals for every reference shape") {
  for (ShapeId id :
       {ShapeId::Ball, ShapeId::Peanut, ShapeId::Kite, ShapeId::Acorn, ShapeId::Ufo}) {
    const ReferenceShape shape = make_shape(id);
    const SurfaceSample s = sample_surface(shape, Placement{}, 24, 24);
    // Flux of the identity field through a closed surface is 3 |volume| > 0;
    // sign checks the global orientation.
    double flux = 0.0;
    for (int k = 0; k < s.size(); ++k) flux += s.weights[k] * s.points[k].dot(s.normals[k]);
    CHECK(flux > 0.0);
  }
}

TEST_CASE("scene separation and overlap validation") {
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  Scene ok;
  ok.components.push_back({ball, Placement{Vector3(0, 0, -3), Vector3::Zero(), 1.0}});
  ok.components.push_back({ball, Placement{Vector3(0, 0, 3), Vector3::Zero(), 1.0}});
  CHECK(scene_min_separation(ok) == doctest::Approx(4.0).epsilon(1e-2));
  CHECK_NOTHROW(validate_disjoint(ok));

  Scene bad;
  bad.components.push_back({ball, Placement{Vector3(0, 0, 0), Vector3::Zero(), 1.0}});
  bad.components.push_back({ball, Placement{Vector3(0, 0, 0.5), Vector3::Zero(), 1.0}});
  CHECK_THROWS_AS(validate_disjoint(bad), std::invalid_argument);
}
