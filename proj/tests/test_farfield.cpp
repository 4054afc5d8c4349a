#include <doctest.h>

#include <random>

#include "escat/farfield.hpp"

using namespace escat;

namespace {

FarField random_field(std::shared_ptr<const SphereGrid> grid, std::uint64_t seed,
                      const IncidentWave& wave = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FarField f;
  f.grid = std::move(grid);
  f.values.resize(3, f.grid->size());
  for (int n = 0; n < f.size(); ++n)
    for (int c = 0; c < 3; ++c) f.values(c, n) = Complex(u(rng), u(rng));
  f.meta.material = Material(2.0, 1.0);
  f.meta.wave = wave;
  f.meta.provenance = "synthetic";
  return f;
}

}  // namespace

TEST_CASE("split_ps: radial and tangential projections") {
  auto grid = shared_sphere_grid(12, 24);

  SUBCASE("a radial field is all P") {
    FarField f = random_field(grid, 1);
    for (int n = 0; n < f.size(); ++n) f.values.col(n) = f.grid->nodes[n].cast<Complex>();
    const auto [p, s] = split_ps(f);
    CHECK((p.values - f.values).norm() < 1e-14);
    CHECK(s.values.norm() < 1e-14);
  }
  SUBCASE("a tangent field has no P part") {
    FarField f = random_field(grid, 2);
    for (int n = 0; n < f.size(); ++n) {
      const Vector3 x = f.grid->nodes[n];
      const Vector3 t = x.cross(Vector3(0.3, -0.9, 0.4)).normalized();
      f.values.col(n) = Complex(1.0, 0.5) * t.cast<Complex>();
    }
    const auto [p, s] = split_ps(f);
    CHECK(p.values.norm() < 1e-13);
  }
  SUBCASE("exact orthogonal decomposition on random fields") {
    const FarField f = random_field(grid, 3);
    const auto [p, s] = split_ps(f);
    CHECK((p.values + s.values - f.values).norm() < 1e-14);  // reassembly
    const double np = l2_norm(p), ns = l2_norm(s), nf = l2_norm(f);
    CHECK(std::abs(np * np + ns * ns - nf * nf) < 1e-12 * nf * nf);  // Pythagoras
    CHECK(std::abs(l2_inner(p, s)) < 1e-12);
  }
}

TEST_CASE("l2 inner product: positivity, orthogonality, Cauchy-Schwarz") {
  auto grid = shared_sphere_grid(12, 24);
  const FarField f = random_field(grid, 4);
  const FarField g = random_field(grid, 5);

  const Complex ff = l2_inner(f, f);
  CHECK(ff.imag() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(ff.real() >= 0.0);
  CHECK(std::abs(std::sqrt(ff.real()) - l2_norm(f)) < 1e-12);

  CHECK(std::abs(l2_inner(f, g)) <= l2_norm(f) * l2_norm(g) * (1.0 + 1e-12));

  auto other = shared_sphere_grid(12, 26);
  const FarField h = random_field(other, 6);
  CHECK_THROWS_AS(l2_inner(f, h), std::invalid_argument);
}

TEST_CASE("point-source far field: one-term sums are exact projector images") {
  const Material m(2.0, 1.0);
  const IncidentWave wave;  // shear defaults, omega = 2
  auto grid = shared_sphere_grid(8, 16);
  Eigen::Matrix3Xcd coeff(3, 1);
  coeff.col(0) = Vector3c(Complex(1.0, -0.5), Complex(0.0, 2.0), Complex(0.3, 0.0));
  const FarField f =
      farfield_of_point_sources({Vector3::Zero()}, coeff, m, wave, grid, "test");

  const double cp = pressure_prefactor(m), cs = shear_prefactor(m);
  for (int n = 0; n < f.size(); ++n) {
    const Vector3 x = f.grid->nodes[n];
    const Vector3c c = coeff.col(0);
    const Complex radial = x.cast<Complex>().dot(c);
    const Vector3c expect =
        cp * radial * x.cast<Complex>() + cs * (c - radial * x.cast<Complex>());
    CHECK((f.values.col(n) - expect).norm() < 1e-15);
  }
}

TEST_CASE("translate_farfield: identities and magnitude preservation") {
  const Material m(2.0, 1.0);
  const IncidentWave shear;  // alpha = 0, beta = 1
  auto grid = shared_sphere_grid(12, 24);
  Eigen::Matrix3Xcd coeff(3, 2);
  coeff.col(0) = Vector3c(1.0, Complex(0, 1), 0.5);
  coeff.col(1) = Vector3c(Complex(0.2, -0.1), 0.0, Complex(0, -1));
  const FarField f = farfield_of_point_sources({Vector3(0.1, 0, 0), Vector3(0, -0.2, 0.1)},
                                               coeff, m, shear, grid, "test");

  SUBCASE("zero shift is the identity") {
    const FarField t = translate_farfield(f, Vector3::Zero(), Incidence::Shear);
    CHECK((t.values - f.values).norm() < 1e-15);
  }
  SUBCASE("pure phases preserve node-wise magnitudes") {
    const FarField t = translate_farfield(f, Vector3(1.0, -2.0, 0.5), Incidence::Shear);
    const auto [fp, fs] = split_ps(f);
    const auto [tp, ts] = split_ps(t);
    for (int n = 0; n < f.size(); ++n) {
      CHECK(std::abs(tp.values.col(n).norm() - fp.values.col(n).norm()) < 1e-13);
      CHECK(std::abs(ts.values.col(n).norm() - fs.values.col(n).norm()) < 1e-13);
    }
  }
  SUBCASE("a then -a composes to the identity") {
    const Vector3 a(0.7, 0.3, -1.1);
    const FarField t = translate_farfield(translate_farfield(f, a, Incidence::Shear), -a,
                                          Incidence::Shear);
    CHECK((t.values - f.values).norm() < 1e-14 * f.values.norm());
  }
  SUBCASE("incidence purity is enforced") {
    CHECK_THROWS_AS(translate_farfield(f, Vector3(1, 0, 0), Incidence::Pressure),
                    std::invalid_argument);
    FarField mixed = f;
    mixed.meta.wave.alpha = Complex(0.5, 0.0);
    CHECK_THROWS_AS(translate_farfield(mixed, Vector3(1, 0, 0), Incidence::Shear),
                    std::invalid_argument);
  }
}

TEST_CASE("rotate_farfield: identity rotation, exact re-evaluation, fallback error") {
  const Material m(2.0, 1.0);
  const IncidentWave shear;
  auto grid = shared_sphere_grid(16, 32);
  Eigen::Matrix3Xcd coeff(3, 2);
  coeff.col(0) = Vector3c(1.0, Complex(0, 1), 0.5);
  coeff.col(1) = Vector3c(Complex(-0.3, 0.4), 1.0, Complex(0.2, 0.2));
  const FarField f = farfield_of_point_sources({Vector3(0.2, 0.1, 0), Vector3(0, 0, -0.3)},
                                               coeff, m, shear, grid, "test");

  SUBCASE("R = I is the identity") {
    const FarField r = rotate_farfield(f, Matrix3::Identity());
    CHECK((r.values - f.values).norm() < 1e-13 * f.values.norm());
  }
  SUBCASE("rotation preserves the L2 norm within quadrature tolerance") {
    const Matrix3 R =
        Eigen::AngleAxisd(0.83, Vector3(1, 2, -1).normalized()).toRotationMatrix();
    const FarField r = rotate_farfield(f, R);
    CHECK(std::abs(l2_norm(r) - l2_norm(f)) < 1e-3 * l2_norm(f));
    CHECK((r.meta.wave.d - R * f.meta.wave.d).norm() < 1e-14);
  }
  SUBCASE("no producer and off-grid directions is a resample error") {
    FarField bare = f;
    bare.producer.reset();
    const Matrix3 R =
        Eigen::AngleAxisd(0.41, Vector3(0, 1, 1).normalized()).toRotationMatrix();
    CHECK_THROWS_AS(rotate_farfield(bare, R), std::runtime_error);
  }
}

TEST_CASE("add_noise: determinism and bounds") {
  auto grid = shared_sphere_grid(12, 24);
  const FarField f = random_field(grid, 9);

  SUBCASE("zero level leaves the field untouched") {
    const FarField g = add_noise(f, 0.0, 1234);
    CHECK((g.values - f.values).norm() == 0.0);
  }
  SUBCASE("bounded perturbation, strictly nonzero") {
    const FarField g = add_noise(f, 0.05, 7);
    const double rel = (g.values - f.values).norm() / f.values.norm();
    CHECK(rel <= 0.05 * std::sqrt(3.0));
    CHECK(rel > 0.0);
    CHECK(g.meta.noise.applied);
    CHECK(g.meta.noise.level == 0.05);
    CHECK(g.meta.noise.seed == 7);
  }
  SUBCASE("same seed gives bit-identical output") {
    const FarField a = add_noise(f, 0.05, 42);
    const FarField b = add_noise(f, 0.05, 42);
    for (int n = 0; n < f.size(); ++n)
      for (int c = 0; c < 3; ++c) {
        CHECK(a.values(c, n).real() == b.values(c, n).real());
        CHECK(a.values(c, n).imag() == b.values(c, n).imag());
      }
    const FarField c = add_noise(f, 0.05, 43);
    CHECK((a.values - c.values).norm() > 0.0);
  }
}
