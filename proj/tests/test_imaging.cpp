#include <doctest.h>

#include "escat/asymptotic.hpp"
#include "escat/imaging.hpp"

using namespace escat;

namespace {

const Material material(2.0, 1.0);
const IncidentWave shear;

std::shared_ptr<const SphereGrid> test_grid() {
  static auto g = shared_sphere_grid(24, 48);
  return g;
}

const PolarizationTensor& ball_tensor() {
  static PolarizationTensor c =
      polarization_tensor(make_shape(ShapeId::Ball), 0.1, material, 400);
  return c;
}

FarField point_scatterer_field(const std::vector<Vector3>& positions,
                               const std::vector<PolarizationTensor>& tensors,
                               const Material& m = material) {
  const FoldySolution s = foldy_solve(positions, tensors, shear, m, 2.0);
  return asymptotic_farfield(s, test_grid(), m, 2.0);
}

}  // namespace

TEST_CASE("SamplingMesh: dimensions, indexing, validation") {
  SamplingMesh mesh{Vector3(-1, -1, -1), Vector3(1, 1, 1), 0.5};
  CHECK(mesh.dims() == std::array<int, 3>{5, 5, 5});
  CHECK(mesh.size() == 125);
  CHECK((mesh.point(4, 0, 2) - Vector3(1, -1, 0)).norm() < 1e-15);

  SamplingMesh bad{Vector3::Zero(), Vector3(1, 1, 1), 0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SamplingMesh empty{Vector3(1, 0, 0), Vector3(0, 1, 1), 0.5};
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("indicator_small: single point scatterer peaks at its location") {
  const Vector3 zs(0.5, -0.25, 1.0);  // on-lattice
  const FarField f = point_scatterer_field({zs}, {ball_tensor()});
  SamplingMesh mesh{Vector3(-2, -2, -2), Vector3(2, 2, 2), 0.25};

  SUBCASE("P and S modes peak at one") {
    for (IndicatorMode mode : {IndicatorMode::P, IndicatorMode::S}) {
      const IndicatorField field = indicator_small(f, mesh, mode);
      CHECK((field.argmax() - zs).norm() < 1e-12);
      CHECK(field.max_value() == doctest::Approx(1.0).epsilon(2e-3));
      for (double v : field.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-9);
      }
    }
  }
  SUBCASE("full mode peaks at the mixed-prefactor constant") {
    // One inner product with the unweighted combined kernel: the peak is
    // (cp + 2 cs)^2 / (3 (cp^2 + 2 cs^2)) = 81/99 at lambda=2, mu=1.
    const IndicatorField field = indicator_small(f, mesh, IndicatorMode::Full);
    CHECK((field.argmax() - zs).norm() < 1e-12);
    CHECK(field.max_value() == doctest::Approx(81.0 / 99.0).epsilon(2e-3));
  }
  SUBCASE("global phase invariance") {
    FarField g = f;
    g.producer.reset();
    g.values *= std::exp(Complex(0.0, 1.234));
    const IndicatorField a = indicator_small(f, mesh, IndicatorMode::Full);
    const IndicatorField b = indicator_small(g, mesh, IndicatorMode::Full);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      dev = std::max(dev, std::abs(a.values[i] - b.values[i]));
    CHECK(dev < 1e-12);
  }
  SUBCASE("amplitude invariance") {
    FarField g = f;
    g.producer.reset();
    g.values *= Complex(3.7, -1.2);
    const IndicatorField a = indicator_small(f, mesh, IndicatorMode::S);
    const IndicatorField b = indicator_small(g, mesh, IndicatorMode::S);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      dev = std::max(dev, std::abs(a.values[i] - b.values[i]));
    CHECK(dev < 1e-12);
  }
  SUBCASE("zero data rejected") {
    FarField z = f;
    z.producer.reset();
    z.values.setZero();
    CHECK_THROWS_AS(indicator_small(z, mesh, IndicatorMode::Full), std::invalid_argument);
  }
}

TEST_CASE("indicator_small: three sparse components produce three local maxima") {
  const PolarizationTensor cb = ball_tensor();
  const PolarizationTensor cp = polarization_tensor(make_shape(ShapeId::Peanut), 0.1,
                                                    material, 400);
  const PolarizationTensor ck = polarization_tensor(make_shape(ShapeId::Kite), 0.1,
                                                    material, 400);
  const std::vector<Vector3> zs{{-2, 3, -2}, {3, -2, -2}, {3, 3, 3}};
  FarField f = point_scatterer_field(zs, {cb, cp, ck});
  f = add_noise(f, 0.05, 3);

  SamplingMesh mesh{Vector3(-4, -4, -4), Vector3(4, 4, 4), 0.25};
  const auto dets = scheme_s(f, mesh, SchemeSOptions{});
  REQUIRE(dets.size() == 3);
  for (const auto& z : zs) {
    double best = 1e9;
    for (const auto& d : dets) best = std::min(best, (d.position - z).norm());
    CHECK(best <= 0.25);  // within one mesh spacing
  }
}

TEST_CASE("indicator_small: peak location is stable under noise") {
  const Vector3 zs(0.5, -0.25, 1.0);
  const FarField clean = point_scatterer_field({zs}, {ball_tensor()});
  SamplingMesh mesh{Vector3(-2, -2, -2), Vector3(2, 2, 2), 0.25};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const FarField noisy = add_noise(clean, 0.05, seed);
    const IndicatorField field = indicator_small(noisy, mesh, IndicatorMode::Full);
    CHECK((field.argmax() - zs).norm() <= 0.25 + 1e-12);
  }
}

TEST_CASE("indicator_small: S-mode peak is sharper than P-mode when lambda >> mu") {
  const Material stiff(20.0, 1.0);
  const PolarizationTensor c =
      polarization_tensor(make_shape(ShapeId::Ball), 0.1, stiff, 400);
  const FoldySolution s = foldy_solve({Vector3::Zero()}, {c}, shear, stiff, 2.0);
  const FarField f = asymptotic_farfield(s, test_grid(), stiff, 2.0);

  auto fwhm = [&](IndicatorMode mode) {
    SamplingMesh scan{Vector3(-4, 0, 0), Vector3(4, 0, 0), 0.02};
    const IndicatorField fld = indicator_small(f, scan, mode);
    const double half = 0.5 * fld.max_value();
    const auto d = scan.dims();
    int lo = -1, hi = -1;
    for (int i = 0; i < d[0]; ++i)
      if (fld.values[i] >= half) {
        if (lo < 0) lo = i;
        hi = i;
      }
    return (hi - lo) * scan.spacing;
  };
  const double wp = fwhm(IndicatorMode::P);
  const double ws = fwhm(IndicatorMode::S);
  CHECK(ws < wp);  // measured 1.80 vs 4.76
  CHECK(ws < 2.1);
  CHECK(wp > 4.0);
}

TEST_CASE("k_diagnostics: energy fractions agree across modes for sparse scenes") {
  const PolarizationTensor cb = ball_tensor();
  const PolarizationTensor cp = polarization_tensor(make_shape(ShapeId::Peanut), 0.1,
                                                    material, 400);
  const PolarizationTensor ck = polarization_tensor(make_shape(ShapeId::Kite), 0.1,
                                                    material, 400);
  const std::vector<Vector3> zs{{-2, 3, -2}, {3, -2, -2}, {3, 3, 3}};
  const std::vector<PolarizationTensor> cs{cb, cp, ck};
  const FarField total = point_scatterer_field(zs, cs);
  for (int j = 0; j < 3; ++j) {
    const FarField single = point_scatterer_field({zs[j]}, {cs[j]});
    const auto k = k_diagnostics(single, total);
    const double spread = std::max({k[0], k[1], k[2]}) - std::min({k[0], k[1], k[2]});
    CHECK(spread < 0.1);
    CHECK(k[2] > 0.0);
  }
}

TEST_CASE("extract_local_maxima: suppression, strictness, validation") {
  SamplingMesh mesh{Vector3(-1, -1, -1), Vector3(1, 1, 1), 0.5};
  IndicatorField field;
  field.mesh = mesh;
  field.mode = IndicatorMode::Full;
  field.values.assign(mesh.size(), 0.1);

  SUBCASE("constant field has no strict local maximum") {
    CHECK(extract_local_maxima(field, 0.05, 0.5).empty());
  }
  SUBCASE("single bump is a single detection") {
    field.values[mesh.index(2, 2, 2)] = 0.9;
    const auto dets = extract_local_maxima(field, 0.5, 0.5);
    REQUIRE(dets.size() == 1);
    CHECK((dets[0].position - Vector3(0, 0, 0)).norm() < 1e-15);
    CHECK(dets[0].peak_value == doctest::Approx(0.9));
  }
  SUBCASE("nearby weaker maxima are suppressed") {
    field.values[mesh.index(2, 2, 2)] = 0.9;
    field.values[mesh.index(3, 2, 2)] = 0.0;  // make the next one strict
    field.values[mesh.index(4, 2, 2)] = 0.8;
    CHECK(extract_local_maxima(field, 0.5, 1.5).size() == 1);
    CHECK(extract_local_maxima(field, 0.5, 0.9).size() == 2);
  }
  SUBCASE("mask excludes regions") {
    field.values[mesh.index(2, 2, 2)] = 0.9;
    std::vector<std::uint8_t> mask(mesh.size(), 1);
    mask[mesh.index(2, 2, 2)] = 0;
    CHECK(extract_local_maxima(field, 0.5, 0.5, mask).empty());
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(extract_local_maxima(field, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(extract_local_maxima(field, 1.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(extract_local_maxima(field, 0.5, 0.25), std::invalid_argument);
  }
}

namespace {

// Small two-shape library shared by the extended-scheme tests (one MFS build).
const ReferenceLibrary& mini_library() {
  static ReferenceLibrary lib = [] {
    MfsConfig cfg{150, 450, 0.7, 1e-12, 1e-2};
    return build_library({make_shape(ShapeId::Ball), make_shape(ShapeId::Peanut)},
                         {Vector3::Zero()}, {1.0}, material, shear, test_grid(), cfg);
  }();
  return lib;
}

FarField peanut_scene_field(const Vector3& z, double noise_level, std::uint64_t seed) {
  MfsConfig cfg{150, 450, 0.7, 1e-12, 1e-2};
  Scene scene;
  scene.components.push_back({make_shape(ShapeId::Peanut), Placement{z, Vector3::Zero(), 1.0}});
  FarField f =
      farfield_from_mfs(solve_mfs(scene, shear, material, cfg), test_grid(), material, 2.0);
  if (noise_level > 0.0) f = add_noise(f, noise_level, seed);
  return f;
}

}  // namespace

TEST_CASE("indicator_extended: matching entry peaks near one at the true position") {
  const Vector3 zs(1.5, 0.5, -1.0);
  const FarField f = peanut_scene_field(zs, 0.05, 11);
  SamplingMesh mesh{Vector3(-3, -3, -3), Vector3(3, 3, 3), 0.25};

  const ReferenceLibrary& lib = mini_library();
  REQUIRE(lib.entries.size() == 2);
  REQUIRE(lib.entries[0].shape == ShapeId::Peanut);  // larger signature first

  const IndicatorField w =
      indicator_extended(f, lib.entries[0], mesh, IndicatorMode::Full, shear);
  CHECK((w.argmax() - zs).norm() < 1e-12);
  CHECK(w.max_value() == doctest::Approx(1.0).epsilon(0.05));
  for (double v : w.values) CHECK(v >= 0.0);
}

TEST_CASE("indicator_extended: wrong-shape entry stays clearly below one") {
  // Ball-only scene probed with the (stronger) peanut entry: the match
  // deficit keeps W well under the detection threshold.
  MfsConfig cfg{150, 450, 0.7, 1e-12, 1e-2};
  Scene scene;
  scene.components.push_back(
      {make_shape(ShapeId::Ball), Placement{Vector3(1.0, -0.5, 0.5), Vector3::Zero(), 1.0}});
  FarField f =
      farfield_from_mfs(solve_mfs(scene, shear, material, cfg), test_grid(), material, 2.0);
  f = add_noise(f, 0.05, 5);

  SamplingMesh mesh{Vector3(-3, -3, -3), Vector3(3, 3, 3), 0.25};
  const IndicatorField w =
      indicator_extended(f, mini_library().entries[0], mesh, IndicatorMode::Full, shear);
  CHECK(w.max_value() < 0.7);  // measured 0.56: below the detection threshold

  // A mesh region far from any scatterer stays low.
  SamplingMesh away{Vector3(-3, -3, -3), Vector3(-1.5, -1.5, -1.5), 0.25};
  const IndicatorField wa =
      indicator_extended(f, mini_library().entries[0], away, IndicatorMode::Full, shear);
  CHECK(wa.max_value() < 0.5);
}

TEST_CASE("indicator_extended: convention rescaling of data and library together") {
  const Vector3 zs(1.5, 0.5, -1.0);
  FarField f = peanut_scene_field(zs, 0.0, 0);
  SamplingMesh mesh{Vector3(-2, -2, -2), Vector3(2, 2, 2), 0.5};
  const LibraryEntry& entry = mini_library().entries[0];

  const IndicatorField a = indicator_extended(f, entry, mesh, IndicatorMode::Full, shear);

  const Complex c(0.31, -2.2);
  FarField fc = f;
  fc.producer.reset();
  fc.values *= c;
  LibraryEntry scaled = entry;
  scaled.sig_pressure.values *= c;
  scaled.sig_shear.values *= c;
  const IndicatorField b = indicator_extended(fc, scaled, mesh, IndicatorMode::Full, shear);

  double dev = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    dev = std::max(dev, std::abs(a.values[i] - b.values[i]));
  CHECK(dev < 1e-12);
}

TEST_CASE("indicator_extended: zero entry rejected") {
  const FarField f = peanut_scene_field(Vector3::Zero(), 0.0, 0);
  SamplingMesh mesh{Vector3(-1, -1, -1), Vector3(1, 1, 1), 0.5};
  LibraryEntry zero = mini_library().entries[0];
  zero.sig_pressure.values.setZero();
  zero.sig_shear.values.setZero();
  CHECK_THROWS_AS(indicator_extended(f, zero, mesh, IndicatorMode::Full, shear),
                  std::invalid_argument);
}

TEST_CASE("scheme_r: identify-subtract on a one-component scene") {
  const Vector3 zs(1.5, 0.5, -1.0);
  const FarField f = peanut_scene_field(zs, 0.05, 11);
  SamplingMesh mesh{Vector3(-3, -3, -3), Vector3(3, 3, 3), 0.25};

  const SchemeRResult r = scheme_r(f, mini_library(), mesh, SchemeROptions{});
  REQUIRE(r.detections.size() == 1);
  CHECK(r.detections[0].entry->shape == ShapeId::Peanut);
  CHECK((r.detections[0].position - zs).norm() <= 0.25);

  // A correct subtraction strictly shrinks the data norm (here by far more
  // than the noise floor).
  REQUIRE(r.residual_norms.size() == 2);
  CHECK(r.residual_norms[1] < r.residual_norms[0]);
  CHECK(r.residual_norms[1] < 0.2 * r.residual_norms[0]);
}

TEST_CASE("scheme_r: subtracting the located entry leaves a noise-level residual") {
  const Vector3 zs(1.5, 0.5, -1.0);
  const FarField f = peanut_scene_field(zs, 0.05, 11);
  const FarField after =
      subtract_library_entry(f, mini_library().entries[0], {zs}, shear);
  CHECK(l2_norm(after) / l2_norm(f) < 0.1);

  // Empty position list is the identity.
  const FarField same = subtract_library_entry(f, mini_library().entries[0], {}, shear);
  CHECK((same.values - f.values).norm() == 0.0);
}

TEST_CASE("scheme_r: zero far field is rejected") {
  FarField z = peanut_scene_field(Vector3::Zero(), 0.0, 0);
  z.producer.reset();
  z.values.setZero();
  SamplingMesh mesh{Vector3(-1, -1, -1), Vector3(1, 1, 1), 0.5};
  CHECK_THROWS_AS(scheme_r(z, mini_library(), mesh, SchemeROptions{}),
                  std::invalid_argument);
}

TEST_CASE("scheme_r: library built with a different wave is rejected") {
  FarField f = peanut_scene_field(Vector3::Zero(), 0.0, 0);
  f.meta.wave.d = Vector3(1, 0, 0);
  f.meta.wave.dperp = Vector3(0, 0, 1);
  SamplingMesh mesh{Vector3(-1, -1, -1), Vector3(1, 1, 1), 0.5};
  CHECK_THROWS_AS(scheme_r(f, mini_library(), mesh, SchemeROptions{}),
                  std::invalid_argument);
}

TEST_CASE("scheme_m: extended plus small component, two-stage recovery") {
  // Data: an extended peanut (solver) plus a small ball (leading-order
  // model) far apart, with mild noise.
  const Vector3 z_ext(1.5, 0.5, -1.0);
  const Vector3 z_small(-2.0, -1.0, 2.0);
  FarField f = peanut_scene_field(z_ext, 0.0, 0);
  {
    const FoldySolution s = foldy_solve({z_small}, {ball_tensor()}, shear, material, 2.0);
    const FarField small = asymptotic_farfield(s, test_grid(), material, 2.0);
    f.producer.reset();
    f.values += small.values;
  }
  f = add_noise(f, 0.03, 21);

  SamplingMesh mesh{Vector3(-3, -3, -3), Vector3(3, 3, 3), 0.25};
  const SchemeMResult res = scheme_m(f, mini_library(), mesh);
  CHECK_FALSE(res.small_only_fallback);
  REQUIRE(res.extended.size() == 1);
  CHECK(res.extended[0].entry->shape == ShapeId::Peanut);
  CHECK((res.extended[0].position - z_ext).norm() <= 0.25);
  REQUIRE(res.small.size() == 1);
  CHECK((res.small[0].position - z_small).norm() <= 0.25);
}

TEST_CASE("scheme_m: small-only scene falls back to the point indicator") {
  FarField f = point_scatterer_field({Vector3(0.5, -0.25, 1.0)}, {ball_tensor()});
  f = add_noise(f, 0.03, 4);
  SamplingMesh mesh{Vector3(-2, -2, -2), Vector3(2, 2, 2), 0.25};
  const SchemeMResult res = scheme_m(f, mini_library(), mesh);
  CHECK(res.small_only_fallback);
  CHECK(res.extended.empty());
  REQUIRE(res.small.size() == 1);
  CHECK((res.small[0].position - Vector3(0.5, -0.25, 1.0)).norm() <= 0.25);
}

TEST_CASE("scheme_m: extended-only scene yields no small detections") {
  const Vector3 z_ext(1.5, 0.5, -1.0);
  FarField f = peanut_scene_field(z_ext, 0.03, 8);
  SamplingMesh mesh{Vector3(-3, -3, -3), Vector3(3, 3, 3), 0.25};
  const SchemeMResult res = scheme_m(f, mini_library(), mesh);
  REQUIRE(res.extended.size() == 1);
  CHECK(res.small.empty());
}
