#include "escat/library.hpp"

#include <algorithm>
#include <cmath>

namespace escat {

const LibraryEntry* ReferenceLibrary::find(int shape_index, int rotation_index,
                                           int scale_index) const {
  for (const auto& e : entries)
    if (e.shape_index == shape_index && e.rotation_index == rotation_index &&
        e.scale_index == scale_index)
      return &e;
  return nullptr;
}

namespace {

FarField combine_build_wave(const LibraryEntry& e, const IncidentWave& wave) {
  FarField f = e.sig_pressure;
  f.producer.reset();
  f.values = wave.alpha * e.sig_pressure.values + wave.beta * e.sig_shear.values;
  f.meta.wave = wave;
  return f;
}

}  // namespace

ReferenceLibrary build_library(const std::vector<ReferenceShape>& shapes,
                               const std::vector<Vector3>& rotation_net,
                               const std::vector<double>& scale_net, const Material& material,
                               const IncidentWave& wave,
                               std::shared_ptr<const SphereGrid> grid, const MfsConfig& config,
                               double distinct_tol) {
  if (shapes.empty() || scale_net.empty())
    throw std::invalid_argument("build_library: shapes and scales must be nonempty");
  wave.validate();

  ReferenceLibrary lib;
  lib.grid = grid;
  lib.material = material;
  lib.wave = wave;
  lib.shapes = shapes;
  lib.rotation_net = rotation_net.empty() ? std::vector<Vector3>{Vector3::Zero()} : rotation_net;
  lib.scale_net = scale_net;

  const IncidentWave wave_p(wave.d, wave.dperp, Complex(1.0), Complex(0.0), wave.omega);
  const IncidentWave wave_s(wave.d, wave.dperp, Complex(0.0), Complex(1.0), wave.omega);

  for (size_t si = 0; si < shapes.size(); ++si)
    for (size_t ri = 0; ri < lib.rotation_net.size(); ++ri)
      for (size_t ci = 0; ci < lib.scale_net.size(); ++ci) {
        Scene scene;
        scene.cls = SceneClass::Extended;
        Placement placement;
        placement.euler = lib.rotation_net[ri];
        placement.scale = lib.scale_net[ci];
        scene.components.push_back({shapes[si], placement});

        const auto solved = solve_mfs_waves(scene, {wave_p, wave_s}, material, config);

        LibraryEntry e;
        e.shape = shapes[si].id;
        e.shape_name = shapes[si].name;
        e.euler = placement.euler;
        e.scale = placement.scale;
        e.shape_index = static_cast<int>(si);
        e.rotation_index = static_cast<int>(ri);
        e.scale_index = static_cast<int>(ci);
        e.sig_pressure = farfield_from_mfs(solved[0], grid, material, wave.omega);
        e.sig_shear = farfield_from_mfs(solved[1], grid, material, wave.omega);
        e.sig_pressure.meta.provenance = "library";
        e.sig_shear.meta.provenance = "library";
        e.residual_pressure = solved[0].front().residual;
        e.residual_shear = solved[1].front().residual;
        e.norm_build_wave = l2_norm(combine_build_wave(e, wave));
        lib.entries.push_back(std::move(e));
      }

  std::stable_sort(lib.entries.begin(), lib.entries.end(),
                   [](const LibraryEntry& a, const LibraryEntry& b) {
                     return a.norm_build_wave > b.norm_build_wave;
                   });

  lib.audit.threshold = distinct_tol;
  lib.audit.min_gap = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < lib.entries.size(); ++a)
    for (size_t b = a + 1; b < lib.entries.size(); ++b) {
      const FarField fa = combine_build_wave(lib.entries[a], wave);
      const FarField fb = combine_build_wave(lib.entries[b], wave);
      double num = 0.0;
      for (int k = 0; k < fa.size(); ++k)
        num += fa.grid->weights[k] * (fa.values.col(k) - fb.values.col(k)).squaredNorm();
      const double gap = std::sqrt(num) /
                         std::max(lib.entries[a].norm_build_wave,
                                  lib.entries[b].norm_build_wave);
      if (gap < lib.audit.min_gap) {
        lib.audit.min_gap = gap;
        lib.audit.entry_a = static_cast<int>(a);
        lib.audit.entry_b = static_cast<int>(b);
      }
    }
  if (lib.entries.size() < 2) lib.audit.min_gap = std::numeric_limits<double>::infinity();
  lib.audit.pass = lib.audit.min_gap >= distinct_tol;
  return lib;
}

FarField entry_farfield_at(const LibraryEntry& entry, const Vector3& z,
                           const IncidentWave& wave) {
  FarField out = entry.sig_pressure;
  out.producer.reset();
  out.values.setZero();
  if (wave.alpha != Complex(0.0)) {
    const FarField tp = translate_farfield(entry.sig_pressure, z, Incidence::Pressure);
    out.values += wave.alpha * tp.values;
  }
  if (wave.beta != Complex(0.0)) {
    const FarField ts = translate_farfield(entry.sig_shear, z, Incidence::Shear);
    out.values += wave.beta * ts.values;
  }
  out.meta.wave = wave;
  out.meta.provenance = "library-entry";
  return out;
}

FarField subtract_library_entry(const FarField& f, const LibraryEntry& entry,
                                const std::vector<Vector3>& positions,
                                const IncidentWave& wave) {
  if (positions.empty()) return f;
  FarField out = f;
  out.producer.reset();
  for (const auto& z : positions) out.values -= entry_farfield_at(entry, z, wave).values;
  out.meta.provenance = f.meta.provenance + "+subtracted";
  return out;
}

ScaleCheckResult scale_farfield_check(const ReferenceShape& shape, const Placement& placement,
                                      double rho, const Material& material,
                                      const IncidentWave& wave,
                                      std::shared_ptr<const SphereGrid> grid,
                                      const MfsConfig& config) {
  if (!(rho > 0.0)) throw std::invalid_argument("scale_farfield_check: rho must be positive");

  ScaleCheckResult res;
  {
    Scene scaled;
    Placement p = placement;
    p.position = rho * placement.position;  // the dilation acts about the origin
    p.scale = rho * placement.scale;
    scaled.components.push_back({shape, p});
    const auto sol = solve_mfs(scaled, wave, material, config);
    res.direct = farfield_from_mfs(sol, grid, material, wave.omega);
  }
  {
    Scene base;
    base.components.push_back({shape, placement});
    IncidentWave scaled_wave = wave;
    scaled_wave.omega = rho * wave.omega;
    const auto sol = solve_mfs(base, scaled_wave, material, config);
    FarField f = farfield_from_mfs(sol, grid, material, scaled_wave.omega);
    f.values *= rho;
    f.producer.reset();
    f.meta.provenance = "mfs+rescaled";
    res.rescaled = std::move(f);
  }
  res.discrepancy = rel_l2_error(res.rescaled, res.direct);
  return res;
}

}  // namespace escat
