// escat/library.hpp -- the augmented reference library: simulated far-field
// signatures of shapes over rotation and scale nets, the far-field update
// used by the identify-subtract loop, and the scaling validation check.

#pragma once

#include <optional>

#include "escat/forward.hpp"

namespace escat {

struct LibraryEntry {
  ShapeId shape = ShapeId::Custom;
  std::string shape_name;
  Vector3 euler = Vector3::Zero();
  double scale = 1.0;
  int shape_index = 0;      // indices into the build nets
  int rotation_index = 0;
  int scale_index = 0;
  FarField sig_pressure;    // far field under alpha=1, beta=0
  FarField sig_shear;       // far field under alpha=0, beta=1
  double norm_build_wave = 0.0;  // sort key: signature norm under the build wave
  double residual_pressure = 0.0;
  double residual_shear = 0.0;
};

struct DistinctnessAudit {
  double min_gap = 0.0;     // minimum normalized L2 gap between two entries
  int entry_a = -1;
  int entry_b = -1;
  double threshold = 1e-3;
  bool pass = true;
};

struct ReferenceLibrary {
  std::shared_ptr<const SphereGrid> grid;
  Material material;
  IncidentWave wave;                 // the single detecting wave of the experiment
  std::vector<ReferenceShape> shapes;
  std::vector<Vector3> rotation_net;
  std::vector<double> scale_net;
  std::vector<LibraryEntry> entries;  // sorted by nonincreasing norm_build_wave
  DistinctnessAudit audit;

  const LibraryEntry* find(int shape_index, int rotation_index, int scale_index) const;
};

/// Simulates every (shape, rotation, scale) entry with the two pure
/// incidences, sorts entries by descending signature norm under `wave`, and
/// audits pairwise distinctness. An audit gap below `distinct_tol` is
/// recorded, not fatal.
ReferenceLibrary build_library(const std::vector<ReferenceShape>& shapes,
                               const std::vector<Vector3>& rotation_net,
                               const std::vector<double>& scale_net, const Material& material,
                               const IncidentWave& wave,
                               std::shared_ptr<const SphereGrid> grid, const MfsConfig& config,
                               double distinct_tol = 1e-3);

/// Far field of the entry translated to position z under `wave`, combining
/// both pure-incidence signatures with the four translation phase kernels.
FarField entry_farfield_at(const LibraryEntry& entry, const Vector3& z,
                           const IncidentWave& wave);

/// Identify-subtract update: removes alpha- and beta-weighted translated
/// copies of the entry at every located position from f. Empty positions
/// return f unchanged.
FarField subtract_library_entry(const FarField& f, const LibraryEntry& entry,
                                const std::vector<Vector3>& positions,
                                const IncidentWave& wave);

/// Validation of the frequency-scaling identity: solves the scaled body at
/// omega and the unit body at rho*omega, returns both fields (the second
/// multiplied by rho) and their relative L2 discrepancy.
struct ScaleCheckResult {
  FarField direct;
  FarField rescaled;
  double discrepancy = 0.0;
};

ScaleCheckResult scale_farfield_check(const ReferenceShape& shape, const Placement& placement,
                                      double rho, const Material& material,
                                      const IncidentWave& wave,
                                      std::shared_ptr<const SphereGrid> grid,
                                      const MfsConfig& config);

}  // namespace escat
