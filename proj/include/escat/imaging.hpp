// escat/imaging.hpp -- direct sampling reconstruction: indicator fields on a
// Cartesian mesh, local-maximum extraction, and the three schemes (small /
// extended / multiscale).

#pragma once

#include <optional>

#include "escat/library.hpp"

namespace escat {

struct SamplingMesh {
  Vector3 lo = Vector3::Zero();
  Vector3 hi = Vector3::Zero();
  double spacing = 0.0;

  void validate() const;
  std::array<int, 3> dims() const;
  std::size_t size() const;
  Vector3 point(int ix, int iy, int iz) const {
    return lo + spacing * Vector3(ix, iy, iz);
  }
  std::size_t index(int ix, int iy, int iz) const {
    const auto d = dims();
    return (static_cast<std::size_t>(ix) * d[1] + iy) * d[2] + iz;
  }
};

enum class IndicatorMode { P, S, Full };

std::string indicator_mode_name(IndicatorMode m);
IndicatorMode indicator_mode_from_name(const std::string& name);

struct IndicatorField {
  SamplingMesh mesh;
  std::vector<double> values;  // index = (ix*ny + iy)*nz + iz
  IndicatorMode mode = IndicatorMode::Full;
  std::string provenance;

  double max_value() const;
  Vector3 argmax() const;
};

struct EntryRef {
  int library_index = -1;
  ShapeId shape = ShapeId::Custom;
  std::string shape_name;
  Vector3 euler = Vector3::Zero();
  double scale = 1.0;
  int shape_index = 0, rotation_index = 0, scale_index = 0;
};

struct Detection {
  Vector3 position = Vector3::Zero();
  double peak_value = 0.0;
  std::optional<EntryRef> entry;
};

/// Point-sampling indicator for small scatterers. Test kernels per mode:
///   P:    (xx^T) e_j e^{-i kp x.z}
///   S:    (I - xx^T) e_j e^{-i ks x.z}
///   Full: their sum, correlated against the full field in one inner product.
/// Each value is sum_j |<data_tau, kernel_j>|^2 / (||data_tau||^2 ||kernel_j||^2);
/// the kernel norms are the exact constants 4pi/3, 8pi/3, 4pi, so values lie
/// in [0,1] (Bessel) and a single dominant scatterer peaks near 1 for P/S.
IndicatorField indicator_small(const FarField& f, const SamplingMesh& mesh, IndicatorMode mode);

/// Library-entry indicator for extended scatterers. Correlates the data
/// against the entry signature translated to z (both pure-incidence
/// signatures combined with the four translation phase kernels when the
/// detecting wave is mixed), normalized so that an exactly matching
/// translated copy yields W(z*) = 1.
IndicatorField indicator_extended(const FarField& f, const LibraryEntry& entry,
                                  const SamplingMesh& mesh, IndicatorMode mode,
                                  const IncidentWave& wave);

/// Greedy non-maximum suppression over strict local maxima (26-neighborhood)
/// with values >= threshold; each accepted peak suppresses a ball of radius
/// min_separation. `mask`, when nonempty, marks mesh points eligible as peaks.
std::vector<Detection> extract_local_maxima(const IndicatorField& field, double threshold,
                                            double min_separation,
                                            const std::vector<std::uint8_t>& mask = {});

struct SchemeSOptions {
  IndicatorMode mode = IndicatorMode::Full;
  double relative_threshold = 0.3;  // fraction of the field maximum
  double min_separation = 0.0;      // <= 0: half the shear wavelength
};

std::vector<Detection> scheme_s(const FarField& f, const SamplingMesh& mesh,
                                const SchemeSOptions& options = {});
std::vector<Detection> scheme_s(const FarField& f, const SamplingMesh& mesh,
                                const SchemeSOptions& options, IndicatorField* field_out);

struct SchemeROptions {
  IndicatorMode mode = IndicatorMode::Full;
  double w_threshold = 0.8;     // absolute: peaks with W approximately 1
  double min_separation = 0.0;  // <= 0: half the shear wavelength
  bool keep_fields = false;     // retain the per-entry indicator volumes
};

struct SchemeRResult {
  std::vector<Detection> detections;
  std::vector<double> residual_norms;  // data norm after each subtraction
  std::vector<std::string> warnings;
  std::vector<IndicatorField> fields;  // per entry, when keep_fields is set
};

SchemeRResult scheme_r(const FarField& f, const ReferenceLibrary& library,
                       const SamplingMesh& mesh, const SchemeROptions& options = {});

/// Local tune-up neighborhoods for the multiscale scheme: position offsets
/// around each stage-1 estimate plus rotation/scale net neighbors.
struct TuningSpec {
  double pos_radius = -1.0;   // < 0: half the mesh spacing
  double pos_step = -1.0;     // < 0: quarter of the mesh spacing
  bool axis_offsets_only = true;  // axis-aligned offsets instead of the full lattice
  int rotation_span = 1;      // net steps each side
  int scale_span = 1;
  double vote_fraction = 0.5;     // bins need more than this fraction of tune-ups
  double vote_floor = 0.1;        // and a mean peak at least this high
  int max_tuneups = 4096;
};

struct SchemeMResult {
  std::vector<Detection> extended;  // stage-1 detections after local tuning
  std::vector<Detection> small;
  bool small_only_fallback = false;
  int n_tuneups = 0;
  std::vector<std::string> warnings;
};

SchemeMResult scheme_m(const FarField& f, const ReferenceLibrary& library,
                       const SamplingMesh& mesh, const SchemeROptions& r_options = {},
                       const SchemeSOptions& s_options = {}, const TuningSpec& tuning = {});

/// Energy fractions ||component_tau||^2 / ||total_tau||^2 for tau = P, S, full.
std::array<double, 3> k_diagnostics(const FarField& component, const FarField& total);

}  // namespace escat
