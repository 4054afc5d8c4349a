// escat/io.hpp -- self-describing text formats (far fields, libraries,
// indicator volumes, scenes), the flat key-value experiment config, and
// atomic file writes.

#pragma once

#include <optional>

#include "escat/asymptotic.hpp"
#include "escat/imaging.hpp"

namespace escat {

/// Parse failure carrying file and line: "path:line: message".
struct ParseError : std::runtime_error {
  ParseError(const std::string& path, int line, const std::string& msg)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + msg) {}
};

/// FNV-1a 64-bit digest, 16 hex characters; embedded in outputs for
/// provenance.
std::string fnv1a_digest(const std::string& bytes);

/// Write-temp-then-rename; partial files never appear under `path`.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Far-field files: header block then one record per node
// (polar azimuth weight re0 im0 re1 im1 re2 im2), 17 significant digits so
// round-trips are bit-faithful.
void write_farfield(const std::string& path, const FarField& f);
FarField read_farfield(const std::string& path);

// Reference library files: build parameters, the distinctness audit, both
// pure-incidence signatures per entry, and an optional polarization-tensor
// cache.
void write_library(const std::string& path, const ReferenceLibrary& lib,
                   const std::vector<PolarizationTensor>& polarization_cache = {});
struct LibraryFile {
  ReferenceLibrary library;
  std::vector<PolarizationTensor> polarization_cache;
};
LibraryFile read_library(const std::string& path);

// Indicator volumes: CSV (x,y,z,value, 9 significant digits, footer comment
// with the field maximum) and optionally a legacy structured-points volume.
void write_indicator_csv(const std::string& path, const IndicatorField& field,
                         const std::string& config_digest = "");
void write_indicator_vtk(const std::string& path, const IndicatorField& field);

// Scene files: a class line and one component line per entry.
void write_scene(const std::string& path, const Scene& scene);
Scene read_scene(const std::string& path);

/// Library build specification: shape, rotation and scale lines.
struct LibrarySpec {
  std::vector<ReferenceShape> shapes;
  std::vector<Vector3> rotations;
  std::vector<double> scales;
};
LibrarySpec read_libspec(const std::string& path);

// Detection lists.
void write_detections(const std::string& path, const std::vector<Detection>& detections,
                      const std::string& config_digest = "");

/// Flat key-value experiment configuration; unset keys keep their defaults.
struct ExperimentConfig {
  Material material;
  IncidentWave wave;
  int grid_polar = 24;
  int grid_azimuth = 48;
  MfsConfig mfs;
  SamplingMesh mesh{Vector3(-4, -4, -4), Vector3(4, 4, 4), 0.25};
  double noise_level = 0.0;
  std::uint64_t noise_seed = 0;
  std::string scheme = "s";  // s | r | m
  IndicatorMode mode = IndicatorMode::Full;
  double threshold = -1.0;        // <0: scheme default
  double min_separation = -1.0;   // <0: auto
  TuningSpec tuning;
  int foldy_surface = 800;        // polarization-tensor surface resolution
  std::string solver = "auto";    // auto | mfs | foldy
  std::optional<std::string> library_path;
  std::optional<std::string> scene_path;
  std::string digest;  // of the config file bytes
};

ExperimentConfig read_config(const std::string& path);

}  // namespace escat
