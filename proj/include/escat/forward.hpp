// escat/forward.hpp -- forward solver for the exterior rigid-body Dirichlet
// Navier problem via the method of fundamental solutions, with far-field
// extraction from the point-source asymptotics.

#pragma once

#include <functional>

#include "escat/farfield.hpp"
#include "escat/geometry.hpp"

namespace escat {

struct MfsConfig {
  int n_sources = 400;       // requested source count per component
  int n_collocation = 1200;  // requested collocation count per component
  double auxiliary_scale = 0.7;  // shrink factor of the source surface toward the centroid
  double svd_cutoff = 1e-12;     // relative singular-value truncation
  double residual_tolerance = 1e-3;  // residual above this raises a quality warning

  void validate() const {
    if (n_collocation < 2 * n_sources)
      throw std::invalid_argument("MfsConfig: need n_collocation >= 2*n_sources");
    if (auxiliary_scale < 0.3 || auxiliary_scale > 0.95)
      throw std::invalid_argument("MfsConfig: auxiliary_scale must be in [0.3, 0.95]");
    if (!(svd_cutoff > 0.0) || svd_cutoff > 1e-2)
      throw std::invalid_argument("MfsConfig: svd_cutoff must be in (0, 1e-2]");
  }
};

struct MfsSolution {
  SceneComponent component;
  std::vector<Vector3> source_points;
  Eigen::Matrix3Xcd coefficients;  // one complex 3-vector per source
  double residual = 0.0;           // relative boundary L2 misfit, never clamped
  bool residual_warning = false;
  Material material;
  IncidentWave wave;
};

/// Solves the exterior Dirichlet problem u_sc = -u_in on every component
/// boundary. Sources of all components and collocation on all boundaries are
/// assembled into one least-squares system (truncated SVD), so inter-component
/// scattering is captured; the residual is reported per component boundary on
/// an independent finer sampling.
std::vector<MfsSolution> solve_mfs(const Scene& scene, const IncidentWave& wave,
                                   const Material& material, const MfsConfig& config);

/// Same geometry factorized once, solved for several incident waves.
std::vector<std::vector<MfsSolution>> solve_mfs_waves(const Scene& scene,
                                                      const std::vector<IncidentWave>& waves,
                                                      const Material& material,
                                                      const MfsConfig& config);

/// Fits the representation to prescribed boundary values instead of -u_in
/// (manufactured-solution testing). `omega` fixes the kernel frequency.
std::vector<MfsSolution> solve_mfs_boundary(
    const Scene& scene, const std::function<Vector3c(const Vector3&)>& boundary_values,
    const Material& material, double omega, const MfsConfig& config);

/// Far field of the solved representation on `grid`; rejects solutions whose
/// material/omega disagree with the arguments.
FarField farfield_from_mfs(const std::vector<MfsSolution>& solutions,
                           std::shared_ptr<const SphereGrid> grid, const Material& material,
                           double omega);

/// Relative L2 misfit of u_sc + u_in over an independent surface sampling of
/// the solution's own component with roughly n_test points.
double boundary_residual(const MfsSolution& solution, const IncidentWave& wave,
                         const Material& material, int n_test);

/// Multi-component variant: misfit on component `index` under the field of
/// all solutions.
double boundary_residual(const std::vector<MfsSolution>& solutions, int index,
                         const IncidentWave& wave, const Material& material, int n_test);

}  // namespace escat
