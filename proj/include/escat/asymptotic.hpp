// escat/asymptotic.hpp -- small-scatterer forward model: polarization
// tensors from the static first-kind integral equation, the Foldy multiple-
// scattering system, and its leading-order far field.

#pragma once

#include "escat/farfield.hpp"
#include "escat/geometry.hpp"

namespace escat {

/// C = integral over the boundary of the density Theta solving
///   int_{dD} Pi0(x,y) Theta(y) ds(y) = I,  x on dD.
/// Homogeneous of degree one in the scale (the Kelvin kernel is homogeneous
/// of degree -1); c * Identity for a ball.
struct PolarizationTensor {
  Matrix3c matrix;
  ShapeId shape = ShapeId::Custom;
  std::string shape_name;
  double scale = 1.0;
};

PolarizationTensor polarization_tensor(const ReferenceShape& shape, double scale,
                                       const Material& material, int n_surface);

/// Polarization tensor of a rotated/scaled reference shape (translation does
/// not enter; the kernel depends on x - y only).
PolarizationTensor polarization_tensor_placed(const ReferenceShape& shape,
                                              const Placement& placement,
                                              const Material& material, int n_surface);

/// Effective point charges Q_j coupled through the Kupradze tensor:
///   C_j^{-1} Q_j = -u_in(z_j) - sum_{m != j} Pi(z_j, z_m) Q_m,
/// solved as one dense 3l x 3l linear system.
struct FoldySolution {
  std::vector<Vector3> positions;
  Eigen::Matrix3Xcd charges;  // Q_j
  double residual = 0.0;      // relative residual of the direct solve
  Material material;
  IncidentWave wave;
};

FoldySolution foldy_solve(const std::vector<Vector3>& positions,
                          const std::vector<PolarizationTensor>& tensors,
                          const IncidentWave& wave, const Material& material, double omega);

/// Leading-order far field of the charges: the P-part is
/// pressure_prefactor * (xx^T) sum_j e^{-i kp x.z_j} Q_j and the S-part
/// shear_prefactor * (I - xx^T) sum_j e^{-i ks x.z_j} Q_j.
FarField asymptotic_farfield(const FoldySolution& solution,
                             std::shared_ptr<const SphereGrid> grid, const Material& material,
                             double omega);

}  // namespace escat
